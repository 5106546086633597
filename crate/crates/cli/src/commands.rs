use std::fmt::Write;

use cbpv_quant_core::equiv::{
    check_simulation_bounded, compare, compare_both, congruence_spot_check, describe, enumerate_basic_formulas,
    find_distinguishing_formula, law_modality, law_suite, relator_laws, ClauseOutcome, CongruenceParams, LawParams,
    LawResult, Pools, Relation, SimulationBounds, Verdict,
};
use cbpv_quant_core::machine::{eval_tree, render_leaf, render_tree};
use cbpv_quant_core::{ComType, Term, Type};
use serde_json::json;

use crate::json::{interval, show_interval, tree};
use crate::{CliError, Inputs, Outcome, RunConfig, Verb, EXIT_FOUND, EXIT_INCONCLUSIVE, EXIT_OK};

/// Modalities checked by `laws` when none are named.
pub const DEFAULT_LAW_MODALITIES: [&str; 10] = ["E", "Eopt", "Epes", "C", "Copt", "Cpes", "G", "Gopt", "Gpes", "EG"];

fn err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

pub(crate) fn dispatch(verb: &Verb, cfg: &RunConfig, inputs: &mut Inputs<'_>) -> Result<Outcome, CliError> {
    match verb {
        Verb::Typecheck { program } => typecheck(cfg, inputs, program),
        Verb::Eval { program } => eval(cfg, inputs, program),
        Verb::Sat { program, formula, exact, cap } => sat(cfg, inputs, program, formula, *exact, *cap),
        Verb::Compare { left, right, both, .. } => run_compare(cfg, inputs, left, right, *both),
        Verb::Distinguish { left, right, .. } => distinguish(cfg, inputs, left, right),
        Verb::Simulate { left, right, .. } => simulate(cfg, inputs, left, right),
        Verb::Laws { modality, relator, congruence, .. } => laws(cfg, modality, *relator, *congruence),
    }
}

fn typecheck(cfg: &RunConfig, inputs: &mut Inputs<'_>, path: &str) -> Result<Outcome, CliError> {
    let (_, ty) = inputs.program(path, cfg.logic.signature())?;
    Ok(Outcome {
        text: format!("{}: {}\n", path, ty),
        json: json!({ "verb": "typecheck", "program": path, "type": ty.to_string() }),
        code: EXIT_OK,
    })
}

fn eval(cfg: &RunConfig, inputs: &mut Inputs<'_>, path: &str) -> Result<Outcome, CliError> {
    let (m, _) = inputs.program(path, cfg.logic.signature())?;
    let t = eval_tree(&m, cfg.fuel, cfg.logic.width());
    Ok(Outcome {
        text: render_tree(&t, &render_leaf),
        json: json!({ "verb": "eval", "program": path, "fuel": cfg.fuel, "tree": tree(&t) }),
        code: EXIT_OK,
    })
}

fn sat(
    cfg: &RunConfig,
    inputs: &mut Inputs<'_>,
    path: &str,
    formula: &str,
    exact: bool,
    cap: Option<u64>,
) -> Result<Outcome, CliError> {
    let logic = &cfg.logic;
    let (m, ty) = inputs.program(path, logic.signature())?;
    let text = inputs.formula(formula)?;
    let f = logic.parse_formula(text.trim()).map_err(|e| CliError::Parse(formula.into(), e.to_string()))?;
    let term = Term::Com(m);
    let ty = Type::Com(ty);
    let cap = cap.unwrap_or(cfg.fuel.saturating_mul(16)).max(cfg.fuel);
    let mut fuel = cfg.fuel;
    let res = loop {
        let r = logic.satisfies_at(&term, &ty, &f, fuel).map_err(err)?;
        if !exact || r.interval.exact || fuel.saturating_mul(2) > cap {
            break r;
        }
        fuel *= 2;
    };
    let sp = logic.space();
    let iv = &res.interval;
    let fragment = if res.positive_fragment { "positive" } else { "general" };
    let mut out = String::new();
    match iv.value() {
        Some(a) => writeln!(out, "value = {}", sp.show(a)).unwrap(),
        None => writeln!(out, "lo = {}, hi = {}", sp.show(&iv.lo), sp.show(&iv.hi)).unwrap(),
    }
    writeln!(out, "fragment = {}", fragment).unwrap();
    if exact || !iv.exact {
        writeln!(out, "fuel = {}", res.fuel_used).unwrap();
    }
    Ok(Outcome {
        text: out,
        json: json!({
            "verb": "sat",
            "program": path,
            "formula": logic.show(&f),
            "space": sp.to_string(),
            "interval": interval(sp, iv),
            "fragment": fragment,
            "fuel": res.fuel_used,
        }),
        code: if iv.exact { EXIT_OK } else { EXIT_INCONCLUSIVE },
    })
}

struct Pair {
    left: Term,
    right: Term,
    ty: ComType,
    pools: Pools,
}

fn pair(cfg: &RunConfig, inputs: &mut Inputs<'_>, left: &str, right: &str) -> Result<Pair, CliError> {
    let sig = cfg.logic.signature();
    let (m, a) = inputs.program(left, sig)?;
    let (n, b) = inputs.program(right, sig)?;
    if a != b {
        return Err(CliError::Run(format!("{} has type {} but {} has type {}", left, a, right, b)));
    }
    let (left, right) = (Term::Com(m), Term::Com(n));
    let mut pools = Pools::from_terms(&cfg.logic, &[&left, &right]);
    pools.numerals.extend(&cfg.numerals);
    pools.numerals.sort_unstable();
    pools.numerals.dedup();
    Ok(Pair { left, right, ty: a, pools })
}

fn run_compare(cfg: &RunConfig, inputs: &mut Inputs<'_>, left: &str, right: &str, both: bool) -> Result<Outcome, CliError> {
    let logic = &cfg.logic;
    let p = pair(cfg, inputs, left, right)?;
    let ty = Type::Com(p.ty.clone());
    let suite = enumerate_basic_formulas(logic, &ty, cfg.suite_size, &p.pools).map_err(err)?;
    let v = if both {
        compare_both(logic, &p.left, &p.right, &suite, cfg.fuel)
    } else {
        compare(logic, &p.left, &p.right, &suite, cfg.fuel)
    }
    .map_err(err)?;
    let sp = logic.space();
    let mut doc = json!({ "verb": "compare", "left": left, "right": right, "type": ty.to_string(), "both": both });
    match &v {
        Verdict::Distinguished { formula, left, right, direction } => {
            doc["verdict"] = "distinguished".into();
            doc["formula"] = logic.show(formula).into();
            doc["direction"] = direction.to_string().into();
            doc["left_value"] = interval(sp, left);
            doc["right_value"] = interval(sp, right);
        }
        Verdict::NoDistinctionFound(b) | Verdict::RefinesUpTo(b) => {
            doc["verdict"] =
                if matches!(v, Verdict::RefinesUpTo(_)) { "refines-up-to" } else { "no-distinction-found" }.into();
            doc["bounds"] = json!({
                "suite_size": b.suite_size,
                "fuel": b.fuel,
                "formulas": b.formulas,
                "numerals": b.numerals,
            });
        }
    }
    Ok(Outcome {
        text: format!("{}\n", describe(logic, &v)),
        json: doc,
        code: if v.is_distinguished() { EXIT_FOUND } else { EXIT_OK },
    })
}

fn distinguish(cfg: &RunConfig, inputs: &mut Inputs<'_>, left: &str, right: &str) -> Result<Outcome, CliError> {
    let logic = &cfg.logic;
    let p = pair(cfg, inputs, left, right)?;
    let ty = Type::Com(p.ty.clone());
    let w = find_distinguishing_formula(logic, &p.left, &p.right, &ty, cfg.max_size, &[cfg.fuel], &p.pools)
        .map_err(err)?;
    let sp = logic.space();
    let mut doc = json!({ "verb": "distinguish", "left": left, "right": right, "max_size": cfg.max_size, "fuel": cfg.fuel });
    Ok(match w {
        Some(w) => {
            doc["formula"] = logic.show(&w.formula).into();
            doc["size"] = w.size.into();
            doc["direction"] = w.direction.to_string().into();
            doc["left_value"] = interval(sp, &w.left);
            doc["right_value"] = interval(sp, &w.right);
            Outcome {
                text: format!(
                    "distinguished by {} (size {}, fuel {}): left {}, right {} ({})\n",
                    logic.show(&w.formula),
                    w.size,
                    w.fuel,
                    show_interval(sp, &w.left),
                    show_interval(sp, &w.right),
                    w.direction
                ),
                json: doc,
                code: EXIT_FOUND,
            }
        }
        None => {
            doc["formula"] = serde_json::Value::Null;
            Outcome {
                text: format!(
                    "no distinction found up to size {} at fuel {}, numerals {:?}\n",
                    cfg.max_size, cfg.fuel, p.pools.numerals
                ),
                json: doc,
                code: EXIT_OK,
            }
        }
    })
}

fn simulate(cfg: &RunConfig, inputs: &mut Inputs<'_>, left: &str, right: &str) -> Result<Outcome, CliError> {
    let logic = &cfg.logic;
    let p = pair(cfg, inputs, left, right)?;
    let rel = Relation::typed(logic.signature(), vec![(p.left.clone(), p.right.clone(), Type::Com(p.ty.clone()))])
        .map_err(err)?;
    let bounds = SimulationBounds { depth: cfg.depth, fuel: cfg.fuel, seed: cfg.seed };
    let report = check_simulation_bounded(logic, &rel, &p.pools, &bounds).map_err(err)?;
    let mut text = String::new();
    let mut entries = Vec::new();
    let mut inconclusive = false;
    for e in &report.entries {
        let (kind, detail) = match &e.outcome {
            ClauseOutcome::Holds => ("holds", String::new()),
            ClauseOutcome::Refuted(why) => ("refuted", why.clone()),
            ClauseOutcome::NoCounterexample { exact } => {
                inconclusive |= !exact;
                ("no-counterexample", if *exact { "exact".into() } else { "inexact".into() })
            }
            ClauseOutcome::Skipped(why) => {
                inconclusive = true;
                ("skipped", why.clone())
            }
        };
        write!(text, "clause {} at {}: {} vs {}: {}", e.clause, e.ty, e.left, e.right, kind).unwrap();
        if !detail.is_empty() {
            write!(text, " ({})", detail).unwrap();
        }
        text.push('\n');
        entries.push(json!({
            "clause": e.clause,
            "type": e.ty,
            "left": e.left,
            "right": e.right,
            "outcome": kind,
            "detail": detail,
        }));
    }
    let verdict = if report.refuted {
        "refuted"
    } else if inconclusive {
        "inconclusive"
    } else {
        "no-counterexample"
    };
    writeln!(text, "{}; {}", verdict, report.pool_note).unwrap();
    Ok(Outcome {
        text,
        json: json!({
            "verb": "simulate",
            "left": left,
            "right": right,
            "depth": cfg.depth,
            "fuel": cfg.fuel,
            "verdict": verdict,
            "entries": entries,
            "note": report.pool_note,
        }),
        code: if report.refuted {
            EXIT_FOUND
        } else if inconclusive {
            EXIT_INCONCLUSIVE
        } else {
            EXIT_OK
        },
    })
}

fn laws(cfg: &RunConfig, names: &[String], relator: Option<usize>, congruence: Option<usize>) -> Result<Outcome, CliError> {
    let store = cfg.store();
    let names: Vec<String> = if names.is_empty() {
        DEFAULT_LAW_MODALITIES.iter().map(|s| s.to_string()).collect()
    } else {
        names.to_vec()
    };
    let mut qs = Vec::new();
    for n in &names {
        qs.push(law_modality(n, &store).ok_or_else(|| CliError::Run(format!("unknown modality `{}`", n)))?);
    }
    let params = LawParams { samples: cfg.samples, depth: cfg.depth, seed: cfg.seed, tolerance: cfg.tolerance };
    let mut results = law_suite(&qs, &params).map_err(err)?;
    if let Some(n) = relator {
        results.extend(relator_laws(n.min(3), cfg.seed));
    }
    if let Some(trials) = congruence {
        let p = CongruenceParams { trials, seed: cfg.seed, ..CongruenceParams::default() };
        results.push(congruence_spot_check(&cfg.logic, &p).map_err(err)?);
    }
    let mut text = String::new();
    for r in &results {
        write!(text, "{} {}: {} samples, {} failures", r.law, r.modality, r.samples, r.failures).unwrap();
        if let Some(c) = &r.counterexample {
            write!(text, "\n  counterexample:\n{}", indent(c)).unwrap();
        }
        text.push('\n');
    }
    let failures: usize = results.iter().map(|r| r.failures).sum();
    writeln!(text, "{} failures in {} checks", failures, results.len()).unwrap();
    Ok(Outcome {
        text,
        json: json!({
            "verb": "laws",
            "seed": cfg.seed,
            "samples": cfg.samples,
            "depth": cfg.depth,
            "results": results.iter().map(law_json).collect::<Vec<_>>(),
            "failures": failures,
        }),
        code: if failures > 0 { EXIT_FOUND } else { EXIT_OK },
    })
}

fn law_json(r: &LawResult) -> serde_json::Value {
    json!({
        "law": r.law,
        "modality": r.modality,
        "samples": r.samples,
        "failures": r.failures,
        "counterexample": r.counterexample,
    })
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("    {}", l)).collect::<Vec<_>>().join("\n")
}
