use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::*;
use crate::effects::EffectSignature;
use crate::lang::{nat, parse_comp, parse_type, parse_value, ComType, Name, Term, Type, ValType};
use crate::logic::{space_for, Formula, Logic};
use crate::machine::{eta, Tree};
use crate::quant::{Interval, ModalitySpec, StoreConfig, Truth, TruthSpace};

fn logic(spec: &str) -> Logic {
    let mut sig = EffectSignature::from_components(spec).unwrap();
    if sig.locations.is_some() {
        sig = sig.with_store(alloc::vec![Name::new("l"), Name::new("r")]).unwrap();
    }
    let space = space_for(&sig, 2, false).unwrap();
    Logic::standard(&sig, space, &BTreeMap::new(), 4).unwrap()
}

fn com(l: &Logic, s: &str) -> Term {
    Term::Com(parse_comp(s, Some(l.signature())).unwrap())
}

fn f_nat() -> Type {
    Type::Com(ComType::producer(nat()))
}

fn real(x: f64) -> Truth {
    Truth::Real(x)
}

const COST_M: &str = "cost[1](return 7)";
const COST_N: &str = "nor(return 7, cost[3](return 7))";

#[test]
fn numeral_formulas_only_at_nat() {
    let l = logic("prob");
    let mut pools = Pools::from_terms(&l, &[]);
    pools.numerals = alloc::vec![0, 1, 7];
    let suite = enumerate_basic_formulas(&l, &Type::Val(nat()), 1, &pools).unwrap();
    assert_eq!(suite.formulas, alloc::vec![Formula::NatEq(0), Formula::NatEq(1), Formula::NatEq(7)]);
    let deeper = enumerate_basic_formulas(&l, &Type::Val(nat()), 5, &pools).unwrap();
    assert_eq!(deeper.formulas.len(), 3);
}

#[test]
fn cost_suite_contains_both_resolutions() {
    let l = logic("cost+nondet");
    let (m, n) = (com(&l, COST_M), com(&l, COST_N));
    let pools = Pools::from_terms(&l, &[&m, &n]);
    assert_eq!(pools.numerals, alloc::vec![0, 1, 7]);
    let suite = enumerate_basic_formulas(&l, &f_nat(), 2, &pools).unwrap();
    let shown: Vec<_> = suite.formulas.iter().map(|f| l.show(f)).collect();
    assert!(shown.contains(&"Copt<{7}>".to_string()));
    assert!(shown.contains(&"Cpes<{7}>".to_string()));
    for f in &suite.formulas {
        l.check(f, &f_nat()).unwrap();
    }
    let again = enumerate_basic_formulas(&l, &f_nat(), 2, &pools).unwrap();
    assert_eq!(suite, again);
}

#[test]
fn thunk_suites_are_thunk_rooted() {
    let l = logic("prob");
    let ty = parse_type("U (F nat)").unwrap();
    let pools = Pools::from_terms(&l, &[]);
    let suite = enumerate_basic_formulas(&l, &ty, 5, &pools).unwrap();
    assert!(!suite.formulas.is_empty());
    assert!(suite.formulas.iter().all(|f| matches!(f, Formula::Thunk(_))));
    assert!(suite.formulas.iter().all(|f| f.size() <= 5));
}

#[test]
fn arrow_needs_arguments() {
    let l = logic("prob");
    let ty = parse_type("U (F nat) -> F nat").unwrap();
    let pools = Pools::from_terms(&l, &[]);
    assert!(matches!(enumerate_basic_formulas(&l, &ty, 3, &pools), Err(SuiteError::EmptyArgumentPool(_))));
    let pools = pools.with_args(
        ValType::thunk(ComType::producer(nat())),
        alloc::vec![parse_value("thunk return 0", None).unwrap()],
    );
    assert!(!enumerate_basic_formulas(&l, &ty, 3, &pools).unwrap().formulas.is_empty());
}

/// Costs are ordered in reverse: `a ⊑ b` iff `a ≥ b`. So the cheaper run
/// is the better one, and `1 ⋢ 3` while `0 ⋢ 1`.
#[test]
fn cost_pair_under_reversed_order() {
    let l = logic("cost+nondet");
    let (m, n) = (com(&l, COST_M), com(&l, COST_N));
    let pools = Pools::from_terms(&l, &[&m, &n]);
    let suite = enumerate_basic_formulas(&l, &f_nat(), 3, &pools).unwrap();
    let oracle = |cost: &[f64], opt: bool| {
        if opt {
            cost.iter().cloned().fold(f64::INFINITY, f64::min)
        } else {
            cost.iter().cloned().fold(0.0, f64::max)
        }
    };
    match compare(&l, &m, &n, &suite, 8).unwrap() {
        Verdict::Distinguished { formula, left, right, direction } => {
            assert_eq!(l.show(&formula), "Cpes<{7}>");
            assert_eq!(left, Interval::exact(real(oracle(&[1.0], false))));
            assert_eq!(right, Interval::exact(real(oracle(&[0.0, 3.0], false))));
            assert_eq!(direction, Direction::LeftNotBelowRight);
        }
        v => panic!("{:?}", v),
    }
    match compare(&l, &n, &m, &suite, 8).unwrap() {
        Verdict::Distinguished { formula, left, right, .. } => {
            assert_eq!(l.show(&formula), "Copt<{7}>");
            assert_eq!(left, Interval::exact(real(oracle(&[0.0, 3.0], true))));
            assert_eq!(right, Interval::exact(real(oracle(&[1.0], true))));
        }
        v => panic!("{:?}", v),
    }
    assert!(matches!(compare(&l, &m, &m, &suite, 8).unwrap(), Verdict::RefinesUpTo(_)));
}

#[test]
fn nor_of_both_matches_the_cheap_and_dear_run() {
    let l = logic("cost+nondet");
    let d = com(&l, &alloc::format!("nor({}, {})", COST_M, COST_N));
    let n = com(&l, COST_N);
    let pools = Pools::from_terms(&l, &[&d, &n]);
    let suite = enumerate_basic_formulas(&l, &f_nat(), 4, &pools).unwrap();
    assert!(suite.formulas.len() > 10);
    assert!(matches!(compare_both(&l, &d, &n, &suite, 16).unwrap(), Verdict::NoDistinctionFound(_)));
    assert!(matches!(compare_both(&l, &n, &d, &suite, 16).unwrap(), Verdict::NoDistinctionFound(_)));
}

#[test]
fn smallest_witness_for_the_cost_pair() {
    let l = logic("cost+nondet");
    let (m, n) = (com(&l, COST_M), com(&l, COST_N));
    let pools = Pools::from_terms(&l, &[&m, &n]);
    let w = find_distinguishing_formula(&l, &m, &n, &f_nat(), 4, &[8], &pools).unwrap().unwrap();
    assert_eq!(l.show(&w.formula), "Copt<{7}>");
    assert_eq!(w.size, 2);
    assert_eq!((w.left.lo.clone(), w.right.lo.clone()), (real(1.0), real(0.0)));
    assert_eq!(w.direction, Direction::RightNotBelowLeft);
    assert_eq!(find_distinguishing_formula(&l, &m, &m, &f_nat(), 4, &[8], &pools).unwrap(), None);
}

#[test]
fn cbn_cbv_witness() {
    let l = logic("prob");
    let m1 = com(&l, "por(return thunk (\\x:nat. return 0), return thunk (\\x:nat. return 1))");
    let m2 = com(&l, "return thunk (\\x:nat. por(return 0, return 1))");
    let ty = parse_type("F (U (nat -> F nat))").unwrap();
    let pools = Pools::from_terms(&l, &[&m1, &m2]);
    let w = find_distinguishing_formula(&l, &m1, &m2, &ty, 10, &[10], &pools).unwrap().unwrap();
    // The search finds the conjunction one level further in than the
    // hand-built formula: E<[U](0 . and{E<{0}>, E<{1}>})>. Each function
    // returning a fixed numeral gives min(1, 0) = 0; the coin gives
    // min(1/2, 1/2) = 1/2.
    assert!(matches!(w.formula, Formula::Modal(..)));
    assert!(l.show(&w.formula).contains("and{"), "{}", l.show(&w.formula));
    assert_eq!(w.left, Interval::exact(real(0.0)));
    assert_eq!(w.right, Interval::exact(real(0.5)));
}

#[test]
fn type_mismatch_is_reported() {
    let l = logic("prob");
    let m = com(&l, "return 0");
    let n = com(&l, "return thunk return 0");
    let pools = Pools::from_terms(&l, &[&m, &n]);
    let suite = enumerate_basic_formulas(&l, &f_nat(), 2, &pools).unwrap();
    assert!(matches!(compare(&l, &m, &n, &suite, 4), Err(SuiteError::TypeMismatch(..))));
}

#[test]
fn distinguished_is_final() {
    let l = logic("prob");
    let m = com(&l, "fix f : U (F nat). por(return 0, force f)");
    let n = com(&l, "por(return 1, return 0)");
    let pools = Pools::from_terms(&l, &[&m, &n]);
    let mut seen = Vec::new();
    for size in 2..5 {
        for fuel in [2, 4, 8, 16] {
            let suite = enumerate_basic_formulas(&l, &f_nat(), size, &pools).unwrap();
            seen.push((size, fuel, compare_both(&l, &m, &n, &suite, fuel).unwrap().is_distinguished()));
        }
    }
    assert!(seen.iter().any(|s| s.2));
    for (s, f, d) in &seen {
        for (s2, f2, d2) in &seen {
            if *d && s2 >= s && f2 >= f {
                assert!(d2, "size {} fuel {} lost at size {} fuel {}", s, f, s2, f2);
            }
        }
    }
}

#[test]
fn forcing_thunks_agrees_with_the_thunk_type() {
    let l = logic("prob+nondet");
    let progs = ["por(return 0, return 1)", "nor(return 0, return 1)", "return 1", "por(return 1, return 1)"];
    let ty_u = parse_type("U (F nat)").unwrap();
    for a in progs {
        for b in progs {
            let (m, n) = (com(&l, a), com(&l, b));
            let v = Term::Val(parse_value(&alloc::format!("thunk {}", a), Some(l.signature())).unwrap());
            let w = Term::Val(parse_value(&alloc::format!("thunk {}", b), Some(l.signature())).unwrap());
            let pools = Pools::from_terms(&l, &[&m, &n]);
            let at_c = enumerate_basic_formulas(&l, &f_nat(), 4, &pools).unwrap();
            let at_u = enumerate_basic_formulas(&l, &ty_u, 5, &pools).unwrap();
            let x = compare(&l, &m, &n, &at_c, 8).unwrap().is_distinguished();
            let y = compare(&l, &v, &w, &at_u, 8).unwrap().is_distinguished();
            assert_eq!(x, y, "{} vs {}", a, b);
        }
    }
}

#[test]
fn right_set_examples() {
    let sp = TruthSpace::Unit;
    let h = |x: &u8| real(if *x == 0 { 0.25 } else { 0.75 });
    let id = [(0u8, 0u8), (1, 1)];
    assert_eq!(right_set(&sp, &id, &h, &0), real(0.25));
    assert_eq!(right_set(&sp, &id, &h, &1), real(0.75));
    assert_eq!(right_set::<u8, u8>(&sp, &[], &h, &0), real(0.0));
    assert_eq!(right_set(&sp, &[(0u8, 9u8), (1, 9)], &h, &9), real(0.75));
}

#[test]
fn right_set_is_monotone() {
    use rand::{Rng, SeedableRng};
    let sp = TruthSpace::Unit;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let r: Vec<(u8, u8)> = (0..4).map(|_| (rng.gen_range(0..3), rng.gen_range(0..3))).collect();
        let mut s = r.clone();
        s.push((rng.gen_range(0..3), rng.gen_range(0..3)));
        let h1: Vec<f64> = (0..3).map(|_| rng.gen_range(0..=4) as f64 / 4.0).collect();
        let h2: Vec<f64> = h1.iter().map(|x| (x + rng.gen_range(0..=2) as f64 / 4.0).min(1.0)).collect();
        for y in 0..3u8 {
            let a = right_set(&sp, &r, &|x: &u8| real(h1[*x as usize]), &y);
            let b = right_set(&sp, &s, &|x: &u8| real(h2[*x as usize]), &y);
            assert!(sp.leq(&a, &b));
        }
    }
}

fn bool_family(n: usize) -> ValuationFamily<usize> {
    ValuationFamily::all_boolean((0..n).collect()).unwrap()
}

#[test]
fn relator_on_leaves() {
    let qs = [ModalitySpec::may(), ModalitySpec::must()];
    let fam = bool_family(2);
    let (x, y) = (eta(0usize), eta(1usize));
    assert_eq!(relator_check(&qs, &x, &y, &[(0, 1)], &fam).unwrap(), RelatorOutcome::Holds);
    assert!(matches!(relator_check(&qs, &x, &y, &[(0, 0)], &fam).unwrap(), RelatorOutcome::Refuted { .. }));
    assert!(matches!(relator_check(&qs, &x, &y, &[], &fam).unwrap(), RelatorOutcome::Refuted { .. }));
    let short = ValuationFamily::all_boolean(alloc::vec![1usize]).unwrap();
    assert_eq!(relator_check(&qs, &x, &y, &[(0, 1)], &short), Err(RelatorError::Coverage));
}

#[test]
fn relator_is_reflexive_on_identity() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let store = Arc::new(StoreConfig::new(alloc::vec![Name::new("l"), Name::new("r")], 2).unwrap());
    let qs = [ModalitySpec::expectation(), ModalitySpec::global(store.clone())];
    for q in &qs {
        for _ in 0..50 {
            let t: Tree<usize> = random_tree_with(q, 3, 1, &mut rng, &mut |r| rand::Rng::gen_range(r, 0..3));
            let sp = q.space();
            let mut fam = ValuationFamily::indicators(sp, (0..3).collect());
            fam.extend(ValuationFamily::random_grid(sp, (0..3).collect(), 16, 9));
            let id = [(0, 0), (1, 1), (2, 2)];
            let out = relator_check(core::slice::from_ref(q), &t, &t, &id, &fam).unwrap();
            assert!(!matches!(out, RelatorOutcome::Refuted { .. }));
        }
    }
}

fn bounds(depth: usize) -> SimulationBounds {
    SimulationBounds { depth, fuel: 8, seed: 1 }
}

#[test]
fn simulation_on_returns() {
    let l = logic("prob");
    let rel = Relation::new(l.signature(), alloc::vec![(com(&l, "return 7"), com(&l, "return 7"))]).unwrap();
    let pools = Pools::from_terms(&l, &[]);
    let r = check_simulation_bounded(&l, &rel, &pools, &bounds(3)).unwrap();
    assert!(!r.refuted);
    let top = r.entries.iter().find(|e| e.clause == 7).unwrap();
    assert_eq!(top.outcome, ClauseOutcome::NoCounterexample { exact: true });

    let rel = Relation::new(l.signature(), alloc::vec![(com(&l, "return 7"), com(&l, "return 8"))]).unwrap();
    let r = check_simulation_bounded(&l, &rel, &pools, &bounds(3)).unwrap();
    assert!(r.refuted);
    assert!(r.entries.iter().any(|e| e.clause == 7 && matches!(e.outcome, ClauseOutcome::Refuted(_))));
}

#[test]
fn simulation_in_the_boolean_space_can_hold() {
    let l = logic("nondet");
    let rel = Relation::new(l.signature(), alloc::vec![(com(&l, "return 1"), com(&l, "nor(return 1, return 1)"))]).unwrap();
    let pools = Pools::from_terms(&l, &[]);
    let r = check_simulation_bounded(&l, &rel, &pools, &bounds(2)).unwrap();
    assert!(!r.refuted);
    assert!(r.entries.iter().any(|e| e.clause == 7 && e.outcome == ClauseOutcome::Holds));
}

#[test]
fn simulation_refutes_the_cost_pair() {
    let l = logic("cost+nondet");
    let rel = Relation::new(l.signature(), alloc::vec![(com(&l, COST_M), com(&l, COST_N))]).unwrap();
    let pools = Pools::from_terms(&l, &[]);
    let r = check_simulation_bounded(&l, &rel, &pools, &bounds(2)).unwrap();
    assert!(r.refuted);
    let e = r.entries.iter().find(|e| e.clause == 7).unwrap();
    let ClauseOutcome::Refuted(why) = &e.outcome else { panic!() };
    assert!(why.starts_with("Cpes"), "{}", why);
}

#[test]
fn simulation_dissects_functions_and_thunks() {
    let l = logic("prob");
    let ty = parse_type("U (nat -> F nat)").unwrap();
    let v = Term::Val(parse_value("thunk \\x:nat. return x", None).unwrap());
    let w = Term::Val(parse_value("thunk \\x:nat. case x of {zero -> return 0 | succ y -> return succ y}", None).unwrap());
    let u = Term::Val(parse_value("thunk \\x:nat. return 0", None).unwrap());
    let pools = Pools::from_terms(&l, &[]);
    let ok = Relation::typed(l.signature(), alloc::vec![(v.clone(), w, ty.clone())]).unwrap();
    let r = check_simulation_bounded(&l, &ok, &pools, &bounds(4)).unwrap();
    assert!(!r.refuted, "{:?}", r.entries);
    assert!(r.entries.iter().any(|e| e.clause == 5));
    let bad = Relation::typed(l.signature(), alloc::vec![(v, u, ty)]).unwrap();
    assert!(check_simulation_bounded(&l, &bad, &pools, &bounds(4)).unwrap().refuted);
}

#[test]
fn laws_hold_on_small_samples() {
    let store = Arc::new(StoreConfig::new(alloc::vec![Name::new("l"), Name::new("r")], 2).unwrap());
    let qs: Vec<ModalitySpec> =
        ["E", "Eopt", "Epes", "C", "Copt", "Cpes", "G", "Gopt", "Gpes", "EG", "May", "Must"]
            .iter()
            .map(|n| law_modality(n, &store).unwrap())
            .collect();
    let params = LawParams { samples: 60, depth: 4, seed: 2, tolerance: 1e-9 };
    for r in law_suite(&qs, &params).unwrap() {
        assert_eq!(r.failures, 0, "{} {}: {:?}", r.law, r.modality, r.counterexample);
        assert!(r.samples > 0 || r.law == "decomposable", "{} {}", r.law, r.modality);
    }
    assert!(law_modality("Mayopt", &store).is_none());
}

#[test]
fn relator_laws_on_small_carriers() {
    for r in relator_laws(2, 4) {
        assert_eq!(r.failures, 0, "{}: {:?}", r.law, r.counterexample);
        assert!(r.samples > 0);
    }
}

#[test]
fn congruence_on_a_few_contexts() {
    for spec in ["prob", "cost+nondet"] {
        let l = logic(spec);
        let p = CongruenceParams { trials: 10, seed: 3, ..CongruenceParams::default() };
        let r = congruence_spot_check(&l, &p).unwrap();
        assert_eq!(r.failures, 0, "{:?}", r.counterexample);
        assert!(r.samples > 0);
    }
}

#[test]
fn generated_programs_type_check() {
    let sig = EffectSignature::from_components("prob+nondet+cost").unwrap().with_store(alloc::vec![Name::new("l")]).unwrap();
    let mut gen = ProgramGen::new(&sig, 8);
    let tc = crate::lang::TypeChecker::new(&sig);
    for _ in 0..200 {
        let m = gen.program(4);
        let ty = tc.infer_comp(&crate::lang::Context::new(), &m).unwrap();
        assert_eq!(ty, ComType::producer(nat()), "{}", m);
        let (c, _) = gen.context(m, 3);
        assert_eq!(tc.infer_comp(&crate::lang::Context::new(), &c).unwrap(), ComType::producer(nat()));
    }
}

#[test]
fn sample_values_live_in_their_space() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let store = Arc::new(StoreConfig::new(alloc::vec![Name::new("l")], 3).unwrap());
    for sp in [TruthSpace::Bool, TruthSpace::Unit, TruthSpace::Cost, TruthSpace::States(store.clone()), TruthSpace::Tables(store)] {
        for _ in 0..20 {
            assert!(sp.contains(&sample_truth(&sp, &mut rng)));
        }
    }
}
