use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::*;
use crate::effects::EffectSignature;
use crate::lang::{parse_comp, parse_type, parse_value, Name, Term, Type};
use crate::quant::{Interval, StateSet, Truth, TruthSpace};

/// `prob+store:l,r+error:e`
fn signature(spec: &str) -> EffectSignature {
    let mut sig = EffectSignature::pure();
    for part in spec.split('+') {
        let (head, args) = part.split_once(':').unwrap_or((part, ""));
        let names: Vec<Name> = args.split(',').filter(|a| !a.is_empty()).map(Name::new).collect();
        sig = match head {
            "store" => sig.with_store(names).unwrap(),
            "error" => sig.with_errors(names).unwrap(),
            other => {
                let extra = EffectSignature::from_components(other).unwrap();
                EffectSignature { prob: sig.prob || extra.prob, nondet: sig.nondet || extra.nondet, cost: sig.cost || extra.cost, ..sig }
            }
        };
    }
    sig
}

fn logic(sig: &str) -> Logic {
    let sig = signature(sig);
    let space = space_for(&sig, 3, false).unwrap();
    Logic::standard(&sig, space, &BTreeMap::new(), 4).unwrap()
}

fn com(l: &Logic, s: &str) -> Term {
    Term::Com(parse_comp(s, Some(l.signature())).unwrap())
}

fn sat(l: &Logic, term: &Term, f: &str, fuel: u64) -> SatResult {
    let f = l.parse_formula(f).unwrap();
    l.satisfies(term, &f, fuel).unwrap()
}

fn real(x: f64) -> Interval {
    Interval::exact(Truth::Real(x))
}

#[test]
fn numerals() {
    let l = logic("prob");
    let seven = Term::Val(parse_value("7", None).unwrap());
    assert_eq!(sat(&l, &seven, "{7}", 1).interval, real(1.0));
    assert_eq!(sat(&l, &seven, "{8}", 1).interval, real(0.0));
}

#[test]
fn coin() {
    let l = logic("prob+nondet");
    let m = com(&l, "por(return 0, por(nor(return 0, return 1), return 1))");
    assert_eq!(sat(&l, &m, "Eopt<{1}>", 8).interval, real(0.5));
    assert_eq!(sat(&l, &m, "Epes<{1}>", 8).interval, real(0.25));
}

#[test]
fn cbn_cbv() {
    let l = logic("prob");
    let m1 = com(&l, "por(return thunk (\\x:nat. return 0), return thunk (\\x:nat. return 1))");
    let m2 = com(&l, "return thunk (\\x:nat. por(return 0, return 1))");
    let phi = "E<and{[U](0 . E<{0}>), [U](0 . E<{1}>)}>";
    // M1 has two leaves, each a function that returns one fixed numeral: the
    // conjunction is min(1, 0) = 0 at either leaf and the average is 0.
    // M2 has one leaf whose function is a fair coin: min(1/2, 1/2) = 1/2.
    let oracle = |leaves: &[(f64, f64)]| {
        leaves.iter().map(|(a, b)| a.min(*b)).sum::<f64>() / leaves.len() as f64
    };
    assert_eq!(sat(&l, &m1, phi, 10).interval, real(oracle(&[(1.0, 0.0), (0.0, 1.0)])));
    assert_eq!(sat(&l, &m2, phi, 10).interval, real(oracle(&[(0.5, 0.5)])));
}

#[test]
fn divergence_is_unknown() {
    let l = logic("prob");
    let omega = com(&l, "fix (\\x:U (F nat). force x)");
    for fuel in [1, 5, 40] {
        let r = sat(&l, &omega, "E<const top>", fuel);
        assert_eq!(r.interval, Interval { lo: Truth::Real(0.0), hi: Truth::Real(1.0), exact: false });
    }
}

#[test]
fn geometric_termination() {
    let l = logic("prob");
    let m = com(&l, "fix f : U (F nat). por(return 0, force f)");
    let mut prev = Interval::unknown(l.space());
    for fuel in 1..40 {
        let r = sat(&l, &m, "E<const 1>", fuel).interval;
        assert!(!r.exact);
        assert_eq!(r.hi, Truth::Real(1.0));
        assert!(r.within(&prev, l.space()));
        prev = r;
    }
    let Truth::Real(lo) = prev.lo else { panic!() };
    assert!(lo >= 1.0 - 1.0 / 32.0);
}

#[test]
fn hoare_triples() {
    let l = logic("store:l,r");
    let cfg = l.space().store().unwrap().clone();
    let n = cfg.num_states();
    let m = com(&l, "update[l](1, return ())");
    let where_l = |v: u64| StateSet::from_fn(n, |s| cfg.get(s, 0) == v);
    let top = Interval::exact(Truth::States(StateSet::full(n)));
    let bot = Interval::exact(Truth::States(StateSet::empty(n)));
    let check = |p: StateSet, q: StateSet| {
        let f = l.hoare(p, q).unwrap();
        l.satisfies(&m, &f, 4).unwrap().interval
    };
    assert_eq!(check(StateSet::full(n), where_l(1)), top);
    assert_eq!(check(StateSet::full(n), where_l(0)), bot);
    assert_eq!(check(StateSet::empty(n), where_l(0)), top);
    assert!(logic("prob").hoare(StateSet::empty(1), StateSet::empty(1)).is_err());
}

#[test]
fn sigma_mu() {
    let l = logic("prob+store:l");
    let TruthSpace::Tables(cfg) = l.space().clone() else { panic!() };
    let n = cfg.num_states();
    let m = com(&l, "return 0");
    let table = |f: &dyn Fn(usize) -> f64| Truth::Table((0..n).map(f).collect());
    let run = |mu: Vec<f64>, phi: Formula| {
        let f = l.sigma_mu(mu, phi).unwrap();
        l.satisfies(&m, &f, 3).unwrap().interval
    };
    let point: Vec<f64> = (0..n).map(|s| if s == 1 { 1.0 } else { 0.0 }).collect();
    let ind = table(&|s| if s == 1 { 1.0 } else { 0.0 });
    assert_eq!(run(point, Formula::Const(ind)), Interval::exact(table(&|_| 1.0)));
    let uniform: Vec<f64> = (0..n).map(|s| if s < 2 { 0.5 } else { 0.0 }).collect();
    let one_zero = table(&|s| if s == 0 { 1.0 } else { 0.0 });
    assert_eq!(run(uniform, Formula::Const(one_zero)), Interval::exact(table(&|_| 0.5)));
    assert_eq!(run(alloc::vec![1.0; n], Formula::Const(table(&|_| 1.0))), Interval::exact(table(&|_| 1.0)));
    assert_eq!(l.sigma_mu(alloc::vec![-1.0; n], Formula::Const(table(&|_| 1.0))), Err(LogicError::BadWeights));
}

#[test]
fn scheduler_mix_against_grid() {
    let l = logic("prob+nondet");
    let opt = l.parse_formula("Eopt<const top>").unwrap();
    let pes = l.parse_formula("Epes<const top>").unwrap();
    let mix = l.scheduler_mix(opt.clone(), pes.clone()).unwrap();
    let grid = scheduler_grid(opt, pes, 64);
    for prog in [
        "return 0",
        "nor(return 0, fix (\\x:U (F nat). force x))",
        "por(return 0, nor(return 1, por(return 2, fix (\\x:U (F nat). force x))))",
        "nor(por(return 0, fix (\\x:U (F nat). force x)), por(return 1, por(return 0, fix (\\x:U (F nat). force x))))",
    ] {
        let m = com(&l, prog);
        let native = l.satisfies(&m, &mix, 20).unwrap().interval;
        let g = l.satisfies(&m, &grid, 20).unwrap().interval;
        let (Truth::Real(a), Truth::Real(b)) = (&native.lo, &g.lo) else { panic!() };
        assert!(a - b >= -1e-12 && a - b <= 1.0 / 64.0, "{prog}: {a} vs {b}");
    }
    let m = com(&l, "return 0");
    let f = l.scheduler_mix(Formula::Const(Truth::Real(1.0)), Formula::Const(Truth::Real(0.0))).unwrap();
    assert_eq!(l.satisfies(&m, &f, 2).unwrap().interval, real(0.5));
}

#[test]
fn negation_and_fragment() {
    let l = logic("prob");
    let m = com(&l, "por(return 0, fix (\\x:U (F nat). force x))");
    let plain = sat(&l, &m, "E<{0}>", 10);
    let twice = sat(&l, &m, "not not E<{0}>", 10);
    assert_eq!(plain.interval, twice.interval);
    assert!(plain.positive_fragment && !twice.positive_fragment);
    let once = sat(&l, &m, "not E<{0}>", 10).interval;
    assert_eq!(once, Interval { lo: Truth::Real(0.0), hi: Truth::Real(0.5), exact: false });
}

#[test]
fn de_morgan() {
    let l = logic("prob");
    let m = com(&l, "por(return 0, por(return 1, return 2))");
    let a = sat(&l, &m, "not or{E<{0}>, E<{1}>, const 0.3}", 10).interval;
    let b = sat(&l, &m, "and{not E<{0}>, not E<{1}>, not const 0.3}", 10).interval;
    assert!(a.exact && l.space().approx_eq(&a.lo, &b.lo, 1e-12));
}

#[test]
fn step_is_three_valued() {
    let l = logic("prob");
    let m = com(&l, "por(return 0, fix (\\x:U (F nat). force x))");
    assert_eq!(sat(&l, &m, "step(E<{0}>, 1/2)", 10).interval, real(1.0));
    assert_eq!(sat(&l, &m, "step(E<{0}>, 0.7)", 10).interval, Interval::unknown(l.space()));
    assert_eq!(sat(&l, &m, "step(E<{1}>, 0.7)", 10).interval, real(0.0));
}

#[test]
fn incomplete_families_widen() {
    let l = logic("prob");
    let m = com(&l, "return 3");
    let fam = |complete| Family::Generated(Generated::new("nats", 3, complete, |i| Formula::modal("E", Formula::nat(i as u64))));
    let or = l.satisfies(&m, &Formula::Or(fam(false)), 4).unwrap().interval;
    assert_eq!(or, Interval { lo: Truth::Real(0.0), hi: Truth::Real(1.0), exact: false });
    let and = l.satisfies(&m, &Formula::And(fam(false)), 4).unwrap().interval;
    assert_eq!(and, Interval { lo: Truth::Real(0.0), hi: Truth::Real(0.0), exact: false });
    assert_eq!(l.satisfies(&m, &Formula::Or(fam(true)), 4).unwrap().interval, real(0.0));
}

#[test]
fn type_errors() {
    let l = logic("prob");
    let m = com(&l, "return 3");
    let f = l.parse_formula("{3}").unwrap();
    assert!(matches!(l.satisfies(&m, &f, 3), Err(LogicError::FormulaType { .. })));
    let f = l.parse_formula("E<[U]{3}>").unwrap();
    assert!(l.satisfies(&m, &f, 3).is_err());
    assert_eq!(l.satisfies(&m, &l.parse_formula("E<{3}>").unwrap(), 0), Err(LogicError::ZeroFuel));
    assert!(l.parse_formula("Q<{3}>").is_err());
}

#[test]
fn structured_values() {
    let l = logic("prob");
    let m = com(&l, "return (inj a 2, thunk <x = return 1, y = por(return 1, return 0)>)");
    let ty = parse_type("F (sum{a: nat, b: unit} * U prod{x: F nat, y: F nat})").unwrap();
    let at = |f: &str| l.satisfies_at(&m, &ty, &l.parse_formula(f).unwrap(), 10).unwrap().interval;
    assert_eq!(at("E<fst inj a {2}>"), real(1.0));
    assert_eq!(at("E<fst inj b const top>"), real(0.0));
    assert_eq!(at("E<snd [U]proj y E<{1}>>"), real(0.5));
    assert!(l.satisfies(&m, &l.parse_formula("E<fst inj a {2}>").unwrap(), 10).is_err());
}

#[test]
fn printing_round_trips() {
    let l = logic("prob+nondet");
    for f in [
        "{7}",
        "Eopt<and{[U](0 . Epes<{0}>), not const 0.25}>",
        "or{step(Eopt<inj a fst {1}>, 0.5), proj x Epes<const top>}",
        "mix(Eopt<const 1>, Epes<const 0>)",
    ] {
        let parsed = l.parse_formula(f).unwrap();
        assert_eq!(l.parse_formula(&l.show(&parsed)).unwrap(), parsed);
    }
    let s = logic("prob+store:l");
    let f = s.parse_formula("sigma[(l=1): 0.5](EG<const 1>)").unwrap();
    assert_eq!(s.parse_formula(&s.show(&f)).unwrap(), f);
}

#[test]
fn error_valuations() {
    let sig = signature("store:l+error:e");
    let space = space_for(&sig, 2, false).unwrap();
    let cfg = space.store().unwrap().clone();
    let n = cfg.num_states();
    let mut vals = BTreeMap::new();
    let mut f = BTreeMap::new();
    f.insert(Name::new("e"), Truth::States(StateSet::from_fn(n, |s| cfg.get(s, 0) == 1)));
    vals.insert(String::from("G"), f);
    let l = Logic::standard(&sig, space, &vals, 4).unwrap();
    assert_eq!(l.modality_names(), ["G_f"]);
    let phi = l.parse_formula("G_f<const top>").unwrap();
    let ty = Type::Com(crate::lang::ComType::producer(crate::lang::ValType::Unit));
    let one = l.satisfies_at(&com(&l, "update[l](1, raise[e]())"), &ty, &phi, 5).unwrap();
    assert_eq!(one.interval, Interval::exact(Truth::States(StateSet::full(n))));
    let zero = l.satisfies_at(&com(&l, "update[l](0, raise[e]())"), &ty, &phi, 5).unwrap();
    assert_eq!(zero.interval, Interval::exact(Truth::States(StateSet::empty(n))));
}
