use std::collections::BTreeMap;

use cbpv_quant_core::equiv::{compare_both, enumerate_basic_formulas, find_distinguishing_formula, Pools};
use cbpv_quant_core::lang::{parse_program, TypeChecker};
use cbpv_quant_core::logic::{space_for, Logic};
use cbpv_quant_core::{EffectSignature, Interval, Term, Truth, Type};

fn load(sig: &EffectSignature, src: &str) -> (Term, Type) {
    let p = parse_program(src, Some(sig)).unwrap();
    let ty = TypeChecker::new(sig).check_program(&p).unwrap();
    (Term::Com(p.term), Type::Com(ty))
}

fn logic(sig: &EffectSignature) -> Logic {
    let space = space_for(sig, 2, false).unwrap();
    Logic::standard(sig, space, &BTreeMap::new(), 4).unwrap()
}

#[test]
fn parse_check_and_evaluate() {
    let sig = EffectSignature::from_components("prob+nondet").unwrap();
    let l = logic(&sig);
    let (m, _) = load(&sig, "por(return 0, por(nor(return 0, return 1), return 1))");
    let f = l.parse_formula("Eopt<{1}>").unwrap();
    // Angelic choice picks 1 in the inner flip: 1/2 * 0 + 1/2 * (1/2 * 1 + 1/2 * 1).
    let expected = 0.5 * 0.0 + 0.5 * (0.5 * 1.0 + 0.5 * 1.0);
    assert_eq!(l.satisfies(&m, &f, 8).unwrap().interval, Interval::exact(Truth::Real(expected)));
}

#[test]
fn equal_programs_survive_the_suite() {
    let sig = EffectSignature::from_components("prob").unwrap();
    let l = logic(&sig);
    let (m, ty) = load(&sig, "por(return 0, return 1)");
    let (n, _) = load(&sig, "por(return 1, return 0)");
    let pools = Pools::from_terms(&l, &[&m, &n]);
    let suite = enumerate_basic_formulas(&l, &ty, 3, &pools).unwrap();
    assert!(!compare_both(&l, &m, &n, &suite, 8).unwrap().is_distinguished());
}

#[test]
fn call_by_name_and_value_functions_differ() {
    let sig = EffectSignature::from_components("prob").unwrap();
    let l = logic(&sig);
    let (m, ty) = load(&sig, "por(return thunk (\\x:nat. return 0), return thunk (\\x:nat. return 1))");
    let (n, _) = load(&sig, "return thunk (\\x:nat. por(return 0, return 1))");
    let pools = Pools::from_terms(&l, &[&m, &n]);
    let w = find_distinguishing_formula(&l, &m, &n, &ty, 10, &[10], &pools).unwrap().unwrap();
    assert_eq!(w.left, Interval::exact(Truth::Real(0.0)));
    assert_eq!(w.right, Interval::exact(Truth::Real(0.5)));
}
