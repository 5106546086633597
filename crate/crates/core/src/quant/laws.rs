use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::effects::{CostAmount, Op};
use crate::lang::Name;
use crate::machine::{truncate, Family, Tree};

fn store() -> Arc<StoreConfig> {
    Arc::new(StoreConfig::new(alloc::vec![Name::new("l"), Name::new("r")], 2).unwrap())
}

fn spaces() -> Vec<TruthSpace> {
    alloc::vec![
        TruthSpace::Bool,
        TruthSpace::Unit,
        TruthSpace::Cost,
        TruthSpace::States(store()),
        TruthSpace::Tables(store()),
    ]
}

fn grid(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0..=8) as f64 / 8.0
}

fn sample(sp: &TruthSpace, rng: &mut ChaCha8Rng) -> Truth {
    match sp {
        TruthSpace::Bool => Truth::Bool(rng.gen()),
        TruthSpace::Unit => Truth::Real(grid(rng)),
        TruthSpace::Cost => match rng.gen_range(0..6) {
            0 => Truth::Real(f64::INFINITY),
            1 => Truth::Real(0.0),
            k => Truth::Real(k as f64 / 2.0),
        },
        TruthSpace::States(c) => {
            let bits: Vec<bool> = (0..c.num_states()).map(|_| rng.gen()).collect();
            Truth::States(StateSet::from_fn(c.num_states(), |i| bits[i]))
        }
        TruthSpace::Tables(c) => Truth::Table((0..c.num_states()).map(|_| grid(rng)).collect()),
    }
}

#[test]
fn lattice_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for sp in spaces() {
        assert_eq!(sp.neg(&sp.top()), sp.bot());
        for _ in 0..200 {
            let (a, b, c) = (sample(&sp, &mut rng), sample(&sp, &mut rng), sample(&sp, &mut rng));
            assert!(sp.leq(&a, &a));
            assert!(sp.leq(&sp.bot(), &a) && sp.leq(&a, &sp.top()));
            if sp.leq(&a, &b) && sp.leq(&b, &a) {
                assert_eq!(a, b);
            }
            if sp.leq(&a, &b) && sp.leq(&b, &c) {
                assert!(sp.leq(&a, &c));
            }
            let j = sp.join2(&a, &b);
            let m = sp.meet2(&a, &b);
            assert!(sp.leq(&a, &j) && sp.leq(&b, &j) && sp.leq(&m, &a) && sp.leq(&m, &b));
            if sp.leq(&a, &c) && sp.leq(&b, &c) {
                assert!(sp.leq(&j, &c));
            }
            assert!(sp.approx_eq(&sp.neg(&sp.neg(&a)), &a, 1e-12));
            assert_eq!(sp.leq(&a, &b), sp.leq(&sp.neg(&b), &sp.neg(&a)));
            assert!(sp.approx_eq(&sp.neg(&j), &sp.meet2(&sp.neg(&a), &sp.neg(&b)), 1e-12));
        }
    }
}

fn modalities() -> Vec<ModalitySpec> {
    let mut out = Vec::new();
    for q in [
        ModalitySpec::expectation(),
        ModalitySpec::cost(),
        ModalitySpec::global(store()),
        ModalitySpec::expectation_global(store()),
    ] {
        let (o, p) = make_nondet_variants(&q).unwrap();
        out.extend([q, o, p]);
    }
    out
}

fn random_tree(q: &ModalitySpec, depth: usize, rng: &mut ChaCha8Rng) -> Tree<Truth> {
    let sp = q.space().clone();
    if depth == 0 || rng.gen_range(0..4) == 0 {
        return if rng.gen_range(0..6) == 0 { Tree::Unknown } else { Tree::Leaf(sample(&sp, rng)) };
    }
    let mut ops = alloc::vec![];
    if q.rule(&Op::Por).is_some() {
        ops.push(0);
    }
    if q.rule(&Op::Nor).is_some() {
        ops.push(1);
    }
    if q.rule(&Op::Cost(CostAmount::new(1.0).unwrap())).is_some() {
        ops.push(2);
    }
    if q.rule(&Op::Lookup(Name::new("l"))).is_some() {
        ops.extend([3, 4]);
    }
    let l = if rng.gen() { Name::new("l") } else { Name::new("r") };
    match ops[rng.gen_range(0..ops.len())] {
        0 => Tree::node(Op::Por, None, alloc::vec![random_tree(q, depth - 1, rng), random_tree(q, depth - 1, rng)]),
        1 => Tree::node(Op::Nor, None, alloc::vec![random_tree(q, depth - 1, rng), random_tree(q, depth - 1, rng)]),
        2 => Tree::node(
            Op::Cost(CostAmount::new(rng.gen_range(0..4) as f64).unwrap()),
            None,
            alloc::vec![random_tree(q, depth - 1, rng)],
        ),
        3 => {
            let kids: Vec<Tree<Truth>> = (0..2).map(|_| random_tree(q, depth - 1, rng)).collect();
            Tree::family_node(Op::Lookup(l), Family::new(2, move |i| kids[(i as usize).min(1)].clone()))
        }
        _ => Tree::node(Op::Update(l), Some(rng.gen_range(0..3)), alloc::vec![random_tree(q, depth - 1, rng)]),
    }
}

#[test]
fn depth_monotone_and_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for q in modalities() {
        let sp = q.space().clone();
        for _ in 0..100 {
            let t = random_tree(&q, 4, &mut rng);
            let mut prev = denote_at_depth(&q, &t, 0).unwrap();
            for n in 1..10 {
                let next = denote_at_depth(&q, &t, n).unwrap();
                assert!(sp.leq(&prev, &next), "{}", q.name());
                prev = next;
            }
            assert!(sp.approx_eq(&prev, &denote_interval(&q, &t).unwrap().lo, 1e-12), "{}", q.name());
        }
    }
}

#[test]
fn bounds_narrow_along_truncations() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for q in modalities() {
        let sp = q.space().clone();
        for _ in 0..100 {
            let t = random_tree(&q, 4, &mut rng);
            let full = denote_interval(&q, &t).unwrap();
            assert!(sp.leq(&full.lo, &full.hi));
            assert_eq!(full.exact, !has_unknown(&t));
            for k in 0..5 {
                let part = denote_interval(&q, &truncate(&t, k)).unwrap();
                assert!(full.within(&part, &sp), "{} at {}", q.name(), k);
            }
        }
    }
}

fn has_unknown(t: &Tree<Truth>) -> bool {
    match t {
        Tree::Unknown => true,
        Tree::Leaf(_) => false,
        Tree::Node(n) => (0..n.explored().len().max(2) as u64).any(|i| n.child(i).is_some_and(|c| has_unknown(&c))),
    }
}

#[test]
fn unit_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for q in modalities() {
        for _ in 0..20 {
            let a = sample(q.space(), &mut rng);
            assert_eq!(denote_interval(&q, &Tree::Leaf(a.clone())).unwrap(), Interval::exact(a));
        }
    }
}
