use alloc::vec::Vec;

use super::modality::{ModalityError, ModalitySpec, Rule};
use super::space::{Truth, TruthSpace};
use crate::machine::{map_leaves, Children, Node, Tree};

/// Certified bounds `lo ⊑ true value ⊑ hi`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: Truth,
    pub hi: Truth,
    pub exact: bool,
}

impl Interval {
    pub fn exact(a: Truth) -> Self {
        Interval { lo: a.clone(), hi: a, exact: true }
    }

    /// `[bot, top]`.
    pub fn unknown(space: &TruthSpace) -> Self {
        Interval { lo: space.bot(), hi: space.top(), exact: false }
    }

    pub fn new(lo: Truth, hi: Truth, exact: bool) -> Self {
        if exact {
            Interval::exact(lo)
        } else {
            Interval { lo, hi, exact }
        }
    }

    /// `[¬hi, ¬lo]`.
    pub fn neg(&self, space: &TruthSpace) -> Self {
        Interval::new(space.neg(&self.hi), space.neg(&self.lo), self.exact)
    }

    /// Whether `self` lies inside `outer`.
    pub fn within(&self, outer: &Interval, space: &TruthSpace) -> bool {
        space.leq(&outer.lo, &self.lo) && space.leq(&self.hi, &outer.hi)
    }

    /// The exact value, if certified.
    pub fn value(&self) -> Option<&Truth> {
        self.exact.then_some(&self.lo)
    }
}

/// `⟦q⟧ₙ(t)`, following the recurrence literally: index 0 and `Unknown` give
/// `bot`, leaves give themselves from index 1, and every operator node
/// consults its children at index `n − 1`. Lookup child `v` is consulted at
/// `max(0, n − 1 − v)`.
pub fn denote_at_depth(q: &ModalitySpec, t: &Tree<Truth>, n: u64) -> Result<Truth, ModalityError> {
    let sp = q.space();
    if n == 0 {
        return Ok(sp.bot());
    }
    match t {
        Tree::Unknown => Ok(sp.bot()),
        Tree::Leaf(a) => Ok(a.clone()),
        Tree::Node(node) => {
            let kids = if let Rule::Lookup = q.require(&node.op)? {
                let (cfg, _) = q.location(&node.op)?;
                (0..cfg.value_bound())
                    .map(|v| denote_at_depth(q, &child(node, v)?, (n - 1).saturating_sub(v)))
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                finite(node)?.iter().map(|c| denote_at_depth(q, c, n - 1)).collect::<Result<Vec<_>, _>>()?
            };
            q.combine(&node.op, node.param, &kids)
        }
    }
}

fn child<L: Clone + Send + Sync + 'static>(node: &Node<L>, v: u64) -> Result<Tree<L>, ModalityError> {
    node.child(v).ok_or_else(|| ModalityError::Malformed(alloc::format!("{}", node.op)))
}

fn finite<L>(node: &Node<L>) -> Result<&[Tree<L>], ModalityError> {
    match &node.children {
        Children::Finite(cs) => Ok(cs),
        Children::Family(_) => Err(ModalityError::Malformed(alloc::format!("{}", node.op))),
    }
}

/// The bounds `[⟦q⟧(t) with Unknown ↦ bot, ⟦q⟧(t) with Unknown ↦ top]`,
/// computed as the limit of the approximation chain. Leaves are valued by
/// `leaf`, itself an interval.
pub fn fold_interval<L, E>(
    q: &ModalitySpec,
    t: &Tree<L>,
    leaf: &mut dyn FnMut(&L) -> Result<Interval, E>,
) -> Result<Interval, E>
where
    L: Clone + Send + Sync + 'static,
    E: From<ModalityError>,
{
    if !q.is_leaf_monotone() {
        return Err(ModalityError::NotLeafMonotone(q.name().into()).into());
    }
    fold_rec(q, t, leaf)
}

fn fold_rec<L, E>(q: &ModalitySpec, t: &Tree<L>, leaf: &mut dyn FnMut(&L) -> Result<Interval, E>) -> Result<Interval, E>
where
    L: Clone + Send + Sync + 'static,
    E: From<ModalityError>,
{
    match t {
        Tree::Unknown => Ok(Interval::unknown(q.space())),
        Tree::Leaf(l) => leaf(l),
        Tree::Node(node) => {
            let parts = if let Rule::Lookup = q.require(&node.op)? {
                let (cfg, _) = q.location(&node.op)?;
                let mut out = Vec::new();
                for v in 0..cfg.value_bound() {
                    out.push(fold_rec(q, &child(node, v)?, leaf)?);
                }
                out
            } else {
                let mut out = Vec::new();
                for c in finite(node)? {
                    out.push(fold_rec(q, c, leaf)?);
                }
                out
            };
            let los: Vec<Truth> = parts.iter().map(|i| i.lo.clone()).collect();
            let lo = q.combine(&node.op, node.param, &los)?;
            if parts.iter().all(|i| i.exact) {
                return Ok(Interval::exact(lo));
            }
            let his: Vec<Truth> = parts.iter().map(|i| i.hi.clone()).collect();
            let hi = q.combine(&node.op, node.param, &his)?;
            Ok(Interval { lo, hi, exact: false })
        }
    }
}

/// Certified bounds on `⟦q⟧(t)`. Exact when `t` has no `Unknown` among the
/// consulted subtrees.
pub fn denote_interval(q: &ModalitySpec, t: &Tree<Truth>) -> Result<Interval, ModalityError> {
    fold_interval(q, t, &mut |a: &Truth| Ok::<_, ModalityError>(Interval::exact(a.clone())))
}

/// `⟦q⟧(t)` for a tree whose consulted part is fully explored; otherwise the
/// lower bound.
pub fn denote(q: &ModalitySpec, t: &Tree<Truth>) -> Result<Truth, ModalityError> {
    denote_interval(q, t).map(|i| i.lo)
}

/// `t ∈ q(h)`: the interval of `⟦q⟧(t[h])`. `h` answers `None` where it is
/// undefined.
pub fn lift<L>(q: &ModalitySpec, h: &dyn Fn(&L) -> Option<Truth>, t: &Tree<L>) -> Result<Interval, ModalityError>
where
    L: Clone + Send + Sync + 'static,
{
    let sp = q.space();
    fold_interval(q, t, &mut |l: &L| {
        let a = h(l).ok_or(ModalityError::ValuationNotTotal)?;
        sp.check(&a)?;
        Ok(Interval::exact(a))
    })
}

/// `t[P]`: every leaf replaced by its value under `p`.
pub fn leaf_substitute<L, F>(t: &Tree<L>, p: F) -> Tree<Truth>
where
    L: Clone + Send + Sync + 'static,
    F: Fn(&L) -> Truth + Send + Sync + 'static,
{
    map_leaves(t, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::{CostAmount, Op};
    use crate::lang::{parse_comp, Comp, Name, Value};
    use crate::machine::{eval_tree, Family};
    use crate::quant::{make_error_lift, make_nondet_variants, StateSet, StoreConfig};
    use alloc::collections::BTreeMap;
    use alloc::sync::Arc;

    fn r(x: f64) -> Tree<Truth> {
        Tree::Leaf(Truth::Real(x))
    }

    fn por(a: Tree<Truth>, b: Tree<Truth>) -> Tree<Truth> {
        Tree::node(Op::Por, None, alloc::vec![a, b])
    }

    fn nor<L>(a: Tree<L>, b: Tree<L>) -> Tree<L> {
        Tree::node(Op::Nor, None, alloc::vec![a, b])
    }

    fn cost(c: f64, t: Tree<Truth>) -> Tree<Truth> {
        Tree::node(Op::Cost(CostAmount::new(c).unwrap()), None, alloc::vec![t])
    }

    fn lr(v: u64) -> Arc<StoreConfig> {
        Arc::new(StoreConfig::new(alloc::vec![Name::new("l"), Name::new("r")], v).unwrap())
    }

    fn indicator(n: u64) -> impl Fn(&Comp) -> Option<Truth> {
        move |c| Some(Truth::Bool(matches!(c, Comp::Return(v) if v.numeral_value() == Some(n))))
    }

    #[test]
    fn expectation_at_depth() {
        let e = ModalitySpec::expectation();
        let t = por(r(1.0), r(0.0));
        assert_eq!(denote_at_depth(&e, &t, 2).unwrap(), Truth::Real(0.5));
        assert_eq!(denote_at_depth(&e, &t, 1).unwrap(), Truth::Real(0.0));
        assert_eq!(denote_at_depth(&e, &t, 0).unwrap(), Truth::Real(0.0));
    }

    #[test]
    fn cost_of_unknown_is_infinite() {
        let c = ModalitySpec::cost();
        for n in 0..5 {
            assert_eq!(denote_at_depth(&c, &Tree::Unknown, n).unwrap(), Truth::Real(f64::INFINITY));
        }
        let t: Tree<()> = Tree::node(
            Op::Cost(CostAmount::new(2.0).unwrap()),
            None,
            alloc::vec![Tree::node(Op::Cost(CostAmount::new(3.0).unwrap()), None, alloc::vec![Tree::Leaf(())])],
        );
        assert_eq!(lift(&c, &|_: &()| Some(Truth::Real(0.0)), &t).unwrap(), Interval::exact(Truth::Real(5.0)));
        assert_eq!(denote(&c, &cost(1.0, r(2.0))).unwrap(), Truth::Real(3.0));
    }

    #[test]
    fn interval_with_unknown() {
        let e = ModalitySpec::expectation();
        let i = denote_interval(&e, &por(r(1.0), Tree::Unknown)).unwrap();
        assert_eq!(i, Interval { lo: Truth::Real(0.5), hi: Truth::Real(1.0), exact: false });
        assert_eq!(denote_interval(&e, &r(0.3)).unwrap(), Interval::exact(Truth::Real(0.3)));
    }

    #[test]
    fn coin() {
        let m = parse_comp("por(return 0, por(nor(return 0, return 1), return 1))", None).unwrap();
        let t = eval_tree(&m, 8, 4);
        let (opt, pes) = make_nondet_variants(&ModalitySpec::expectation()).unwrap();
        let to_unit = |c: &Comp| indicator(1)(c).map(|b| Truth::Real(if b == Truth::Bool(true) { 1.0 } else { 0.0 }));
        assert_eq!(lift(&opt, &to_unit, &t).unwrap(), Interval::exact(Truth::Real(0.5)));
        assert_eq!(lift(&pes, &to_unit, &t).unwrap(), Interval::exact(Truth::Real(0.25)));
    }

    #[test]
    fn copier() {
        let store = lr(3);
        let m = parse_comp(
            "nor(lookup[l](x. update[r](x, return x)), lookup[r](x. update[l](x, return x)))",
            None,
        )
        .unwrap();
        let t = eval_tree(&m, 16, 3);
        let (opt, pes) = make_nondet_variants(&ModalitySpec::global(store.clone())).unwrap();
        let n = store.num_states();
        let zero = |c: &Comp| {
            indicator(0)(c).map(|b| Truth::States(if b == Truth::Bool(true) { StateSet::full(n) } else { StateSet::empty(n) }))
        };
        let either = StateSet::from_fn(n, |s| store.get(s, 0) == 0 || store.get(s, 1) == 0);
        let both = StateSet::from_fn(n, |s| store.get(s, 0) == 0 && store.get(s, 1) == 0);
        assert_eq!(lift(&opt, &zero, &t).unwrap(), Interval::exact(Truth::States(either.clone())));
        assert_eq!(lift(&pes, &zero, &t).unwrap(), Interval::exact(Truth::States(both.clone())));
        assert_eq!((either.count(), both.count()), (5, 1));
    }

    #[test]
    fn lookup_index_shrinks_with_stored_value() {
        let store = lr(3);
        let g = ModalitySpec::global(store.clone());
        let n = store.num_states();
        let t: Tree<Truth> = Tree::family_node(
            Op::Lookup(Name::new("l")),
            Family::new(3, move |_| Tree::Leaf(Truth::States(StateSet::full(n)))),
        );
        let Truth::States(at2) = denote_at_depth(&g, &t, 2).unwrap() else { panic!() };
        assert_eq!(at2, StateSet::from_fn(n, |s| store.get(s, 0) == 0));
        let Truth::States(at4) = denote_at_depth(&g, &t, 4).unwrap() else { panic!() };
        assert_eq!(at4.count(), n);
        assert_eq!(denote(&g, &t).unwrap(), Truth::States(StateSet::full(n)));
    }

    #[test]
    fn error_lift_on_store() {
        let store = lr(2);
        let g = ModalitySpec::global(store.clone());
        let n = store.num_states();
        let e = Name::new("e");
        let mut f = BTreeMap::new();
        f.insert(e.clone(), Truth::States(StateSet::from_fn(n, |s| store.get(s, 0) == 1)));
        let gf = make_error_lift(&g, &f, core::slice::from_ref(&e)).unwrap();
        let tree = |m: u64| -> Tree<Truth> {
            Tree::node(Op::Update(Name::new("l")), Some(m), alloc::vec![Tree::node(Op::Raise(e.clone()), None, alloc::vec![])])
        };
        assert_eq!(denote_interval(&gf, &tree(1)).unwrap(), Interval::exact(Truth::States(StateSet::full(n))));
        assert_eq!(denote_interval(&gf, &tree(0)).unwrap(), Interval::exact(Truth::States(StateSet::empty(n))));
    }

    #[test]
    fn expectation_matches_path_sum() {
        fn path_sum(t: &Tree<Truth>, w: f64) -> f64 {
            match t {
                Tree::Leaf(Truth::Real(x)) => w * x,
                Tree::Node(n) => n.explored().iter().map(|c| path_sum(c, w / 2.0)).sum(),
                _ => 0.0,
            }
        }
        let t = por(por(r(0.25), por(r(1.0), r(0.5))), por(r(0.0), r(0.75)));
        let Truth::Real(x) = denote(&ModalitySpec::expectation(), &t).unwrap() else { panic!() };
        assert!((x - path_sum(&t, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn custom_modality_needs_monotonicity() {
        let q = ModalitySpec::custom("K", TruthSpace::Unit, false).with_rule("por", None, Rule::Average);
        assert!(matches!(denote_interval(&q, &r(0.5)), Err(ModalityError::NotLeafMonotone(_))));
        assert_eq!(denote_at_depth(&q, &por(r(0.5), r(0.5)), 3).unwrap(), Truth::Real(0.5));
    }

    #[test]
    fn valuation_must_be_total() {
        let t = nor(Tree::Leaf(Comp::ret(Value::Zero)), Tree::Leaf(Comp::ret(Value::numeral(1))));
        let (opt, _) = make_nondet_variants(&ModalitySpec::expectation()).unwrap();
        let h = |c: &Comp| matches!(c, Comp::Return(Value::Zero)).then_some(Truth::Real(1.0));
        assert_eq!(lift(&opt, &h, &t), Err(ModalityError::ValuationNotTotal));
    }

    #[test]
    fn tables_thread_state() {
        let store = lr(2);
        let eg = ModalitySpec::expectation_global(store.clone());
        let n = store.num_states();
        let ind = |p: fn(usize) -> bool| Tree::Leaf(Truth::Table((0..n).map(|s| if p(s) { 1.0 } else { 0.0 }).collect()));
        // por(update[l := 1](l = 1 ?), l = 1 ?) averages a certainty with the start state's value
        let t = Tree::node(
            Op::Por,
            None,
            alloc::vec![
                Tree::node(Op::Update(Name::new("l")), Some(1), alloc::vec![ind(|s| s % 2 == 1)]),
                ind(|s| s % 2 == 1)
            ],
        );
        let Truth::Table(v) = denote(&eg, &t).unwrap() else { panic!() };
        for s in 0..n {
            assert_eq!(v[s], if store.get(s, 0) == 1 { 1.0 } else { 0.5 });
        }
    }
}
