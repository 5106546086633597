use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::effects::Op;
use crate::lang::Comp;

/// A countably branching tree with `Unknown` leaves for unexhausted fuel.
pub enum Tree<L> {
    Leaf(L),
    /// The `⊥` leaf of a finite approximant.
    Unknown,
    Node(Arc<Node<L>>),
}

/// Effect trees over terminal computations.
pub type EffectTree = Tree<Comp>;

pub struct Node<L> {
    pub op: Op,
    /// The `m` of `ℕ × α^n → α` operators.
    pub param: Option<u64>,
    pub children: Children<L>,
}

pub enum Children<L> {
    Finite(Vec<Tree<L>>),
    Family(Family<L>),
}

type Generator<L> = Arc<dyn Fn(u64) -> Tree<L> + Send + Sync>;

/// An ℕ-indexed family of subtrees. The first `width` members are built
/// eagerly; later ones on demand, each computed at most once.
pub struct Family<L> {
    prefix: Vec<Tree<L>>,
    generator: Generator<L>,
    memo: spin::Mutex<BTreeMap<u64, Tree<L>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("family explored to width {explored}, comparison needs {needed}")]
pub struct Unexpanded {
    pub explored: usize,
    pub needed: usize,
}

impl<L> Clone for Tree<L>
where
    L: Clone,
{
    fn clone(&self) -> Self {
        match self {
            Tree::Leaf(l) => Tree::Leaf(l.clone()),
            Tree::Unknown => Tree::Unknown,
            Tree::Node(n) => Tree::Node(n.clone()),
        }
    }
}

impl<L: Clone + Send + Sync + 'static> Family<L> {
    pub fn new(width: usize, generator: impl Fn(u64) -> Tree<L> + Send + Sync + 'static) -> Self {
        let generator: Generator<L> = Arc::new(generator);
        let prefix = (0..width as u64).map(|i| generator(i)).collect();
        Family { prefix, generator, memo: spin::Mutex::new(BTreeMap::new()) }
    }

    /// The `i`-th member, computing and caching it if necessary. Concurrent
    /// callers may both compute it but all observe the first stored value.
    pub fn get(&self, i: u64) -> Tree<L> {
        if let Some(t) = self.prefix.get(i as usize) {
            return t.clone();
        }
        if let Some(t) = self.memo.lock().get(&i) {
            return t.clone();
        }
        let fresh = (self.generator)(i);
        self.memo.lock().entry(i).or_insert(fresh).clone()
    }

    /// A family whose members are `f` applied to ours.
    pub fn map<M: Clone + Send + Sync + 'static>(
        &self,
        f: impl Fn(Tree<L>) -> Tree<M> + Send + Sync + 'static,
    ) -> Family<M> {
        let f = Arc::new(f);
        let prefix: Vec<Tree<M>> = self.prefix.iter().map(|t| f(t.clone())).collect();
        let generator = self.generator.clone();
        let g = f.clone();
        Family { prefix, generator: Arc::new(move |i| g(generator(i))), memo: spin::Mutex::new(BTreeMap::new()) }
    }
}

impl<L> Family<L> {
    pub fn width(&self) -> usize {
        self.prefix.len()
    }

    pub fn prefix(&self) -> &[Tree<L>] {
        &self.prefix
    }

    /// Number of members computed beyond the eager prefix.
    pub fn cached(&self) -> usize {
        self.memo.lock().len()
    }
}

impl<L> Tree<L> {
    pub fn node(op: Op, param: Option<u64>, children: Vec<Tree<L>>) -> Self {
        Tree::Node(Arc::new(Node { op, param, children: Children::Finite(children) }))
    }

    pub fn family_node(op: Op, family: Family<L>) -> Self {
        Tree::Node(Arc::new(Node { op, param: None, children: Children::Family(family) }))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Tree::Unknown)
    }

    /// Whether an `Unknown` leaf occurs in the explored part.
    pub fn has_unknown(&self) -> bool {
        match self {
            Tree::Leaf(_) => false,
            Tree::Unknown => true,
            Tree::Node(n) => n.explored().iter().any(|t| t.has_unknown()),
        }
    }

    /// Whether the tree contains an ℕ-indexed family.
    pub fn has_family(&self) -> bool {
        match self {
            Tree::Node(n) => match &n.children {
                Children::Family(_) => true,
                Children::Finite(cs) => cs.iter().any(|t| t.has_family()),
            },
            _ => false,
        }
    }

    /// Leaves of the explored part, left to right.
    pub fn leaves(&self) -> Vec<&L> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a L>) {
        match self {
            Tree::Leaf(l) => out.push(l),
            Tree::Unknown => {}
            Tree::Node(n) => n.explored().iter().for_each(|t| t.collect_leaves(out)),
        }
    }
}

impl<L> Node<L> {
    /// Finite children, or the eager prefix of a family.
    pub fn explored(&self) -> &[Tree<L>] {
        match &self.children {
            Children::Finite(cs) => cs,
            Children::Family(f) => f.prefix(),
        }
    }
}

impl<L: Clone + Send + Sync + 'static> Node<L> {
    /// Child `i`, computing family members on demand.
    pub fn child(&self, i: u64) -> Option<Tree<L>> {
        match &self.children {
            Children::Finite(cs) => cs.get(i as usize).cloned(),
            Children::Family(f) => Some(f.get(i)),
        }
    }
}

/// `η(x)`: the single-leaf tree.
pub fn eta<L>(x: L) -> Tree<L> {
    Tree::Leaf(x)
}

/// Rewrites every non-`Unknown` leaf. Family members are mapped lazily.
pub fn map_leaves<L, M>(t: &Tree<L>, f: impl Fn(&L) -> M + Send + Sync + 'static) -> Tree<M>
where
    L: Clone + Send + Sync + 'static,
    M: Clone + Send + Sync + 'static,
{
    map_rec(t, &Arc::new(f))
}

fn map_rec<L, M, F>(t: &Tree<L>, f: &Arc<F>) -> Tree<M>
where
    L: Clone + Send + Sync + 'static,
    M: Clone + Send + Sync + 'static,
    F: Fn(&L) -> M + Send + Sync + 'static,
{
    match t {
        Tree::Leaf(l) => Tree::Leaf(f(l)),
        Tree::Unknown => Tree::Unknown,
        Tree::Node(n) => {
            let children = match &n.children {
                Children::Finite(cs) => Children::Finite(cs.iter().map(|c| map_rec(c, f)).collect()),
                Children::Family(fam) => {
                    let g = f.clone();
                    Children::Family(fam.map(move |c| map_rec(&c, &g)))
                }
            };
            Tree::Node(Arc::new(Node { op: n.op.clone(), param: n.param, children }))
        }
    }
}

/// `μ`: grafts each leaf tree in place of its leaf.
pub fn mu<L>(tt: &Tree<Tree<L>>) -> Tree<L>
where
    L: Clone + Send + Sync + 'static,
{
    match tt {
        Tree::Leaf(t) => t.clone(),
        Tree::Unknown => Tree::Unknown,
        Tree::Node(n) => {
            let children = match &n.children {
                Children::Finite(cs) => Children::Finite(cs.iter().map(mu).collect()),
                Children::Family(fam) => Children::Family(fam.map(|c| mu(&c))),
            };
            Tree::Node(Arc::new(Node { op: n.op.clone(), param: n.param, children }))
        }
    }
}

/// `t ⊑ r`: `t` arises from `r` by replacing subtrees with `Unknown`.
/// Families are compared on their explored prefixes, which must agree in
/// width.
pub fn tree_leq<L: PartialEq>(t: &Tree<L>, r: &Tree<L>) -> Result<bool, Unexpanded> {
    match (t, r) {
        (Tree::Unknown, _) => Ok(true),
        (Tree::Leaf(a), Tree::Leaf(b)) => Ok(a == b),
        (Tree::Node(a), Tree::Node(b)) => {
            if a.op != b.op || a.param != b.param {
                return Ok(false);
            }
            if let (Children::Family(fa), Children::Family(fb)) = (&a.children, &b.children) {
                if fa.width() != fb.width() {
                    return Err(Unexpanded {
                        explored: fa.width().min(fb.width()),
                        needed: fa.width().max(fb.width()),
                    });
                }
            }
            let (ca, cb) = (a.explored(), b.explored());
            if ca.len() != cb.len() {
                return Ok(false);
            }
            for (x, y) in ca.iter().zip(cb) {
                if !tree_leq(x, y)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Ok(false),
    }
}

/// Prunes everything below depth `k`; `truncate(t, 0)` is `Unknown`.
pub fn truncate<L>(t: &Tree<L>, k: usize) -> Tree<L>
where
    L: Clone + Send + Sync + 'static,
{
    if k == 0 {
        return Tree::Unknown;
    }
    match t {
        Tree::Leaf(_) | Tree::Unknown => t.clone(),
        Tree::Node(n) => {
            let children = match &n.children {
                Children::Finite(cs) => Children::Finite(cs.iter().map(|c| truncate(c, k - 1)).collect()),
                Children::Family(fam) => Children::Family(fam.map(move |c| truncate(&c, k - 1))),
            };
            Tree::Node(Arc::new(Node { op: n.op.clone(), param: n.param, children }))
        }
    }
}

/// Height of the explored part: `Unknown` is 0, a leaf 1.
pub fn depth<L>(t: &Tree<L>) -> usize {
    match t {
        Tree::Leaf(_) => 1,
        Tree::Unknown => 0,
        Tree::Node(n) => 1 + n.explored().iter().map(depth).max().unwrap_or(0),
    }
}

impl<L: PartialEq> PartialEq for Tree<L> {
    /// Structural equality on the explored part.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Tree::Leaf(a), Tree::Leaf(b)) => a == b,
            (Tree::Unknown, Tree::Unknown) => true,
            (Tree::Node(a), Tree::Node(b)) => {
                a.op == b.op
                    && a.param == b.param
                    && matches!(
                        (&a.children, &b.children),
                        (Children::Finite(_), Children::Finite(_)) | (Children::Family(_), Children::Family(_))
                    )
                    && a.explored() == b.explored()
            }
            _ => false,
        }
    }
}

impl<L: fmt::Debug> fmt::Debug for Tree<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(l) => write!(f, "Leaf({:?})", l),
            Tree::Unknown => f.write_str("?"),
            Tree::Node(n) => {
                write!(f, "{}", n.op)?;
                if let Some(p) = n.param {
                    write!(f, ":={}", p)?;
                }
                let mut l = f.debug_list();
                l.entries(n.explored());
                if matches!(n.children, Children::Family(_)) {
                    l.entry(&"…");
                }
                l.finish()
            }
        }
    }
}
