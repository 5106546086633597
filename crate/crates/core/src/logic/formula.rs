use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::lang::{Label, Value};
use crate::quant::{Truth, TruthSpace};

/// A formula. Which constructors apply depends on the type of the term it
/// is evaluated against.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    /// `{n}` at `nat`.
    NatEq(u64),
    /// `[U]φ` at `U C`.
    Thunk(Arc<Formula>),
    /// `inj i φ` at sums.
    Inj(Label, Arc<Formula>),
    Fst(Arc<Formula>),
    Snd(Arc<Formula>),
    /// `(V . φ)` at `A → C`.
    Arg(Value, Arc<Formula>),
    /// `proj i φ` at products.
    Proj(Label, Arc<Formula>),
    /// `q<φ>` at `F A`, naming a modality of the active logic.
    Modal(String, Arc<Formula>),
    Or(Family),
    And(Family),
    /// `step(φ, a)`: top when `φ ⊒ a`, bot otherwise.
    Step(Arc<Formula>, Truth),
    Const(Truth),
    Neg(Arc<Formula>),
    /// `Σ_μ(φ)` on `[0,1]^S`: every state gets `min(1, Σ μ(s)·φ(s))`.
    SigmaMu(Arc<[f64]>, Arc<Formula>),
    /// `((φ) + (ψ)) / 2` on `[0,1]`.
    Mix(Arc<Formula>, Arc<Formula>),
}

/// The index set of a disjunction or conjunction.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Finite(Vec<Formula>),
    Generated(Generated),
}

type Gen = Arc<dyn Fn(usize) -> Formula + Send + Sync>;

/// Members `0 … bound−1` of a countable family. `complete` says whether
/// these are all the members.
#[derive(Clone)]
pub struct Generated {
    pub name: String,
    pub bound: usize,
    pub complete: bool,
    generator: Gen,
}

impl Generated {
    pub fn new(name: &str, bound: usize, complete: bool, f: impl Fn(usize) -> Formula + Send + Sync + 'static) -> Self {
        Generated { name: name.into(), bound, complete, generator: Arc::new(f) }
    }

    pub fn member(&self, i: usize) -> Formula {
        (self.generator)(i)
    }
}

impl PartialEq for Generated {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.bound == other.bound && self.complete == other.complete
    }
}

impl fmt::Debug for Generated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Generated({}, bound {}, complete {})", self.name, self.bound, self.complete)
    }
}

impl Family {
    pub fn is_complete(&self) -> bool {
        match self {
            Family::Finite(_) => true,
            Family::Generated(g) => g.complete,
        }
    }

    /// The enumerated members.
    pub fn members(&self) -> Vec<Formula> {
        match self {
            Family::Finite(xs) => xs.clone(),
            Family::Generated(g) => (0..g.bound).map(|i| g.member(i)).collect(),
        }
    }
}

impl Formula {
    pub fn nat(n: u64) -> Self {
        Formula::NatEq(n)
    }

    pub fn thunk(f: Formula) -> Self {
        Formula::Thunk(Arc::new(f))
    }

    pub fn inj(l: Label, f: Formula) -> Self {
        Formula::Inj(l, Arc::new(f))
    }

    pub fn arg(v: Value, f: Formula) -> Self {
        Formula::Arg(v, Arc::new(f))
    }

    pub fn proj(l: Label, f: Formula) -> Self {
        Formula::Proj(l, Arc::new(f))
    }

    pub fn modal(q: &str, f: Formula) -> Self {
        Formula::Modal(q.into(), Arc::new(f))
    }

    pub fn or(xs: Vec<Formula>) -> Self {
        Formula::Or(Family::Finite(xs))
    }

    pub fn and(xs: Vec<Formula>) -> Self {
        Formula::And(Family::Finite(xs))
    }

    pub fn step(f: Formula, a: Truth) -> Self {
        Formula::Step(Arc::new(f), a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Neg(Arc::new(f))
    }

    /// Whether `¬` occurs anywhere, generated members included.
    pub fn uses_negation(&self) -> bool {
        match self {
            Formula::NatEq(_) | Formula::Const(_) => false,
            Formula::Neg(_) => true,
            Formula::Thunk(f)
            | Formula::Inj(_, f)
            | Formula::Fst(f)
            | Formula::Snd(f)
            | Formula::Arg(_, f)
            | Formula::Proj(_, f)
            | Formula::Modal(_, f)
            | Formula::Step(f, _)
            | Formula::SigmaMu(_, f) => f.uses_negation(),
            Formula::Mix(f, g) => f.uses_negation() || g.uses_negation(),
            Formula::Or(fam) | Formula::And(fam) => fam.members().iter().any(Formula::uses_negation),
        }
    }

    /// Membership in the positive fragment.
    pub fn is_positive(&self) -> bool {
        !self.uses_negation()
    }

    /// One per constructor.
    pub fn size(&self) -> usize {
        match self {
            Formula::NatEq(_) | Formula::Const(_) => 1,
            Formula::Thunk(f)
            | Formula::Inj(_, f)
            | Formula::Fst(f)
            | Formula::Snd(f)
            | Formula::Arg(_, f)
            | Formula::Proj(_, f)
            | Formula::Modal(_, f)
            | Formula::Step(f, _)
            | Formula::Neg(f)
            | Formula::SigmaMu(_, f) => 1 + f.size(),
            Formula::Mix(f, g) => 1 + f.size() + g.size(),
            Formula::Or(fam) | Formula::And(fam) => 1 + fam.members().iter().map(Formula::size).sum::<usize>(),
        }
    }

    /// Concrete syntax; truth values are printed in `space`.
    pub fn show(&self, space: &TruthSpace) -> String {
        let mut out = String::new();
        write_formula(self, space, &mut out);
        out
    }
}

fn write_formula(f: &Formula, sp: &TruthSpace, out: &mut String) {
    match f {
        Formula::NatEq(n) => {
            let _ = write!(out, "{{{}}}", n);
        }
        Formula::Thunk(g) => {
            out.push_str("[U]");
            write_formula(g, sp, out);
        }
        Formula::Inj(l, g) => {
            let _ = write!(out, "inj {} ", l);
            write_formula(g, sp, out);
        }
        Formula::Fst(g) => {
            out.push_str("fst ");
            write_formula(g, sp, out);
        }
        Formula::Snd(g) => {
            out.push_str("snd ");
            write_formula(g, sp, out);
        }
        Formula::Arg(v, g) => {
            let _ = write!(out, "({} . ", v);
            write_formula(g, sp, out);
            out.push(')');
        }
        Formula::Proj(l, g) => {
            let _ = write!(out, "proj {} ", l);
            write_formula(g, sp, out);
        }
        Formula::Modal(q, g) => {
            out.push_str(q);
            out.push('<');
            write_formula(g, sp, out);
            out.push('>');
        }
        Formula::Or(fam) | Formula::And(fam) => {
            out.push_str(if matches!(f, Formula::Or(_)) { "or{" } else { "and{" });
            match fam {
                Family::Finite(xs) => {
                    for (i, x) in xs.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        write_formula(x, sp, out);
                    }
                }
                Family::Generated(g) => {
                    let _ = write!(out, "..{}[{}]", g.name, g.bound);
                }
            }
            out.push('}');
        }
        Formula::Step(g, a) => {
            out.push_str("step(");
            write_formula(g, sp, out);
            let _ = write!(out, ", {})", sp.show(a));
        }
        Formula::Const(a) => {
            let _ = write!(out, "const {}", sp.show(a));
        }
        Formula::Neg(g) => {
            out.push_str("not ");
            write_formula(g, sp, out);
        }
        Formula::SigmaMu(mu, g) => {
            out.push_str("sigma[");
            if let Some(cfg) = sp.store() {
                let mut first = true;
                for (s, w) in mu.iter().enumerate().filter(|(_, w)| **w != 0.0) {
                    if !first {
                        out.push_str(", ");
                    }
                    first = false;
                    let _ = write!(out, "{}: {}", cfg.describe(s), w);
                }
            }
            out.push_str("](");
            write_formula(g, sp, out);
            out.push(')');
        }
        Formula::Mix(g, h) => {
            out.push_str("mix(");
            write_formula(g, sp, out);
            out.push_str(", ");
            write_formula(h, sp, out);
            out.push(')');
        }
    }
}
