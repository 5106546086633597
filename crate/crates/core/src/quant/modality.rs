use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::space::{NotInSpace, StoreConfig, Truth, TruthSpace};
use crate::effects::Op;
use crate::lang::Name;

/// A user-supplied combinator: `(space, parameter, child values) ↦ value`.
pub type Combinator = Arc<dyn Fn(&TruthSpace, Option<u64>, &[Truth]) -> Truth + Send + Sync>;

/// How a modality collapses one operator node.
#[derive(Clone)]
pub enum Rule {
    /// `(a + b) / 2`, pointwise on tables.
    Average,
    Join,
    Meet,
    /// `{s | s ∈ tₛ₍ₗ₎}` on sets, `s ↦ tₛ₍ₗ₎(s)` on tables.
    Lookup,
    /// `{s | s[l:=m] ∈ t}` on sets, `s ↦ t(s[l:=m])` on tables.
    Update,
    /// `c + x`.
    AddCost,
    /// A childless node evaluates to a fixed value.
    Constant(Truth),
    Custom(Combinator),
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Average => f.write_str("Average"),
            Rule::Join => f.write_str("Join"),
            Rule::Meet => f.write_str("Meet"),
            Rule::Lookup => f.write_str("Lookup"),
            Rule::Update => f.write_str("Update"),
            Rule::AddCost => f.write_str("AddCost"),
            Rule::Constant(a) => write!(f, "Constant({:?})", a),
            Rule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModalityError {
    #[error("modality {modality} has no rule for `{op}`")]
    NoRule { modality: String, op: String },
    #[error("modality {0} already has a rule for nor")]
    NorDefined(String),
    #[error("error valuation is missing a value for `{0}`")]
    ErrorNotTotal(Name),
    #[error("error valuation mentions unknown error `{0}`")]
    UnknownError(Name),
    #[error(transparent)]
    NotInSpace(#[from] NotInSpace),
    #[error("modality {0} is not declared leaf-monotone; interval bounds would be unsound")]
    NotLeafMonotone(String),
    #[error("rule {rule} needs {needs}, but modality {modality} targets {space}")]
    WrongSpace { modality: String, rule: &'static str, needs: &'static str, space: String },
    #[error("location `{0}` is not part of the store configuration")]
    UnknownLocation(Name),
    #[error("valuation is not defined on a leaf of the tree")]
    ValuationNotTotal,
    #[error("malformed `{0}` node")]
    Malformed(String),
}

#[derive(Clone, Debug)]
struct Entry {
    family: &'static str,
    label: Option<Name>,
    rule: Rule,
}

/// A quantitative modality: a truth space plus a rule per operator.
///
/// Leaves evaluate to themselves, `Unknown` to `bot`.
#[derive(Clone, Debug)]
pub struct ModalitySpec {
    name: String,
    space: TruthSpace,
    rules: Vec<Entry>,
    leaf_monotone: bool,
    boolean_errors: bool,
}

impl ModalitySpec {
    fn builtin(name: &str, space: TruthSpace, rules: &[(&'static str, Rule)]) -> Self {
        ModalitySpec {
            name: name.into(),
            space,
            rules: rules.iter().map(|(f, r)| Entry { family: f, label: None, rule: r.clone() }).collect(),
            leaf_monotone: true,
            boolean_errors: true,
        }
    }

    /// `E`: expected value on `[0,1]`.
    pub fn expectation() -> Self {
        Self::builtin("E", TruthSpace::Unit, &[("por", Rule::Average)])
    }

    /// `G`: the set of start states from which the computation ends well.
    pub fn global(store: Arc<StoreConfig>) -> Self {
        Self::builtin("G", TruthSpace::States(store), &[("lookup", Rule::Lookup), ("update", Rule::Update)])
    }

    /// `EG`: state-indexed expectation.
    pub fn expectation_global(store: Arc<StoreConfig>) -> Self {
        Self::builtin(
            "EG",
            TruthSpace::Tables(store),
            &[("por", Rule::Average), ("lookup", Rule::Lookup), ("update", Rule::Update)],
        )
    }

    /// `C`: accumulated cost on the reversed `[0,∞]`.
    pub fn cost() -> Self {
        Self::builtin("C", TruthSpace::Cost, &[("cost", Rule::AddCost)])
    }

    /// Boolean may-modality: some branch succeeds.
    pub fn may() -> Self {
        Self::builtin("May", TruthSpace::Bool, &[("por", Rule::Join), ("nor", Rule::Join)])
    }

    /// Boolean must-modality: every branch succeeds.
    pub fn must() -> Self {
        Self::builtin("Must", TruthSpace::Bool, &[("por", Rule::Meet), ("nor", Rule::Meet)])
    }

    /// A modality without rules. Interval evaluation is refused unless
    /// `leaf_monotone` is set.
    pub fn custom(name: &str, space: TruthSpace, leaf_monotone: bool) -> Self {
        ModalitySpec { name: name.into(), space, rules: Vec::new(), leaf_monotone, boolean_errors: true }
    }

    /// Adds or replaces the rule for an operator family (`"por"`, `"lookup"`,
    /// ...). For `raise`, `label` picks a single error.
    pub fn with_rule(mut self, family: &'static str, label: Option<Name>, rule: Rule) -> Self {
        self.rules.retain(|e| !(e.family == family && e.label == label));
        self.rules.push(Entry { family, label, rule });
        self
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &TruthSpace {
        &self.space
    }

    pub fn is_leaf_monotone(&self) -> bool {
        self.leaf_monotone
    }

    /// Whether every error value is `bot` or `top`, the condition for
    /// membership in `O⁺`.
    pub fn is_positive(&self) -> bool {
        self.boolean_errors
    }

    pub fn rule(&self, op: &Op) -> Option<&Rule> {
        let label = match op {
            Op::Raise(e) => Some(e),
            _ => None,
        };
        let family = op.family();
        self.rules
            .iter()
            .find(|e| e.family == family && e.label.as_ref() == label)
            .or_else(|| self.rules.iter().find(|e| e.family == family && e.label.is_none()))
            .map(|e| &e.rule)
    }

    pub(crate) fn require(&self, op: &Op) -> Result<&Rule, ModalityError> {
        self.rule(op).ok_or_else(|| ModalityError::NoRule { modality: self.name.clone(), op: op.to_string() })
    }

    fn store(&self, rule: &'static str) -> Result<&Arc<StoreConfig>, ModalityError> {
        self.space.store().ok_or_else(|| ModalityError::WrongSpace {
            modality: self.name.clone(),
            rule,
            needs: "a state-indexed space",
            space: self.space.to_string(),
        })
    }

    pub(crate) fn location(&self, op: &Op) -> Result<(Arc<StoreConfig>, usize), ModalityError> {
        let (Op::Lookup(l) | Op::Update(l)) = op else {
            return Err(ModalityError::Malformed(op.to_string()));
        };
        let cfg = self.store(op.family())?;
        let i = cfg.location_index(l).ok_or_else(|| ModalityError::UnknownLocation(l.clone()))?;
        Ok((cfg.clone(), i))
    }

    /// Applies a non-lookup rule to already evaluated children.
    pub(crate) fn combine(&self, op: &Op, param: Option<u64>, kids: &[Truth]) -> Result<Truth, ModalityError> {
        let sp = &self.space;
        let arity = |n: usize| if kids.len() == n { Ok(()) } else { Err(ModalityError::Malformed(op.to_string())) };
        match self.require(op)? {
            Rule::Average => {
                arity(2)?;
                match (&kids[0], &kids[1]) {
                    (Truth::Real(a), Truth::Real(b)) if *sp == TruthSpace::Unit => Ok(Truth::Real((a + b) / 2.0)),
                    (Truth::Table(a), Truth::Table(b)) => {
                        Ok(Truth::Table(a.iter().zip(b.iter()).map(|(x, y)| (x + y) / 2.0).collect()))
                    }
                    _ => Err(self.wrong("average", "[0,1] or [0,1]^S")),
                }
            }
            Rule::Join => Ok(sp.join(kids)),
            Rule::Meet => Ok(sp.meet(kids)),
            Rule::AddCost => {
                arity(1)?;
                let (Op::Cost(c), Truth::Real(x)) = (op, &kids[0]) else {
                    return Err(self.wrong("cost", "[0,inf]"));
                };
                if *sp != TruthSpace::Cost {
                    return Err(self.wrong("cost", "[0,inf]"));
                }
                Ok(Truth::Real(c.get() + x))
            }
            Rule::Update => {
                arity(1)?;
                let (cfg, i) = self.location(op)?;
                let m = param.ok_or_else(|| ModalityError::Malformed(op.to_string()))?;
                let n = cfg.num_states();
                match &kids[0] {
                    Truth::States(d) => Ok(Truth::States(super::StateSet::from_fn(n, |s| d.contains(cfg.set(s, i, m))))),
                    Truth::Table(d) => Ok(Truth::Table((0..n).map(|s| d[cfg.set(s, i, m)]).collect())),
                    _ => Err(self.wrong("update", "P(S) or [0,1]^S")),
                }
            }
            Rule::Lookup => {
                let (cfg, i) = self.location(op)?;
                if kids.len() != cfg.value_bound() as usize {
                    return Err(ModalityError::Malformed(op.to_string()));
                }
                let n = cfg.num_states();
                let pick = |s: usize| &kids[cfg.get(s, i) as usize];
                match &kids[0] {
                    Truth::States(_) => Ok(Truth::States(super::StateSet::from_fn(n, |s| match pick(s) {
                        Truth::States(d) => d.contains(s),
                        _ => false,
                    }))),
                    Truth::Table(_) => Ok(Truth::Table(
                        (0..n)
                            .map(|s| match pick(s) {
                                Truth::Table(d) => d[s],
                                _ => 0.0,
                            })
                            .collect(),
                    )),
                    _ => Err(self.wrong("lookup", "P(S) or [0,1]^S")),
                }
            }
            Rule::Constant(a) => Ok(a.clone()),
            Rule::Custom(f) => Ok(f(sp, param, kids)),
        }
    }

    fn wrong(&self, rule: &'static str, needs: &'static str) -> ModalityError {
        ModalityError::WrongSpace { modality: self.name.clone(), rule, needs, space: self.space.to_string() }
    }
}

/// `(q◇, q□)`: `nor` becomes join, respectively meet, of the branches.
pub fn make_nondet_variants(q: &ModalitySpec) -> Result<(ModalitySpec, ModalitySpec), ModalityError> {
    if q.rule(&Op::Nor).is_some() {
        return Err(ModalityError::NorDefined(q.name.clone()));
    }
    let opt = q.clone().with_rule("nor", None, Rule::Join).renamed(&alloc::format!("{}opt", q.name));
    let pes = q.clone().with_rule("nor", None, Rule::Meet).renamed(&alloc::format!("{}pes", q.name));
    Ok((opt, pes))
}

/// `q_f`: each `raise[e]` evaluates to `f(e)`. `f` must be defined on exactly
/// the labels in `errors`.
pub fn make_error_lift(
    q: &ModalitySpec,
    f: &BTreeMap<Name, Truth>,
    errors: &[Name],
) -> Result<ModalitySpec, ModalityError> {
    if let Some(extra) = f.keys().find(|e| !errors.contains(e)) {
        return Err(ModalityError::UnknownError(extra.clone()));
    }
    let mut out = q.clone().renamed(&alloc::format!("{}_f", q.name));
    let (top, bot) = (q.space.top(), q.space.bot());
    for e in errors {
        let a = f.get(e).ok_or_else(|| ModalityError::ErrorNotTotal(e.clone()))?;
        q.space.check(a)?;
        out.boolean_errors &= *a == top || *a == bot;
        out = out.with_rule("raise", Some(e.clone()), Rule::Constant(a.clone()));
    }
    Ok(out)
}
