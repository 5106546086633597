//! Effect operators and effect signatures.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::lang::Name;

/// Arity of an effect operator over a computation type `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arity {
    /// `α^n → α`
    Finite(usize),
    /// `α^ℕ → α`; the operator binds a natural-number variable.
    NatIndexed,
    /// `ℕ × α^n → α`
    NatParam(usize),
}

/// A non-negative finite cost carried by `cost[c]` nodes.
#[derive(Clone, Copy, Debug)]
pub struct CostAmount(f64);

impl CostAmount {
    pub fn new(c: f64) -> Option<Self> {
        (c.is_finite() && c >= 0.0).then_some(CostAmount(c))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for CostAmount {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CostAmount {}

impl PartialOrd for CostAmount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CostAmount {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl core::hash::Hash for CostAmount {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state)
    }
}

impl fmt::Display for CostAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The effect operators understood by the language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    /// Fair probabilistic choice.
    Por,
    /// Nondeterministic choice.
    Nor,
    Lookup(Name),
    Update(Name),
    Cost(CostAmount),
    Raise(Name),
}

impl Op {
    pub fn arity(&self) -> Arity {
        match self {
            Op::Por | Op::Nor => Arity::Finite(2),
            Op::Lookup(_) => Arity::NatIndexed,
            Op::Update(_) => Arity::NatParam(1),
            Op::Cost(_) => Arity::Finite(1),
            Op::Raise(_) => Arity::Finite(0),
        }
    }

    /// The operator family name without its index.
    pub fn family(&self) -> &'static str {
        match self {
            Op::Por => "por",
            Op::Nor => "nor",
            Op::Lookup(_) => "lookup",
            Op::Update(_) => "update",
            Op::Cost(_) => "cost",
            Op::Raise(_) => "raise",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Por | Op::Nor => f.write_str(self.family()),
            Op::Lookup(l) | Op::Update(l) | Op::Raise(l) => write!(f, "{}[{}]", self.family(), l),
            Op::Cost(c) => write!(f, "cost[{}]", c),
        }
    }
}

/// `(name, arity)` as listed by a signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpDescriptor {
    pub name: String,
    pub arity: Arity,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SignatureError {
    #[error("duplicate {kind} `{name}` in signature")]
    Duplicate { kind: &'static str, name: Name },
    #[error("unknown signature component `{0}`")]
    UnknownComponent(String),
    #[error("the store signature needs at least one location")]
    NoLocations,
}

/// The active effect signature. Exactly the operators enabled here may occur
/// in programs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EffectSignature {
    pub prob: bool,
    pub nondet: bool,
    pub cost: bool,
    /// Store locations; `None` when global store is disabled.
    pub locations: Option<Vec<Name>>,
    /// Error labels; `None` when `raise` is disabled.
    pub errors: Option<Vec<Name>>,
}

impl EffectSignature {
    pub fn pure() -> Self {
        Self::default()
    }

    pub fn prob() -> Self {
        EffectSignature { prob: true, ..Self::default() }
    }

    pub fn nondet() -> Self {
        EffectSignature { nondet: true, ..Self::default() }
    }

    pub fn cost() -> Self {
        EffectSignature { cost: true, ..Self::default() }
    }

    pub fn store(locations: Vec<Name>) -> Result<Self, SignatureError> {
        Self::default().with_store(locations)
    }

    pub fn with_nondet(mut self) -> Self {
        self.nondet = true;
        self
    }

    pub fn with_prob(mut self) -> Self {
        self.prob = true;
        self
    }

    pub fn with_store(mut self, locations: Vec<Name>) -> Result<Self, SignatureError> {
        if locations.is_empty() {
            return Err(SignatureError::NoLocations);
        }
        check_distinct("location", &locations)?;
        self.locations = Some(locations);
        Ok(self)
    }

    pub fn with_errors(mut self, errors: Vec<Name>) -> Result<Self, SignatureError> {
        check_distinct("error label", &errors)?;
        self.errors = Some(errors);
        Ok(self)
    }

    /// Parses `prob`, `store`, `prob+store`, `cost`, `nondet`, `pure` and any
    /// `+nondet` / `+error` suffix. Locations and errors are attached later.
    pub fn from_components(spec: &str) -> Result<Self, SignatureError> {
        let mut sig = Self::default();
        let mut store = false;
        let mut error = false;
        for part in spec.split('+').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "prob" | "probability" => sig.prob = true,
                "store" | "global-store" => store = true,
                "cost" => sig.cost = true,
                "nondet" => sig.nondet = true,
                "error" => error = true,
                "pure" => {}
                other => return Err(SignatureError::UnknownComponent(other.into())),
            }
        }
        if store {
            sig.locations = Some(Vec::new());
        }
        if error {
            sig.errors = Some(Vec::new());
        }
        Ok(sig)
    }

    pub fn has_store(&self) -> bool {
        self.locations.is_some()
    }

    pub fn has_errors(&self) -> bool {
        self.errors.is_some()
    }

    pub fn locations(&self) -> &[Name] {
        self.locations.as_deref().unwrap_or(&[])
    }

    pub fn error_labels(&self) -> &[Name] {
        self.errors.as_deref().unwrap_or(&[])
    }

    /// Descriptor of `op` if the operator belongs to this signature.
    pub fn descriptor(&self, op: &Op) -> Option<OpDescriptor> {
        let enabled = match op {
            Op::Por => self.prob,
            Op::Nor => self.nondet,
            Op::Cost(_) => self.cost,
            Op::Lookup(l) | Op::Update(l) => self.locations().contains(l),
            Op::Raise(e) => self.error_labels().contains(e),
        };
        enabled.then(|| OpDescriptor { name: alloc::format!("{}", op), arity: op.arity() })
    }

    pub fn contains(&self, op: &Op) -> bool {
        self.descriptor(op).is_some()
    }

    /// Enumerates descriptors; the cost family is listed once as `cost[c]`.
    pub fn descriptors(&self) -> Vec<OpDescriptor> {
        let mut out = Vec::new();
        if self.prob {
            out.push(OpDescriptor { name: "por".into(), arity: Arity::Finite(2) });
        }
        if self.nondet {
            out.push(OpDescriptor { name: "nor".into(), arity: Arity::Finite(2) });
        }
        for l in self.locations() {
            out.push(OpDescriptor { name: alloc::format!("lookup[{}]", l), arity: Arity::NatIndexed });
            out.push(OpDescriptor { name: alloc::format!("update[{}]", l), arity: Arity::NatParam(1) });
        }
        if self.cost {
            out.push(OpDescriptor { name: "cost[c]".into(), arity: Arity::Finite(1) });
        }
        for e in self.error_labels() {
            out.push(OpDescriptor { name: alloc::format!("raise[{}]", e), arity: Arity::Finite(0) });
        }
        out
    }
}

fn check_distinct(kind: &'static str, names: &[Name]) -> Result<(), SignatureError> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(SignatureError::Duplicate { kind, name: n.clone() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_parse() {
        let sig = EffectSignature::from_components("prob+store+nondet").unwrap();
        assert!(sig.prob && sig.nondet && sig.has_store() && !sig.cost);
        assert!(EffectSignature::from_components("quantum").is_err());
    }

    #[test]
    fn membership_follows_locations() {
        let sig = EffectSignature::store(alloc::vec![Name::new("l")]).unwrap();
        assert!(sig.contains(&Op::Lookup(Name::new("l"))));
        assert!(!sig.contains(&Op::Lookup(Name::new("r"))));
        assert!(!sig.contains(&Op::Por));
        assert_eq!(sig.descriptor(&Op::Update(Name::new("l"))).unwrap().arity, Arity::NatParam(1));
    }

    #[test]
    fn duplicate_locations_rejected() {
        let l = Name::new("l");
        assert!(EffectSignature::store(alloc::vec![l.clone(), l]).is_err());
    }

    #[test]
    fn raise_has_no_children() {
        assert_eq!(Op::Raise(Name::new("e")).arity(), Arity::Finite(0));
        assert_eq!(alloc::format!("{}", Op::Cost(CostAmount::new(2.5).unwrap())), "cost[2.5]");
    }
}
