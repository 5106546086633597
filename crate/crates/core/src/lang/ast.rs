use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::effects::Op;

/// A variable, location or error name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Index of a sum or product component. Integer labels sort numerically and
/// before identifier labels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(s: &str) -> Self {
        Label(Arc::from(s))
    }

    pub fn index(i: usize) -> Self {
        Label(Arc::from(alloc::format!("{}", i).as_str()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_index(&self) -> Option<usize> {
        if self.0.is_empty() || !self.0.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if self.0.len() > 1 && self.0.starts_with('0') {
            return None;
        }
        self.0.parse().ok()
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.as_index(), other.as_index()) {
            (Some(a), Some(b)) => a.cmp(&b),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeFormError {
    #[error("empty {0} type")]
    Empty(&'static str),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(Label),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValType {
    Unit,
    Nat,
    Thunk(Box<ComType>),
    /// Components sorted by label.
    Sum(Vec<(Label, ValType)>),
    Pair(Box<ValType>, Box<ValType>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ComType {
    Producer(Box<ValType>),
    Arrow(Box<ValType>, Box<ComType>),
    /// Components sorted by label.
    Prod(Vec<(Label, ComType)>),
}

fn sorted_labels<T>(kind: &'static str, mut fields: Vec<(Label, T)>) -> Result<Vec<(Label, T)>, TypeFormError> {
    if fields.is_empty() {
        return Err(TypeFormError::Empty(kind));
    }
    fields.sort_by(|a, b| a.0.cmp(&b.0));
    for w in fields.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(TypeFormError::DuplicateLabel(w[0].0.clone()));
        }
    }
    Ok(fields)
}

impl ValType {
    pub fn thunk(c: ComType) -> Self {
        ValType::Thunk(Box::new(c))
    }

    pub fn pair(a: ValType, b: ValType) -> Self {
        ValType::Pair(Box::new(a), Box::new(b))
    }

    pub fn sum(fields: Vec<(Label, ValType)>) -> Result<Self, TypeFormError> {
        sorted_labels("sum", fields).map(ValType::Sum)
    }

    /// `A₀ + A₁ + …` with integer labels.
    pub fn binary_sum(parts: Vec<ValType>) -> Result<Self, TypeFormError> {
        Self::sum(parts.into_iter().enumerate().map(|(i, t)| (Label::index(i), t)).collect())
    }

    pub fn sum_component(&self, label: &Label) -> Option<&ValType> {
        match self {
            ValType::Sum(fs) => fs.iter().find(|(l, _)| l == label).map(|(_, t)| t),
            _ => None,
        }
    }
}

impl ComType {
    pub fn producer(a: ValType) -> Self {
        ComType::Producer(Box::new(a))
    }

    pub fn arrow(a: ValType, c: ComType) -> Self {
        ComType::Arrow(Box::new(a), Box::new(c))
    }

    pub fn prod(fields: Vec<(Label, ComType)>) -> Result<Self, TypeFormError> {
        sorted_labels("product", fields).map(ComType::Prod)
    }

    pub fn prod_component(&self, label: &Label) -> Option<&ComType> {
        match self {
            ComType::Prod(fs) => fs.iter().find(|(l, _)| l == label).map(|(_, t)| t),
            _ => None,
        }
    }
}

/// Either kind of type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Val(ValType),
    Com(ComType),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Unit,
    Zero,
    Succ(Arc<Value>),
    Var(Name),
    Thunk(Arc<Comp>),
    Inj(Label, Arc<Value>),
    Pair(Arc<Value>, Arc<Value>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    pub label: Label,
    pub var: Name,
    pub body: Comp,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OpArgs {
    /// Children of a finite-arity operator, in order.
    Finite(Vec<Comp>),
    /// `op(x. M)` for ℕ-indexed operators.
    Bind(Name, Arc<Comp>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpCall {
    pub op: Op,
    /// The ℕ parameter of `ℕ × α^n → α` operators.
    pub param: Option<Value>,
    pub args: OpArgs,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Comp {
    CaseNat { scrutinee: Value, zero: Arc<Comp>, var: Name, succ: Arc<Comp> },
    /// `let x = V in M`; the optional annotation types `V` in inference mode.
    Let { var: Name, ty: Option<ValType>, value: Value, body: Arc<Comp> },
    Return(Value),
    To { first: Arc<Comp>, var: Name, then: Arc<Comp> },
    Force(Value),
    Lambda { var: Name, ty: ValType, body: Arc<Comp> },
    App(Arc<Comp>, Value),
    CaseSum { scrutinee: Value, branches: Vec<Branch> },
    CasePair { scrutinee: Value, fst: Name, snd: Name, body: Arc<Comp> },
    Tuple(Vec<(Label, Comp)>),
    Proj(Arc<Comp>, Label),
    Fix(Arc<Comp>),
    Op(OpCall),
}

/// A value or computation term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Val(Value),
    Com(Comp),
}

impl Value {
    pub fn var(name: &str) -> Self {
        Value::Var(Name::new(name))
    }

    pub fn succ(v: Value) -> Self {
        Value::Succ(Arc::new(v))
    }

    pub fn thunk(m: Comp) -> Self {
        Value::Thunk(Arc::new(m))
    }

    pub fn inj(label: Label, v: Value) -> Self {
        Value::Inj(label, Arc::new(v))
    }

    pub fn pair(a: Value, b: Value) -> Self {
        Value::Pair(Arc::new(a), Arc::new(b))
    }

    /// The numeral `n̄`: `n` successors of zero.
    pub fn numeral(n: u64) -> Self {
        let mut v = Value::Zero;
        for _ in 0..n {
            v = Value::succ(v);
        }
        v
    }

    /// Inverse of [`Value::numeral`]; `None` on anything that is not a numeral.
    pub fn numeral_value(&self) -> Option<u64> {
        let mut n = 0u64;
        let mut v = self;
        loop {
            match v {
                Value::Zero => return Some(n),
                Value::Succ(inner) => {
                    n += 1;
                    v = inner;
                }
                _ => return None,
            }
        }
    }
}

impl Comp {
    pub fn ret(v: Value) -> Self {
        Comp::Return(v)
    }

    pub fn lambda(var: &str, ty: ValType, body: Comp) -> Self {
        Comp::Lambda { var: Name::new(var), ty, body: Arc::new(body) }
    }

    pub fn app(m: Comp, v: Value) -> Self {
        Comp::App(Arc::new(m), v)
    }

    pub fn to(first: Comp, var: &str, then: Comp) -> Self {
        Comp::To { first: Arc::new(first), var: Name::new(var), then: Arc::new(then) }
    }

    pub fn fix(m: Comp) -> Self {
        Comp::Fix(Arc::new(m))
    }

    pub fn proj(m: Comp, label: Label) -> Self {
        Comp::Proj(Arc::new(m), label)
    }

    pub fn op(op: Op, children: Vec<Comp>) -> Self {
        Comp::Op(OpCall { op, param: None, args: OpArgs::Finite(children) })
    }

    pub fn op_param(op: Op, param: Value, children: Vec<Comp>) -> Self {
        Comp::Op(OpCall { op, param: Some(param), args: OpArgs::Finite(children) })
    }

    pub fn op_bind(op: Op, var: &str, body: Comp) -> Self {
        Comp::Op(OpCall { op, param: None, args: OpArgs::Bind(Name::new(var), Arc::new(body)) })
    }

    pub fn por(a: Comp, b: Comp) -> Self {
        Comp::op(Op::Por, alloc::vec![a, b])
    }

    pub fn nor(a: Comp, b: Comp) -> Self {
        Comp::op(Op::Nor, alloc::vec![a, b])
    }

    /// Terminal terms: `return`, `λ` and tuples.
    pub fn is_terminal(&self) -> bool {
        matches!(self, Comp::Return(_) | Comp::Lambda { .. } | Comp::Tuple(_))
    }
}

impl From<Value> for Term {
    fn from(v: Value) -> Self {
        Term::Val(v)
    }
}

impl From<Comp> for Term {
    fn from(c: Comp) -> Self {
        Term::Com(c)
    }
}

impl From<ValType> for Type {
    fn from(t: ValType) -> Self {
        Type::Val(t)
    }
}

impl From<ComType> for Type {
    fn from(t: ComType) -> Self {
        Type::Com(t)
    }
}

/// Shorthand used by tests and generators.
pub fn nat() -> ValType {
    ValType::Nat
}

pub(crate) fn short(s: String, max: usize) -> String {
    if s.chars().count() <= max {
        return s;
    }
    let mut out: String = s.chars().take(max).collect();
    out.push('…');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerals_round_trip() {
        assert_eq!(Value::numeral(0), Value::Zero);
        assert_eq!(Value::numeral(2), Value::succ(Value::succ(Value::Zero)));
        for n in 0..20 {
            assert_eq!(Value::numeral(n).numeral_value(), Some(n));
        }
        assert_eq!(Value::thunk(Comp::ret(Value::Zero)).numeral_value(), None);
        assert_eq!(Value::succ(Value::var("x")).numeral_value(), None);
    }

    #[test]
    fn labels_sort_numerically_first() {
        let mut ls = alloc::vec![Label::new("b"), Label::new("10"), Label::new("2"), Label::new("a")];
        ls.sort();
        let names: Vec<&str> = ls.iter().map(|l| l.as_str()).collect();
        assert_eq!(names, ["2", "10", "a", "b"]);
    }

    #[test]
    fn sum_types_normalise_and_reject_duplicates() {
        let a = ValType::sum(alloc::vec![(Label::new("r"), ValType::Nat), (Label::new("l"), ValType::Unit)]).unwrap();
        let b = ValType::sum(alloc::vec![(Label::new("l"), ValType::Unit), (Label::new("r"), ValType::Nat)]).unwrap();
        assert_eq!(a, b);
        assert!(ValType::sum(alloc::vec![]).is_err());
        assert!(ValType::sum(alloc::vec![(Label::new("l"), ValType::Unit), (Label::new("l"), ValType::Nat)]).is_err());
        assert!(ComType::prod(alloc::vec![]).is_err());
    }

    #[test]
    fn terminal_terms() {
        assert!(Comp::ret(Value::Zero).is_terminal());
        assert!(Comp::lambda("x", ValType::Nat, Comp::ret(Value::var("x"))).is_terminal());
        assert!(Comp::Tuple(alloc::vec![]).is_terminal());
        assert!(!Comp::Force(Value::var("x")).is_terminal());
        assert!(!Comp::por(Comp::ret(Value::Zero), Comp::ret(Value::Zero)).is_terminal());
    }
}
