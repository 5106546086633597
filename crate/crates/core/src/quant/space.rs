use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::lang::lexer::Tok;
use crate::lang::{Name, ParseError, Parser};

/// Locations and the bound on stored values. States are the maps
/// `L → {0, …, V−1}`, indexed by `Σ s(lᵢ)·Vⁱ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoreConfig {
    locations: Vec<Name>,
    value_bound: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("value bound must be at least 1")]
    ZeroBound,
    #[error("duplicate location `{0}`")]
    Duplicate(Name),
    #[error("state space too large ({0} locations)")]
    TooLarge(usize),
}

impl StoreConfig {
    pub fn new(locations: Vec<Name>, value_bound: u64) -> Result<Self, StoreError> {
        if value_bound == 0 {
            return Err(StoreError::ZeroBound);
        }
        for (i, l) in locations.iter().enumerate() {
            if locations[..i].contains(l) {
                return Err(StoreError::Duplicate(l.clone()));
            }
        }
        let mut n: u64 = 1;
        for _ in &locations {
            n = n.checked_mul(value_bound).filter(|n| *n <= 1 << 20).ok_or(StoreError::TooLarge(locations.len()))?;
        }
        Ok(StoreConfig { locations, value_bound })
    }

    pub fn locations(&self) -> &[Name] {
        &self.locations
    }

    pub fn value_bound(&self) -> u64 {
        self.value_bound
    }

    pub fn num_states(&self) -> usize {
        (self.value_bound as usize).pow(self.locations.len() as u32)
    }

    pub fn location_index(&self, l: &Name) -> Option<usize> {
        self.locations.iter().position(|x| x == l)
    }

    fn stride(&self, i: usize) -> usize {
        (self.value_bound as usize).pow(i as u32)
    }

    /// `s(lᵢ)`.
    pub fn get(&self, s: usize, i: usize) -> u64 {
        ((s / self.stride(i)) % self.value_bound as usize) as u64
    }

    /// `s[lᵢ := m mod V]`.
    pub fn set(&self, s: usize, i: usize, m: u64) -> usize {
        let old = self.get(s, i) as usize;
        let new = (m % self.value_bound) as usize;
        s - old * self.stride(i) + new * self.stride(i)
    }

    /// The state with the given cell values (reduced mod V).
    pub fn state(&self, values: &[u64]) -> usize {
        values.iter().enumerate().fold(0, |s, (i, v)| self.set(s, i, *v))
    }

    /// `(l=0, r=1)`
    pub fn describe(&self, s: usize) -> String {
        let mut out = String::from("(");
        for (i, l) in self.locations.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}={}", l, self.get(s, i));
        }
        out.push(')');
        out
    }
}

/// A subset of a finite state space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateSet {
    len: usize,
    words: Vec<u64>,
}

impl StateSet {
    pub fn empty(len: usize) -> Self {
        StateSet { len, words: alloc::vec![0; len.div_ceil(64)] }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        (0..len).for_each(|i| s.insert(i));
        s
    }

    pub fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> Self {
        let mut s = Self::empty(len);
        (0..len).filter(|i| f(*i)).for_each(|i| s.insert(i));
        s
    }

    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "state {} out of range", i);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|i| self.contains(*i))
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn complement(&self) -> StateSet {
        StateSet::from_fn(self.len, |i| !self.contains(i))
    }

    fn zip(&self, other: &StateSet, f: impl Fn(u64, u64) -> u64) -> StateSet {
        debug_assert_eq!(self.len, other.len);
        StateSet { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| f(*a, *b)).collect() }
    }
}

/// One of the five shipped complete lattices with involution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TruthSpace {
    Bool,
    /// `[0,1]` with the usual order.
    Unit,
    /// `P(S)` ordered by inclusion.
    States(Arc<StoreConfig>),
    /// `[0,1]^S` ordered pointwise.
    Tables(Arc<StoreConfig>),
    /// `[0,∞]` with the reversed order: `top = 0`, `bot = ∞`.
    Cost,
}

/// A truth value. Which variants are meaningful depends on the space.
#[derive(Clone, Debug, PartialEq)]
pub enum Truth {
    Bool(bool),
    Real(f64),
    States(StateSet),
    Table(Arc<[f64]>),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("`{value}` is not a truth value of {space}")]
pub struct NotInSpace {
    pub value: String,
    pub space: String,
}

impl core::fmt::Display for TruthSpace {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TruthSpace::Bool => f.write_str("Bool"),
            TruthSpace::Unit => f.write_str("[0,1]"),
            TruthSpace::States(_) => f.write_str("P(S)"),
            TruthSpace::Tables(_) => f.write_str("[0,1]^S"),
            TruthSpace::Cost => f.write_str("[0,inf] (reversed)"),
        }
    }
}

impl TruthSpace {
    pub fn store(&self) -> Option<&Arc<StoreConfig>> {
        match self {
            TruthSpace::States(c) | TruthSpace::Tables(c) => Some(c),
            _ => None,
        }
    }

    fn states(&self) -> usize {
        self.store().map(|c| c.num_states()).unwrap_or(0)
    }

    pub fn top(&self) -> Truth {
        match self {
            TruthSpace::Bool => Truth::Bool(true),
            TruthSpace::Unit => Truth::Real(1.0),
            TruthSpace::States(_) => Truth::States(StateSet::full(self.states())),
            TruthSpace::Tables(_) => Truth::Table(alloc::vec![1.0; self.states()].into()),
            TruthSpace::Cost => Truth::Real(0.0),
        }
    }

    pub fn bot(&self) -> Truth {
        match self {
            TruthSpace::Bool => Truth::Bool(false),
            TruthSpace::Unit => Truth::Real(0.0),
            TruthSpace::States(_) => Truth::States(StateSet::empty(self.states())),
            TruthSpace::Tables(_) => Truth::Table(alloc::vec![0.0; self.states()].into()),
            TruthSpace::Cost => Truth::Real(f64::INFINITY),
        }
    }

    /// Whether `a` is an element of this space.
    pub fn contains(&self, a: &Truth) -> bool {
        match (self, a) {
            (TruthSpace::Bool, Truth::Bool(_)) => true,
            (TruthSpace::Unit, Truth::Real(x)) => (0.0..=1.0).contains(x),
            (TruthSpace::Cost, Truth::Real(x)) => *x >= 0.0,
            (TruthSpace::States(_), Truth::States(s)) => s.universe() == self.states(),
            (TruthSpace::Tables(_), Truth::Table(t)) => {
                t.len() == self.states() && t.iter().all(|x| (0.0..=1.0).contains(x))
            }
            _ => false,
        }
    }

    pub fn check(&self, a: &Truth) -> Result<(), NotInSpace> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(NotInSpace { value: alloc::format!("{:?}", a), space: self.to_string() })
        }
    }

    /// The lattice order.
    pub fn leq(&self, a: &Truth, b: &Truth) -> bool {
        match (a, b) {
            (Truth::Bool(x), Truth::Bool(y)) => !x || *y,
            (Truth::Real(x), Truth::Real(y)) => match self {
                TruthSpace::Cost => x >= y,
                _ => x <= y,
            },
            (Truth::States(x), Truth::States(y)) => x.is_subset(y),
            (Truth::Table(x), Truth::Table(y)) => x.iter().zip(y.iter()).all(|(p, q)| p <= q),
            _ => panic!("leq on values of different kinds"),
        }
    }

    pub fn join2(&self, a: &Truth, b: &Truth) -> Truth {
        match (a, b) {
            (Truth::Bool(x), Truth::Bool(y)) => Truth::Bool(*x || *y),
            (Truth::Real(x), Truth::Real(y)) => Truth::Real(match self {
                TruthSpace::Cost => x.min(*y),
                _ => x.max(*y),
            }),
            (Truth::States(x), Truth::States(y)) => Truth::States(x.union(y)),
            (Truth::Table(x), Truth::Table(y)) => Truth::Table(x.iter().zip(y.iter()).map(|(p, q)| p.max(*q)).collect()),
            _ => panic!("join on values of different kinds"),
        }
    }

    pub fn meet2(&self, a: &Truth, b: &Truth) -> Truth {
        match (a, b) {
            (Truth::Bool(x), Truth::Bool(y)) => Truth::Bool(*x && *y),
            (Truth::Real(x), Truth::Real(y)) => Truth::Real(match self {
                TruthSpace::Cost => x.max(*y),
                _ => x.min(*y),
            }),
            (Truth::States(x), Truth::States(y)) => Truth::States(x.intersection(y)),
            (Truth::Table(x), Truth::Table(y)) => Truth::Table(x.iter().zip(y.iter()).map(|(p, q)| p.min(*q)).collect()),
            _ => panic!("meet on values of different kinds"),
        }
    }

    /// Least upper bound; `bot` for the empty family.
    pub fn join<'a>(&self, xs: impl IntoIterator<Item = &'a Truth>) -> Truth {
        xs.into_iter().fold(self.bot(), |acc, x| self.join2(&acc, x))
    }

    /// Greatest lower bound; `top` for the empty family.
    pub fn meet<'a>(&self, xs: impl IntoIterator<Item = &'a Truth>) -> Truth {
        xs.into_iter().fold(self.top(), |acc, x| self.meet2(&acc, x))
    }

    pub fn neg(&self, a: &Truth) -> Truth {
        match a {
            Truth::Bool(x) => Truth::Bool(!x),
            Truth::Real(x) => Truth::Real(match self {
                TruthSpace::Cost if *x == 0.0 => f64::INFINITY,
                TruthSpace::Cost => 1.0 / x,
                _ => 1.0 - x,
            }),
            Truth::States(s) => Truth::States(s.complement()),
            Truth::Table(t) => Truth::Table(t.iter().map(|x| 1.0 - x).collect()),
        }
    }

    pub fn approx_eq(&self, a: &Truth, b: &Truth, tol: f64) -> bool {
        let close = |x: f64, y: f64| x == y || (x - y).abs() <= tol;
        match (a, b) {
            (Truth::Real(x), Truth::Real(y)) => close(*x, *y),
            (Truth::Table(x), Truth::Table(y)) => x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| close(*p, *q)),
            _ => a == b,
        }
    }

    /// Renders `a` in the literal syntax accepted by [`TruthSpace::parse`].
    pub fn show(&self, a: &Truth) -> String {
        match a {
            Truth::Bool(true) => "tt".into(),
            Truth::Bool(false) => "ff".into(),
            Truth::Real(x) if x.is_infinite() => "inf".into(),
            Truth::Real(x) => alloc::format!("{}", x),
            Truth::States(s) => {
                let cfg = self.store().expect("state sets live in P(S)");
                let parts: Vec<String> = s.iter().map(|i| cfg.describe(i)).collect();
                alloc::format!("states[{}]", parts.join(", "))
            }
            Truth::Table(t) => {
                let cfg = self.store().expect("tables live in [0,1]^S");
                if t.iter().all(|x| *x == t[0]) {
                    return alloc::format!("{}", t[0]);
                }
                let parts: Vec<String> =
                    t.iter().enumerate().map(|(i, x)| alloc::format!("{}: {}", cfg.describe(i), x)).collect();
                alloc::format!("table[{}]", parts.join(", "))
            }
        }
    }

    pub fn parse(&self, text: &str) -> Result<Truth, ParseError> {
        let mut p = Parser::new(text, None)?;
        let a = self.parse_with(&mut p)?;
        p.expect_eof()?;
        Ok(a)
    }

    /// Parses a truth-value literal of this space.
    pub fn parse_with(&self, p: &mut Parser<'_>) -> Result<Truth, ParseError> {
        let pos = p.pos();
        if p.eat_kw("top") {
            return Ok(self.top());
        }
        if p.eat_kw("bot") {
            return Ok(self.bot());
        }
        let out = match self {
            TruthSpace::Bool => {
                if p.eat_kw("tt") {
                    Truth::Bool(true)
                } else if p.eat_kw("ff") {
                    Truth::Bool(false)
                } else {
                    return p.error("`tt`, `ff`, `top` or `bot`");
                }
            }
            TruthSpace::Unit => Truth::Real(p.number()?),
            TruthSpace::Cost => {
                if p.eat_kw("inf") {
                    Truth::Real(f64::INFINITY)
                } else {
                    Truth::Real(p.number()?)
                }
            }
            TruthSpace::States(cfg) => {
                let n = cfg.num_states();
                if p.eat_kw("where") {
                    let cs = constraints(p, cfg)?;
                    Truth::States(StateSet::from_fn(n, |s| cs.iter().all(|(i, v)| cfg.get(s, *i) == *v)))
                } else if p.eat_kw("states") {
                    p.expect_sym("[")?;
                    let mut set = StateSet::empty(n);
                    if !p.is_sym("]") {
                        loop {
                            set.insert(state_literal(p, cfg)?);
                            if !p.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    p.expect_sym("]")?;
                    Truth::States(set)
                } else {
                    return p.error("`where(...)`, `states[...]`, `top` or `bot`");
                }
            }
            TruthSpace::Tables(cfg) => {
                let n = cfg.num_states();
                if p.eat_kw("table") {
                    p.expect_sym("[")?;
                    let mut t = alloc::vec![0.0; n];
                    if !p.is_sym("]") {
                        loop {
                            let s = state_literal(p, cfg)?;
                            p.expect_sym(":")?;
                            t[s] = p.number()?;
                            if !p.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    p.expect_sym("]")?;
                    Truth::Table(t.into())
                } else if matches!(p.peek(), Tok::Number(_)) {
                    let x = p.number()?;
                    Truth::Table(alloc::vec![x; n].into())
                } else {
                    return p.error("a number, `table[...]`, `top` or `bot`");
                }
            }
        };
        if !self.contains(&out) {
            return Err(ParseError::Invalid { pos, message: alloc::format!("value out of range for {}", self) });
        }
        Ok(out)
    }
}

/// `(l=0, r=1)`: a list of location constraints.
fn constraints(p: &mut Parser<'_>, cfg: &StoreConfig) -> Result<Vec<(usize, u64)>, ParseError> {
    p.expect_sym("(")?;
    let mut out = Vec::new();
    if !p.is_sym(")") {
        loop {
            let pos = p.pos();
            let l = p.name()?;
            let i = cfg.location_index(&l).ok_or_else(|| ParseError::Invalid {
                pos,
                message: alloc::format!("unknown location `{}`", l),
            })?;
            p.expect_sym("=")?;
            let vpos = p.pos();
            let v = p.natural()?;
            if v >= cfg.value_bound() {
                return Err(ParseError::Invalid { pos: vpos, message: "value exceeds the value bound".into() });
            }
            out.push((i, v));
            if !p.eat_sym(",") {
                break;
            }
        }
    }
    p.expect_sym(")")?;
    Ok(out)
}

/// A fully specified state `(l=0, r=1)`.
fn state_literal(p: &mut Parser<'_>, cfg: &StoreConfig) -> Result<usize, ParseError> {
    let pos = p.pos();
    let cs = constraints(p, cfg)?;
    let mut vals = alloc::vec![None; cfg.locations().len()];
    for (i, v) in cs {
        vals[i] = Some(v);
    }
    if vals.iter().any(Option::is_none) {
        return Err(ParseError::Invalid { pos, message: "a state must give every location a value".into() });
    }
    Ok(cfg.state(&vals.into_iter().map(|v| v.unwrap()).collect::<Vec<_>>()))
}
