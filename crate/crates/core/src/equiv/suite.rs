use alloc::string::String;
use alloc::vec::Vec;

use crate::lang::{ComType, Comp, OpArgs, Term, Type, ValType, Value};
use crate::logic::{Formula, Logic};
use crate::quant::Truth;

/// Raw material for formula enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct Pools {
    pub numerals: Vec<u64>,
    /// Closed argument values per domain type, for `(V . φ)`.
    pub args: Vec<(ValType, Vec<Value>)>,
    /// Values for `const a`.
    pub constants: Vec<Truth>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SuiteError {
    #[error("no argument values for domain type {0}")]
    EmptyArgumentPool(ValType),
    #[error("the terms have types {0} and {1}")]
    TypeMismatch(String, String),
    #[error(transparent)]
    Logic(#[from] crate::logic::LogicError),
}

impl Pools {
    /// Numerals found in `terms` plus 0 and 1; `bot` and `top` as
    /// constants; argument values for first-order domains built from the
    /// numerals.
    pub fn from_terms(logic: &Logic, terms: &[&Term]) -> Self {
        let mut numerals = alloc::vec![0, 1];
        for t in terms {
            match t {
                Term::Val(v) => value_numerals(v, &mut numerals),
                Term::Com(m) => comp_numerals(m, &mut numerals),
            }
        }
        numerals.sort_unstable();
        numerals.dedup();
        let sp = logic.space();
        Pools { numerals, args: Vec::new(), constants: alloc::vec![sp.bot(), sp.top()] }
    }

    pub fn with_args(mut self, ty: ValType, values: Vec<Value>) -> Self {
        self.args.retain(|(t, _)| *t != ty);
        self.args.push((ty, values));
        self
    }

    /// The argument values at `ty`: the explicit entry if any, otherwise
    /// the canonical first-order values (at most eight).
    pub fn args_at(&self, ty: &ValType) -> Vec<Value> {
        if let Some((_, vs)) = self.args.iter().find(|(t, _)| t == ty) {
            return vs.clone();
        }
        let mut out = self.canonical(ty, 2);
        out.truncate(8);
        out
    }

    fn canonical(&self, ty: &ValType, depth: usize) -> Vec<Value> {
        match ty {
            ValType::Unit => alloc::vec![Value::Unit],
            ValType::Nat => self.numerals.iter().map(|n| Value::numeral(*n)).collect(),
            ValType::Thunk(_) => Vec::new(),
            _ if depth == 0 => Vec::new(),
            ValType::Sum(fs) => fs
                .iter()
                .flat_map(|(l, a)| self.canonical(a, depth - 1).into_iter().map(move |v| Value::inj(l.clone(), v)))
                .collect(),
            ValType::Pair(a, b) => {
                let (xs, ys) = (self.canonical(a, depth - 1), self.canonical(b, depth - 1));
                xs.iter().flat_map(|x| ys.iter().map(move |y| Value::pair(x.clone(), y.clone()))).collect()
            }
        }
    }
}

fn value_numerals(v: &Value, out: &mut Vec<u64>) {
    if let Some(n) = v.numeral_value() {
        out.push(n);
        return;
    }
    match v {
        Value::Thunk(m) => comp_numerals(m, out),
        Value::Inj(_, w) | Value::Succ(w) => value_numerals(w, out),
        Value::Pair(a, b) => {
            value_numerals(a, out);
            value_numerals(b, out);
        }
        _ => {}
    }
}

fn comp_numerals(m: &Comp, out: &mut Vec<u64>) {
    match m {
        Comp::CaseNat { scrutinee, zero, succ, .. } => {
            value_numerals(scrutinee, out);
            comp_numerals(zero, out);
            comp_numerals(succ, out);
        }
        Comp::Let { value, body, .. } => {
            value_numerals(value, out);
            comp_numerals(body, out);
        }
        Comp::Return(v) | Comp::Force(v) => value_numerals(v, out),
        Comp::To { first, then, .. } => {
            comp_numerals(first, out);
            comp_numerals(then, out);
        }
        Comp::Lambda { body, .. } | Comp::Fix(body) | Comp::Proj(body, _) => comp_numerals(body, out),
        Comp::App(f, v) => {
            comp_numerals(f, out);
            value_numerals(v, out);
        }
        Comp::CaseSum { scrutinee, branches } => {
            value_numerals(scrutinee, out);
            for b in branches {
                comp_numerals(&b.body, out);
            }
        }
        Comp::CasePair { scrutinee, body, .. } => {
            value_numerals(scrutinee, out);
            comp_numerals(body, out);
        }
        Comp::Tuple(cs) => cs.iter().for_each(|(_, c)| comp_numerals(c, out)),
        Comp::Op(call) => {
            if let Some(p) = &call.param {
                value_numerals(p, out);
            }
            match &call.args {
                OpArgs::Finite(cs) => cs.iter().for_each(|c| comp_numerals(c, out)),
                OpArgs::Bind(_, body) => comp_numerals(body, out),
            }
        }
    }
}

/// An ordered list of closed formulas at one type.
#[derive(Clone, Debug, PartialEq)]
pub struct FormulaSuite {
    pub ty: Type,
    pub formulas: Vec<Formula>,
    pub size: usize,
    pub pools: Pools,
}

/// All basic formulas at `ty` of size at most `size`, smallest first.
pub fn enumerate_basic_formulas(logic: &Logic, ty: &Type, size: usize, pools: &Pools) -> Result<FormulaSuite, SuiteError> {
    let mut e = Enumerator::new(logic, pools);
    let mut formulas = Vec::new();
    for k in 1..=size {
        formulas.extend(e.basic(ty, k)?);
    }
    Ok(FormulaSuite { ty: ty.clone(), formulas, size, pools: pools.clone() })
}

/// Memoised enumeration by exact size.
pub(crate) struct Enumerator<'a> {
    logic: &'a Logic,
    pools: &'a Pools,
    basic: Vec<((Type, usize), Vec<Formula>)>,
    inner: Vec<((Type, usize), Vec<Formula>)>,
}

impl<'a> Enumerator<'a> {
    pub(crate) fn new(logic: &'a Logic, pools: &'a Pools) -> Self {
        Enumerator { logic, pools, basic: Vec::new(), inner: Vec::new() }
    }

    /// Basic formulas of size exactly `k`.
    pub(crate) fn basic(&mut self, ty: &Type, k: usize) -> Result<Vec<Formula>, SuiteError> {
        if let Some((_, fs)) = self.basic.iter().find(|((t, n), _)| t == ty && *n == k) {
            return Ok(fs.clone());
        }
        let fs = self.basic_uncached(ty, k)?;
        self.basic.push(((ty.clone(), k), fs.clone()));
        Ok(fs)
    }

    fn basic_uncached(&mut self, ty: &Type, k: usize) -> Result<Vec<Formula>, SuiteError> {
        use alloc::sync::Arc;
        if k == 0 {
            return Ok(Vec::new());
        }
        let val = |t: &ValType| Type::Val(t.clone());
        let com = |t: &ComType| Type::Com(t.clone());
        let mut out = Vec::new();
        match ty {
            Type::Val(ValType::Nat) => {
                if k == 1 {
                    out.extend(self.pools.numerals.iter().map(|n| Formula::NatEq(*n)));
                }
            }
            Type::Val(ValType::Unit) => {}
            Type::Val(ValType::Thunk(c)) => {
                out.extend(self.inner(&com(c), k - 1)?.into_iter().map(Formula::thunk));
            }
            Type::Val(ValType::Sum(fs)) => {
                for (l, a) in fs {
                    out.extend(self.inner(&val(a), k - 1)?.into_iter().map(|f| Formula::inj(l.clone(), f)));
                }
            }
            Type::Val(ValType::Pair(a, b)) => {
                out.extend(self.inner(&val(a), k - 1)?.into_iter().map(|f| Formula::Fst(Arc::new(f))));
                out.extend(self.inner(&val(b), k - 1)?.into_iter().map(|f| Formula::Snd(Arc::new(f))));
            }
            Type::Com(ComType::Arrow(a, c)) => {
                let vs = self.pools.args_at(a);
                if vs.is_empty() {
                    return Err(SuiteError::EmptyArgumentPool((**a).clone()));
                }
                let body = self.inner(&com(c), k - 1)?;
                for v in vs {
                    out.extend(body.iter().map(|f| Formula::arg(v.clone(), f.clone())));
                }
            }
            Type::Com(ComType::Prod(fs)) => {
                for (l, c) in fs {
                    out.extend(self.inner(&com(c), k - 1)?.into_iter().map(|f| Formula::proj(l.clone(), f)));
                }
            }
            Type::Com(ComType::Producer(a)) => {
                let body = self.inner(&val(a), k - 1)?;
                for q in self.logic.modality_names() {
                    out.extend(body.iter().map(|f| Formula::modal(&q, f.clone())));
                }
            }
        }
        Ok(out)
    }

    /// Bodies: basic formulas, constants, and binary conjunctions then
    /// disjunctions of smaller bodies.
    fn inner(&mut self, ty: &Type, k: usize) -> Result<Vec<Formula>, SuiteError> {
        if let Some((_, fs)) = self.inner.iter().find(|((t, n), _)| t == ty && *n == k) {
            return Ok(fs.clone());
        }
        let mut out = self.basic(ty, k)?;
        if k == 1 {
            out.extend(self.pools.constants.iter().map(|a| Formula::Const(a.clone())));
        }
        if k >= 3 {
            let mut pairs = Vec::new();
            for k1 in 1..=(k - 1) / 2 {
                let k2 = k - 1 - k1;
                let xs = self.inner(ty, k1)?;
                let ys = self.inner(ty, k2)?;
                for (i, x) in xs.iter().enumerate() {
                    for (j, y) in ys.iter().enumerate() {
                        if k1 == k2 && j <= i {
                            continue;
                        }
                        pairs.push((x.clone(), y.clone()));
                    }
                }
            }
            out.extend(pairs.iter().map(|(x, y)| Formula::and(alloc::vec![x.clone(), y.clone()])));
            out.extend(pairs.into_iter().map(|(x, y)| Formula::or(alloc::vec![x, y])));
        }
        self.inner.push(((ty.clone(), k), out.clone()));
        Ok(out)
    }
}

