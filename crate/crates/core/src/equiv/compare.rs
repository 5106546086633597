use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::suite::{Enumerator, FormulaSuite, Pools, SuiteError};
use crate::lang::{Context, Term, Type, TypeChecker};
use crate::logic::{Formula, Logic};
use crate::quant::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `lo(left) ⋢ hi(right)`: the left term does not refine the right.
    LeftNotBelowRight,
    RightNotBelowLeft,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::LeftNotBelowRight => "left ⋢ right",
            Direction::RightNotBelowLeft => "right ⋢ left",
        })
    }
}

/// The search limits behind a negative answer.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub suite_size: usize,
    pub fuel: u64,
    pub formulas: usize,
    pub numerals: Vec<u64>,
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "suite size {}, fuel {}, {} formulas, numerals {:?}",
            self.suite_size, self.fuel, self.formulas, self.numerals
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// A certified violation: the intervals belong to the left and right
    /// term respectively.
    Distinguished { formula: Formula, left: Interval, right: Interval, direction: Direction },
    /// Both directions survived the suite.
    NoDistinctionFound(Bounds),
    /// The left term refines the right on every formula of the suite.
    RefinesUpTo(Bounds),
}

impl Verdict {
    pub fn is_distinguished(&self) -> bool {
        matches!(self, Verdict::Distinguished { .. })
    }
}

fn check_type(logic: &Logic, t: &Term, ty: &Type) -> Result<(), SuiteError> {
    let tc = TypeChecker::new(logic.signature());
    let ctx = Context::new();
    let ok = match (t, ty) {
        (Term::Val(v), Type::Val(a)) => tc.check_value(&ctx, v, a).is_ok(),
        (Term::Com(m), Type::Com(c)) => tc.check_comp(&ctx, m, c).is_ok(),
        _ => false,
    };
    if ok {
        return Ok(());
    }
    let found = tc.infer(&ctx, t).map(|a| a.to_string()).unwrap_or_else(|e| e.to_string());
    Err(SuiteError::TypeMismatch(found, ty.to_string()))
}

fn bounds(suite: &FormulaSuite, fuel: u64) -> Bounds {
    Bounds { suite_size: suite.size, fuel, formulas: suite.formulas.len(), numerals: suite.pools.numerals.clone() }
}

/// Intervals of `m` and `n` on every formula of the suite.
fn evaluate(
    logic: &Logic,
    m: &Term,
    n: &Term,
    suite: &FormulaSuite,
    fuel: u64,
) -> Result<Vec<(Interval, Interval)>, SuiteError> {
    check_type(logic, m, &suite.ty)?;
    check_type(logic, n, &suite.ty)?;
    suite.formulas.iter().map(|f| Ok((logic.sat(m, f, fuel)?, logic.sat(n, f, fuel)?))).collect()
}

/// Whether `m ⊑ n` survives the suite.
pub fn compare(logic: &Logic, m: &Term, n: &Term, suite: &FormulaSuite, fuel: u64) -> Result<Verdict, SuiteError> {
    let sp = logic.space();
    for (f, (a, b)) in suite.formulas.iter().zip(evaluate(logic, m, n, suite, fuel)?) {
        if !sp.leq(&a.lo, &b.hi) {
            return Ok(Verdict::Distinguished {
                formula: f.clone(),
                left: a,
                right: b,
                direction: Direction::LeftNotBelowRight,
            });
        }
    }
    Ok(Verdict::RefinesUpTo(bounds(suite, fuel)))
}

/// Both directions of [`compare`]: the first formula of the suite that
/// separates the terms either way.
pub fn compare_both(logic: &Logic, m: &Term, n: &Term, suite: &FormulaSuite, fuel: u64) -> Result<Verdict, SuiteError> {
    for (f, (a, b)) in suite.formulas.iter().zip(evaluate(logic, m, n, suite, fuel)?) {
        if let Some(direction) = separates(logic, &a, &b) {
            return Ok(Verdict::Distinguished { formula: f.clone(), left: a, right: b, direction });
        }
    }
    Ok(Verdict::NoDistinctionFound(bounds(suite, fuel)))
}

fn separates(logic: &Logic, a: &Interval, b: &Interval) -> Option<Direction> {
    let sp = logic.space();
    if !sp.leq(&a.lo, &b.hi) {
        Some(Direction::LeftNotBelowRight)
    } else if !sp.leq(&b.lo, &a.hi) {
        Some(Direction::RightNotBelowLeft)
    } else {
        None
    }
}

/// A formula separating two terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub formula: Formula,
    pub left: Interval,
    pub right: Interval,
    pub direction: Direction,
    pub size: usize,
    pub fuel: u64,
}

/// Iterative deepening over basic formulas and their `step`/`not`
/// closures. For each size the fuels are tried in the given order.
pub fn find_distinguishing_formula(
    logic: &Logic,
    m: &Term,
    n: &Term,
    ty: &Type,
    max_size: usize,
    fuels: &[u64],
    pools: &Pools,
) -> Result<Option<Witness>, SuiteError> {
    check_type(logic, m, ty)?;
    check_type(logic, n, ty)?;
    let mut e = Enumerator::new(logic, pools);
    for k in 1..=max_size {
        let mut candidates = e.basic(ty, k)?;
        if k >= 2 {
            let smaller = e.basic(ty, k - 1)?;
            for f in &smaller {
                for a in &pools.constants {
                    candidates.push(Formula::step(f.clone(), a.clone()));
                }
            }
            candidates.extend(smaller.into_iter().map(Formula::not));
        }
        for &fuel in fuels {
            for f in &candidates {
                let (a, b) = (logic.sat(m, f, fuel)?, logic.sat(n, f, fuel)?);
                if let Some(direction) = separates(logic, &a, &b) {
                    return Ok(Some(Witness { formula: f.clone(), left: a, right: b, direction, size: k, fuel }));
                }
            }
        }
    }
    Ok(None)
}

/// Renders a verdict with truth values in the logic's space.
pub fn describe(logic: &Logic, v: &Verdict) -> String {
    let sp = logic.space();
    let iv = |i: &Interval| match i.value() {
        Some(a) => sp.show(a),
        None => alloc::format!("[{}, {}]", sp.show(&i.lo), sp.show(&i.hi)),
    };
    match v {
        Verdict::Distinguished { formula, left, right, direction } => alloc::format!(
            "distinguished by {}: left {}, right {} ({})",
            logic.show(formula),
            iv(left),
            iv(right),
            direction
        ),
        Verdict::NoDistinctionFound(b) => alloc::format!("no distinction found at {}", b),
        Verdict::RefinesUpTo(b) => alloc::format!("left refines right up to {}", b),
    }
}
