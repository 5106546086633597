use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::gen::sample_truth;
use super::suite::{enumerate_basic_formulas, Pools, SuiteError};
use crate::effects::EffectSignature;
use crate::lang::{Comp, ComType, Context, Term, Type, TypeChecker, TypeError, ValType, Value};
use crate::logic::Logic;
use crate::machine::{eval_tree, map_leaves, Tree};
use crate::quant::{lift, Interval, ModalityError, ModalitySpec, Truth, TruthSpace};

/// A finite, well-typed relation between closed terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pairs: Vec<(Term, Term, Type)>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RelationError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("`{left}` has type {left_ty} but `{right}` has type {right_ty}")]
    Mismatch { left: String, left_ty: String, right: String, right_ty: String },
}

impl Relation {
    /// Pairs whose types are inferred; both sides must agree.
    pub fn new(sig: &EffectSignature, pairs: Vec<(Term, Term)>) -> Result<Self, RelationError> {
        let tc = TypeChecker::new(sig);
        let ctx = Context::new();
        let mut out = Vec::new();
        for (a, b) in pairs {
            let (ta, tb) = (tc.infer(&ctx, &a)?, tc.infer(&ctx, &b)?);
            if ta != tb {
                return Err(RelationError::Mismatch {
                    left: a.to_string(),
                    left_ty: ta.to_string(),
                    right: b.to_string(),
                    right_ty: tb.to_string(),
                });
            }
            out.push((a, b, ta));
        }
        Ok(Relation { pairs: out })
    }

    /// Pairs checked against given types.
    pub fn typed(sig: &EffectSignature, pairs: Vec<(Term, Term, Type)>) -> Result<Self, RelationError> {
        let tc = TypeChecker::new(sig);
        let ctx = Context::new();
        for (a, b, ty) in &pairs {
            for t in [a, b] {
                match (t, ty) {
                    (Term::Val(v), Type::Val(x)) => tc.check_value(&ctx, v, x)?,
                    (Term::Com(m), Type::Com(c)) => tc.check_comp(&ctx, m, c)?,
                    _ => {
                        return Err(RelationError::Mismatch {
                            left: a.to_string(),
                            left_ty: ty.to_string(),
                            right: b.to_string(),
                            right_ty: ty.to_string(),
                        })
                    }
                }
            }
        }
        Ok(Relation { pairs })
    }

    pub fn pairs(&self) -> &[(Term, Term, Type)] {
        &self.pairs
    }

    /// The pairs at one type.
    pub fn at(&self, ty: &Type) -> Vec<(Term, Term)> {
        self.pairs.iter().filter(|(_, _, t)| t == ty).map(|(a, b, _)| (a.clone(), b.clone())).collect()
    }
}

/// `R[h](y)`: the join of `h(x)` over `x R y`, `bot` when nothing is
/// related to `y`.
pub fn right_set<X: PartialEq, Y: PartialEq>(sp: &TruthSpace, pairs: &[(X, Y)], h: &dyn Fn(&X) -> Truth, y: &Y) -> Truth {
    let vals: Vec<Truth> = pairs.iter().filter(|(_, b)| b == y).map(|(a, _)| h(a)).collect();
    sp.join(vals.iter())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Indicator,
    /// `h(V) = V ⊨ φ` for the formula shown.
    FormulaInduced(String),
    RandomGrid,
}

/// One valuation, listed in carrier order.
#[derive(Clone, Debug, PartialEq)]
pub struct Valuation {
    pub provenance: Provenance,
    pub values: Vec<Truth>,
}

/// Finitely many valuations on a leaf carrier. `exhaustive` marks a
/// Boolean family listing every function on the carrier.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuationFamily<X> {
    pub carrier: Vec<X>,
    pub members: Vec<Valuation>,
    pub exhaustive: bool,
}

impl<X: PartialEq + Clone> ValuationFamily<X> {
    pub fn empty(carrier: Vec<X>) -> Self {
        ValuationFamily { carrier, members: Vec::new(), exhaustive: false }
    }

    /// `top` on one leaf or on a pair of leaves, `bot` elsewhere.
    pub fn indicators(sp: &TruthSpace, carrier: Vec<X>) -> Self {
        let n = carrier.len();
        let mut members = Vec::new();
        let ind = |set: &[usize]| Valuation {
            provenance: Provenance::Indicator,
            values: (0..n).map(|i| if set.contains(&i) { sp.top() } else { sp.bot() }).collect(),
        };
        for i in 0..n {
            members.push(ind(&[i]));
        }
        for i in 0..n {
            for j in i + 1..n {
                members.push(ind(&[i, j]));
            }
        }
        ValuationFamily { carrier, members, exhaustive: false }
    }

    /// Every `h: X → {ff, tt}`; `None` above 16 leaves.
    pub fn all_boolean(carrier: Vec<X>) -> Option<Self> {
        let n = carrier.len();
        if n > 16 {
            return None;
        }
        let members = (0..1usize << n)
            .map(|bits| Valuation {
                provenance: Provenance::Indicator,
                values: (0..n).map(|i| Truth::Bool(bits >> i & 1 == 1)).collect(),
            })
            .collect();
        Some(ValuationFamily { carrier, members, exhaustive: true })
    }

    pub fn random_grid(sp: &TruthSpace, carrier: Vec<X>, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = (0..count)
            .map(|_| Valuation {
                provenance: Provenance::RandomGrid,
                values: carrier.iter().map(|_| sample_truth(sp, &mut rng)).collect(),
            })
            .collect();
        ValuationFamily { carrier, members, exhaustive: false }
    }

    /// Appends the members of `other`, which must share the carrier.
    pub fn extend(&mut self, other: ValuationFamily<X>) {
        debug_assert!(other.carrier == self.carrier);
        self.members.extend(other.members);
        self.exhaustive = false;
    }

    fn index(&self, x: &X) -> Option<usize> {
        self.carrier.iter().position(|c| c == x)
    }

    /// `h_i(x)`, or `None` off the carrier.
    pub fn value(&self, i: usize, x: &X) -> Option<Truth> {
        self.index(x).map(|k| self.members[i].values[k].clone())
    }
}

impl ValuationFamily<Value> {
    /// `h(V) = lo(V ⊨ φ)` for every basic formula `φ` at `ty` up to `size`.
    pub fn formula_induced(
        logic: &Logic,
        carrier: Vec<Value>,
        ty: &ValType,
        size: usize,
        pools: &Pools,
        fuel: u64,
    ) -> Result<Self, SuiteError> {
        let suite = enumerate_basic_formulas(logic, &Type::Val(ty.clone()), size, pools)?;
        let mut members = Vec::new();
        for f in &suite.formulas {
            let mut values = Vec::new();
            for v in &carrier {
                values.push(logic.sat(&Term::Val(v.clone()), f, fuel)?.lo);
            }
            members.push(Valuation { provenance: Provenance::FormulaInduced(logic.show(f)), values });
        }
        Ok(ValuationFamily { carrier, members, exhaustive: false })
    }

    /// Every Boolean valuation when the space is Boolean and the carrier
    /// small; otherwise indicators, formula-induced valuations of size 2 and
    /// 32 random grid valuations.
    pub fn default_for(
        logic: &Logic,
        carrier: Vec<Value>,
        ty: &ValType,
        pools: &Pools,
        fuel: u64,
        seed: u64,
    ) -> Result<Self, SuiteError> {
        let sp = logic.space();
        if *sp == TruthSpace::Bool {
            if let Some(all) = Self::all_boolean(carrier.clone()) {
                return Ok(all);
            }
        }
        let mut fam = Self::indicators(sp, carrier.clone());
        match Self::formula_induced(logic, carrier.clone(), ty, 2, pools, fuel) {
            Ok(f) => fam.extend(f),
            Err(SuiteError::EmptyArgumentPool(_)) => {}
            Err(e) => return Err(e),
        }
        fam.extend(Self::random_grid(sp, carrier, 32, seed));
        Ok(fam)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RelatorOutcome {
    /// Every valuation was checked and every comparison was exact.
    Holds,
    Refuted { modality: String, valuation: usize, provenance: Provenance, left: Interval, right: Interval },
    /// No refutation; `exact` says whether all compared values were exact.
    Inconclusive { exact: bool },
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RelatorError {
    #[error("the valuation family does not cover every leaf of the left tree")]
    Coverage,
    #[error(transparent)]
    Modality(ModalityError),
}

/// `t O(R) r` against the sampled valuations: for every modality `q` and
/// every `h` in `fam`, `t ∈ q(h) ⊑ r ∈ q(R[h])`.
pub fn relator_check<X, Y>(
    qs: &[ModalitySpec],
    t: &Tree<X>,
    r: &Tree<Y>,
    related: &[(X, Y)],
    fam: &ValuationFamily<X>,
) -> Result<RelatorOutcome, RelatorError>
where
    X: PartialEq + Clone + Send + Sync + 'static,
    Y: PartialEq + Clone + Send + Sync + 'static,
{
    let mut exact = true;
    let mut boolean = true;
    for q in qs {
        let sp = q.space();
        boolean &= *sp == TruthSpace::Bool;
        for i in 0..fam.members.len() {
            let h = |x: &X| fam.value(i, x);
            let left = lift(q, &h, t).map_err(|e| match e {
                ModalityError::ValuationNotTotal => RelatorError::Coverage,
                e => RelatorError::Modality(e),
            })?;
            let rh = |y: &Y| {
                let vals: Vec<Truth> =
                    related.iter().filter(|(_, b)| b == y).filter_map(|(a, _)| fam.value(i, a)).collect();
                Some(sp.join(vals.iter()))
            };
            let right = lift(q, &rh, r).map_err(RelatorError::Modality)?;
            if !sp.leq(&left.lo, &right.hi) {
                return Ok(RelatorOutcome::Refuted {
                    modality: q.name().into(),
                    valuation: i,
                    provenance: fam.members[i].provenance.clone(),
                    left,
                    right,
                });
            }
            exact &= left.exact && right.exact;
        }
    }
    if exact && boolean && fam.exhaustive {
        Ok(RelatorOutcome::Holds)
    } else {
        Ok(RelatorOutcome::Inconclusive { exact })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClauseOutcome {
    Holds,
    Refuted(String),
    /// Nothing refuted at the bounds; `exact` when every value compared was
    /// exact.
    NoCounterexample { exact: bool },
    /// The depth or the argument pool ran out.
    Skipped(String),
}

/// One clause applied to one pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ClauseResult {
    pub left: String,
    pub right: String,
    pub ty: String,
    pub clause: u8,
    pub outcome: ClauseOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub entries: Vec<ClauseResult>,
    pub refuted: bool,
    pub pool_note: String,
}

/// Bounds for [`check_simulation_bounded`].
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationBounds {
    /// How many thunk, function, product and producer clauses may be
    /// unfolded along any path.
    pub depth: usize,
    pub fuel: u64,
    pub seed: u64,
}

/// Dissects every pair of `rel` by the simulation clauses. The value
/// relation used at a producer clause is the largest one the bounded check
/// allows: all pairs of leaves not themselves refuted. A refutation is
/// therefore final for similarity, not only for `rel`.
pub fn check_simulation_bounded(
    logic: &Logic,
    rel: &Relation,
    pools: &Pools,
    bounds: &SimulationBounds,
) -> Result<SimulationReport, SuiteError> {
    let mut sim = Sim { logic, pools, bounds, entries: Vec::new(), memo: BTreeMap::new(), pool_used: false };
    let mut refuted = false;
    for (a, b, ty) in rel.pairs() {
        refuted |= sim.pair(a, b, ty, bounds.depth)?;
    }
    let pool_note = if sim.pool_used {
        format!("function clauses quantify over the argument pool only (numerals {:?})", pools.numerals)
    } else {
        String::from("no function clause was reached")
    };
    Ok(SimulationReport { entries: sim.entries, refuted, pool_note })
}

struct Sim<'a> {
    logic: &'a Logic,
    pools: &'a Pools,
    bounds: &'a SimulationBounds,
    entries: Vec<ClauseResult>,
    memo: BTreeMap<(String, String, String, usize), bool>,
    pool_used: bool,
}

impl Sim<'_> {
    fn record(&mut self, a: &Term, b: &Term, ty: &Type, clause: u8, outcome: ClauseOutcome) -> bool {
        let refuted = matches!(outcome, ClauseOutcome::Refuted(_));
        self.entries.push(ClauseResult { left: a.to_string(), right: b.to_string(), ty: ty.to_string(), clause, outcome });
        refuted
    }

    /// Whether the pair is refuted.
    fn pair(&mut self, a: &Term, b: &Term, ty: &Type, depth: usize) -> Result<bool, SuiteError> {
        let key = (a.to_string(), b.to_string(), ty.to_string(), depth);
        if let Some(r) = self.memo.get(&key) {
            return Ok(*r);
        }
        self.memo.insert(key.clone(), false);
        let r = self.pair_uncached(a, b, ty, depth)?;
        self.memo.insert(key, r);
        Ok(r)
    }

    fn pair_uncached(&mut self, a: &Term, b: &Term, ty: &Type, depth: usize) -> Result<bool, SuiteError> {
        let com = |c: Comp| Term::Com(c);
        let val = |v: &Value| Term::Val(v.clone());
        let skip = |what: &str| ClauseOutcome::Skipped(format!("depth exhausted before the {} clause", what));
        match (a, b, ty) {
            (Term::Val(v), Term::Val(w), Type::Val(ValType::Nat)) => {
                let outcome = if v.numeral_value().is_some() && v.numeral_value() == w.numeral_value() {
                    ClauseOutcome::Holds
                } else {
                    ClauseOutcome::Refuted(format!("{} and {} are different numerals", v, w))
                };
                Ok(self.record(a, b, ty, 1, outcome))
            }
            (Term::Val(_), Term::Val(_), Type::Val(ValType::Unit)) => Ok(false),
            (Term::Val(v), Term::Val(w), Type::Val(ValType::Thunk(c))) => {
                if depth == 0 {
                    return Ok(self.record(a, b, ty, 2, skip("thunk")));
                }
                let r = self.pair(&com(Comp::Force(v.clone())), &com(Comp::Force(w.clone())), &Type::Com((**c).clone()), depth - 1)?;
                let outcome = if r { ClauseOutcome::Refuted("forced terms are refuted".into()) } else { ClauseOutcome::NoCounterexample { exact: true } };
                Ok(self.record(a, b, ty, 2, outcome))
            }
            (Term::Val(v), Term::Val(w), Type::Val(t @ ValType::Sum(_))) => match (v, w) {
                (Value::Inj(i, v1), Value::Inj(j, w1)) if i == j => {
                    let inner = Type::Val(t.sum_component(i).cloned().unwrap_or(ValType::Unit));
                    let r = self.pair(&val(v1), &val(w1), &inner, depth)?;
                    let outcome = if r { ClauseOutcome::Refuted("injected values are refuted".into()) } else { ClauseOutcome::Holds };
                    Ok(self.record(a, b, ty, 3, outcome))
                }
                _ => Ok(self.record(a, b, ty, 3, ClauseOutcome::Refuted("different injections".into()))),
            },
            (Term::Val(Value::Pair(v1, v2)), Term::Val(Value::Pair(w1, w2)), Type::Val(ValType::Pair(x, y))) => {
                let r1 = self.pair(&val(v1), &val(w1), &Type::Val((**x).clone()), depth)?;
                let r2 = self.pair(&val(v2), &val(w2), &Type::Val((**y).clone()), depth)?;
                let outcome = if r1 || r2 { ClauseOutcome::Refuted("a component is refuted".into()) } else { ClauseOutcome::Holds };
                Ok(self.record(a, b, ty, 4, outcome))
            }
            (Term::Com(m), Term::Com(n), Type::Com(ComType::Arrow(x, c))) => {
                if depth == 0 {
                    return Ok(self.record(a, b, ty, 5, skip("function")));
                }
                let vs = self.pools.args_at(x);
                self.pool_used = true;
                if vs.is_empty() {
                    return Ok(self.record(a, b, ty, 5, ClauseOutcome::Skipped(format!("no argument values at {}", x))));
                }
                let mut refuted = None;
                for v in vs {
                    let c = Type::Com((**c).clone());
                    if self.pair(&com(Comp::app(m.clone(), v.clone())), &com(Comp::app(n.clone(), v.clone())), &c, depth - 1)? {
                        refuted = Some(v);
                        break;
                    }
                }
                let outcome = match refuted {
                    Some(v) => ClauseOutcome::Refuted(format!("applications to {} are refuted", v)),
                    None => ClauseOutcome::NoCounterexample { exact: true },
                };
                Ok(self.record(a, b, ty, 5, outcome))
            }
            (Term::Com(m), Term::Com(n), Type::Com(ComType::Prod(fs))) => {
                if depth == 0 {
                    return Ok(self.record(a, b, ty, 6, skip("product")));
                }
                let mut refuted = None;
                for (l, c) in fs {
                    let c = Type::Com(c.clone());
                    if self.pair(&com(Comp::proj(m.clone(), l.clone())), &com(Comp::proj(n.clone(), l.clone())), &c, depth - 1)? {
                        refuted = Some(l.clone());
                        break;
                    }
                }
                let outcome = match refuted {
                    Some(l) => ClauseOutcome::Refuted(format!("projections on {} are refuted", l)),
                    None => ClauseOutcome::NoCounterexample { exact: true },
                };
                Ok(self.record(a, b, ty, 6, outcome))
            }
            (Term::Com(m), Term::Com(n), Type::Com(ComType::Producer(x))) => {
                if depth == 0 {
                    return Ok(self.record(a, b, ty, 7, skip("producer")));
                }
                let outcome = self.producer(m, n, x, depth)?;
                Ok(self.record(a, b, ty, 7, outcome))
            }
            _ => Ok(self.record(a, b, ty, 0, ClauseOutcome::Refuted("terms do not have the stated type".into()))),
        }
    }

    fn producer(&mut self, m: &Comp, n: &Comp, x: &ValType, depth: usize) -> Result<ClauseOutcome, SuiteError> {
        let values = |c: &Comp| match c {
            Comp::Return(v) => v.clone(),
            _ => Value::Unit,
        };
        let t = map_leaves(&eval_tree(m, self.bounds.fuel, self.logic.width()), values);
        let r = map_leaves(&eval_tree(n, self.bounds.fuel, self.logic.width()), values);
        let mut carrier: Vec<Value> = Vec::new();
        for v in t.leaves() {
            if !carrier.contains(v) {
                carrier.push(v.clone());
            }
        }
        let mut right: Vec<Value> = Vec::new();
        for w in r.leaves() {
            if !right.contains(w) {
                right.push(w.clone());
            }
        }
        let xt = Type::Val(x.clone());
        let mut related = Vec::new();
        for v in &carrier {
            for w in &right {
                if !self.pair(&Term::Val(v.clone()), &Term::Val(w.clone()), &xt, depth - 1)? {
                    related.push((v.clone(), w.clone()));
                }
            }
        }
        let fam = ValuationFamily::default_for(self.logic, carrier, x, self.pools, self.bounds.fuel, self.bounds.seed)?;
        let outcome = relator_check(self.logic.modalities(), &t, &r, &related, &fam);
        let sp = self.logic.space();
        Ok(match outcome {
            Ok(RelatorOutcome::Holds) => ClauseOutcome::Holds,
            Ok(RelatorOutcome::Inconclusive { exact }) => ClauseOutcome::NoCounterexample { exact },
            Ok(RelatorOutcome::Refuted { modality, provenance, left, right, .. }) => ClauseOutcome::Refuted(format!(
                "{} with a {} valuation: {} against {}",
                modality,
                match provenance {
                    Provenance::Indicator => String::from("indicator"),
                    Provenance::FormulaInduced(f) => format!("`{}`-induced", f),
                    Provenance::RandomGrid => String::from("random"),
                },
                show_interval(sp, &left),
                show_interval(sp, &right)
            )),
            Err(e) => ClauseOutcome::Skipped(e.to_string()),
        })
    }
}

pub(crate) fn show_interval(sp: &TruthSpace, i: &Interval) -> String {
    match i.value() {
        Some(a) => sp.show(a),
        None => format!("[{}, {}]", sp.show(&i.lo), sp.show(&i.hi)),
    }
}
