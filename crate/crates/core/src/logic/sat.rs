use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::formula::{Family, Formula, Generated};
use super::parse::parse_formula;
use crate::effects::EffectSignature;
use crate::lang::{Comp, ComType, Context, Name, ParseError, Term, Type, TypeChecker, TypeError, ValType, Value};
use crate::machine::eval_tree;
use crate::quant::{
    fold_interval, make_error_lift, make_nondet_variants, Interval, ModalityError, ModalitySpec, StateSet,
    StoreConfig, Truth, TruthSpace,
};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LogicError {
    #[error("formula `{formula}` does not fit type {ty}: {reason}")]
    FormulaType { formula: String, ty: String, reason: String },
    #[error(transparent)]
    Term(#[from] TypeError),
    #[error(transparent)]
    Modality(#[from] ModalityError),
    #[error("unknown modality `{0}`")]
    UnknownModality(String),
    #[error("fuel must be positive")]
    ZeroFuel,
    #[error("{what} needs the truth space {needs}, but the active space is {space}")]
    WrongSpace { what: &'static str, needs: &'static str, space: String },
    #[error("weights must be non-negative, one per state")]
    BadWeights,
    #[error("{0}")]
    Config(String),
}

/// The outcome of `M ⊨ φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SatResult {
    pub interval: Interval,
    /// The formula avoids negation.
    pub positive_fragment: bool,
    pub fuel_used: u64,
}

/// An instance of the logic: signature, truth space and the active
/// modalities.
#[derive(Clone, Debug)]
pub struct Logic {
    sig: EffectSignature,
    space: TruthSpace,
    modalities: Vec<ModalitySpec>,
    width: usize,
}

/// The truth space a signature observes by default. `boolean` asks for the
/// two-element space, available when neither store nor cost is present.
pub fn space_for(sig: &EffectSignature, value_bound: u64, boolean: bool) -> Result<TruthSpace, LogicError> {
    let store = || -> Result<Arc<StoreConfig>, LogicError> {
        StoreConfig::new(sig.locations().to_vec(), value_bound)
            .map(Arc::new)
            .map_err(|e| LogicError::Config(e.to_string()))
    };
    if boolean {
        if sig.has_store() || sig.cost {
            return Err(LogicError::Config("the boolean truth space is only available without store and cost".into()));
        }
        return Ok(TruthSpace::Bool);
    }
    Ok(match (sig.prob, sig.has_store(), sig.cost) {
        (_, _, true) if sig.prob || sig.has_store() => {
            return Err(LogicError::Config("cost cannot be combined with probability or store".into()))
        }
        (_, _, true) => TruthSpace::Cost,
        (true, true, _) => TruthSpace::Tables(store()?),
        (false, true, _) => TruthSpace::States(store()?),
        (true, false, _) => TruthSpace::Unit,
        (false, false, _) => TruthSpace::Bool,
    })
}

impl Logic {
    /// A logic with explicitly chosen modalities, all over `space`.
    pub fn new(
        sig: EffectSignature,
        space: TruthSpace,
        modalities: Vec<ModalitySpec>,
        width: usize,
    ) -> Result<Self, LogicError> {
        for q in &modalities {
            if *q.space() != space {
                return Err(LogicError::Config(alloc::format!("modality {} targets {}, not {}", q.name(), q.space(), space)));
            }
        }
        Ok(Logic { sig, space, modalities, width: width.max(1) })
    }

    /// The standard modalities for `sig` over `space`: `E`, `G`, `EG`, `C`
    /// or the Boolean `May`/`Must`; their `opt`/`pes` variants when `nor` is
    /// present; and error lifts `<q>_f` when errors are. `errors` maps a
    /// modality name (with or without the `opt`/`pes` suffix) to its error
    /// valuation; missing entries default to `bot`.
    pub fn standard(
        sig: &EffectSignature,
        space: TruthSpace,
        errors: &BTreeMap<String, BTreeMap<Name, Truth>>,
        width: usize,
    ) -> Result<Self, LogicError> {
        let base: Vec<ModalitySpec> = match &space {
            TruthSpace::Bool => alloc::vec![ModalitySpec::may(), ModalitySpec::must()],
            TruthSpace::Unit => alloc::vec![ModalitySpec::expectation()],
            TruthSpace::Cost => alloc::vec![ModalitySpec::cost()],
            TruthSpace::States(c) => alloc::vec![ModalitySpec::global(c.clone())],
            TruthSpace::Tables(c) => alloc::vec![ModalitySpec::expectation_global(c.clone())],
        };
        let mut qs = Vec::new();
        for q in base {
            if sig.nondet && q.rule(&crate::effects::Op::Nor).is_none() {
                let (o, p) = make_nondet_variants(&q)?;
                qs.extend([(q.name().to_string(), o), (q.name().to_string(), p)]);
            } else {
                qs.push((q.name().to_string(), q));
            }
        }
        for name in errors.keys() {
            if !qs.iter().any(|(b, q)| b == name || q.name() == name) {
                return Err(LogicError::UnknownModality(name.clone()));
            }
        }
        let mut out = Vec::new();
        for (base, q) in qs {
            if !sig.has_errors() {
                out.push(q);
                continue;
            }
            let mut f: BTreeMap<Name, Truth> =
                sig.error_labels().iter().map(|e| (e.clone(), space.bot())).collect();
            for key in [base.as_str(), q.name()] {
                if let Some(vals) = errors.get(key) {
                    for (e, a) in vals {
                        f.insert(e.clone(), a.clone());
                    }
                }
            }
            out.push(make_error_lift(&q, &f, sig.error_labels())?);
        }
        Logic::new(sig.clone(), space, out, width)
    }

    pub fn signature(&self) -> &EffectSignature {
        &self.sig
    }

    pub fn space(&self) -> &TruthSpace {
        &self.space
    }

    pub fn modalities(&self) -> &[ModalitySpec] {
        &self.modalities
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn modality(&self, name: &str) -> Option<&ModalitySpec> {
        self.modalities.iter().find(|q| q.name() == name)
    }

    pub fn modality_names(&self) -> Vec<String> {
        self.modalities.iter().map(|q| q.name().to_string()).collect()
    }

    pub fn parse_formula(&self, text: &str) -> Result<Formula, ParseError> {
        parse_formula(text, &self.space, &self.modality_names(), Some(&self.sig))
    }

    pub fn show(&self, f: &Formula) -> String {
        f.show(&self.space)
    }

    /// Checks that `f` is a formula at type `ty`.
    pub fn check(&self, f: &Formula, ty: &Type) -> Result<(), LogicError> {
        let bad = |reason: &str| LogicError::FormulaType {
            formula: self.show(f),
            ty: ty.to_string(),
            reason: reason.into(),
        };
        let val = |t: &ValType| Type::Val(t.clone());
        let com = |t: &ComType| Type::Com(t.clone());
        match (f, ty) {
            (Formula::NatEq(_), Type::Val(ValType::Nat)) => Ok(()),
            (Formula::NatEq(_), _) => Err(bad("numeral formulas live at nat")),
            (Formula::Thunk(g), Type::Val(ValType::Thunk(c))) => self.check(g, &com(c)),
            (Formula::Thunk(_), _) => Err(bad("[U] needs a thunk type")),
            (Formula::Inj(l, g), Type::Val(t @ ValType::Sum(_))) => match t.sum_component(l) {
                Some(a) => self.check(g, &val(a)),
                None => Err(bad("no such summand")),
            },
            (Formula::Inj(..), _) => Err(bad("inj needs a sum type")),
            (Formula::Fst(g), Type::Val(ValType::Pair(a, _))) => self.check(g, &val(a)),
            (Formula::Snd(g), Type::Val(ValType::Pair(_, b))) => self.check(g, &val(b)),
            (Formula::Fst(_) | Formula::Snd(_), _) => Err(bad("fst and snd need a pair type")),
            (Formula::Arg(v, g), Type::Com(ComType::Arrow(a, c))) => {
                TypeChecker::new(&self.sig).check_value(&Context::new(), v, a)?;
                self.check(g, &com(c))
            }
            (Formula::Arg(..), _) => Err(bad("an argument formula needs an arrow type")),
            (Formula::Proj(l, g), Type::Com(t @ ComType::Prod(_))) => match t.prod_component(l) {
                Some(c) => self.check(g, &com(c)),
                None => Err(bad("no such component")),
            },
            (Formula::Proj(..), _) => Err(bad("proj needs a product type")),
            (Formula::Modal(q, g), Type::Com(ComType::Producer(a))) => {
                self.modality(q).ok_or_else(|| LogicError::UnknownModality(q.clone()))?;
                self.check(g, &val(a))
            }
            (Formula::Modal(..), _) => Err(bad("modal formulas need a producer type")),
            (Formula::Or(fam) | Formula::And(fam), _) => fam.members().iter().try_for_each(|g| self.check(g, ty)),
            (Formula::Step(g, a), _) => {
                self.space.check(a).map_err(ModalityError::from)?;
                self.check(g, ty)
            }
            (Formula::Const(a), _) => Ok(self.space.check(a).map_err(ModalityError::from)?),
            (Formula::Neg(g), _) => self.check(g, ty),
            (Formula::SigmaMu(mu, g), _) => {
                let TruthSpace::Tables(cfg) = &self.space else {
                    return Err(self.wrong("sigma", "[0,1]^S"));
                };
                if mu.len() != cfg.num_states() || mu.iter().any(|w| w.is_nan() || *w < 0.0) {
                    return Err(LogicError::BadWeights);
                }
                self.check(g, ty)
            }
            (Formula::Mix(g, h), Type::Com(ComType::Producer(_))) => {
                if self.space != TruthSpace::Unit {
                    return Err(self.wrong("mix", "[0,1]"));
                }
                self.check(g, ty)?;
                self.check(h, ty)
            }
            (Formula::Mix(..), _) => Err(bad("mix needs a producer type")),
        }
    }

    fn wrong(&self, what: &'static str, needs: &'static str) -> LogicError {
        LogicError::WrongSpace { what, needs, space: self.space.to_string() }
    }

    /// `M ⊨ φ` at the given fuel, as certified bounds.
    pub fn satisfies(&self, term: &Term, f: &Formula, fuel: u64) -> Result<SatResult, LogicError> {
        if fuel == 0 {
            return Err(LogicError::ZeroFuel);
        }
        let ty = TypeChecker::new(&self.sig).infer(&Context::new(), term)?;
        self.satisfies_at(term, &ty, f, fuel)
    }

    /// As [`Logic::satisfies`], checking the term against a given type
    /// instead of inferring one.
    pub fn satisfies_at(&self, term: &Term, ty: &Type, f: &Formula, fuel: u64) -> Result<SatResult, LogicError> {
        if fuel == 0 {
            return Err(LogicError::ZeroFuel);
        }
        let tc = TypeChecker::new(&self.sig);
        match (term, ty) {
            (Term::Val(v), Type::Val(a)) => tc.check_value(&Context::new(), v, a)?,
            (Term::Com(m), Type::Com(c)) => tc.check_comp(&Context::new(), m, c)?,
            _ => {
                return Err(LogicError::FormulaType {
                    formula: self.show(f),
                    ty: ty.to_string(),
                    reason: "value/computation mismatch".into(),
                })
            }
        }
        self.check(f, ty)?;
        let interval = self.sat(term, f, fuel)?;
        Ok(SatResult { interval, positive_fragment: f.is_positive(), fuel_used: fuel })
    }

    /// Retries with doubled fuel until the result is exact or the fuel would
    /// exceed `cap`. The last result is returned either way.
    pub fn satisfies_exact(&self, term: &Term, f: &Formula, fuel: u64, cap: u64) -> Result<SatResult, LogicError> {
        let mut n = fuel.max(1);
        loop {
            let r = self.satisfies(term, f, n)?;
            if r.interval.exact || n.saturating_mul(2) > cap {
                return Ok(r);
            }
            n *= 2;
        }
    }

    /// Evaluation without the up-front type check.
    pub(crate) fn sat(&self, term: &Term, f: &Formula, fuel: u64) -> Result<Interval, LogicError> {
        let sp = &self.space;
        let shape = || LogicError::FormulaType {
            formula: self.show(f),
            ty: alloc::format!("the term `{}`", term),
            reason: "term and formula do not match".into(),
        };
        let val = |v: &Value| Term::Val(v.clone());
        let com = |c: Comp| Term::Com(c);
        Ok(match (f, term) {
            (Formula::NatEq(n), Term::Val(v)) => {
                Interval::exact(if v.numeral_value() == Some(*n) { sp.top() } else { sp.bot() })
            }
            (Formula::Thunk(g), Term::Val(v)) => self.sat(&com(Comp::Force(v.clone())), g, fuel)?,
            (Formula::Inj(j, g), Term::Val(Value::Inj(i, w))) => {
                if i == j {
                    self.sat(&val(w), g, fuel)?
                } else {
                    Interval::exact(sp.bot())
                }
            }
            (Formula::Fst(g), Term::Val(Value::Pair(a, _))) => self.sat(&val(a), g, fuel)?,
            (Formula::Snd(g), Term::Val(Value::Pair(_, b))) => self.sat(&val(b), g, fuel)?,
            (Formula::Arg(v, g), Term::Com(m)) => self.sat(&com(Comp::app(m.clone(), v.clone())), g, fuel)?,
            (Formula::Proj(l, g), Term::Com(m)) => self.sat(&com(Comp::proj(m.clone(), l.clone())), g, fuel)?,
            (Formula::Modal(q, g), Term::Com(m)) => {
                let q = self.modality(q).ok_or_else(|| LogicError::UnknownModality(q.clone()))?;
                let tree = eval_tree(m, fuel, self.width);
                fold_interval(q, &tree, &mut |leaf: &Comp| match leaf {
                    Comp::Return(w) => self.sat(&val(w), g, fuel),
                    _ => Err(shape()),
                })?
            }
            (Formula::Or(fam), _) => {
                let parts = self.members(fam, term, fuel)?;
                let lo = sp.join(parts.iter().map(|i| &i.lo));
                let complete = fam.is_complete();
                let hi = if complete { sp.join(parts.iter().map(|i| &i.hi)) } else { sp.top() };
                Interval::new(lo, hi, complete && parts.iter().all(|i| i.exact))
            }
            (Formula::And(fam), _) => {
                let parts = self.members(fam, term, fuel)?;
                let hi = sp.meet(parts.iter().map(|i| &i.hi));
                let complete = fam.is_complete();
                let lo = if complete { sp.meet(parts.iter().map(|i| &i.lo)) } else { sp.bot() };
                Interval { exact: complete && parts.iter().all(|i| i.exact) && lo == hi, lo, hi }
            }
            (Formula::Step(g, a), _) => {
                let i = self.sat(term, g, fuel)?;
                if sp.leq(a, &i.lo) {
                    Interval::exact(sp.top())
                } else if !sp.leq(a, &i.hi) {
                    Interval::exact(sp.bot())
                } else {
                    Interval::unknown(sp)
                }
            }
            (Formula::Const(a), _) => Interval::exact(a.clone()),
            (Formula::Neg(g), _) => self.sat(term, g, fuel)?.neg(sp),
            (Formula::SigmaMu(mu, g), _) => {
                let i = self.sat(term, g, fuel)?;
                let collapse = |t: &Truth| match t {
                    Truth::Table(x) => {
                        let s: f64 = mu.iter().zip(x.iter()).map(|(w, v)| w * v).sum();
                        Truth::Table(alloc::vec![s.min(1.0); x.len()].into())
                    }
                    other => other.clone(),
                };
                Interval::new(collapse(&i.lo), collapse(&i.hi), i.exact)
            }
            (Formula::Mix(g, h), _) => {
                let (a, b) = (self.sat(term, g, fuel)?, self.sat(term, h, fuel)?);
                let avg = |x: &Truth, y: &Truth| match (x, y) {
                    (Truth::Real(x), Truth::Real(y)) => Truth::Real((x + y) / 2.0),
                    _ => x.clone(),
                };
                Interval::new(avg(&a.lo, &b.lo), avg(&a.hi, &b.hi), a.exact && b.exact)
            }
            _ => return Err(shape()),
        })
    }

    fn members(&self, fam: &Family, term: &Term, fuel: u64) -> Result<Vec<Interval>, LogicError> {
        match fam {
            Family::Finite(xs) => xs.iter().map(|g| self.sat(term, g, fuel)).collect(),
            Family::Generated(g) => (0..g.bound).map(|i| self.sat(term, &g.member(i), fuel)).collect(),
        }
    }

    /// `step(G<const Q>, P)`: top exactly when every run started in `P`
    /// ends in `Q`.
    pub fn hoare(&self, pre: StateSet, post: StateSet) -> Result<Formula, LogicError> {
        if !matches!(self.space, TruthSpace::States(_)) {
            return Err(self.wrong("hoare", "P(S)"));
        }
        let g = self
            .modalities
            .iter()
            .find(|q| q.name() == "G" || q.name().starts_with("G_"))
            .or_else(|| self.modalities.first())
            .ok_or_else(|| LogicError::UnknownModality("G".into()))?;
        Ok(Formula::step(Formula::modal(g.name(), Formula::Const(Truth::States(post))), Truth::States(pre)))
    }

    /// `Σ_μ(φ)`.
    pub fn sigma_mu(&self, mu: Vec<f64>, f: Formula) -> Result<Formula, LogicError> {
        let TruthSpace::Tables(cfg) = &self.space else {
            return Err(self.wrong("sigma", "[0,1]^S"));
        };
        if mu.len() != cfg.num_states() || mu.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(LogicError::BadWeights);
        }
        Ok(Formula::SigmaMu(mu.into(), f.into()))
    }

    /// The half-helpful, half-hostile scheduler: the average of the two
    /// formulas.
    pub fn scheduler_mix(&self, opt: Formula, pes: Formula) -> Result<Formula, LogicError> {
        if self.space != TruthSpace::Unit {
            return Err(self.wrong("mix", "[0,1]"));
        }
        Ok(Formula::Mix(opt.into(), pes.into()))
    }
}

/// `⋁_{a,b} (step(opt, a) ∧ step(pes, b) ∧ const (a+b)/2)` with `a, b`
/// ranging over the grid `{0, 1/k, …, 1}`.
pub fn scheduler_grid(opt: Formula, pes: Formula, k: usize) -> Formula {
    let k = k.max(1);
    let n = k + 1;
    Formula::Or(Family::Generated(Generated::new("grid", n * n, false, move |i| {
        let (a, b) = ((i / n) as f64 / k as f64, (i % n) as f64 / k as f64);
        Formula::and(alloc::vec![
            Formula::step(opt.clone(), Truth::Real(a)),
            Formula::step(pes.clone(), Truth::Real(b)),
            Formula::Const(Truth::Real((a + b) / 2.0)),
        ])
    })))
}
