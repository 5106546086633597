use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::compare::{compare_both, Verdict};
use super::gen::{random_tree, random_tree_with, sample_truth, supported_ops, ProgramGen};
use super::suite::{enumerate_basic_formulas, Pools, SuiteError};
use crate::lang::{nat, ComType, Comp, Label, Name, Term, Type, Value};
use crate::logic::Logic;
use crate::machine::{depth, map_leaves, mu, render_tree, truncate, Tree};
use crate::quant::{
    denote_interval, fold_interval, lift, make_nondet_variants, Interval, ModalityError, ModalitySpec, StoreConfig,
    Truth, TruthSpace,
};

/// Sampling parameters for the randomized laws.
#[derive(Clone, Debug, PartialEq)]
pub struct LawParams {
    pub samples: usize,
    /// Maximal tree depth.
    pub depth: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for LawParams {
    fn default() -> Self {
        LawParams { samples: 1000, depth: 4, seed: 0, tolerance: 1e-9 }
    }
}

/// The outcome of one law on one modality.
#[derive(Clone, Debug, PartialEq)]
pub struct LawResult {
    pub law: String,
    pub modality: String,
    pub samples: usize,
    pub failures: usize,
    /// The smallest failing instance found, rendered.
    pub counterexample: Option<String>,
}

impl LawResult {
    fn new(law: &str, modality: &str) -> Self {
        LawResult { law: law.into(), modality: modality.into(), samples: 0, failures: 0, counterexample: None }
    }

    fn fail(&mut self, witness: impl FnOnce() -> String) {
        self.failures += 1;
        if self.counterexample.is_none() {
            self.counterexample = Some(witness());
        }
    }
}

/// A modality by name: `E`, `C`, `G`, `EG`, `May`, `Must`, with an
/// optional `opt`/`pes` suffix. `G` and `EG` use `store`.
pub fn law_modality(name: &str, store: &Arc<StoreConfig>) -> Option<ModalitySpec> {
    let (base, variant) = if let Some(b) = name.strip_suffix("opt") {
        (b, 1)
    } else if let Some(b) = name.strip_suffix("pes") {
        (b, 2)
    } else {
        (name, 0)
    };
    let q = match base {
        "E" => ModalitySpec::expectation(),
        "C" => ModalitySpec::cost(),
        "G" => ModalitySpec::global(store.clone()),
        "EG" => ModalitySpec::expectation_global(store.clone()),
        "May" if variant == 0 => ModalitySpec::may(),
        "Must" if variant == 0 => ModalitySpec::must(),
        _ => return None,
    };
    match variant {
        0 => Some(q),
        v => make_nondet_variants(&q).ok().map(|(o, p)| if v == 1 { o } else { p }),
    }
}

fn show_tree(sp: &TruthSpace, t: &Tree<Truth>) -> String {
    render_tree(t, &|a| sp.show(a))
}

fn interval_eq(sp: &TruthSpace, a: &Interval, b: &Interval, tol: f64) -> bool {
    sp.approx_eq(&a.lo, &b.lo, tol) && sp.approx_eq(&a.hi, &b.hi, tol) && a.exact == b.exact
}

/// The smallest truncation depth at which `fails` still holds.
fn minimize<L: Clone + Send + Sync + 'static>(t: &Tree<L>, fails: &dyn Fn(&Tree<L>) -> bool) -> Tree<L> {
    for k in 0..depth(t) {
        let s = truncate(t, k);
        if fails(&s) {
            return s;
        }
    }
    t.clone()
}

/// Laws (a) leaf-monotonicity, (b) Scott chains, (c) sequentiality,
/// (d) the unit law and (f) the decomposability consequence, for each
/// modality.
pub fn law_suite(qs: &[ModalitySpec], params: &LawParams) -> Result<Vec<LawResult>, ModalityError> {
    let mut out = Vec::new();
    for (i, q) in qs.iter().enumerate() {
        let seed = params.seed.wrapping_add(i as u64 * 0x9e37_79b9);
        out.push(leaf_monotone(q, params, seed)?);
        out.push(scott_chain(q, params, seed + 1)?);
        out.push(sequential(q, params, seed + 2)?);
        out.push(unit(q, params, seed + 3)?);
        out.push(decomposable(q, qs, params, seed + 4)?);
    }
    Ok(out)
}

fn leaf_monotone(q: &ModalitySpec, p: &LawParams, seed: u64) -> Result<LawResult, ModalityError> {
    let sp = q.space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = LawResult::new("leaf-monotone", q.name());
    for _ in 0..p.samples {
        let s2 = sp.clone();
        let pairs = random_tree_with(q, p.depth, 1, &mut rng, &mut |r| {
            let a = sample_truth(&s2, r);
            let b = if r.gen() { s2.join2(&a, &sample_truth(&s2, r)) } else { a.clone() };
            (a, b)
        });
        let t = map_leaves(&pairs, |(a, _)| a.clone());
        let r = map_leaves(&pairs, |(_, b)| b.clone());
        res.samples += 1;
        let fails = |pairs: &Tree<(Truth, Truth)>| -> bool {
            let t = map_leaves(pairs, |(a, _)| a.clone());
            let r = map_leaves(pairs, |(_, b)| b.clone());
            match (denote_interval(q, &t), denote_interval(q, &r)) {
                (Ok(x), Ok(y)) => !(sp.leq(&x.lo, &y.lo) && sp.leq(&x.hi, &y.hi)),
                _ => true,
            }
        };
        let (x, y) = (denote_interval(q, &t)?, denote_interval(q, &r)?);
        if !(sp.leq(&x.lo, &y.lo) && sp.leq(&x.hi, &y.hi)) {
            res.fail(|| {
                let m = minimize(&pairs, &fails);
                format!(
                    "t =\n{}raised =\n{}",
                    show_tree(&sp, &map_leaves(&m, |(a, _)| a.clone())),
                    show_tree(&sp, &map_leaves(&m, |(_, b)| b.clone()))
                )
            });
        }
    }
    Ok(res)
}

fn scott_chain(q: &ModalitySpec, p: &LawParams, seed: u64) -> Result<LawResult, ModalityError> {
    let sp = q.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = LawResult::new("scott-chain", q.name());
    for _ in 0..p.samples {
        let t = random_tree(q, p.depth, 0, &mut rng);
        res.samples += 1;
        let full = denote_interval(q, &t)?;
        let d = depth(&t);
        let mut prev: Option<Truth> = None;
        let mut ok = full.exact;
        for k in 0..=d {
            let v = denote_interval(q, &truncate(&t, k))?.lo;
            if let Some(last) = &prev {
                ok &= sp.leq(last, &v);
            }
            prev = Some(v);
        }
        ok &= prev.is_some_and(|v| sp.approx_eq(&v, &full.lo, p.tolerance));
        if !ok {
            res.fail(|| show_tree(sp, &t));
        }
    }
    Ok(res)
}

fn sequential(q: &ModalitySpec, p: &LawParams, seed: u64) -> Result<LawResult, ModalityError> {
    let sp = q.space().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = LawResult::new("sequential", q.name());
    for _ in 0..p.samples {
        let outer = rng.gen_range(0..=p.depth.min(2));
        let inner = p.depth - outer;
        let tt = random_tree_with(q, outer, 1, &mut rng, &mut |r| random_tree(q, inner, 1, r));
        res.samples += 1;
        let check = |tt: &Tree<Tree<Truth>>| -> Result<bool, ModalityError> {
            let lhs = denote_interval(q, &mu(tt))?;
            let rhs = fold_interval(q, tt, &mut |t: &Tree<Truth>| denote_interval(q, t))?;
            Ok(interval_eq(&sp, &lhs, &rhs, p.tolerance))
        };
        if !check(&tt)? {
            res.fail(|| {
                let m = minimize(&tt, &|s| !check(s).unwrap_or(false));
                render_tree(&m, &|t| format!("[{}]", show_tree(&sp, t).trim_end().replace('\n', "; ")))
            });
        }
    }
    Ok(res)
}

fn unit(q: &ModalitySpec, p: &LawParams, seed: u64) -> Result<LawResult, ModalityError> {
    let sp = q.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = LawResult::new("unit", q.name());
    for _ in 0..p.samples.min(100) {
        let a = sample_truth(sp, &mut rng);
        res.samples += 1;
        if denote_interval(q, &Tree::Leaf(a.clone()))? != Interval::exact(a.clone()) {
            res.fail(|| sp.show(&a));
        }
    }
    Ok(res)
}

type TruthMap = Arc<dyn Fn(&Truth) -> Truth + Send + Sync>;

/// Monotone maps on a truth space: identity, joins and meets with a
/// constant, thresholds and constants.
fn monotone_maps(sp: &TruthSpace, rng: &mut ChaCha8Rng, n: usize) -> Vec<TruthMap> {
    let mut out: Vec<TruthMap> = alloc::vec![Arc::new(|a: &Truth| a.clone())];
    for _ in 0..n {
        let c = sample_truth(sp, rng);
        let s = sp.clone();
        out.push(match rng.gen_range(0..4) {
            0 => Arc::new(move |a: &Truth| s.join2(a, &c)),
            1 => Arc::new(move |a: &Truth| s.meet2(a, &c)),
            2 => Arc::new(move |a: &Truth| if s.leq(&c, a) { s.top() } else { s.bot() }),
            _ => Arc::new(move |_: &Truth| c.clone()),
        });
    }
    out
}

fn decomposable(q: &ModalitySpec, qs: &[ModalitySpec], p: &LawParams, seed: u64) -> Result<LawResult, ModalityError> {
    let sp = q.space().clone();
    let ops = supported_ops(q);
    let peers: Vec<&ModalitySpec> = qs
        .iter()
        .filter(|o| o.space() == q.space() && ops.iter().all(|op| o.rule(op).is_some()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res = LawResult::new("decomposable", q.name());
    for _ in 0..p.samples.min(200) {
        let outer = rng.gen_range(0..=p.depth.min(2));
        let inner = p.depth - outer;
        let s2 = sp.clone();
        let pairs = random_tree_with(q, outer, 1, &mut rng, &mut |r| {
            let leaves = random_tree_with(q, inner, 1, r, &mut |r2| {
                let a = sample_truth(&s2, r2);
                let b = if r2.gen() { s2.join2(&a, &sample_truth(&s2, r2)) } else { a.clone() };
                (a, b)
            });
            (map_leaves(&leaves, |(a, _)| a.clone()), map_leaves(&leaves, |(_, b)| b.clone()))
        });
        let tt = map_leaves(&pairs, |(a, _)| a.clone());
        let rr = map_leaves(&pairs, |(_, b)| b.clone());
        let hs = monotone_maps(&sp, &mut rng, 4);
        // tt ⊑̈ rr on the family {⟦q'⟧ ∘ h*}: certified comparisons only.
        let mut certified = true;
        'outer: for o in &peers {
            for h in &hs {
                let big_h = |t: &Tree<Truth>| -> Result<Interval, ModalityError> {
                    let i = denote_interval(o, &map_leaves(t, {
                        let h = h.clone();
                        move |a| h(a)
                    }))?;
                    Ok(i)
                };
                let x = fold_interval(q, &tt, &mut |t: &Tree<Truth>| big_h(t))?;
                let y = fold_interval(q, &rr, &mut |t: &Tree<Truth>| big_h(t))?;
                if !sp.leq(&x.hi, &y.lo) {
                    certified = false;
                    break 'outer;
                }
            }
        }
        if !certified {
            continue;
        }
        res.samples += 1;
        let (mt, mr) = (mu(&tt), mu(&rr));
        for o in &peers {
            for h in &hs {
                let hh = |a: &Truth| Some(h(a));
                let (x, y) = (lift(o, &hh, &mt)?, lift(o, &hh, &mr)?);
                if !sp.leq(&x.lo, &y.hi) {
                    res.fail(|| format!("{}\nagainst\n{}", show_tree(&sp, &mt), show_tree(&sp, &mr)));
                }
            }
        }
    }
    Ok(res)
}

/// Relator laws 1–4 for the Boolean `May` and `Must` modalities, over all
/// relations between carriers of each size up to `max_carrier` (at most 3)
/// and a fixed sample of trees per size.
pub fn relator_laws(max_carrier: usize, seed: u64) -> Vec<LawResult> {
    let qs = [ModalitySpec::may(), ModalitySpec::must()];
    let mut results: Vec<LawResult> =
        ["relator-reflexive", "relator-monotone", "relator-composition", "relator-naturality"]
            .iter()
            .map(|l| LawResult::new(l, "May,Must"))
            .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=max_carrier.min(3) {
        let trees = sample_trees(&qs[0], n, if n == 3 { 5 } else { 6 }, &mut rng);
        let rel = BoolRelator::new(&qs, n, &trees);
        rel.check(&mut results);
    }
    results
}

fn sample_trees(q: &ModalitySpec, n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Tree<usize>> {
    let mut out: Vec<Tree<usize>> = (0..n).map(Tree::Leaf).collect();
    while out.len() < count + n {
        out.push(random_tree_with(q, 3, 0, rng, &mut |r| r.gen_range(0..n)));
    }
    out
}

/// Denotations of sampled trees under every Boolean valuation, and the
/// relator on them as bit tables.
struct BoolRelator {
    n: usize,
    trees: Vec<Tree<usize>>,
    /// `den[q][t]` has bit `h` set when `⟦q⟧(t[h])` holds.
    den: Vec<Vec<u64>>,
}

impl BoolRelator {
    fn new(qs: &[ModalitySpec], n: usize, trees: &[Tree<usize>]) -> Self {
        let den = qs
            .iter()
            .map(|q| {
                trees
                    .iter()
                    .map(|t| {
                        let mut bits = 0u64;
                        for h in 0..1u64 << n {
                            let val = |x: &usize| Some(Truth::Bool(h >> x & 1 == 1));
                            if lift(q, &val, t).map(|i| i.lo == Truth::Bool(true)).unwrap_or(false) {
                                bits |= 1 << h;
                            }
                        }
                        bits
                    })
                    .collect()
            })
            .collect();
        BoolRelator { n, trees: trees.to_vec(), den }
    }

    fn holds(&self, qi: usize, t: usize, h: usize) -> bool {
        self.den[qi][t] >> h & 1 == 1
    }

    /// `R[h]` as a bitmask, `R` given by bit `x·n + y`.
    fn right(&self, r: u32, h: usize) -> usize {
        let mut out = 0;
        for y in 0..self.n {
            if (0..self.n).any(|x| r >> (x * self.n + y) & 1 == 1 && h >> x & 1 == 1) {
                out |= 1 << y;
            }
        }
        out
    }

    /// `t O(R) u` through valuation maps: `hx` pulls a valuation back along
    /// the left map, `gy` along the right.
    fn related(&self, t: usize, u: usize, rights: &[usize], pull_left: &[usize]) -> bool {
        (0..self.den.len()).all(|qi| {
            (0..rights.len()).all(|h| !self.holds(qi, t, pull_left[h]) || self.holds(qi, u, rights[h]))
        })
    }

    /// The relator on all tree pairs: bit `t·k + u`.
    fn table(&self, r: u32) -> u64 {
        let k = self.trees.len();
        let hs = 1usize << self.n;
        let rights: Vec<usize> = (0..hs).map(|h| self.right(r, h)).collect();
        let id: Vec<usize> = (0..hs).collect();
        let mut bits = 0u64;
        for t in 0..k {
            for u in 0..k {
                if self.related(t, u, &rights, &id) {
                    bits |= 1 << (t * k + u);
                }
            }
        }
        bits
    }

    fn check(&self, results: &mut [LawResult]) {
        let n = self.n;
        let k = self.trees.len();
        let rels = 1u32 << (n * n);
        let tables: Vec<u64> = (0..rels).map(|r| self.table(r)).collect();
        let ident: u32 = (0..n).map(|x| 1 << (x * n + x)).sum();
        let show = |r: u32| format!("{:0w$b}", r, w = n * n);
        for r in 0..rels {
            if r & ident == ident {
                results[0].samples += 1;
                if (0..k).any(|t| tables[r as usize] >> (t * k + t) & 1 == 0) {
                    results[0].fail(|| format!("carrier {}, R = {}", n, show(r)));
                }
            }
        }
        for r in 0..rels {
            for s in 0..rels {
                if r & s == r {
                    results[1].samples += 1;
                    if tables[r as usize] & !tables[s as usize] != 0 {
                        results[1].fail(|| format!("carrier {}, R = {} ⊆ S = {}", n, show(r), show(s)));
                    }
                }
                results[2].samples += 1;
                let rs = compose(r, s, n);
                let (tr, ts, trs) = (tables[r as usize], tables[s as usize], tables[rs as usize]);
                let row = |m: u64, t: usize| (m >> (t * k)) & ((1 << k) - 1);
                for t in 0..k {
                    let mut reach = 0u64;
                    for u in 0..k {
                        if row(tr, t) >> u & 1 == 1 {
                            reach |= row(ts, u);
                        }
                    }
                    if reach & !row(trs, t) != 0 {
                        results[2].fail(|| format!("carrier {}, R = {}, S = {}", n, show(r), show(s)));
                    }
                }
            }
        }
        let maps: Vec<Vec<usize>> = (0..n.pow(n as u32))
            .map(|mut code| {
                (0..n)
                    .map(|_| {
                        let v = code % n;
                        code /= n;
                        v
                    })
                    .collect()
            })
            .collect();
        let hs = 1usize << n;
        let pull = |f: &[usize], h: usize| -> usize { (0..n).filter(|x| h >> f[*x] & 1 == 1).map(|x| 1 << x).sum() };
        for f in &maps {
            let hf: Vec<usize> = (0..hs).map(|h| pull(f, h)).collect();
            for g in &maps {
                for r in 0..rels {
                    results[3].samples += 1;
                    let mut pre = 0u32;
                    for (x, fx) in f.iter().enumerate() {
                        for (y, gy) in g.iter().enumerate() {
                            if r >> (fx * n + gy) & 1 == 1 {
                                pre |= 1 << (x * n + y);
                            }
                        }
                    }
                    let rights: Vec<usize> = (0..hs).map(|h| pull(g, self.right(r, h))).collect();
                    let lhs = tables[pre as usize];
                    for t in 0..k {
                        for u in 0..k {
                            let direct = self.related(t, u, &rights, &hf);
                            if direct != (lhs >> (t * k + u) & 1 == 1) {
                                results[3].fail(|| {
                                    format!("carrier {}, f = {:?}, g = {:?}, R = {}", n, f, g, show(r))
                                });
                            }
                        }
                    }
                }
            }
        }
    }
}

fn compose(r: u32, s: u32, n: usize) -> u32 {
    let mut out = 0;
    for x in 0..n {
        for z in 0..n {
            if (0..n).any(|y| r >> (x * n + y) & 1 == 1 && s >> (y * n + z) & 1 == 1) {
                out |= 1 << (x * n + z);
            }
        }
    }
    out
}

/// Parameters for the congruence spot-check.
#[derive(Clone, Debug, PartialEq)]
pub struct CongruenceParams {
    pub trials: usize,
    pub seed: u64,
    pub suite_size: usize,
    pub fuel: u64,
    pub program_depth: usize,
    pub context_depth: usize,
}

impl Default for CongruenceParams {
    fn default() -> Self {
        CongruenceParams { trials: 200, seed: 0, suite_size: 4, fuel: 12, program_depth: 2, context_depth: 3 }
    }
}

/// Law (g): pairs equivalent at the bounds stay so inside random contexts.
/// Pairs are a random program against a rewriting of it that preserves
/// its meaning; pairs already distinguished are not counted.
pub fn congruence_spot_check(logic: &Logic, p: &CongruenceParams) -> Result<LawResult, SuiteError> {
    let names = logic.modality_names().join(",");
    let mut res = LawResult::new("congruence", &names);
    let mut gen = ProgramGen::new(logic.signature(), p.seed);
    let ty = Type::Com(ComType::producer(nat()));
    for trial in 0..p.trials {
        let m = gen.program(p.program_depth);
        let n = partner(logic, &m, gen.rng(), trial);
        let (tm, tn) = (Term::Com(m.clone()), Term::Com(n.clone()));
        let pools = Pools::from_terms(logic, &[&tm, &tn]);
        let suite = enumerate_basic_formulas(logic, &ty, p.suite_size, &pools)?;
        if compare_both(logic, &tm, &tn, &suite, p.fuel)?.is_distinguished() {
            continue;
        }
        let seed = gen.rng().gen();
        let mut ctx_gen = ProgramGen::new(logic.signature(), seed);
        let (cm, layers) = ctx_gen.context(m.clone(), p.context_depth);
        let mut ctx_gen = ProgramGen::new(logic.signature(), seed);
        let (cn, _) = ctx_gen.context(n.clone(), p.context_depth);
        let (tcm, tcn) = (Term::Com(cm), Term::Com(cn));
        let pools = Pools::from_terms(logic, &[&tcm, &tcn]);
        let suite = enumerate_basic_formulas(logic, &ty, p.suite_size, &pools)?;
        res.samples += 1;
        if let v @ Verdict::Distinguished { .. } = compare_both(logic, &tcm, &tcn, &suite, p.fuel)? {
            res.fail(|| {
                format!(
                    "{} vs {} in context [{}]: {}",
                    m,
                    n,
                    layers.join(", "),
                    super::compare::describe(logic, &v)
                )
            });
        }
    }
    Ok(res)
}

/// A program equal in meaning to `m`.
fn partner(logic: &Logic, m: &Comp, rng: &mut ChaCha8Rng, trial: usize) -> Comp {
    let sig = logic.signature();
    let mut options: Vec<Comp> = alloc::vec![
        Comp::Force(Value::thunk(m.clone())),
        Comp::Let { var: Name::new(&format!("u{}", trial)), ty: None, value: Value::Zero, body: Arc::new(m.clone()) },
        Comp::app(Comp::lambda(&format!("u{}", trial), nat(), m.clone()), Value::numeral(1)),
        Comp::to(Comp::ret(Value::Zero), &format!("u{}", trial), m.clone()),
        Comp::proj(
            Comp::Tuple(alloc::vec![(Label::new("a"), m.clone()), (Label::new("b"), Comp::ret(Value::Zero))]),
            Label::new("a"),
        ),
    ];
    if sig.prob {
        options.push(Comp::por(m.clone(), m.clone()));
    }
    if sig.nondet {
        options.push(Comp::nor(m.clone(), m.clone()));
    }
    options.swap_remove(rng.gen_range(0..options.len()))
}

