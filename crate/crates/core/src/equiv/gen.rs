use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::effects::{CostAmount, EffectSignature, Op};
use crate::lang::{nat, ComType, Comp, Label, Name, ValType, Value};
use crate::machine::{Family, Tree};
use crate::quant::{ModalitySpec, StateSet, Truth, TruthSpace};

/// A value on the sampling grid of `sp`: multiples of 1/8 on `[0,1]`,
/// halves and `inf` for cost, arbitrary subsets of states.
pub fn sample_truth(sp: &TruthSpace, rng: &mut ChaCha8Rng) -> Truth {
    let grid = |rng: &mut ChaCha8Rng| rng.gen_range(0..=8) as f64 / 8.0;
    match sp {
        TruthSpace::Bool => Truth::Bool(rng.gen()),
        TruthSpace::Unit => Truth::Real(grid(rng)),
        TruthSpace::Cost => match rng.gen_range(0..6) {
            0 => Truth::Real(f64::INFINITY),
            1 => Truth::Real(0.0),
            k => Truth::Real(k as f64 / 2.0),
        },
        TruthSpace::States(c) => {
            let bits: Vec<bool> = (0..c.num_states()).map(|_| rng.gen()).collect();
            Truth::States(StateSet::from_fn(c.num_states(), |i| bits[i]))
        }
        TruthSpace::Tables(c) => Truth::Table((0..c.num_states()).map(|_| grid(rng)).collect()),
    }
}

/// Operators `q` has a rule for, with a sample instance of each.
pub(crate) fn supported_ops(q: &ModalitySpec) -> Vec<Op> {
    let mut out = Vec::new();
    for op in [Op::Por, Op::Nor, Op::Cost(CostAmount::new(1.0).unwrap())] {
        if q.rule(&op).is_some() {
            out.push(op);
        }
    }
    if let Some(cfg) = q.space().store() {
        for l in cfg.locations() {
            if q.rule(&Op::Lookup(l.clone())).is_some() {
                out.push(Op::Lookup(l.clone()));
                out.push(Op::Update(l.clone()));
            }
        }
    }
    out
}

/// A random tree over leaves drawn by `leaf`, using the operators `q`
/// interprets. `unknown` is the chance (out of 8) of an `Unknown` leaf.
pub fn random_tree_with<L: Clone + Send + Sync + 'static>(
    q: &ModalitySpec,
    depth: usize,
    unknown: u32,
    rng: &mut ChaCha8Rng,
    leaf: &mut dyn FnMut(&mut ChaCha8Rng) -> L,
) -> Tree<L> {
    let ops = supported_ops(q);
    if depth == 0 || ops.is_empty() || rng.gen_range(0..4) == 0 {
        return if rng.gen_range(0..8) < unknown { Tree::Unknown } else { Tree::Leaf(leaf(rng)) };
    }
    let op = ops[rng.gen_range(0..ops.len())].clone();
    match op {
        Op::Por | Op::Nor => {
            let kids = (0..2).map(|_| random_tree_with(q, depth - 1, unknown, rng, leaf)).collect();
            Tree::node(op, None, kids)
        }
        Op::Cost(_) => {
            let c = CostAmount::new(rng.gen_range(0..4) as f64).unwrap();
            Tree::node(Op::Cost(c), None, alloc::vec![random_tree_with(q, depth - 1, unknown, rng, leaf)])
        }
        Op::Lookup(_) => {
            let v = q.space().store().map_or(1, |c| c.value_bound()) as usize;
            let kids: Vec<Tree<L>> = (0..v).map(|_| random_tree_with(q, depth - 1, unknown, rng, leaf)).collect();
            Tree::family_node(op, Family::new(v, move |i| kids[(i as usize).min(kids.len() - 1)].clone()))
        }
        _ => {
            let m = rng.gen_range(0..3);
            Tree::node(op, Some(m), alloc::vec![random_tree_with(q, depth - 1, unknown, rng, leaf)])
        }
    }
}

/// A random tree over truth values of `q`'s space.
pub fn random_tree(q: &ModalitySpec, depth: usize, unknown: u32, rng: &mut ChaCha8Rng) -> Tree<Truth> {
    let sp = q.space().clone();
    random_tree_with(q, depth, unknown, rng, &mut |r| sample_truth(&sp, r))
}

/// Random closed programs of type `F nat` over a signature. Programs use
/// numerals, `to`, `let`, case on numerals and pairs, λ-application,
/// thunks, tuples, `fix` and the signature's operators; never `raise`.
pub struct ProgramGen {
    sig: EffectSignature,
    rng: ChaCha8Rng,
    fresh: usize,
}

#[derive(Clone)]
struct Env {
    nats: Vec<Name>,
    thunks: Vec<Name>,
}

impl ProgramGen {
    pub fn new(sig: &EffectSignature, seed: u64) -> Self {
        ProgramGen { sig: sig.clone(), rng: ChaCha8Rng::seed_from_u64(seed), fresh: 0 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A program of type `F nat` with nesting at most `depth`.
    pub fn program(&mut self, depth: usize) -> Comp {
        self.producer(&Env { nats: Vec::new(), thunks: Vec::new() }, depth)
    }

    fn name(&mut self, base: &str) -> Name {
        self.fresh += 1;
        Name::new(&format!("{}{}", base, self.fresh))
    }

    fn nat_value(&mut self, env: &Env) -> Value {
        if !env.nats.is_empty() && self.rng.gen_range(0..3) > 0 {
            let i = self.rng.gen_range(0..env.nats.len());
            let v = Value::Var(env.nats[i].clone());
            return if self.rng.gen_range(0..4) == 0 { Value::succ(v) } else { v };
        }
        Value::numeral(self.rng.gen_range(0..3))
    }

    fn ops(&self) -> Vec<Op> {
        let mut out = Vec::new();
        if self.sig.prob {
            out.push(Op::Por);
        }
        if self.sig.nondet {
            out.push(Op::Nor);
        }
        if self.sig.cost {
            out.push(Op::Cost(CostAmount::new(1.0).unwrap()));
        }
        for l in self.sig.locations() {
            out.push(Op::Lookup(l.clone()));
            out.push(Op::Update(l.clone()));
        }
        out
    }

    fn producer(&mut self, env: &Env, depth: usize) -> Comp {
        if depth == 0 {
            if !env.thunks.is_empty() && self.rng.gen_range(0..3) == 0 {
                let i = self.rng.gen_range(0..env.thunks.len());
                return Comp::Force(Value::Var(env.thunks[i].clone()));
            }
            return Comp::ret(self.nat_value(env));
        }
        let d = depth - 1;
        let ops = self.ops();
        let choice = self.rng.gen_range(0..if ops.is_empty() { 10 } else { 13 });
        match choice {
            0 => Comp::ret(self.nat_value(env)),
            1 => {
                let first = self.producer(env, d);
                let x = self.name("x");
                let mut inner = env.clone();
                inner.nats.push(x.clone());
                Comp::to(first, x.as_str(), self.producer(&inner, d))
            }
            2 => {
                let v = self.nat_value(env);
                let x = self.name("x");
                let mut inner = env.clone();
                inner.nats.push(x.clone());
                Comp::Let { var: x, ty: None, value: v, body: Arc::new(self.producer(&inner, d)) }
            }
            3 => {
                let v = self.nat_value(env);
                let zero = self.producer(env, d);
                let y = self.name("y");
                let mut inner = env.clone();
                inner.nats.push(y.clone());
                let succ = self.producer(&inner, d);
                Comp::CaseNat { scrutinee: v, zero: Arc::new(zero), var: y, succ: Arc::new(succ) }
            }
            4 => {
                let x = self.name("x");
                let mut inner = env.clone();
                inner.nats.push(x.clone());
                let body = self.producer(&inner, d);
                let arg = self.nat_value(env);
                Comp::app(Comp::lambda(x.as_str(), nat(), body), arg)
            }
            5 => Comp::Force(Value::thunk(self.producer(env, d))),
            6 => {
                let m = self.producer(env, d);
                let t = self.name("t");
                let mut inner = env.clone();
                inner.thunks.push(t.clone());
                Comp::Let { var: t, ty: None, value: Value::thunk(m), body: Arc::new(self.producer(&inner, d)) }
            }
            7 => {
                let (a, b) = (self.nat_value(env), self.nat_value(env));
                let (x, y) = (self.name("a"), self.name("b"));
                let mut inner = env.clone();
                inner.nats.extend([x.clone(), y.clone()]);
                Comp::CasePair { scrutinee: Value::pair(a, b), fst: x, snd: y, body: Arc::new(self.producer(&inner, d)) }
            }
            8 => {
                let (m, n) = (self.producer(env, d), self.producer(env, d));
                let l = if self.rng.gen() { "a" } else { "b" };
                Comp::proj(Comp::Tuple(alloc::vec![(Label::new("a"), m), (Label::new("b"), n)]), Label::new(l))
            }
            9 => {
                let f = self.name("f");
                let mut inner = env.clone();
                inner.thunks.push(f.clone());
                let body = self.producer(&inner, d);
                Comp::fix(Comp::lambda(f.as_str(), ValType::thunk(ComType::producer(nat())), body))
            }
            _ => {
                let op = ops[self.rng.gen_range(0..ops.len())].clone();
                match op {
                    Op::Por | Op::Nor => {
                        let (m, n) = (self.producer(env, d), self.producer(env, d));
                        Comp::op(op, alloc::vec![m, n])
                    }
                    Op::Cost(_) => {
                        let c = CostAmount::new(self.rng.gen_range(0..4) as f64).unwrap();
                        Comp::op(Op::Cost(c), alloc::vec![self.producer(env, d)])
                    }
                    Op::Lookup(_) => {
                        let x = self.name("x");
                        let mut inner = env.clone();
                        inner.nats.push(x.clone());
                        Comp::op_bind(op, x.as_str(), self.producer(&inner, d))
                    }
                    _ => {
                        let v = self.nat_value(env);
                        Comp::op_param(op, v, alloc::vec![self.producer(env, d)])
                    }
                }
            }
        }
    }

    /// Wraps `m : F nat` in a random context of at most `depth` layers,
    /// keeping the type `F nat`. The layer names are returned for reports.
    pub fn context(&mut self, m: Comp, depth: usize) -> (Comp, Vec<String>) {
        let mut out = m;
        let mut layers = Vec::new();
        let env = Env { nats: Vec::new(), thunks: Vec::new() };
        let ops = self.ops();
        for _ in 0..self.rng.gen_range(1..=depth.max(1)) {
            let kind = self.rng.gen_range(0..if ops.is_empty() { 3 } else { 4 });
            out = match kind {
                0 => {
                    let x = self.name("x");
                    let mut inner = env.clone();
                    inner.nats.push(x.clone());
                    let k = self.producer(&inner, 2);
                    layers.push(String::from("to"));
                    Comp::to(out, x.as_str(), k)
                }
                1 => {
                    let x = self.name("x");
                    let v = Value::numeral(self.rng.gen_range(0..3));
                    layers.push(String::from("app"));
                    Comp::app(Comp::lambda(x.as_str(), nat(), out), v)
                }
                2 => {
                    layers.push(String::from("force-thunk"));
                    Comp::Force(Value::thunk(out))
                }
                _ => {
                    let op = ops[self.rng.gen_range(0..ops.len())].clone();
                    layers.push(String::from(op.family()));
                    match op {
                        Op::Por | Op::Nor => {
                            let k = self.producer(&env, 2);
                            if self.rng.gen() {
                                Comp::op(op, alloc::vec![out, k])
                            } else {
                                Comp::op(op, alloc::vec![k, out])
                            }
                        }
                        Op::Cost(_) => Comp::op(Op::Cost(CostAmount::new(self.rng.gen_range(0..3) as f64).unwrap()), alloc::vec![out]),
                        Op::Lookup(_) => {
                            let x = self.name("x");
                            Comp::op_bind(op, x.as_str(), out)
                        }
                        _ => Comp::op_param(op, Value::numeral(self.rng.gen_range(0..3)), alloc::vec![out]),
                    }
                }
            };
        }
        (out, layers)
    }
}
