//! The CK machine and effect trees.
//!
//! A configuration pairs a stack of evaluation frames with the computation in
//! focus. [`machine_step`] performs one transition; [`eval_tree`] unfolds a
//! closed computation into its fuel-bounded effect tree `|M|ₙ`.

mod eval;
mod tree;

pub use eval::{eval_config, eval_tree, render_leaf, render_tree};
pub use tree::{
    depth, eta, map_leaves, mu, truncate, tree_leq, Children, EffectTree, Family, Node, Tree, Unexpanded,
};

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::effects::Op;
use crate::lang::{short, substitute_comp, Comp, Label, Name, OpArgs, Subst, Value};

/// One evaluation frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Frame {
    /// `(−) to x. N`
    To { var: Name, then: Arc<Comp> },
    /// `(−) V`
    Arg(Value),
    /// `(−) # l`
    Proj(Label),
}

/// A stack of frames; the last element is the innermost frame.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stack(pub Vec<Frame>);

impl Stack {
    pub fn empty() -> Self {
        Stack(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// `S{M}`: the computation obtained by applying the frames to `m`.
    pub fn plug(&self, m: Comp) -> Comp {
        self.0.iter().rev().fold(m, |acc, f| match f {
            Frame::To { var, then } => Comp::To { first: Arc::new(acc), var: var.clone(), then: then.clone() },
            Frame::Arg(v) => Comp::App(Arc::new(acc), v.clone()),
            Frame::Proj(l) => Comp::Proj(Arc::new(acc), l.clone()),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub stack: Stack,
    pub focus: Comp,
}

impl Config {
    pub fn new(focus: Comp) -> Self {
        Config { stack: Stack::empty(), focus }
    }

    /// The computation this configuration stands for.
    pub fn term(&self) -> Comp {
        self.stack.plug(self.focus.clone())
    }
}

/// The children of an effect node, as machine configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Continuations {
    Finite(Vec<Config>),
    /// `m ↦ (S, M[m̄/x])`
    Family { stack: Stack, var: Name, body: Arc<Comp> },
}

impl Continuations {
    /// The `m`-th child of a family.
    pub fn family_config(stack: &Stack, var: &Name, body: &Comp, m: u64) -> Config {
        Config {
            stack: stack.clone(),
            focus: substitute_comp(body, &Subst::single(var.clone(), Value::numeral(m))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Stepped(Config),
    /// Empty stack and a terminal focus.
    Done(Comp),
    Effect { op: Op, param: Option<u64>, conts: Continuations },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("stuck configuration: `{focus}` with {frames} frame(s) on the stack")]
pub struct StuckError {
    pub focus: String,
    pub frames: usize,
}

/// The direct reduction rules. `None` when none applies.
pub fn reduce(m: &Comp) -> Option<Comp> {
    let bind1 = |x: &Name, v: &Value, body: &Comp| substitute_comp(body, &Subst::single(x.clone(), v.clone()));
    match m {
        Comp::CaseNat { scrutinee: Value::Zero, zero, .. } => Some((**zero).clone()),
        Comp::CaseNat { scrutinee: Value::Succ(v), var, succ, .. } => Some(bind1(var, v, succ)),
        Comp::Let { var, value, body, .. } => Some(bind1(var, value, body)),
        Comp::Force(Value::Thunk(body)) => Some((**body).clone()),
        Comp::CaseSum { scrutinee: Value::Inj(l, v), branches } => {
            branches.iter().find(|b| &b.label == l).map(|b| bind1(&b.var, v, &b.body))
        }
        Comp::CasePair { scrutinee: Value::Pair(a, b), fst, snd, body } => {
            let mut s = Subst::new();
            s.insert(fst.clone(), (**a).clone());
            s.insert(snd.clone(), (**b).clone());
            Some(substitute_comp(body, &s))
        }
        Comp::Fix(inner) => Some(Comp::App(inner.clone(), Value::Thunk(Arc::new(m.clone())))),
        _ => None,
    }
}

/// One machine transition.
pub fn machine_step(c: &Config) -> Result<StepOutcome, StuckError> {
    if let Some(next) = reduce(&c.focus) {
        return Ok(StepOutcome::Stepped(Config { stack: c.stack.clone(), focus: next }));
    }
    let push = |frame: Frame, focus: &Arc<Comp>| {
        let mut stack = c.stack.clone();
        stack.0.push(frame);
        Ok(StepOutcome::Stepped(Config { stack, focus: (**focus).clone() }))
    };
    match &c.focus {
        Comp::To { first, var, then } => return push(Frame::To { var: var.clone(), then: then.clone() }, first),
        Comp::App(m, v) => return push(Frame::Arg(v.clone()), m),
        Comp::Proj(m, l) => return push(Frame::Proj(l.clone()), m),
        Comp::Op(call) => {
            let param = match &call.param {
                None => None,
                Some(v) => Some(v.numeral_value().ok_or_else(|| stuck(c))?),
            };
            let conts = match &call.args {
                OpArgs::Finite(children) => Continuations::Finite(
                    children.iter().map(|m| Config { stack: c.stack.clone(), focus: m.clone() }).collect(),
                ),
                OpArgs::Bind(x, body) => {
                    Continuations::Family { stack: c.stack.clone(), var: x.clone(), body: body.clone() }
                }
            };
            return Ok(StepOutcome::Effect { op: call.op.clone(), param, conts });
        }
        _ => {}
    }
    let Some(top) = c.stack.0.last() else {
        return if c.focus.is_terminal() { Ok(StepOutcome::Done(c.focus.clone())) } else { Err(stuck(c)) };
    };
    let mut rest = c.stack.clone();
    rest.0.pop();
    let focus = match (top, &c.focus) {
        (Frame::To { var, then }, Comp::Return(v)) => substitute_comp(then, &Subst::single(var.clone(), v.clone())),
        (Frame::Arg(v), Comp::Lambda { var, body, .. }) => {
            substitute_comp(body, &Subst::single(var.clone(), v.clone()))
        }
        (Frame::Proj(l), Comp::Tuple(fields)) => match fields.iter().find(|(k, _)| k == l) {
            Some((_, m)) => m.clone(),
            None => return Err(stuck(c)),
        },
        _ => return Err(stuck(c)),
    };
    Ok(StepOutcome::Stepped(Config { stack: rest, focus }))
}

fn stuck(c: &Config) -> StuckError {
    StuckError { focus: short(alloc::format!("{}", c.focus), 80), frames: c.stack.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_comp;

    fn p(s: &str) -> Comp {
        parse_comp(s, None).unwrap()
    }

    #[test]
    fn force_thunk() {
        assert_eq!(reduce(&p("force thunk (return 1)")), Some(p("return 1")));
    }

    #[test]
    fn fix_unfolds() {
        let m = p("fix (\\x:U (F nat). force x)");
        let inner = p("\\x:U (F nat). force x");
        assert_eq!(reduce(&m), Some(Comp::app(inner, Value::thunk(m.clone()))));
    }

    #[test]
    fn terminal_does_not_reduce() {
        assert_eq!(reduce(&p("return 0")), None);
    }

    #[test]
    fn case_and_pattern_rules() {
        assert_eq!(reduce(&p("case 0 of {zero -> return 5 | succ n -> return n}")), Some(p("return 5")));
        assert_eq!(reduce(&p("case 3 of {zero -> return 5 | succ n -> return n}")), Some(p("return 2")));
        assert_eq!(reduce(&p("let x = 4 in return x")), Some(p("return 4")));
        assert_eq!(
            reduce(&p("pm inj b 2 as {inj a x -> return 0 | inj b y -> return y}")),
            Some(p("return 2"))
        );
        assert_eq!(reduce(&p("pm (1, 2) as (a, b) -> return (b, a)")), Some(p("return (2, 1)")));
    }

    #[test]
    fn application_steps() {
        let c0 = Config::new(p("(\\x:nat. return x) 3"));
        let StepOutcome::Stepped(c1) = machine_step(&c0).unwrap() else { panic!() };
        assert_eq!(c1.stack.0, [Frame::Arg(Value::numeral(3))]);
        assert_eq!(c1.focus, p("\\x:nat. return x"));
        let StepOutcome::Stepped(c2) = machine_step(&c1).unwrap() else { panic!() };
        assert_eq!(c2, Config::new(p("return 3")));
        assert_eq!(machine_step(&c2).unwrap(), StepOutcome::Done(p("return 3")));
    }

    #[test]
    fn to_frame_pops_with_substitution() {
        let c = Config {
            stack: Stack(alloc::vec![Frame::To { var: Name::new("y"), then: Arc::new(p("return (y, y)")) }]),
            focus: p("return 4"),
        };
        assert_eq!(machine_step(&c).unwrap(), StepOutcome::Stepped(Config::new(p("return (4, 4)"))));
    }

    #[test]
    fn lookup_is_an_effect_with_a_family() {
        let c = Config::new(p("lookup[l](x. return succ x)"));
        match machine_step(&c).unwrap() {
            StepOutcome::Effect { op: Op::Lookup(l), param: None, conts: Continuations::Family { stack, var, body } } => {
                assert_eq!(l.as_str(), "l");
                assert_eq!(Continuations::family_config(&stack, &var, &body, 2).focus, p("return 3"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn update_carries_its_parameter() {
        match machine_step(&Config::new(p("update[l](3, return ())"))).unwrap() {
            StepOutcome::Effect { param, .. } => assert_eq!(param, Some(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stuck_on_ill_typed() {
        assert!(machine_step(&Config::new(p("(return 0) 1"))).is_ok());
        let c = Config { stack: Stack(alloc::vec![Frame::Arg(Value::Zero)]), focus: p("return 0") };
        assert!(machine_step(&c).is_err());
    }

    #[test]
    fn plug_rebuilds_the_term() {
        let m = p("((\\x:nat. return x) 3 to y. return y)");
        let StepOutcome::Stepped(c1) = machine_step(&Config::new(m.clone())).unwrap() else { panic!() };
        assert_eq!(c1.term(), m);
        let StepOutcome::Stepped(c2) = machine_step(&c1).unwrap() else { panic!() };
        assert_eq!(c2.term(), m);
    }
}
