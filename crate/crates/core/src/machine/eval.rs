use alloc::string::String;
use core::fmt::Write;

use super::tree::{Children, EffectTree, Family, Tree};
use super::{machine_step, Config, Continuations, StepOutcome};
use crate::effects::Op;
use crate::lang::Comp;

/// `|ε, M|_fuel`. ℕ-indexed children are built eagerly up to `width` and on
/// demand beyond it.
///
/// # Panics
///
/// On a stuck configuration, which cannot arise from a well-typed closed
/// computation.
pub fn eval_tree(m: &Comp, fuel: u64, width: usize) -> EffectTree {
    eval_config(Config::new(m.clone()), fuel, width)
}

/// `|S, M|_fuel` for an arbitrary configuration.
pub fn eval_config(mut c: Config, mut fuel: u64, width: usize) -> EffectTree {
    loop {
        if fuel == 0 {
            return Tree::Unknown;
        }
        match machine_step(&c) {
            Ok(StepOutcome::Stepped(next)) => {
                c = next;
                fuel -= 1;
            }
            Ok(StepOutcome::Done(t)) => return Tree::Leaf(t),
            Ok(StepOutcome::Effect { op, param, conts }) => {
                let n = fuel - 1;
                return match conts {
                    Continuations::Finite(cs) => {
                        Tree::node(op, param, cs.into_iter().map(|k| eval_config(k, n, width)).collect())
                    }
                    Continuations::Family { stack, var, body } => {
                        let fam = Family::new(width, move |i| {
                            eval_config(Continuations::family_config(&stack, &var, &body, i), n, width)
                        });
                        Tree::family_node(op, fam)
                    }
                };
            }
            Err(e) => panic!("{}", e),
        }
    }
}

/// The indented text rendering: one node per line, children indented by two
/// spaces, `?` for `Unknown`.
pub fn render_tree<L>(t: &Tree<L>, leaf: &dyn Fn(&L) -> String) -> String {
    let mut out = String::new();
    render_rec(t, leaf, 0, "", &mut out);
    out
}

fn render_rec<L>(t: &Tree<L>, leaf: &dyn Fn(&L) -> String, indent: usize, prefix: &str, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
    out.push_str(prefix);
    match t {
        Tree::Leaf(l) => {
            out.push_str(&leaf(l));
            out.push('\n');
        }
        Tree::Unknown => out.push_str("?\n"),
        Tree::Node(n) => {
            match (&n.op, n.param) {
                (Op::Update(l), Some(m)) => {
                    let _ = write!(out, "update[{}:={}]", l, m);
                }
                (op, _) => {
                    let _ = write!(out, "{}", op);
                }
            }
            out.push_str(":\n");
            match &n.children {
                Children::Finite(cs) => cs.iter().for_each(|c| render_rec(c, leaf, indent + 1, "", out)),
                Children::Family(f) => {
                    for (i, c) in f.prefix().iter().enumerate() {
                        render_rec(c, leaf, indent + 1, &alloc::format!("{} => ", i), out);
                    }
                    for _ in 0..indent + 1 {
                        out.push_str("  ");
                    }
                    out.push_str("...\n");
                }
            }
        }
    }
}

/// How effect-tree leaves are printed: `ret V` for returns.
pub fn render_leaf(c: &Comp) -> String {
    match c {
        Comp::Return(v) => alloc::format!("ret {}", v),
        other => alloc::format!("{}", other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_comp, Value};
    use crate::machine::{depth, tree_leq};
    use alloc::string::ToString;

    fn p(s: &str) -> Comp {
        parse_comp(s, None).unwrap()
    }

    fn leaf(n: u64) -> EffectTree {
        Tree::Leaf(Comp::ret(Value::numeral(n)))
    }

    #[test]
    fn por_of_returns() {
        let t = eval_tree(&p("por(return 0, return 1)"), 2, 4);
        assert_eq!(t, Tree::node(Op::Por, None, alloc::vec![leaf(0), leaf(1)]));
        assert_eq!(
            eval_tree(&p("por(return 0, return 1)"), 1, 4),
            Tree::node(Op::Por, None, alloc::vec![Tree::Unknown, Tree::Unknown])
        );
    }

    #[test]
    fn omega_is_unknown_at_every_fuel() {
        let omega = p("fix (\\x:U (F nat). force x)");
        for n in 0..50 {
            assert!(eval_tree(&omega, n, 4).is_unknown());
        }
    }

    #[test]
    fn sequencing_takes_three_units() {
        // push the to-frame, pop it substituting 5 for y, detect the terminal
        let m = p("return 5 to y. return y");
        assert_eq!(eval_tree(&m, 3, 4), leaf(5));
        assert!(eval_tree(&m, 2, 4).is_unknown());
    }

    #[test]
    fn fuel_zero() {
        assert!(eval_tree(&p("return 0"), 0, 4).is_unknown());
        assert_eq!(eval_tree(&p("return 0"), 1, 4), leaf(0));
    }

    #[test]
    fn copier_lookup_family() {
        let m = p("lookup[l](x. update[r](x, return x))");
        let t = eval_tree(&m, 4, 3);
        let Tree::Node(n) = &t else { panic!() };
        assert_eq!(n.explored().len(), 3);
        let c2 = n.child(2).unwrap();
        assert_eq!(c2, Tree::node(Op::Update(crate::lang::Name::new("r")), Some(2), alloc::vec![leaf(2)]));
        assert!(n.child(40).is_some());
        assert_eq!(depth(&t), 3);
    }

    #[test]
    fn approximation_is_monotone() {
        let m = p("fix f : U (F nat). por(return 0, force f)");
        for n in 0..12 {
            assert_eq!(tree_leq(&eval_tree(&m, n, 2), &eval_tree(&m, n + 1, 2)), Ok(true));
        }
    }

    #[test]
    fn trees_are_shareable_across_threads() {
        fn is<T: Send + Sync>() {}
        is::<EffectTree>();
    }

    #[test]
    fn rendering() {
        let t = eval_tree(&p("por(return 0, update[l](3, return ()))"), 1, 2);
        assert_eq!(render_tree(&t, &render_leaf), "por:\n  ?\n  ?\n");
        let t = eval_tree(&p("por(return 0, update[l](3, return ()))"), 5, 2);
        assert_eq!(render_tree(&t, &render_leaf), "por:\n  ret 0\n  update[l:=3]:\n    ret ()\n");
        let t = eval_tree(&p("lookup[l](x. return x)"), 5, 2);
        assert_eq!(render_tree(&t, &render_leaf), "lookup[l]:\n  0 => ret 0\n  1 => ret 1\n  ...\n");
        assert_eq!(render_leaf(&p("\\x:nat. return x")), p("\\x:nat. return x").to_string());
    }
}
