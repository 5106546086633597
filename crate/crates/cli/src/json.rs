//! JSON renderings of truth values, intervals and trees.

use cbpv_quant_core::machine::{render_leaf, Children, EffectTree};
use cbpv_quant_core::quant::{Interval, Truth, TruthSpace};
use cbpv_quant_core::Op;
use serde_json::{json, Value as Json};

pub fn truth(sp: &TruthSpace, a: &Truth) -> Json {
    match a {
        Truth::Bool(b) => json!(b),
        Truth::Real(x) if x.is_infinite() => json!("inf"),
        Truth::Real(x) => json!(x),
        Truth::States(s) => match sp.store() {
            Some(cfg) => s.iter().map(|i| json!(cfg.describe(i))).collect(),
            None => json!(sp.show(a)),
        },
        Truth::Table(t) => json!(t.to_vec()),
    }
}

pub fn interval(sp: &TruthSpace, i: &Interval) -> Json {
    json!({ "lo": truth(sp, &i.lo), "hi": truth(sp, &i.hi), "exact": i.exact })
}

/// Text form of an interval: the value when exact.
pub fn show_interval(sp: &TruthSpace, i: &Interval) -> String {
    match i.value() {
        Some(a) => sp.show(a),
        None => format!("[{}, {}]", sp.show(&i.lo), sp.show(&i.hi)),
    }
}

pub fn tree(t: &EffectTree) -> Json {
    match t {
        EffectTree::Leaf(c) => json!({ "leaf": render_leaf(c) }),
        EffectTree::Unknown => json!({ "unknown": true }),
        EffectTree::Node(n) => {
            let op = match (&n.op, n.param) {
                (Op::Update(l), Some(m)) => format!("update[{}:={}]", l, m),
                (op, _) => op.to_string(),
            };
            match &n.children {
                Children::Finite(cs) => json!({ "op": op, "children": cs.iter().map(tree).collect::<Vec<_>>() }),
                Children::Family(f) => json!({
                    "op": op,
                    "children": f.prefix().iter().map(tree).collect::<Vec<_>>(),
                    "family": true,
                }),
            }
        }
    }
}
