//! Simultaneous substitution of closed values for variables.
//!
//! Substituted values are closed, so no binder can capture them; binders
//! only shadow. Unchanged subterms are shared, not copied.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::ast::*;

/// A finite mapping from names to closed values.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    entries: Vec<(Name, Value)>,
}

impl Subst {
    pub fn new() -> Self {
        Subst::default()
    }

    pub fn single(name: Name, v: Value) -> Self {
        let mut s = Subst::new();
        s.insert(name, v);
        s
    }

    pub fn insert(&mut self, name: Name, v: Value) {
        debug_assert!(free_vars_value(&v).is_empty(), "substituted values must be closed");
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, v));
    }

    fn get(&self, name: &Name) -> Option<&Value> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn without(&self, names: &[&Name]) -> Option<Subst> {
        if !self.entries.iter().any(|(n, _)| names.contains(&n)) {
            return None;
        }
        Some(Subst { entries: self.entries.iter().filter(|(n, _)| !names.contains(&n)).cloned().collect() })
    }
}

/// `term[bindings]`.
pub fn substitute(term: &Term, s: &Subst) -> Term {
    match term {
        Term::Val(v) => Term::Val(substitute_value(v, s)),
        Term::Com(c) => Term::Com(substitute_comp(c, s)),
    }
}

pub fn substitute_value(v: &Value, s: &Subst) -> Value {
    sub_value(v, s).unwrap_or_else(|| v.clone())
}

pub fn substitute_comp(c: &Comp, s: &Subst) -> Comp {
    sub_comp(c, s).unwrap_or_else(|| c.clone())
}

fn arc_value(v: &Arc<Value>, s: &Subst) -> Option<Arc<Value>> {
    sub_value(v, s).map(Arc::new)
}

fn arc_comp(c: &Arc<Comp>, s: &Subst) -> Option<Arc<Comp>> {
    sub_comp(c, s).map(Arc::new)
}

/// Substitution under a binder: shadowed names are dropped first.
fn under(c: &Arc<Comp>, s: &Subst, bound: &[&Name]) -> Option<Arc<Comp>> {
    match s.without(bound) {
        Some(inner) if inner.is_empty() => None,
        Some(inner) => arc_comp(c, &inner),
        None => arc_comp(c, s),
    }
}

fn under_plain(c: &Comp, s: &Subst, bound: &[&Name]) -> Option<Comp> {
    match s.without(bound) {
        Some(inner) if inner.is_empty() => None,
        Some(inner) => sub_comp(c, &inner),
        None => sub_comp(c, s),
    }
}

fn sub_value(v: &Value, s: &Subst) -> Option<Value> {
    match v {
        Value::Unit | Value::Zero => None,
        Value::Var(x) => s.get(x).cloned(),
        Value::Succ(w) => arc_value(w, s).map(Value::Succ),
        Value::Thunk(m) => arc_comp(m, s).map(Value::Thunk),
        Value::Inj(l, w) => arc_value(w, s).map(|w| Value::Inj(l.clone(), w)),
        Value::Pair(a, b) => {
            let (na, nb) = (arc_value(a, s), arc_value(b, s));
            if na.is_none() && nb.is_none() {
                return None;
            }
            Some(Value::Pair(na.unwrap_or_else(|| a.clone()), nb.unwrap_or_else(|| b.clone())))
        }
    }
}

fn sub_comp(c: &Comp, s: &Subst) -> Option<Comp> {
    match c {
        Comp::Return(v) => sub_value(v, s).map(Comp::Return),
        Comp::Force(v) => sub_value(v, s).map(Comp::Force),
        Comp::CaseNat { scrutinee, zero, var, succ } => {
            let (a, b, d) = (sub_value(scrutinee, s), arc_comp(zero, s), under(succ, s, &[var]));
            if a.is_none() && b.is_none() && d.is_none() {
                return None;
            }
            Some(Comp::CaseNat {
                scrutinee: a.unwrap_or_else(|| scrutinee.clone()),
                zero: b.unwrap_or_else(|| zero.clone()),
                var: var.clone(),
                succ: d.unwrap_or_else(|| succ.clone()),
            })
        }
        Comp::Let { var, ty, value, body } => {
            let (a, b) = (sub_value(value, s), under(body, s, &[var]));
            if a.is_none() && b.is_none() {
                return None;
            }
            Some(Comp::Let {
                var: var.clone(),
                ty: ty.clone(),
                value: a.unwrap_or_else(|| value.clone()),
                body: b.unwrap_or_else(|| body.clone()),
            })
        }
        Comp::To { first, var, then } => {
            let (a, b) = (arc_comp(first, s), under(then, s, &[var]));
            if a.is_none() && b.is_none() {
                return None;
            }
            Some(Comp::To {
                first: a.unwrap_or_else(|| first.clone()),
                var: var.clone(),
                then: b.unwrap_or_else(|| then.clone()),
            })
        }
        Comp::Lambda { var, ty, body } => {
            under(body, s, &[var]).map(|b| Comp::Lambda { var: var.clone(), ty: ty.clone(), body: b })
        }
        Comp::App(m, v) => {
            let (a, b) = (arc_comp(m, s), sub_value(v, s));
            if a.is_none() && b.is_none() {
                return None;
            }
            Some(Comp::App(a.unwrap_or_else(|| m.clone()), b.unwrap_or_else(|| v.clone())))
        }
        Comp::CaseSum { scrutinee, branches } => {
            let a = sub_value(scrutinee, s);
            let bs: Vec<Option<Comp>> = branches.iter().map(|b| under_plain(&b.body, s, &[&b.var])).collect();
            if a.is_none() && bs.iter().all(Option::is_none) {
                return None;
            }
            Some(Comp::CaseSum {
                scrutinee: a.unwrap_or_else(|| scrutinee.clone()),
                branches: branches
                    .iter()
                    .zip(bs)
                    .map(|(b, nb)| Branch { label: b.label.clone(), var: b.var.clone(), body: nb.unwrap_or_else(|| b.body.clone()) })
                    .collect(),
            })
        }
        Comp::CasePair { scrutinee, fst, snd, body } => {
            let (a, b) = (sub_value(scrutinee, s), under(body, s, &[fst, snd]));
            if a.is_none() && b.is_none() {
                return None;
            }
            Some(Comp::CasePair {
                scrutinee: a.unwrap_or_else(|| scrutinee.clone()),
                fst: fst.clone(),
                snd: snd.clone(),
                body: b.unwrap_or_else(|| body.clone()),
            })
        }
        Comp::Tuple(fields) => {
            let ns: Vec<Option<Comp>> = fields.iter().map(|(_, m)| sub_comp(m, s)).collect();
            if ns.iter().all(Option::is_none) {
                return None;
            }
            Some(Comp::Tuple(
                fields.iter().zip(ns).map(|((l, m), n)| (l.clone(), n.unwrap_or_else(|| m.clone()))).collect(),
            ))
        }
        Comp::Proj(m, l) => arc_comp(m, s).map(|m| Comp::Proj(m, l.clone())),
        Comp::Fix(m) => arc_comp(m, s).map(Comp::Fix),
        Comp::Op(call) => {
            let p = call.param.as_ref().and_then(|p| sub_value(p, s));
            let args = match &call.args {
                OpArgs::Finite(cs) => {
                    let ns: Vec<Option<Comp>> = cs.iter().map(|m| sub_comp(m, s)).collect();
                    if ns.iter().all(Option::is_none) {
                        None
                    } else {
                        Some(OpArgs::Finite(cs.iter().zip(ns).map(|(m, n)| n.unwrap_or_else(|| m.clone())).collect()))
                    }
                }
                OpArgs::Bind(x, body) => under(body, s, &[x]).map(|b| OpArgs::Bind(x.clone(), b)),
            };
            if p.is_none() && args.is_none() {
                return None;
            }
            Some(Comp::Op(OpCall {
                op: call.op.clone(),
                param: p.or_else(|| call.param.clone()),
                args: args.unwrap_or_else(|| call.args.clone()),
            }))
        }
    }
}

pub fn free_vars_value(v: &Value) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    fv_value(v, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_comp(c: &Comp) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    fv_comp(c, &mut Vec::new(), &mut out);
    out
}

fn fv_value(v: &Value, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match v {
        Value::Unit | Value::Zero => {}
        Value::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Value::Succ(w) | Value::Inj(_, w) => fv_value(w, bound, out),
        Value::Thunk(m) => fv_comp(m, bound, out),
        Value::Pair(a, b) => {
            fv_value(a, bound, out);
            fv_value(b, bound, out);
        }
    }
}

fn with_bound(bound: &mut Vec<Name>, names: &[&Name], f: impl FnOnce(&mut Vec<Name>)) {
    let n = bound.len();
    bound.extend(names.iter().map(|n| (*n).clone()));
    f(bound);
    bound.truncate(n);
}

fn fv_comp(c: &Comp, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match c {
        Comp::Return(v) | Comp::Force(v) => fv_value(v, bound, out),
        Comp::CaseNat { scrutinee, zero, var, succ } => {
            fv_value(scrutinee, bound, out);
            fv_comp(zero, bound, out);
            with_bound(bound, &[var], |b| fv_comp(succ, b, out));
        }
        Comp::Let { var, value, body, .. } => {
            fv_value(value, bound, out);
            with_bound(bound, &[var], |b| fv_comp(body, b, out));
        }
        Comp::To { first, var, then } => {
            fv_comp(first, bound, out);
            with_bound(bound, &[var], |b| fv_comp(then, b, out));
        }
        Comp::Lambda { var, body, .. } => with_bound(bound, &[var], |b| fv_comp(body, b, out)),
        Comp::App(m, v) => {
            fv_comp(m, bound, out);
            fv_value(v, bound, out);
        }
        Comp::CaseSum { scrutinee, branches } => {
            fv_value(scrutinee, bound, out);
            for br in branches {
                with_bound(bound, &[&br.var], |b| fv_comp(&br.body, b, out));
            }
        }
        Comp::CasePair { scrutinee, fst, snd, body } => {
            fv_value(scrutinee, bound, out);
            with_bound(bound, &[fst, snd], |b| fv_comp(body, b, out));
        }
        Comp::Tuple(fields) => fields.iter().for_each(|(_, m)| fv_comp(m, bound, out)),
        Comp::Proj(m, _) | Comp::Fix(m) => fv_comp(m, bound, out),
        Comp::Op(call) => {
            if let Some(p) = &call.param {
                fv_value(p, bound, out);
            }
            match &call.args {
                OpArgs::Finite(cs) => cs.iter().for_each(|m| fv_comp(m, bound, out)),
                OpArgs::Bind(x, body) => with_bound(bound, &[x], |b| fv_comp(body, b, out)),
            }
        }
    }
}
