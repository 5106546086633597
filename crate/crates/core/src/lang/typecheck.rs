//! Bidirectional type checking.
//!
//! Lambda binders are annotated, so most terms synthesise a type. The
//! exceptions are `inj l V` (the other summands are unknown) and `raise[e]()`
//! (no children to take a type from); both need a type pushed in from the
//! outside, by a checking position, a `let x : A` annotation or a program
//! ascription.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::ast::*;
use super::parse::Program;
use crate::effects::{Arity, EffectSignature};

/// A typing context: value types only, later entries shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    entries: Vec<(Name, ValType)>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn extended(&self, name: &Name, ty: ValType) -> Context {
        let mut c = self.clone();
        c.entries.push((name.clone(), ty));
        c
    }

    pub fn lookup(&self, name: &Name) -> Option<&ValType> {
        self.entries.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The shape a rule needed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeKind {
    Nat,
    Thunk,
    Sum,
    Pair,
    Producer,
    Arrow,
    Product,
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeKind::Nat => "nat",
            TypeKind::Thunk => "a thunk type",
            TypeKind::Sum => "a sum type",
            TypeKind::Pair => "a pair type",
            TypeKind::Producer => "a producer type",
            TypeKind::Arrow => "an arrow type",
            TypeKind::Product => "a product type",
        })
    }
}

fn kind_name(t: &Type) -> &'static str {
    match t {
        Type::Val(ValType::Unit) => "Unit",
        Type::Val(ValType::Nat) => "Nat",
        Type::Val(ValType::Thunk(_)) => "Thunk",
        Type::Val(ValType::Sum(_)) => "Sum",
        Type::Val(ValType::Pair(..)) => "Pair",
        Type::Com(ComType::Producer(_)) => "Producer",
        Type::Com(ComType::Arrow(..)) => "Arrow",
        Type::Com(ComType::Prod(_)) => "Prod",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("[{rule}] expected {expected}, found {found} in `{term}`")]
    Mismatch { rule: &'static str, expected: Type, found: Type, term: String },
    #[error("[{rule}] {} is not {expected}: found {found} in `{term}`", kind_name(found))]
    Shape { rule: &'static str, expected: TypeKind, found: Type, term: String },
    #[error("[fix] argument must have type U C -> C, found {found} in `{term}`")]
    Fix { found: ComType, term: String },
    #[error("[{rule}] cannot infer a type for `{term}`; add an annotation")]
    CannotInfer { rule: &'static str, term: String },
    #[error("[op] `{op}` is not in the active signature")]
    UnknownOp { op: String },
    #[error("[{rule}] {message} in `{term}`")]
    Labels { rule: &'static str, message: String, term: String },
    #[error("[op] malformed `{op}` node: {message}")]
    OpShape { op: String, message: String },
}

impl TypeError {
    /// Name of the typing rule that failed.
    pub fn rule(&self) -> &'static str {
        match self {
            TypeError::Unbound(_) => "var",
            TypeError::Mismatch { rule, .. }
            | TypeError::Shape { rule, .. }
            | TypeError::CannotInfer { rule, .. }
            | TypeError::Labels { rule, .. } => rule,
            TypeError::Fix { .. } => "fix",
            TypeError::UnknownOp { .. } | TypeError::OpShape { .. } => "op",
        }
    }
}

fn show<T: fmt::Display>(t: &T) -> String {
    short(t.to_string(), 60)
}

/// Type checker for one effect signature. Without a signature every operator
/// is accepted.
#[derive(Clone, Debug, Default)]
pub struct TypeChecker {
    sig: Option<EffectSignature>,
}

impl TypeChecker {
    pub fn new(sig: &EffectSignature) -> Self {
        TypeChecker { sig: Some(sig.clone()) }
    }

    pub fn any_signature() -> Self {
        TypeChecker { sig: None }
    }

    pub fn signature(&self) -> Option<&EffectSignature> {
        self.sig.as_ref()
    }

    /// Types a whole program, honouring its ascription.
    pub fn check_program(&self, p: &Program) -> Result<ComType, TypeError> {
        let ctx = Context::new();
        match &p.ascription {
            Some(c) => self.check_comp(&ctx, &p.term, c).map(|_| c.clone()),
            None => self.infer_comp(&ctx, &p.term),
        }
    }

    pub fn infer(&self, ctx: &Context, t: &Term) -> Result<Type, TypeError> {
        match t {
            Term::Val(v) => self.infer_value(ctx, v).map(Type::Val),
            Term::Com(c) => self.infer_comp(ctx, c).map(Type::Com),
        }
    }

    // ---- values ----

    pub fn infer_value(&self, ctx: &Context, v: &Value) -> Result<ValType, TypeError> {
        match v {
            Value::Unit => Ok(ValType::Unit),
            Value::Zero => Ok(ValType::Nat),
            Value::Succ(w) => {
                self.check_value(ctx, w, &ValType::Nat)?;
                Ok(ValType::Nat)
            }
            Value::Var(x) => ctx.lookup(x).cloned().ok_or_else(|| TypeError::Unbound(x.clone())),
            Value::Thunk(m) => Ok(ValType::thunk(self.infer_comp(ctx, m)?)),
            Value::Inj(..) => Err(TypeError::CannotInfer { rule: "inj", term: show(v) }),
            Value::Pair(a, b) => Ok(ValType::pair(self.infer_value(ctx, a)?, self.infer_value(ctx, b)?)),
        }
    }

    pub fn check_value(&self, ctx: &Context, v: &Value, ty: &ValType) -> Result<(), TypeError> {
        match (v, ty) {
            (Value::Succ(w), ValType::Nat) => self.check_value(ctx, w, ty),
            (Value::Thunk(m), ValType::Thunk(c)) => self.check_comp(ctx, m, c),
            (Value::Inj(l, w), ValType::Sum(_)) => match ty.sum_component(l) {
                Some(t) => self.check_value(ctx, w, t),
                None => Err(TypeError::Labels {
                    rule: "inj",
                    message: alloc::format!("label `{}` is not a summand of {}", l, ty),
                    term: show(v),
                }),
            },
            (Value::Inj(..), _) => Err(TypeError::Shape {
                rule: "inj",
                expected: TypeKind::Sum,
                found: Type::Val(ty.clone()),
                term: show(v),
            }),
            (Value::Pair(a, b), ValType::Pair(ta, tb)) => {
                self.check_value(ctx, a, ta)?;
                self.check_value(ctx, b, tb)
            }
            _ => {
                let found = self.infer_value(ctx, v)?;
                if &found == ty {
                    Ok(())
                } else {
                    Err(TypeError::Mismatch {
                        rule: value_rule(v),
                        expected: Type::Val(ty.clone()),
                        found: Type::Val(found),
                        term: show(v),
                    })
                }
            }
        }
    }

    // ---- computations ----

    pub fn infer_comp(&self, ctx: &Context, c: &Comp) -> Result<ComType, TypeError> {
        match c {
            Comp::Return(v) => Ok(ComType::producer(self.infer_value(ctx, v)?)),
            Comp::Force(v) => match self.infer_value(ctx, v)? {
                ValType::Thunk(c) => Ok(*c),
                other => Err(shape("force", TypeKind::Thunk, Type::Val(other), c)),
            },
            Comp::Lambda { var, ty, body } => {
                Ok(ComType::arrow(ty.clone(), self.infer_comp(&ctx.extended(var, ty.clone()), body)?))
            }
            Comp::App(m, v) => {
                let (a, res) = self.arrow_of(ctx, m, c)?;
                self.check_value(ctx, v, &a)?;
                Ok(res)
            }
            Comp::To { first, var, then } => {
                let a = self.producer_of(ctx, first, c)?;
                self.infer_comp(&ctx.extended(var, a), then)
            }
            Comp::Let { var, ty, value, body } => {
                let a = match ty {
                    Some(t) => {
                        self.check_value(ctx, value, t)?;
                        t.clone()
                    }
                    None => self.infer_value(ctx, value)?,
                };
                self.infer_comp(&ctx.extended(var, a), body)
            }
            Comp::CaseNat { scrutinee, zero, var, succ } => {
                self.check_value(ctx, scrutinee, &ValType::Nat)?;
                let succ_ctx = ctx.extended(var, ValType::Nat);
                self.infer_branches("case", &[(ctx, zero), (&succ_ctx, succ)], c)
            }
            Comp::CaseSum { scrutinee, branches } => {
                let st = self.infer_value(ctx, scrutinee)?;
                let ctxs = self.sum_branch_contexts(ctx, &st, branches, c)?;
                let pairs: Vec<(&Context, &Comp)> = ctxs.iter().zip(branches).map(|(k, b)| (k, &b.body)).collect();
                self.infer_branches("pm-sum", &pairs, c)
            }
            Comp::CasePair { scrutinee, fst, snd, body } => match self.infer_value(ctx, scrutinee)? {
                ValType::Pair(a, b) => self.infer_comp(&ctx.extended(fst, *a).extended(snd, *b), body),
                other => Err(shape("pm-pair", TypeKind::Pair, Type::Val(other), c)),
            },
            Comp::Tuple(fields) => {
                let mut out = Vec::new();
                for (l, m) in fields {
                    out.push((l.clone(), self.infer_comp(ctx, m)?));
                }
                ComType::prod(out).map_err(|e| TypeError::Labels { rule: "tuple", message: e.to_string(), term: show(c) })
            }
            Comp::Proj(m, l) => match self.infer_comp(ctx, m)? {
                t @ ComType::Prod(_) => t.prod_component(l).cloned().ok_or_else(|| TypeError::Labels {
                    rule: "proj",
                    message: alloc::format!("no component `{}` in {}", l, t),
                    term: show(c),
                }),
                other => Err(shape("proj", TypeKind::Product, Type::Com(other), c)),
            },
            Comp::Fix(m) => {
                let t = self.infer_comp(ctx, m)?;
                match &t {
                    ComType::Arrow(a, res) if **a == ValType::Thunk(res.clone()) => Ok((**res).clone()),
                    _ => Err(TypeError::Fix { found: t, term: show(c) }),
                }
            }
            Comp::Op(call) => {
                let children = self.op_children(ctx, call)?;
                if children.is_empty() {
                    return Err(TypeError::CannotInfer { rule: "op", term: show(c) });
                }
                let pairs: Vec<(&Context, &Comp)> = children.iter().map(|(k, m)| (k, *m)).collect();
                self.infer_branches("op", &pairs, c)
            }
        }
    }

    pub fn check_comp(&self, ctx: &Context, c: &Comp, ty: &ComType) -> Result<(), TypeError> {
        match (c, ty) {
            (Comp::Return(v), ComType::Producer(a)) => self.check_value(ctx, v, a),
            (Comp::Lambda { var, ty: a, body }, ComType::Arrow(da, res)) => {
                if a != &**da {
                    return Err(TypeError::Mismatch {
                        rule: "lambda",
                        expected: Type::Val((**da).clone()),
                        found: Type::Val(a.clone()),
                        term: show(c),
                    });
                }
                self.check_comp(&ctx.extended(var, a.clone()), body, res)
            }
            (Comp::To { first, var, then }, _) => {
                let a = self.producer_of(ctx, first, c)?;
                self.check_comp(&ctx.extended(var, a), then, ty)
            }
            (Comp::Let { var, ty: ann, value, body }, _) => {
                let a = match ann {
                    Some(t) => {
                        self.check_value(ctx, value, t)?;
                        t.clone()
                    }
                    None => self.infer_value(ctx, value)?,
                };
                self.check_comp(&ctx.extended(var, a), body, ty)
            }
            (Comp::CaseNat { scrutinee, zero, var, succ }, _) => {
                self.check_value(ctx, scrutinee, &ValType::Nat)?;
                self.check_comp(ctx, zero, ty)?;
                self.check_comp(&ctx.extended(var, ValType::Nat), succ, ty)
            }
            (Comp::CaseSum { scrutinee, branches }, _) => {
                let st = self.infer_value(ctx, scrutinee)?;
                let ctxs = self.sum_branch_contexts(ctx, &st, branches, c)?;
                for (k, b) in ctxs.iter().zip(branches) {
                    self.check_comp(k, &b.body, ty)?;
                }
                Ok(())
            }
            (Comp::CasePair { scrutinee, fst, snd, body }, _) => match self.infer_value(ctx, scrutinee)? {
                ValType::Pair(a, b) => self.check_comp(&ctx.extended(fst, *a).extended(snd, *b), body, ty),
                other => Err(shape("pm-pair", TypeKind::Pair, Type::Val(other), c)),
            },
            (Comp::Tuple(fields), ComType::Prod(fts)) => {
                let labels: Vec<&Label> = fields.iter().map(|(l, _)| l).collect();
                let expected: Vec<&Label> = fts.iter().map(|(l, _)| l).collect();
                let mut sorted = labels.clone();
                sorted.sort();
                if sorted != expected {
                    return Err(TypeError::Mismatch {
                        rule: "tuple",
                        expected: Type::Com(ty.clone()),
                        found: Type::Com(self.infer_comp(ctx, c).unwrap_or_else(|_| ty.clone())),
                        term: show(c),
                    });
                }
                for (l, m) in fields {
                    self.check_comp(ctx, m, ty.prod_component(l).expect("labels match"))?;
                }
                Ok(())
            }
            (Comp::Fix(m), _) => {
                let want = ComType::arrow(ValType::thunk(ty.clone()), ty.clone());
                match self.infer_comp(ctx, m) {
                    Ok(found) if found == want => Ok(()),
                    Ok(found) => Err(TypeError::Fix { found, term: show(c) }),
                    Err(TypeError::CannotInfer { .. }) => self.check_comp(ctx, m, &want),
                    Err(e) => Err(e),
                }
            }
            (Comp::Op(call), _) => {
                for (k, m) in self.op_children(ctx, call)? {
                    self.check_comp(&k, m, ty)?;
                }
                Ok(())
            }
            _ => {
                let found = self.infer_comp(ctx, c)?;
                if &found == ty {
                    Ok(())
                } else {
                    Err(TypeError::Mismatch {
                        rule: comp_rule(c),
                        expected: Type::Com(ty.clone()),
                        found: Type::Com(found),
                        term: show(c),
                    })
                }
            }
        }
    }

    fn arrow_of(&self, ctx: &Context, m: &Comp, whole: &Comp) -> Result<(ValType, ComType), TypeError> {
        match self.infer_comp(ctx, m)? {
            ComType::Arrow(a, c) => Ok((*a, *c)),
            other => Err(shape("app", TypeKind::Arrow, Type::Com(other), whole)),
        }
    }

    fn producer_of(&self, ctx: &Context, m: &Comp, whole: &Comp) -> Result<ValType, TypeError> {
        match self.infer_comp(ctx, m)? {
            ComType::Producer(a) => Ok(*a),
            other => Err(shape("to", TypeKind::Producer, Type::Com(other), whole)),
        }
    }

    /// Infers from the first branch that synthesises and checks the others
    /// against it.
    fn infer_branches(&self, rule: &'static str, branches: &[(&Context, &Comp)], whole: &Comp) -> Result<ComType, TypeError> {
        let mut first_err = None;
        for (i, (k, m)) in branches.iter().enumerate() {
            match self.infer_comp(k, m) {
                Ok(t) => {
                    for (j, (k2, m2)) in branches.iter().enumerate() {
                        if j != i {
                            self.check_comp(k2, m2, &t)?;
                        }
                    }
                    return Ok(t);
                }
                Err(TypeError::CannotInfer { .. }) if first_err.is_none() => {
                    first_err = Some(TypeError::CannotInfer { rule, term: show(whole) });
                }
                Err(TypeError::CannotInfer { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Err(first_err.unwrap_or(TypeError::CannotInfer { rule, term: show(whole) }))
    }

    fn sum_branch_contexts(
        &self,
        ctx: &Context,
        st: &ValType,
        branches: &[Branch],
        whole: &Comp,
    ) -> Result<Vec<Context>, TypeError> {
        let fields = match st {
            ValType::Sum(fs) => fs,
            other => return Err(shape("pm-sum", TypeKind::Sum, Type::Val(other.clone()), whole)),
        };
        let mut seen: Vec<&Label> = Vec::new();
        let mut out = Vec::new();
        for b in branches {
            if seen.contains(&&b.label) {
                return Err(labels_err("pm-sum", alloc::format!("duplicate branch `{}`", b.label), whole));
            }
            seen.push(&b.label);
            match st.sum_component(&b.label) {
                Some(t) => out.push(ctx.extended(&b.var, t.clone())),
                None => {
                    return Err(labels_err("pm-sum", alloc::format!("`{}` is not a summand of {}", b.label, st), whole))
                }
            }
        }
        if let Some((l, _)) = fields.iter().find(|(l, _)| !seen.contains(&l)) {
            return Err(labels_err("pm-sum", alloc::format!("missing branch for `{}`", l), whole));
        }
        Ok(out)
    }

    /// Checks operator membership and node shape; returns the children with
    /// their contexts.
    fn op_children<'c>(&self, ctx: &Context, call: &'c OpCall) -> Result<Vec<(Context, &'c Comp)>, TypeError> {
        if let Some(sig) = &self.sig {
            if !sig.contains(&call.op) {
                return Err(TypeError::UnknownOp { op: call.op.to_string() });
            }
        }
        let bad = |message: &str| TypeError::OpShape { op: call.op.to_string(), message: message.to_string() };
        match (call.op.arity(), &call.args) {
            (Arity::NatIndexed, OpArgs::Bind(x, body)) => {
                if call.param.is_some() {
                    return Err(bad("unexpected parameter"));
                }
                Ok(alloc::vec![(ctx.extended(x, ValType::Nat), &**body)])
            }
            (Arity::Finite(n), OpArgs::Finite(cs)) | (Arity::NatParam(n), OpArgs::Finite(cs)) => {
                if cs.len() != n {
                    return Err(bad(&alloc::format!("expected {} children, found {}", n, cs.len())));
                }
                match (call.op.arity(), &call.param) {
                    (Arity::NatParam(_), Some(p)) => self.check_value(ctx, p, &ValType::Nat)?,
                    (Arity::NatParam(_), None) => return Err(bad("missing parameter")),
                    (_, Some(_)) => return Err(bad("unexpected parameter")),
                    _ => {}
                }
                Ok(cs.iter().map(|m| (ctx.clone(), m)).collect())
            }
            (Arity::NatIndexed, _) => Err(bad("expected a binder `x. M`")),
            _ => Err(bad("unexpected binder")),
        }
    }
}

fn shape(rule: &'static str, expected: TypeKind, found: Type, term: &Comp) -> TypeError {
    TypeError::Shape { rule, expected, found, term: show(term) }
}

fn labels_err(rule: &'static str, message: String, term: &Comp) -> TypeError {
    TypeError::Labels { rule, message, term: show(term) }
}

fn value_rule(v: &Value) -> &'static str {
    match v {
        Value::Unit => "unit",
        Value::Zero => "zero",
        Value::Succ(_) => "succ",
        Value::Var(_) => "var",
        Value::Thunk(_) => "thunk",
        Value::Inj(..) => "inj",
        Value::Pair(..) => "pair",
    }
}

fn comp_rule(c: &Comp) -> &'static str {
    match c {
        Comp::CaseNat { .. } => "case",
        Comp::Let { .. } => "let",
        Comp::Return(_) => "return",
        Comp::To { .. } => "to",
        Comp::Force(_) => "force",
        Comp::Lambda { .. } => "lambda",
        Comp::App(..) => "app",
        Comp::CaseSum { .. } => "pm-sum",
        Comp::CasePair { .. } => "pm-pair",
        Comp::Tuple(_) => "tuple",
        Comp::Proj(..) => "proj",
        Comp::Fix(_) => "fix",
        Comp::Op(_) => "op",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse_comp, parse_program};

    fn infer(src: &str) -> Result<ComType, TypeError> {
        TypeChecker::any_signature().infer_comp(&Context::new(), &parse_comp(src, None).unwrap())
    }

    fn f_nat() -> ComType {
        ComType::producer(ValType::Nat)
    }

    #[test]
    fn return_numeral() {
        assert_eq!(infer("return 0").unwrap(), f_nat());
    }

    #[test]
    fn fix_of_forcing_lambda() {
        assert_eq!(infer("fix (\\x:U (F nat). force x)").unwrap(), f_nat());
    }

    #[test]
    fn producer_is_not_an_arrow() {
        let err = infer("(return 0) 0").unwrap_err();
        match &err {
            TypeError::Shape { rule: "app", expected: TypeKind::Arrow, found, .. } => {
                assert_eq!(found, &Type::Com(f_nat()));
            }
            other => panic!("{other:?}"),
        }
        assert!(err.to_string().contains("Producer is not an arrow type"), "{err}");
    }

    #[test]
    fn bad_fix() {
        assert!(matches!(infer("fix (\\x:nat. return x)"), Err(TypeError::Fix { .. })));
    }

    #[test]
    fn unbound() {
        assert_eq!(infer("return y"), Err(TypeError::Unbound(Name::new("y"))));
    }

    #[test]
    fn inj_needs_context() {
        assert!(matches!(infer("return inj 0 ()"), Err(TypeError::CannotInfer { .. })));
        let p = parse_program("return inj 0 () : F (unit + nat)", None).unwrap();
        assert!(TypeChecker::any_signature().check_program(&p).is_ok());
        assert_eq!(
            infer("let x : unit + nat = inj 1 3 in pm x as {inj 0 u -> return 0 | inj 1 n -> return n}").unwrap(),
            f_nat()
        );
    }

    #[test]
    fn sum_branches_must_be_exhaustive() {
        let e = infer("let x : unit + nat = inj 1 3 in pm x as {inj 1 n -> return n}").unwrap_err();
        assert!(matches!(e, TypeError::Labels { rule: "pm-sum", .. }), "{e:?}");
    }

    #[test]
    fn effect_children_share_a_type() {
        assert_eq!(infer("por(return 0, return 1)").unwrap(), f_nat());
        assert!(matches!(infer("por(return 0, return ())"), Err(TypeError::Mismatch { .. })));
        assert_eq!(infer("por(raise[e](), return 1)").unwrap(), f_nat());
        assert!(matches!(infer("raise[e]()"), Err(TypeError::CannotInfer { .. })));
        assert_eq!(infer("lookup[l](x. update[r](x, return x))").unwrap(), f_nat());
    }

    #[test]
    fn operators_outside_the_signature() {
        let tc = TypeChecker::new(&EffectSignature::prob());
        let e = tc.infer_comp(&Context::new(), &parse_comp("nor(return 0, return 1)", None).unwrap()).unwrap_err();
        assert!(matches!(e, TypeError::UnknownOp { .. }));
    }

    #[test]
    fn products_and_thunks() {
        assert_eq!(
            infer("<a = return 0, b = \\x:nat. return x> # b").unwrap(),
            ComType::arrow(ValType::Nat, f_nat())
        );
        assert_eq!(infer("return thunk (return 0) to t. force t").unwrap(), f_nat());
        assert_eq!(infer("pm (1, ()) as (a, b) -> return a").unwrap(), f_nat());
    }

    #[test]
    fn deterministic() {
        let src = "(\\f:U (nat -> F nat). force f 3) (thunk (\\y:nat. return succ y))";
        assert_eq!(infer(src), infer(src));
        assert_eq!(infer(src).unwrap(), f_nat());
    }
}
