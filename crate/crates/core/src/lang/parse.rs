//! Recursive-descent parser for the concrete grammar.
//!
//! Computation precedence, loosest first: `\x:T. M`, `let`, `fix`, `M to x. N`;
//! then application and projection chains `M V # l`; then atoms (`return V`,
//! `force V`, `(M)`, tuples, `case`, `pm`, effect operators).

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::ast::*;
use super::lexer::{tokenize, Pos, Tok, Token};
use crate::effects::{CostAmount, EffectSignature, Op};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{pos}: unexpected character `{found}`")]
    Lex { pos: Pos, found: char },
    #[error("{pos}: expected {expected}, found {found}")]
    Syntax { pos: Pos, expected: String, found: String },
    #[error("{pos}: effect operator `{op}` is not in the active signature")]
    UnknownOp { pos: Pos, op: String },
    #[error("{pos}: {message}")]
    Invalid { pos: Pos, message: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Lex { pos, .. }
            | ParseError::Syntax { pos, .. }
            | ParseError::UnknownOp { pos, .. }
            | ParseError::Invalid { pos, .. } => *pos,
        }
    }
}

const KEYWORDS: &[&str] = &[
    "return", "thunk", "force", "to", "let", "in", "case", "of", "zero", "succ", "inj", "pm", "as", "fix", "unit",
    "nat", "U", "F", "sum", "prod", "por", "nor", "lookup", "update", "cost", "raise",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// A parsed program: a computation with an optional trailing `: C` ascription.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    pub term: Comp,
    pub ascription: Option<ComType>,
}

/// Parses a program. With `sig` given, effect operators outside the
/// signature are rejected.
pub fn parse_program(text: &str, sig: Option<&EffectSignature>) -> Result<Program, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let term = p.comp()?;
    let ascription = if p.eat_sym(":") { Some(p.com_type()?) } else { None };
    p.expect_eof()?;
    Ok(Program { term, ascription })
}

pub fn parse_comp(text: &str, sig: Option<&EffectSignature>) -> Result<Comp, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let c = p.comp()?;
    p.expect_eof()?;
    Ok(c)
}

pub fn parse_value(text: &str, sig: Option<&EffectSignature>) -> Result<Value, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let v = p.value()?;
    p.expect_eof()?;
    Ok(v)
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(text, None)?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

/// Token cursor with the term and type productions. The formula parser
/// builds on it.
pub struct Parser<'s> {
    toks: Vec<Token>,
    at: usize,
    sig: Option<&'s EffectSignature>,
}

impl<'s> Parser<'s> {
    pub fn new(text: &str, sig: Option<&'s EffectSignature>) -> Result<Self, ParseError> {
        let toks = tokenize(text).map_err(|e| ParseError::Lex { pos: e.pos, found: e.found })?;
        Ok(Parser { toks, at: 0, sig })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    /// The cursor, for backtracking with [`Parser::reset`].
    pub fn mark(&self) -> usize {
        self.at
    }

    pub fn reset(&mut self, mark: usize) {
        self.at = mark;
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos(), expected: expected.to_string(), found: self.peek().to_string() })
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == kw)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(&alloc::format!("`{}`", s))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(&alloc::format!("`{}`", kw))
        }
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    /// A non-keyword identifier.
    pub fn name(&mut self) -> Result<Name, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let n = Name::new(s);
                self.bump();
                Ok(n)
            }
            _ => self.error("an identifier"),
        }
    }

    pub fn label(&mut self) -> Result<Label, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Label::new(&s))
            }
            Tok::Number(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                self.bump();
                let l = Label::new(&s);
                match l.as_index() {
                    Some(i) => Ok(Label::index(i)),
                    None => Ok(l),
                }
            }
            _ => self.error("a label"),
        }
    }

    pub fn natural(&mut self) -> Result<u64, ParseError> {
        match self.peek().clone() {
            Tok::Number(s) => match s.parse::<u64>() {
                Ok(n) => {
                    self.bump();
                    Ok(n)
                }
                Err(_) => self.error("a natural number"),
            },
            _ => self.error("a natural number"),
        }
    }

    /// A non-negative decimal literal, optionally a fraction `a/b`.
    pub fn number(&mut self) -> Result<f64, ParseError> {
        let pos = self.pos();
        let head = match self.peek().clone() {
            Tok::Number(s) => s,
            _ => return self.error("a number"),
        };
        self.bump();
        let mut x: f64 = head.parse().map_err(|_| ParseError::Invalid { pos, message: "malformed number".into() })?;
        if self.is_sym("/") && matches!(self.peek_at(1), Tok::Number(_)) {
            self.bump();
            let d = self.number()?;
            if d == 0.0 {
                return Err(ParseError::Invalid { pos, message: "division by zero".into() });
            }
            x /= d;
        }
        Ok(x)
    }

    // ---- types ----

    pub fn ty(&mut self) -> Result<Type, ParseError> {
        let pos = self.pos();
        let lhs = self.sum_ty()?;
        if self.eat_sym("->") {
            let rpos = self.pos();
            let rhs = self.ty()?;
            return match (lhs, rhs) {
                (Type::Val(a), Type::Com(c)) => Ok(Type::Com(ComType::arrow(a, c))),
                (Type::Com(_), _) => Err(invalid(pos, "the domain of `->` must be a value type")),
                (_, Type::Val(_)) => Err(invalid(rpos, "the codomain of `->` must be a computation type")),
            };
        }
        Ok(lhs)
    }

    pub fn val_type(&mut self) -> Result<ValType, ParseError> {
        let pos = self.pos();
        match self.ty()? {
            Type::Val(t) => Ok(t),
            Type::Com(_) => Err(invalid(pos, "expected a value type")),
        }
    }

    pub fn com_type(&mut self) -> Result<ComType, ParseError> {
        let pos = self.pos();
        match self.ty()? {
            Type::Com(t) => Ok(t),
            Type::Val(_) => Err(invalid(pos, "expected a computation type")),
        }
    }

    fn sum_ty(&mut self) -> Result<Type, ParseError> {
        let pos = self.pos();
        let first = self.prod_ty()?;
        if !self.is_sym("+") {
            return Ok(first);
        }
        let mut parts = alloc::vec![as_val(first, pos)?];
        while self.eat_sym("+") {
            let p = self.pos();
            parts.push(as_val(self.prod_ty()?, p)?);
        }
        ValType::binary_sum(parts).map(Type::Val).map_err(|e| invalid(pos, &e.to_string()))
    }

    fn prod_ty(&mut self) -> Result<Type, ParseError> {
        let pos = self.pos();
        let first = self.prefix_ty()?;
        if self.eat_sym("*") {
            let a = as_val(first, pos)?;
            let p = self.pos();
            let b = as_val(self.prod_ty()?, p)?;
            return Ok(Type::Val(ValType::pair(a, b)));
        }
        Ok(first)
    }

    fn prefix_ty(&mut self) -> Result<Type, ParseError> {
        let pos = self.pos();
        if self.eat_kw("U") {
            return match self.prefix_ty()? {
                Type::Com(c) => Ok(Type::Val(ValType::thunk(c))),
                Type::Val(_) => Err(invalid(pos, "`U` expects a computation type")),
            };
        }
        if self.eat_kw("F") {
            let p = self.pos();
            let a = as_val(self.prefix_ty()?, p)?;
            return Ok(Type::Com(ComType::producer(a)));
        }
        self.atom_ty()
    }

    fn atom_ty(&mut self) -> Result<Type, ParseError> {
        let pos = self.pos();
        if self.eat_kw("unit") {
            return Ok(Type::Val(ValType::Unit));
        }
        if self.eat_kw("nat") {
            return Ok(Type::Val(ValType::Nat));
        }
        if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.eat_kw("sum") {
            let fields = self.labelled_types()?;
            let mut vs = Vec::new();
            for (l, t, p) in fields {
                vs.push((l, as_val(t, p)?));
            }
            return ValType::sum(vs).map(Type::Val).map_err(|e| invalid(pos, &e.to_string()));
        }
        if self.eat_kw("prod") {
            let fields = self.labelled_types()?;
            let mut cs = Vec::new();
            for (l, t, p) in fields {
                match t {
                    Type::Com(c) => cs.push((l, c)),
                    Type::Val(_) => return Err(invalid(p, "product components must be computation types")),
                }
            }
            return ComType::prod(cs).map(Type::Com).map_err(|e| invalid(pos, &e.to_string()));
        }
        self.error("a type")
    }

    fn labelled_types(&mut self) -> Result<Vec<(Label, Type, Pos)>, ParseError> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        loop {
            let l = self.label()?;
            self.expect_sym(":")?;
            let p = self.pos();
            out.push((l, self.ty()?, p));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        Ok(out)
    }

    // ---- values ----

    pub fn value(&mut self) -> Result<Value, ParseError> {
        if self.eat_kw("succ") {
            return Ok(Value::succ(self.value()?));
        }
        if self.eat_kw("inj") {
            let l = self.label()?;
            return Ok(Value::inj(l, self.value()?));
        }
        if self.eat_kw("thunk") {
            let body = if self.is_sym("\\") || self.is_kw("fix") || self.is_kw("let") {
                self.comp()?
            } else {
                self.comp_app()?
            };
            return Ok(Value::thunk(body));
        }
        match self.value_atom()? {
            Some(v) => Ok(v),
            None => self.error("a value"),
        }
    }

    pub fn starts_value_atom(&self) -> bool {
        match self.peek() {
            Tok::Number(_) => true,
            Tok::Ident(s) => s == "zero" || !is_keyword(s),
            Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn value_atom(&mut self) -> Result<Option<Value>, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(s) => {
                self.bump();
                let n = s.parse::<u64>().map_err(|_| invalid(pos, "numerals must be natural numbers"))?;
                Ok(Some(Value::numeral(n)))
            }
            Tok::Ident(s) if s == "zero" => {
                self.bump();
                Ok(Some(Value::Zero))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Some(Value::Var(Name::new(&s))))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(Some(Value::Unit));
                }
                let v = self.value()?;
                if self.eat_sym(",") {
                    let w = self.value()?;
                    self.expect_sym(")")?;
                    return Ok(Some(Value::pair(v, w)));
                }
                self.expect_sym(")")?;
                Ok(Some(v))
            }
            _ => Ok(None),
        }
    }

    // ---- computations ----

    pub fn comp(&mut self) -> Result<Comp, ParseError> {
        if self.eat_sym("\\") {
            let var = self.name()?;
            self.expect_sym(":")?;
            let ty = self.val_type()?;
            self.expect_sym(".")?;
            let body = self.comp()?;
            return Ok(Comp::Lambda { var, ty, body: Arc::new(body) });
        }
        if self.eat_kw("let") {
            let var = self.name()?;
            let ty = if self.eat_sym(":") { Some(self.val_type()?) } else { None };
            self.expect_sym("=")?;
            let value = self.value()?;
            self.expect_kw("in")?;
            let body = self.comp()?;
            return Ok(Comp::Let { var, ty, value, body: Arc::new(body) });
        }
        if self.is_kw("fix") {
            // `fix f : U C. M` abbreviates `fix (\f : U C. M)`.
            if matches!(self.peek_at(1), Tok::Ident(s) if !is_keyword(s)) && matches!(self.peek_at(2), Tok::Sym(":")) {
                self.bump();
                let var = self.name()?;
                self.expect_sym(":")?;
                let ty = self.val_type()?;
                self.expect_sym(".")?;
                let body = self.comp()?;
                return Ok(Comp::fix(Comp::Lambda { var, ty, body: Arc::new(body) }));
            }
            self.bump();
            let inner = if self.is_sym("\\") { self.comp()? } else { self.comp_app()? };
            return Ok(Comp::fix(inner));
        }
        let first = self.comp_app()?;
        if self.eat_kw("to") {
            let var = self.name()?;
            self.expect_sym(".")?;
            let then = self.comp()?;
            return Ok(Comp::To { first: Arc::new(first), var, then: Arc::new(then) });
        }
        Ok(first)
    }

    fn comp_app(&mut self) -> Result<Comp, ParseError> {
        let mut m = self.comp_atom()?;
        loop {
            if self.eat_sym("#") {
                let l = self.label()?;
                m = Comp::Proj(Arc::new(m), l);
            } else if self.starts_value_atom() {
                let v = self.value_atom()?.expect("checked by starts_value_atom");
                m = Comp::App(Arc::new(m), v);
            } else {
                return Ok(m);
            }
        }
    }

    fn comp_atom(&mut self) -> Result<Comp, ParseError> {
        let pos = self.pos();
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            Tok::Sym("(") => {
                self.bump();
                let m = self.comp()?;
                self.expect_sym(")")?;
                return Ok(m);
            }
            Tok::Sym("<") => {
                self.bump();
                let mut fields = Vec::new();
                loop {
                    let l = self.label()?;
                    self.expect_sym("=")?;
                    fields.push((l, self.comp()?));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(">")?;
                return Ok(Comp::Tuple(fields));
            }
            _ => return self.error("a computation"),
        };
        match kw.as_str() {
            "return" => {
                self.bump();
                Ok(Comp::Return(self.value()?))
            }
            "force" => {
                self.bump();
                Ok(Comp::Force(self.value()?))
            }
            "case" => {
                self.bump();
                let scrutinee = self.value()?;
                self.expect_kw("of")?;
                self.expect_sym("{")?;
                self.expect_kw("zero")?;
                self.expect_sym("->")?;
                let zero = self.comp()?;
                self.expect_sym("|")?;
                self.expect_kw("succ")?;
                let var = self.name()?;
                self.expect_sym("->")?;
                let succ = self.comp()?;
                self.expect_sym("}")?;
                Ok(Comp::CaseNat { scrutinee, zero: Arc::new(zero), var, succ: Arc::new(succ) })
            }
            "pm" => {
                self.bump();
                let scrutinee = self.value()?;
                self.expect_kw("as")?;
                if self.eat_sym("(") {
                    let fst = self.name()?;
                    self.expect_sym(",")?;
                    let snd = self.name()?;
                    self.expect_sym(")")?;
                    self.expect_sym("->")?;
                    let body = self.comp()?;
                    return Ok(Comp::CasePair { scrutinee, fst, snd, body: Arc::new(body) });
                }
                self.expect_sym("{")?;
                let mut branches = Vec::new();
                loop {
                    self.expect_kw("inj")?;
                    let label = self.label()?;
                    let var = self.name()?;
                    self.expect_sym("->")?;
                    let body = self.comp()?;
                    branches.push(Branch { label, var, body });
                    if !self.eat_sym("|") {
                        break;
                    }
                }
                self.expect_sym("}")?;
                Ok(Comp::CaseSum { scrutinee, branches })
            }
            "por" | "nor" | "lookup" | "update" | "cost" | "raise" => self.effect_op(pos),
            _ => self.error("a computation"),
        }
    }

    fn effect_op(&mut self, pos: Pos) -> Result<Comp, ParseError> {
        let kw = match self.bump() {
            Tok::Ident(s) => s,
            _ => unreachable!(),
        };
        let op = match kw.as_str() {
            "por" => Op::Por,
            "nor" => Op::Nor,
            "lookup" | "update" | "raise" => {
                self.expect_sym("[")?;
                let n = self.name()?;
                self.expect_sym("]")?;
                match kw.as_str() {
                    "lookup" => Op::Lookup(n),
                    "update" => Op::Update(n),
                    _ => Op::Raise(n),
                }
            }
            "cost" => {
                self.expect_sym("[")?;
                let p = self.pos();
                let c = self.number()?;
                self.expect_sym("]")?;
                Op::Cost(CostAmount::new(c).ok_or_else(|| invalid(p, "costs must be finite and non-negative"))?)
            }
            _ => unreachable!(),
        };
        if let Some(sig) = self.sig {
            if !sig.contains(&op) {
                return Err(ParseError::UnknownOp { pos, op: op.to_string() });
            }
        }
        self.expect_sym("(")?;
        let call = match op {
            Op::Lookup(_) => {
                let var = self.name()?;
                self.expect_sym(".")?;
                let body = self.comp()?;
                OpCall { op, param: None, args: OpArgs::Bind(var, Arc::new(body)) }
            }
            Op::Update(_) => {
                let param = self.value()?;
                self.expect_sym(",")?;
                let body = self.comp()?;
                OpCall { op, param: Some(param), args: OpArgs::Finite(alloc::vec![body]) }
            }
            _ => {
                let mut children = Vec::new();
                if !self.is_sym(")") {
                    loop {
                        children.push(self.comp()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                OpCall { op, param: None, args: OpArgs::Finite(children) }
            }
        };
        self.expect_sym(")")?;
        Ok(Comp::Op(call))
    }
}

fn invalid(pos: Pos, message: &str) -> ParseError {
    ParseError::Invalid { pos, message: message.to_string() }
}

fn as_val(t: Type, pos: Pos) -> Result<ValType, ParseError> {
    match t {
        Type::Val(v) => Ok(v),
        Type::Com(_) => Err(invalid(pos, "expected a value type")),
    }
}
