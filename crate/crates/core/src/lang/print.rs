//! Printing in the concrete grammar. Output parses back to the same term.

use core::fmt::{self, Display, Formatter, Write};

use super::ast::*;

fn val_type_level(t: &ValType) -> u8 {
    match t {
        ValType::Sum(fs) if is_positional(fs) => 1,
        ValType::Pair(..) => 2,
        ValType::Thunk(_) => 3,
        _ => 4,
    }
}

fn com_type_level(t: &ComType) -> u8 {
    match t {
        ComType::Arrow(..) => 0,
        ComType::Producer(_) => 3,
        ComType::Prod(_) => 4,
    }
}

fn is_positional<T>(fs: &[(Label, T)]) -> bool {
    fs.len() >= 2 && fs.iter().enumerate().all(|(i, (l, _))| l.as_index() == Some(i))
}

fn val_type_at(f: &mut Formatter<'_>, t: &ValType, min: u8) -> fmt::Result {
    if val_type_level(t) < min {
        write!(f, "({})", t)
    } else {
        write!(f, "{}", t)
    }
}

fn com_type_at(f: &mut Formatter<'_>, t: &ComType, min: u8) -> fmt::Result {
    if com_type_level(t) < min {
        write!(f, "({})", t)
    } else {
        write!(f, "{}", t)
    }
}

impl Display for ValType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            ValType::Unit => f.write_str("unit"),
            ValType::Nat => f.write_str("nat"),
            ValType::Thunk(c) => {
                f.write_str("U ")?;
                com_type_at(f, c, 3)
            }
            ValType::Sum(fs) if is_positional(fs) => {
                for (i, (_, t)) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    val_type_at(f, t, 2)?;
                }
                Ok(())
            }
            ValType::Sum(fs) => {
                f.write_str("sum{")?;
                for (i, (l, t)) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {}", l, t)?;
                }
                f.write_char('}')
            }
            ValType::Pair(a, b) => {
                val_type_at(f, a, 3)?;
                f.write_str(" * ")?;
                val_type_at(f, b, 2)
            }
        }
    }
}

impl Display for ComType {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            ComType::Producer(a) => {
                f.write_str("F ")?;
                val_type_at(f, a, 3)
            }
            ComType::Arrow(a, c) => {
                val_type_at(f, a, 1)?;
                f.write_str(" -> ")?;
                com_type_at(f, c, 0)
            }
            ComType::Prod(fs) => {
                f.write_str("prod{")?;
                for (i, (l, t)) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {}", l, t)?;
                }
                f.write_char('}')
            }
        }
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Type::Val(t) => t.fmt(f),
            Type::Com(t) => t.fmt(f),
        }
    }
}

fn is_value_atom(v: &Value) -> bool {
    match v {
        Value::Unit | Value::Zero | Value::Var(_) | Value::Pair(..) => true,
        Value::Succ(_) => v.numeral_value().is_some(),
        _ => false,
    }
}

/// Whether printing `v` ends in a thunk body that would swallow trailing
/// arguments.
fn open_ended(v: &Value) -> bool {
    match v {
        Value::Thunk(_) => true,
        Value::Succ(inner) if v.numeral_value().is_none() => open_ended(inner),
        Value::Inj(_, inner) => open_ended(inner),
        _ => false,
    }
}

/// Writes `v` so that it can be an application argument.
pub(crate) fn value_atom(f: &mut Formatter<'_>, v: &Value) -> fmt::Result {
    if is_value_atom(v) {
        write!(f, "{}", v)
    } else {
        write!(f, "({})", v)
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.numeral_value() {
            return write!(f, "{}", n);
        }
        match self {
            Value::Unit => f.write_str("()"),
            Value::Zero => f.write_str("0"),
            Value::Succ(v) => write!(f, "succ {}", v),
            Value::Var(x) => write!(f, "{}", x),
            Value::Thunk(m) => write!(f, "thunk ({})", m),
            Value::Inj(l, v) => write!(f, "inj {} {}", l, v),
            Value::Pair(a, b) => write!(f, "({}, {})", a, b),
        }
    }
}

fn comp_level(c: &Comp) -> u8 {
    match c {
        Comp::Lambda { .. } | Comp::Let { .. } | Comp::Fix(_) | Comp::To { .. } | Comp::CasePair { .. } => 0,
        Comp::App(..) | Comp::Proj(..) => 1,
        Comp::Return(v) | Comp::Force(v) if open_ended(v) => 0,
        _ => 2,
    }
}

fn comp_at(f: &mut Formatter<'_>, c: &Comp, min: u8) -> fmt::Result {
    if comp_level(c) < min {
        write!(f, "({})", c)
    } else {
        write!(f, "{}", c)
    }
}

impl Display for Comp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Comp::CaseNat { scrutinee, zero, var, succ } => {
                write!(f, "case {} of {{zero -> {} | succ {} -> {}}}", scrutinee, zero, var, succ)
            }
            Comp::Let { var, ty: None, value, body } => write!(f, "let {} = {} in {}", var, value, body),
            Comp::Let { var, ty: Some(t), value, body } => write!(f, "let {} : {} = {} in {}", var, t, value, body),
            Comp::Return(v) => write!(f, "return {}", v),
            Comp::To { first, var, then } => {
                comp_at(f, first, 1)?;
                write!(f, " to {}. {}", var, then)
            }
            Comp::Force(v) => write!(f, "force {}", v),
            Comp::Lambda { var, ty, body } => write!(f, "\\{}:{}. {}", var, ty, body),
            Comp::App(m, v) => {
                comp_at(f, m, 1)?;
                f.write_char(' ')?;
                value_atom(f, v)
            }
            Comp::CaseSum { scrutinee, branches } => {
                write!(f, "pm {} as {{", scrutinee)?;
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "inj {} {} -> {}", b.label, b.var, b.body)?;
                }
                f.write_char('}')
            }
            Comp::CasePair { scrutinee, fst, snd, body } => {
                write!(f, "pm {} as ({}, {}) -> {}", scrutinee, fst, snd, body)
            }
            Comp::Tuple(fields) => {
                f.write_char('<')?;
                for (i, (l, m)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{} = {}", l, m)?;
                }
                f.write_char('>')
            }
            Comp::Proj(m, l) => {
                comp_at(f, m, 1)?;
                write!(f, " # {}", l)
            }
            Comp::Fix(m) => {
                if matches!(**m, Comp::Lambda { .. }) {
                    write!(f, "fix {}", m)
                } else {
                    f.write_str("fix ")?;
                    comp_at(f, m, 1)
                }
            }
            Comp::Op(call) => {
                write!(f, "{}(", call.op)?;
                match &call.args {
                    OpArgs::Bind(x, body) => write!(f, "{}. {}", x, body)?,
                    OpArgs::Finite(children) => {
                        let mut first = true;
                        if let Some(p) = &call.param {
                            write!(f, "{}", p)?;
                            first = false;
                        }
                        for c in children {
                            if !first {
                                f.write_str(", ")?;
                            }
                            first = false;
                            write!(f, "{}", c)?;
                        }
                    }
                }
                f.write_char(')')
            }
        }
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Val(v) => v.fmt(f),
            Term::Com(c) => c.fmt(f),
        }
    }
}
