//! Syntax of the language: types, value and computation terms, the concrete
//! grammar and the bidirectional type checker.

mod ast;
pub mod lexer;
mod parse;
mod print;
mod subst;
mod typecheck;

pub use ast::*;
pub use parse::{parse_comp, parse_program, parse_type, parse_value, ParseError, Parser, Program};
pub use subst::{free_vars_comp, free_vars_value, substitute, substitute_comp, substitute_value, Subst};
pub use typecheck::{Context, TypeChecker, TypeError, TypeKind};
