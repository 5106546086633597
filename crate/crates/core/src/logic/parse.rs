use alloc::string::String;
use alloc::vec::Vec;

use super::formula::Formula;
use crate::effects::EffectSignature;
use crate::lang::lexer::Tok;
use crate::lang::{ParseError, Parser};
use crate::quant::TruthSpace;

/// Parses a formula. `modalities` are the names accepted before `<`.
pub fn parse_formula(
    text: &str,
    space: &TruthSpace,
    modalities: &[String],
    sig: Option<&EffectSignature>,
) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let f = formula(&mut p, space, modalities)?;
    p.expect_eof()?;
    Ok(f)
}

/// The formula production on an existing token cursor.
pub fn formula(p: &mut Parser<'_>, sp: &TruthSpace, qs: &[String]) -> Result<Formula, ParseError> {
    let pos = p.pos();
    if p.eat_sym("{") {
        let n = p.natural()?;
        p.expect_sym("}")?;
        return Ok(Formula::NatEq(n));
    }
    if p.eat_sym("[") {
        p.expect_kw("U")?;
        p.expect_sym("]")?;
        return Ok(Formula::thunk(formula(p, sp, qs)?));
    }
    if p.is_sym("(") {
        let mark = p.mark();
        p.bump();
        if let Ok(v) = p.value() {
            if p.eat_sym(".") {
                let f = formula(p, sp, qs)?;
                p.expect_sym(")")?;
                return Ok(Formula::arg(v, f));
            }
        }
        p.reset(mark);
        p.bump();
        let f = formula(p, sp, qs)?;
        p.expect_sym(")")?;
        return Ok(f);
    }
    let Tok::Ident(word) = p.peek().clone() else {
        return p.error("a formula");
    };
    match word.as_str() {
        "inj" => {
            p.bump();
            let l = p.label()?;
            Ok(Formula::inj(l, formula(p, sp, qs)?))
        }
        "proj" => {
            p.bump();
            let l = p.label()?;
            Ok(Formula::proj(l, formula(p, sp, qs)?))
        }
        "fst" | "snd" => {
            p.bump();
            let f = alloc::sync::Arc::new(formula(p, sp, qs)?);
            Ok(if word == "fst" { Formula::Fst(f) } else { Formula::Snd(f) })
        }
        "or" | "and" => {
            p.bump();
            p.expect_sym("{")?;
            let mut xs = Vec::new();
            if !p.is_sym("}") {
                loop {
                    xs.push(formula(p, sp, qs)?);
                    if !p.eat_sym(",") {
                        break;
                    }
                }
            }
            p.expect_sym("}")?;
            Ok(if word == "or" { Formula::or(xs) } else { Formula::and(xs) })
        }
        "step" => {
            p.bump();
            p.expect_sym("(")?;
            let f = formula(p, sp, qs)?;
            p.expect_sym(",")?;
            let a = sp.parse_with(p)?;
            p.expect_sym(")")?;
            Ok(Formula::step(f, a))
        }
        "const" => {
            p.bump();
            Ok(Formula::Const(sp.parse_with(p)?))
        }
        "not" => {
            p.bump();
            Ok(Formula::not(formula(p, sp, qs)?))
        }
        "mix" => {
            p.bump();
            p.expect_sym("(")?;
            let f = formula(p, sp, qs)?;
            p.expect_sym(",")?;
            let g = formula(p, sp, qs)?;
            p.expect_sym(")")?;
            Ok(Formula::Mix(f.into(), g.into()))
        }
        "sigma" => {
            p.bump();
            let Some(cfg) = sp.store() else {
                return Err(ParseError::Invalid { pos, message: "sigma needs a state-indexed truth space".into() });
            };
            p.expect_sym("[")?;
            let mut mu = alloc::vec![0.0; cfg.num_states()];
            if !p.is_sym("]") {
                loop {
                    let s = state(p, cfg)?;
                    p.expect_sym(":")?;
                    mu[s] = p.number()?;
                    if !p.eat_sym(",") {
                        break;
                    }
                }
            }
            p.expect_sym("]")?;
            p.expect_sym("(")?;
            let f = formula(p, sp, qs)?;
            p.expect_sym(")")?;
            Ok(Formula::SigmaMu(mu.into(), f.into()))
        }
        q if matches!(p.peek_at(1), Tok::Sym("<")) => {
            if !qs.iter().any(|m| m == q) {
                return Err(ParseError::Invalid {
                    pos,
                    message: alloc::format!("unknown modality `{}` (available: {})", q, qs.join(", ")),
                });
            }
            p.bump();
            p.bump();
            let f = formula(p, sp, qs)?;
            p.expect_sym(">")?;
            Ok(Formula::modal(q, f))
        }
        _ => p.error("a formula"),
    }
}

fn state(p: &mut Parser<'_>, cfg: &crate::quant::StoreConfig) -> Result<usize, ParseError> {
    let pos = p.pos();
    p.expect_sym("(")?;
    let mut vals: Vec<Option<u64>> = alloc::vec![None; cfg.locations().len()];
    loop {
        let lpos = p.pos();
        let l = p.name()?;
        let i = cfg
            .location_index(&l)
            .ok_or_else(|| ParseError::Invalid { pos: lpos, message: alloc::format!("unknown location `{}`", l) })?;
        p.expect_sym("=")?;
        vals[i] = Some(p.natural()?);
        if !p.eat_sym(",") {
            break;
        }
    }
    p.expect_sym(")")?;
    if vals.iter().any(Option::is_none) {
        return Err(ParseError::Invalid { pos, message: "a state must give every location a value".into() });
    }
    Ok(cfg.state(&vals.into_iter().flatten().collect::<Vec<_>>()))
}
