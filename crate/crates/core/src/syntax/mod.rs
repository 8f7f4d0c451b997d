//! Concrete syntaxes: terms, the `.tss` rule language, Aldebaran `.aut`
//! transition systems and `.hml` formulas.

mod aut;
mod hml;
mod lexer;
mod tss;

pub use aut::{emit_aut, parse_aut};
pub use hml::{emit_formula, parse_formula, parse_formulas};
pub use tss::{emit_tss, parse_tss, TssDocument};

use crate::error::Result;
use crate::term::{Signature, Term};
use lexer::{lex, Cursor, Tok};

/// Parses a term; names not declared in `sig` are variables.
pub fn parse_term(src: &str, sig: &Signature) -> Result<Term> {
    let toks: Vec<_> = lex(src)?.into_iter().filter(|t| t.tok != Tok::Newline).collect();
    let mut cur = Cursor::new(&toks);
    let t = tss::term(&mut cur, sig)?;
    if !cur.at_end() {
        return Err(cur.error("trailing input after term".into()));
    }
    Ok(t)
}
