use crate::action::Action;
use crate::error::Result;
use crate::modal::Formula;

use super::lexer::{lex, Cursor, Tok};

pub fn parse_formula(src: &str) -> Result<Formula> {
    let toks: Vec<_> = lex(src)?.into_iter().filter(|t| t.tok != Tok::Newline).collect();
    let mut cur = Cursor::new(&toks);
    let f = formula(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.error("trailing input after formula".into()));
    }
    Ok(f)
}

/// One formula per non-empty line; `#` starts a comment.
pub fn parse_formulas(src: &str) -> Result<Vec<Formula>> {
    let toks = lex(src)?;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..=toks.len() {
        if i == toks.len() || toks[i].tok == Tok::Newline {
            if i > start {
                let mut cur = Cursor::new(&toks[start..i]);
                let f = formula(&mut cur)?;
                if !cur.at_end() {
                    return Err(cur.error("trailing input after formula".into()));
                }
                out.push(f);
            }
            start = i + 1;
        }
    }
    Ok(out)
}

pub fn emit_formula(f: &Formula) -> String {
    f.to_string()
}

fn formula(cur: &mut Cursor) -> Result<Formula> {
    match cur.next() {
        Some(Tok::Ident(n)) if n == "T" => Ok(Formula::top()),
        Some(Tok::Ident(n)) if n == "D" => Ok(Formula::delta(formula(cur)?)),
        Some(Tok::Tilde) => Ok(Formula::neg(formula(cur)?)),
        Some(Tok::LParen) => {
            let f = formula(cur)?;
            cur.expect(&Tok::RParen, "`)`")?;
            Ok(f)
        }
        Some(Tok::Conj) => {
            cur.expect(&Tok::LBrace, "`{`")?;
            let mut items = Vec::new();
            if !cur.eat(&Tok::RBrace) {
                loop {
                    items.push(formula(cur)?);
                    if cur.eat(&Tok::RBrace) {
                        break;
                    }
                    cur.expect(&Tok::Comma, "`,` or `}`")?;
                }
            }
            Ok(Formula::Conj(items))
        }
        Some(Tok::LAngle) => {
            let label = match cur.next() {
                Some(Tok::Ident(n)) | Some(Tok::Oracle(n)) => n.clone(),
                _ => return Err(cur.error("expected modality label".into())),
            };
            cur.expect(&Tok::RAngle, "`>`")?;
            let body = formula(cur)?;
            Ok(match label.as_str() {
                "eps" => Formula::eps(body),
                "that" => Formula::tau_hat(body),
                other => Formula::diam(Action::new(other), body),
            })
        }
        _ => {
            Err(cur.error("expected formula".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_emit_round_trip() {
        for s in ["T", "/\\{<a>T, ~<tau>T}", "<eps>/\\{T, <that><b>T}", "D <eps>T", "~~<@div>T"] {
            let f = parse_formula(s).unwrap();
            assert_eq!(parse_formula(&emit_formula(&f)).unwrap(), f);
        }
        assert_eq!(parse_formula("(<a>T)").unwrap(), parse_formula("<a>T").unwrap());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_formula("<a>").is_err());
        assert!(parse_formula("/\\{T,").is_err());
        assert!(parse_formula("T T").is_err());
    }

    #[test]
    fn several_per_file() {
        let fs = parse_formulas("# battery\n<a>T\n\n~<b>T # trailing\n").unwrap();
        assert_eq!(fs.len(), 2);
    }
}
