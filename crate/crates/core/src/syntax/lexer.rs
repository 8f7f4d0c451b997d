use crate::error::{Error, Result};
use crate::term::OPERATOR_CHARS;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Quoted(String),
    Oracle(String),
    Op(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
    Comma,
    Colon,
    Turnstile,
    Dash,
    Arrow,
    NegArrow,
    Conj,
    Tilde,
    Newline,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| Error::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: l0, col: c0 });
            *i += len;
            *col += len;
        };
        let peek = |k: usize| chars.get(i + k).copied();
        match c {
            '\n' => {
                out.push(Token { tok: Tok::Newline, line, col });
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            '[' => push(Tok::LBracket, 1, &mut i, &mut col),
            ']' => push(Tok::RBracket, 1, &mut i, &mut col),
            '<' => push(Tok::LAngle, 1, &mut i, &mut col),
            '>' => push(Tok::RAngle, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '~' => push(Tok::Tilde, 1, &mut i, &mut col),
            '/' if peek(1) == Some('\\') => push(Tok::Conj, 2, &mut i, &mut col),
            '|' if peek(1) == Some('-') => push(Tok::Turnstile, 2, &mut i, &mut col),
            '-' if peek(1) == Some('>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '-' if peek(1) == Some('/') && peek(2) == Some('>') => push(Tok::NegArrow, 3, &mut i, &mut col),
            '-' => push(Tok::Dash, 1, &mut i, &mut col),
            '`' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j] != '`' && chars[j] != '\n' {
                    j += 1;
                }
                if j >= chars.len() || chars[j] != '`' {
                    return Err(err(line, col, "unterminated backquoted name".into()));
                }
                let name: String = chars[start..j].iter().collect();
                if name.is_empty() {
                    return Err(err(line, col, "empty backquoted name".into()));
                }
                push(Tok::Quoted(name), j + 1 - i, &mut i, &mut col);
            }
            '@' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(err(line, col, "empty oracle label".into()));
                }
                let name: String = chars[i..j].iter().collect();
                push(Tok::Oracle(name), j - i, &mut i, &mut col);
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                push(Tok::Ident(name), j - i, &mut i, &mut col);
            }
            c if OPERATOR_CHARS.contains(c) => {
                let mut j = i + 1;
                while j < chars.len() && OPERATOR_CHARS.contains(chars[j]) && !(chars[j] == '|' && chars.get(j + 1) == Some(&'-')) {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                push(Tok::Op(name), j - i, &mut i, &mut col);
            }
            other => return Err(err(line, col, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

/// Cursor over a token slice.
pub struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    eof_line: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token]) -> Self {
        let eof_line = toks.last().map_or(1, |t| t.line);
        Cursor { toks, pos: 0, eof_line }
    }

    pub fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, k: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    pub fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    pub fn error(&self, msg: String) -> Error {
        match self.toks.get(self.pos) {
            Some(t) => Error::Syntax { line: t.line, col: t.col, msg },
            None => Error::Syntax {
                line: self.eof_line,
                col: 0,
                msg: format!("{msg} at end of input"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn literal_tokens() {
        assert_eq!(
            toks("x -a-> y, x -b-/> |- x;y -a-> y"),
            vec![
                Tok::Ident("x".into()),
                Tok::Dash,
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("y".into()),
                Tok::Comma,
                Tok::Ident("x".into()),
                Tok::Dash,
                Tok::Ident("b".into()),
                Tok::NegArrow,
                Tok::Turnstile,
                Tok::Ident("x".into()),
                Tok::Op(";".into()),
                Tok::Ident("y".into()),
                Tok::Dash,
                Tok::Ident("a".into()),
                Tok::Arrow,
                Tok::Ident("y".into()),
            ]
        );
    }

    #[test]
    fn comments_quotes_and_errors() {
        assert_eq!(toks("`^p;r` # hi"), vec![Tok::Quoted("^p;r".into())]);
        assert_eq!(toks("x||y"), vec![Tok::Ident("x".into()), Tok::Op("||".into()), Tok::Ident("y".into())]);
        assert!(lex("x $ y").is_err());
        assert!(lex("`open").is_err());
    }
}
