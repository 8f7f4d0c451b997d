use std::fmt::Write as _;

use crate::action::Action;
use crate::error::{Error, Result};
use crate::lts::Lts;

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        col: 1,
        msg: msg.into(),
    }
}

/// Parses an Aldebaran file: `des (initial, #transitions, #states)` followed
/// by one `(source, "label", target)` line per transition.
pub fn parse_aut(src: &str) -> Result<Lts> {
    let mut lines = src.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| syntax(1, "missing `des` header"))?;
    let header = header.trim();
    let inner = header
        .strip_prefix("des")
        .map(str::trim)
        .and_then(|h| h.strip_prefix('('))
        .and_then(|h| h.strip_suffix(')'))
        .ok_or_else(|| syntax(hl + 1, "malformed `des` header"))?;
    let nums: Vec<usize> = inner
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| syntax(hl + 1, "header fields must be numbers"))?;
    let [initial, ntrans, nstates] = nums[..] else {
        return Err(syntax(hl + 1, "header needs three fields"));
    };
    let mut trans = Vec::new();
    for (ln, line) in lines {
        let l = line.trim();
        let body = l
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(|| syntax(ln + 1, "transition must be `(src, label, dst)`"))?;
        let first = body.find(',').ok_or_else(|| syntax(ln + 1, "missing `,`"))?;
        let last = body.rfind(',').ok_or_else(|| syntax(ln + 1, "missing `,`"))?;
        if first == last {
            return Err(syntax(ln + 1, "transition needs three fields"));
        }
        let s: usize = body[..first].trim().parse().map_err(|_| syntax(ln + 1, "bad source state"))?;
        let t: usize = body[last + 1..].trim().parse().map_err(|_| syntax(ln + 1, "bad target state"))?;
        let raw = body[first + 1..last].trim();
        let label = raw.strip_prefix('"').and_then(|x| x.strip_suffix('"')).unwrap_or(raw);
        if label.is_empty() {
            return Err(syntax(ln + 1, "empty label"));
        }
        if s >= nstates || t >= nstates {
            return Err(syntax(ln + 1, format!("state out of range (have {nstates})")));
        }
        trans.push((s, Action::new(label), t));
    }
    if trans.len() != ntrans {
        return Err(syntax(hl + 1, format!("header announces {ntrans} transitions, found {}", trans.len())));
    }
    if initial >= nstates {
        return Err(syntax(hl + 1, "initial state out of range"));
    }
    Lts::new(nstates, initial, trans)
}

/// Emits transitions sorted by source, label name and target.
pub fn emit_aut(lts: &Lts) -> String {
    let mut rows: Vec<(usize, &str, usize)> = lts
        .transitions()
        .iter()
        .map(|&(s, l, t)| (s, lts.label(l).name(), t))
        .collect();
    rows.sort_unstable();
    let mut out = String::new();
    let _ = writeln!(out, "des ({}, {}, {})", lts.initial(), rows.len(), lts.num_states());
    for (s, l, t) in rows {
        let _ = writeln!(out, "({s},\"{l}\",{t})");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let src = "des (0, 3, 3)\n(0,\"a\",1)\n(0,\"tau\",2)\n(2,\"@div\",2)\n";
        let l = parse_aut(src).unwrap();
        assert_eq!(emit_aut(&l), src);
        let unsorted = "des (0, 2, 2)\n(1, b, 0)\n(0, \"a\", 1)\n";
        let l2 = parse_aut(unsorted).unwrap();
        assert_eq!(emit_aut(&l2), "des (0, 2, 2)\n(0,\"a\",1)\n(1,\"b\",0)\n");
        assert_eq!(emit_aut(&parse_aut(&emit_aut(&l2)).unwrap()), emit_aut(&l2));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_aut("").is_err());
        assert!(parse_aut("des (0, 1, 1)\n(0,\"a\",3)\n").is_err());
        assert!(parse_aut("des (0, 2, 2)\n(0,\"a\",1)\n").is_err());
        assert!(parse_aut("des (0,1,2)\n(0 \"a\" 1)\n").is_err());
    }

    #[test]
    fn tau_label_is_internal() {
        let l = parse_aut("des (0, 1, 2)\n(0,\"tau\",1)\n").unwrap();
        assert!(!l.is_stable(0));
    }
}
