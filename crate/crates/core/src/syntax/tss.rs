use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::action::{Action, ActionOrder};
use crate::error::{Error, Result};
use crate::term::{Signature, Symbol, Term, Var};
use crate::tss::{ArgPredicate, Literal, Rule, Tss};

use super::lexer::{lex, Cursor, Tok, Token};

/// A parsed `.tss` file: the expanded system plus the name of each rule, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TssDocument {
    pub tss: Tss,
    pub rule_names: Vec<Option<String>>,
}

#[derive(Clone, Copy, Debug)]
enum ActionSet {
    Observable,
    All,
}

#[derive(Clone, Debug)]
enum Family {
    Above(String, String),
    In(String, ActionSet),
}

#[derive(Clone, Debug)]
struct LitTemplate {
    source: Term,
    label: String,
    target: Option<Term>,
    family: Option<Family>,
}

#[derive(Clone, Debug)]
struct RuleTemplate {
    name: Option<String>,
    binders: Vec<(String, ActionSet)>,
    premises: Vec<LitTemplate>,
    conclusion: LitTemplate,
    line: usize,
}

enum PredKind {
    Lambda,
    Aleph,
}

pub fn parse_tss(src: &str) -> Result<TssDocument> {
    let toks = lex(src)?;
    let mut lines: Vec<Vec<Token>> = vec![Vec::new()];
    for t in toks {
        if t.tok == Tok::Newline {
            lines.push(Vec::new());
        } else {
            lines.last_mut().unwrap().push(t);
        }
    }
    let mut sig = Signature::new();
    let mut declared: BTreeSet<Action> = BTreeSet::new();
    let mut order_pairs: Vec<(String, String, usize)> = Vec::new();
    let mut has_order = false;
    let mut preds: Vec<(PredKind, Vec<(String, usize)>, bool, usize)> = Vec::new();
    let mut templates = Vec::new();

    for line in lines.iter().filter(|l| !l.is_empty()) {
        let mut cur = Cursor::new(line);
        let first_line = line[0].line;
        match cur.peek() {
            Some(Tok::Ident(k)) if k == "actions" => {
                cur.next();
                loop {
                    let name = match cur.next() {
                        Some(Tok::Ident(n)) | Some(Tok::Oracle(n)) => n.clone(),
                        _ => return Err(cur.error("expected action name".into())),
                    };
                    if ["eps", "that", "A", "A_tau"].contains(&name.as_str()) {
                        return Err(cur.error(format!("`{name}` is reserved")));
                    }
                    if name != "tau" {
                        declared.insert(Action::new(&name));
                    }
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            Some(Tok::Ident(k)) if k == "order" => {
                cur.next();
                has_order = true;
                loop {
                    let a = action_name(&mut cur)?;
                    cur.expect(&Tok::LAngle, "`<`")?;
                    let b = action_name(&mut cur)?;
                    order_pairs.push((a, b, first_line));
                    if !cur.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            Some(Tok::Ident(k)) if k == "const" || k == "op" => {
                let is_const = k == "const";
                cur.next();
                let mut names = vec![symbol_name(&mut cur)?];
                while cur.eat(&Tok::Comma) {
                    names.push(symbol_name(&mut cur)?);
                }
                let arity = if is_const {
                    0
                } else {
                    cur.expect(&Tok::Colon, "`:` and an arity")?;
                    match cur.next() {
                        Some(Tok::Ident(n)) => n.parse::<usize>().map_err(|_| cur.error("arity must be a number".into()))?,
                        _ => return Err(cur.error("expected arity".into())),
                    }
                };
                for n in names {
                    sig.declare(&n, arity).map_err(|e| Error::Syntax {
                        line: first_line,
                        col: 1,
                        msg: e.to_string(),
                    })?;
                }
            }
            Some(Tok::Ident(k)) if k == "lambda" || k == "aleph" => {
                let kind = if k == "lambda" { PredKind::Lambda } else { PredKind::Aleph };
                cur.next();
                let mut entries = Vec::new();
                let mut all = false;
                if matches!(cur.peek(), Some(Tok::Ident(a)) if a == "all") {
                    cur.next();
                    all = true;
                } else {
                    while cur.eat(&Tok::LParen) {
                        let f = symbol_name(&mut cur)?;
                        cur.expect(&Tok::Comma, "`,`")?;
                        let i = match cur.next() {
                            Some(Tok::Ident(n)) => n.parse::<usize>().map_err(|_| cur.error("argument index must be a number".into()))?,
                            _ => return Err(cur.error("expected argument index".into())),
                        };
                        cur.expect(&Tok::RParen, "`)`")?;
                        entries.push((f, i));
                        cur.eat(&Tok::Comma);
                    }
                }
                preds.push((kind, entries, all, first_line));
            }
            _ => templates.push(rule_template(&mut cur, &sig, first_line)?),
        }
        if !cur.at_end() {
            return Err(cur.error("unexpected trailing input".into()));
        }
    }

    let mut all_actions = declared.clone();
    all_actions.insert(Action::tau());
    let resolve_action = |name: &str, line: usize| -> Result<Action> {
        let a = Action::new(name);
        if a.is_tau() || declared.contains(&a) {
            Ok(a)
        } else {
            Err(Error::Syntax {
                line,
                col: 1,
                msg: format!("undeclared action `{name}`"),
            })
        }
    };
    let order = if has_order {
        let mut pairs = Vec::new();
        for (a, b, line) in &order_pairs {
            pairs.push((resolve_action(a, *line)?, resolve_action(b, *line)?));
        }
        Some(ActionOrder::new(pairs)?)
    } else {
        None
    };

    let mut lambda = None;
    let mut aleph = None;
    for (kind, entries, all, line) in preds {
        let pred = if all {
            ArgPredicate::universal(&sig)
        } else {
            let mut p = ArgPredicate::new();
            for (f, i) in entries {
                let sym = Symbol::new(&f);
                let arity = sig.arity(&sym).ok_or_else(|| Error::Syntax {
                    line,
                    col: 1,
                    msg: format!("undeclared symbol `{f}`"),
                })?;
                if i == 0 || i > arity {
                    return Err(Error::Syntax {
                        line,
                        col: 1,
                        msg: format!("`{f}` has no argument {i}"),
                    });
                }
                p.insert(sym, i);
            }
            p
        };
        match kind {
            PredKind::Lambda => lambda = Some(pred),
            PredKind::Aleph => aleph = Some(pred),
        }
    }

    let mut named: Vec<(Rule, Option<String>)> = Vec::new();
    for t in &templates {
        for r in expand(t, &all_actions, order.as_ref(), &resolve_action)? {
            named.push((r, t.name.clone()));
        }
    }
    named.sort();
    named.dedup();
    let (rules, rule_names) = named.into_iter().unzip();
    Ok(TssDocument {
        tss: Tss {
            signature: sig,
            actions: all_actions,
            order,
            rules,
            lambda,
            aleph,
        },
        rule_names,
    })
}

fn action_name(cur: &mut Cursor) -> Result<String> {
    match cur.next() {
        Some(Tok::Ident(n)) | Some(Tok::Oracle(n)) => Ok(n.clone()),
        _ => Err(cur.error("expected action".into())),
    }
}

fn symbol_name(cur: &mut Cursor) -> Result<String> {
    match cur.next() {
        Some(Tok::Ident(n)) | Some(Tok::Quoted(n)) | Some(Tok::Op(n)) => Ok(n.clone()),
        _ => Err(cur.error("expected symbol name".into())),
    }
}

fn action_set(cur: &mut Cursor) -> Result<ActionSet> {
    match cur.next() {
        Some(Tok::Ident(n)) if n == "A" => Ok(ActionSet::Observable),
        Some(Tok::Ident(n)) if n == "A_tau" => Ok(ActionSet::All),
        _ => Err(cur.error("expected `A` or `A_tau`".into())),
    }
}

fn rule_template(cur: &mut Cursor, sig: &Signature, line: usize) -> Result<RuleTemplate> {
    let mut name = None;
    let mut binders = Vec::new();
    let named = matches!((cur.peek(), cur.peek_at(1)), (Some(Tok::Ident(_)), Some(Tok::Colon | Tok::LBracket)));
    if named || cur.peek() == Some(&Tok::LBracket) {
        if let (true, Some(Tok::Ident(n))) = (named, cur.peek()) {
            name = Some(n.clone());
            cur.next();
        }
        if cur.eat(&Tok::LBracket) {
            loop {
                let mv = action_name(cur)?;
                match cur.next() {
                    Some(Tok::Ident(k)) if k == "in" => {}
                    _ => return Err(cur.error("expected `in`".into())),
                }
                binders.push((mv, action_set(cur)?));
                if !cur.eat(&Tok::Comma) {
                    break;
                }
            }
            cur.expect(&Tok::RBracket, "`]`")?;
        }
        cur.expect(&Tok::Colon, "`:`")?;
    }
    let mut premises = Vec::new();
    if !cur.eat(&Tok::Turnstile) {
        loop {
            let mut lit = literal(cur, sig)?;
            if matches!(cur.peek(), Some(Tok::Ident(k)) if k == "for") {
                cur.next();
                match cur.next() {
                    Some(Tok::Ident(k)) if k == "all" => {}
                    _ => return Err(cur.error("expected `all`".into())),
                }
                let mv = action_name(cur)?;
                lit.family = Some(if cur.eat(&Tok::RAngle) {
                    Family::Above(mv, action_name(cur)?)
                } else {
                    match cur.next() {
                        Some(Tok::Ident(k)) if k == "in" => Family::In(mv, action_set(cur)?),
                        _ => return Err(cur.error("expected `>` or `in`".into())),
                    }
                });
            }
            premises.push(lit);
            if cur.eat(&Tok::Comma) {
                continue;
            }
            cur.expect(&Tok::Turnstile, "`,` or `|-`")?;
            break;
        }
    }
    let conclusion = literal(cur, sig)?;
    Ok(RuleTemplate {
        name,
        binders,
        premises,
        conclusion,
        line,
    })
}

fn literal(cur: &mut Cursor, sig: &Signature) -> Result<LitTemplate> {
    let source = term(cur, sig)?;
    cur.expect(&Tok::Dash, "`-label->` or `-label-/>`")?;
    let label = action_name(cur)?;
    if cur.eat(&Tok::Arrow) {
        let target = term(cur, sig)?;
        Ok(LitTemplate {
            source,
            label,
            target: Some(target),
            family: None,
        })
    } else if cur.eat(&Tok::NegArrow) {
        Ok(LitTemplate {
            source,
            label,
            target: None,
            family: None,
        })
    } else {
        Err(cur.error("expected `->` or `-/>`".into()))
    }
}

pub(super) fn term(cur: &mut Cursor, sig: &Signature) -> Result<Term> {
    let mut lhs = primary(cur, sig)?;
    while let Some(Tok::Op(op)) = cur.peek() {
        let sym = Symbol::new(op);
        match sig.arity(&sym) {
            Some(2) => {}
            Some(_) => return Err(cur.error(format!("operator `{op}` is not binary"))),
            None => return Err(cur.error(format!("undeclared operator `{op}`"))),
        }
        cur.next();
        let rhs = primary(cur, sig)?;
        lhs = Term::App(sym, vec![lhs, rhs]);
    }
    Ok(lhs)
}

fn primary(cur: &mut Cursor, sig: &Signature) -> Result<Term> {
    if cur.eat(&Tok::LParen) {
        let t = term(cur, sig)?;
        cur.expect(&Tok::RParen, "`)`")?;
        return Ok(t);
    }
    let (name, quoted) = match cur.peek() {
        Some(Tok::Ident(n)) => (n.clone(), false),
        Some(Tok::Quoted(n)) => (n.clone(), true),
        _ => return Err(cur.error("expected term".into())),
    };
    let sym = Symbol::new(&name);
    if cur.peek_at(1) == Some(&Tok::LParen) {
        let arity = sig.arity(&sym).ok_or_else(|| cur.error(format!("undeclared symbol `{name}`")))?;
        cur.next();
        cur.next();
        let mut args = Vec::new();
        if !cur.eat(&Tok::RParen) {
            loop {
                args.push(term(cur, sig)?);
                if cur.eat(&Tok::RParen) {
                    break;
                }
                cur.expect(&Tok::Comma, "`,` or `)`")?;
            }
        }
        if args.len() != arity {
            return Err(cur.error(format!("`{name}` expects {arity} arguments, got {}", args.len())));
        }
        return Ok(Term::App(sym, args));
    }
    match sig.arity(&sym) {
        Some(0) => {
            cur.next();
            Ok(Term::App(sym, Vec::new()))
        }
        Some(n) => Err(cur.error(format!("`{name}` expects {n} arguments"))),
        None if quoted => Err(cur.error(format!("undeclared symbol `{name}`"))),
        None if name.starts_with(|c: char| c.is_ascii_digit()) => Err(cur.error(format!("undeclared constant `{name}`"))),
        None => {
            cur.next();
            Ok(Term::Var(Var::new(&name)))
        }
    }
}

fn set_members(set: ActionSet, all: &BTreeSet<Action>) -> Vec<Action> {
    match set {
        ActionSet::All => all.iter().cloned().collect(),
        ActionSet::Observable => all.iter().filter(|a| !a.is_tau()).cloned().collect(),
    }
}

fn expand(
    t: &RuleTemplate,
    all: &BTreeSet<Action>,
    order: Option<&ActionOrder>,
    resolve: &dyn Fn(&str, usize) -> Result<Action>,
) -> Result<Vec<Rule>> {
    let mut envs: Vec<BTreeMap<String, Action>> = vec![BTreeMap::new()];
    for (mv, set) in &t.binders {
        let mut next = Vec::new();
        for env in &envs {
            for a in set_members(*set, all) {
                let mut e = env.clone();
                e.insert(mv.clone(), a);
                next.push(e);
            }
        }
        envs = next;
    }
    let lookup = |name: &str, env: &BTreeMap<String, Action>| -> Result<Action> {
        match env.get(name) {
            Some(a) => Ok(a.clone()),
            None => resolve(name, t.line),
        }
    };
    let instantiate = |lit: &LitTemplate, a: Action| match &lit.target {
        Some(u) => Literal::pos(lit.source.clone(), a, u.clone()),
        None => Literal::neg(lit.source.clone(), a),
    };
    let mut out = Vec::new();
    for env in envs {
        let mut premises = Vec::new();
        for p in &t.premises {
            match &p.family {
                None => premises.push(instantiate(p, lookup(&p.label, &env)?)),
                Some(Family::In(mv, set)) => {
                    for a in set_members(*set, all) {
                        let mut e = env.clone();
                        e.insert(mv.clone(), a);
                        premises.push(instantiate(p, lookup(&p.label, &e)?));
                    }
                }
                Some(Family::Above(mv, base)) => {
                    let base = lookup(base, &env)?;
                    let above = order.map(|o| o.above(&base)).unwrap_or_default();
                    for a in above {
                        let mut e = env.clone();
                        e.insert(mv.clone(), a);
                        premises.push(instantiate(p, lookup(&p.label, &e)?));
                    }
                }
            }
        }
        let conclusion = instantiate(&t.conclusion, lookup(&t.conclusion.label, &env)?);
        out.push(Rule::new(premises, conclusion));
    }
    Ok(out)
}

/// Emits a `.tss` text that parses back to the same document.
pub fn emit_tss(doc: &TssDocument) -> String {
    let tss = &doc.tss;
    let mut out = String::new();
    let obs: Vec<String> = tss.actions.iter().filter(|a| !a.is_tau()).map(|a| a.to_string()).collect();
    if !obs.is_empty() {
        let _ = writeln!(out, "actions {}", obs.join(", "));
    }
    if let Some(order) = &tss.order {
        let pairs: Vec<String> = order.pairs().map(|(a, b)| format!("{a} < {b}")).collect();
        if !pairs.is_empty() {
            let _ = writeln!(out, "order {}", pairs.join(", "));
        }
    }
    let mut by_arity: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (s, n) in tss.signature.symbols() {
        by_arity.entry(n).or_default().push(s.to_string());
    }
    for (n, names) in by_arity {
        if n == 0 {
            let _ = writeln!(out, "const {}", names.join(", "));
        } else {
            let _ = writeln!(out, "op {} : {n}", names.join(", "));
        }
    }
    for (kw, pred) in [("lambda", &tss.lambda), ("aleph", &tss.aleph)] {
        if let Some(p) = pred {
            let entries: Vec<String> = p.iter().map(|(f, i)| format!("({f},{i})")).collect();
            let _ = writeln!(out, "{kw} {}", entries.join(" "));
        }
    }
    for (i, r) in tss.rules.iter().enumerate() {
        let keep: BTreeSet<Var> = r.variables().into_iter().filter(|v| !v.is_fresh()).collect();
        let r = if keep.len() == r.variables().len() { r.clone() } else { r.canonical(&keep) };
        match doc.rule_names.get(i).cloned().flatten() {
            Some(name) => {
                let _ = writeln!(out, "{name}: {r}");
            }
            None => {
                let _ = writeln!(out, "{r}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRIORITY: &str = "
actions a, b
order a < b, a < tau
op Theta : 1
prio [alpha in A_tau]: x -alpha-> y, x -beta-/> for all beta > alpha |- Theta(x) -alpha-> Theta(y)
";

    const SEQ: &str = "
actions a
op ; : 2
const 0
seq1 [alpha in A_tau]: x -alpha-> x1 |- x;y -alpha-> x1;y
seq2 [beta in A_tau]: x -alpha-/> for all alpha in A_tau, y -beta-> y1 |- x;y -beta-> y1
";

    #[test]
    fn priority_expands_to_three_rules() {
        let doc = parse_tss(PRIORITY).unwrap();
        assert_eq!(doc.tss.rules.len(), 3);
        let at_a = doc.tss.rules.iter().find(|r| r.label().name() == "a").unwrap();
        assert_eq!(at_a.premises().len(), 3);
        let at_b = doc.tss.rules.iter().find(|r| r.label().name() == "b").unwrap();
        assert_eq!(at_b.premises().len(), 1);
    }

    #[test]
    fn sequencing_expands_to_two_plus_two() {
        let doc = parse_tss(SEQ).unwrap();
        assert_eq!(doc.tss.rules.len(), 4);
        let second: Vec<_> = doc.tss.rules.iter().filter(|r| r.premises().len() == 3).collect();
        assert_eq!(second.len(), 2);
        for r in second {
            let negs: Vec<String> = r.premises().iter().filter(|p| !p.is_positive()).map(|p| p.to_string()).collect();
            assert_eq!(negs, vec!["x -a-/>", "x -tau-/>"]);
        }
    }

    #[test]
    fn emit_parse_round_trip() {
        for src in [PRIORITY, SEQ] {
            let doc = parse_tss(src).unwrap();
            let again = parse_tss(&emit_tss(&doc)).unwrap();
            assert_eq!(again, doc);
        }
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_tss("actions a\nop f : 1\n|- f(x, y) -a-> x").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 3, .. }), "{e}");
        let e = parse_tss("actions a\n|- g(x) -a-> x").unwrap_err();
        assert!(e.to_string().contains("undeclared symbol"));
        let e = parse_tss("actions a\nop f : 1\n|- f(x) -c-> x").unwrap_err();
        assert!(e.to_string().contains("undeclared action"));
        assert!(parse_tss("actions a, b\norder a < b, b < a").is_err());
        assert!(parse_tss("const 0\n|- 0 -tau-> #1").is_err());
    }

    #[test]
    fn axioms_and_quoted_constants() {
        let doc = parse_tss("actions a\nconst c, d, `^c`\n|- c -a-> d\n|- `^c` -a-> d").unwrap();
        assert_eq!(doc.tss.rules.len(), 2);
        assert!(doc.tss.rules.iter().all(|r| r.premises().is_empty()));
        let again = parse_tss(&emit_tss(&doc)).unwrap();
        assert_eq!(again, doc);
    }
}
