//! First-order terms over a ranked signature, substitutions and matching.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Characters that make up infix operator names such as `;`, `||` or `+`.
pub const OPERATOR_CHARS: &str = ";|+*&.!%^";

/// Prefix of generated variables. The parsers never accept it.
pub const FRESH_PREFIX: char = '#';

static FRESH_COUNTER: AtomicUsize = AtomicUsize::new(0);

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_operator(&self) -> bool {
        !self.0.is_empty() && self.0.chars().all(|c| OPERATOR_CHARS.contains(c))
    }

    /// Whether the name can be written without backquotes.
    pub fn is_plain(&self) -> bool {
        is_plain_name(&self.0)
    }
}

pub(crate) fn is_plain_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_plain() || self.is_operator() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "`{}`", self.0)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    /// A variable that is guaranteed not to clash with any parsed variable.
    pub fn fresh() -> Self {
        let n = FRESH_COUNTER.fetch_add(1, Ordering::Relaxed);
        Var(Arc::from(format!("{FRESH_PREFIX}{n}")))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_fresh(&self) -> bool {
        self.0.starts_with(FRESH_PREFIX)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A path to a subterm: the sequence of 1-based argument indices from the root.
pub type Path = Vec<usize>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Symbol::new(name), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Symbol::new(name), args)
    }

    pub fn fresh_var() -> Term {
        Term::Var(Var::fresh())
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn head(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_closed),
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, x: &Var) -> bool {
        match self {
            Term::Var(v) => v == x,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    /// Variables in order of first occurrence, left to right.
    pub fn variables_in_order(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.walk_vars(&mut |v| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        });
        out
    }

    fn walk_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Term::Var(v) => f(v),
            Term::App(_, args) => args.iter().for_each(|a| a.walk_vars(f)),
        }
    }

    /// All paths at which `x` occurs.
    pub fn occurrences(&self, x: &Var) -> Vec<Path> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.occ_rec(x, &mut path, &mut out);
        out
    }

    fn occ_rec(&self, x: &Var, path: &mut Path, out: &mut Vec<Path>) {
        match self {
            Term::Var(v) if v == x => out.push(path.clone()),
            Term::Var(_) => {}
            Term::App(_, args) => {
                for (i, a) in args.iter().enumerate() {
                    path.push(i + 1);
                    a.occ_rec(x, path, out);
                    path.pop();
                }
            }
        }
    }

    /// Symbol and argument index for each step of `path`.
    pub fn steps<'a>(&'a self, path: &[usize]) -> Vec<(&'a Symbol, usize)> {
        let mut out = Vec::with_capacity(path.len());
        let mut cur = self;
        for &i in path {
            match cur {
                Term::App(f, args) if i >= 1 && i <= args.len() => {
                    out.push((f, i));
                    cur = &args[i - 1];
                }
                _ => break,
            }
        }
        out
    }

    pub fn subterm_at(&self, path: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in path {
            match cur {
                Term::App(_, args) if i >= 1 && i <= args.len() => cur = &args[i - 1],
                _ => return None,
            }
        }
        Some(cur)
    }

    pub fn replace_at(&self, path: &[usize], replacement: Term) -> Term {
        match path.split_first() {
            None => replacement,
            Some((&i, rest)) => match self {
                Term::App(f, args) => {
                    let mut args = args.clone();
                    args[i - 1] = args[i - 1].replace_at(rest, replacement);
                    Term::App(f.clone(), args)
                }
                Term::Var(_) => self.clone(),
            },
        }
    }

    /// Paths of all subterms, root first.
    pub fn positions(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.pos_rec(&mut path, &mut out);
        out
    }

    fn pos_rec(&self, path: &mut Path, out: &mut Vec<Path>) {
        out.push(path.clone());
        if let Term::App(_, args) = self {
            for (i, a) in args.iter().enumerate() {
                path.push(i + 1);
                a.pos_rec(path, out);
                path.pop();
            }
        }
    }

    pub fn subterms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.sub_rec(&mut out);
        out
    }

    fn sub_rec(&self, out: &mut BTreeSet<Term>) {
        if out.insert(self.clone()) {
            for a in self.args() {
                a.sub_rec(out);
            }
        }
    }

    /// Number of non-constant function symbol occurrences.
    pub fn operator_count(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) if args.is_empty() => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::operator_count).sum::<usize>(),
        }
    }

    /// Every variable occurs at most once.
    pub fn is_linear(&self) -> bool {
        let mut seen = BTreeSet::new();
        let mut ok = true;
        self.walk_vars(&mut |v| {
            if !seen.insert(v.clone()) {
                ok = false;
            }
        });
        ok
    }

    pub fn map_symbols(&self, f: &impl Fn(&Symbol) -> Symbol) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::App(s, args) => Term::App(f(s), args.iter().map(|a| a.map_symbols(f)).collect()),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(s, args) if args.is_empty() => write!(f, "{s}"),
            Term::App(s, args) if s.is_operator() && args.len() == 2 => {
                let show = |t: &Term, f: &mut fmt::Formatter<'_>| match t {
                    Term::App(g, a) if g.is_operator() && a.len() == 2 => write!(f, "({t})"),
                    _ => write!(f, "{t}"),
                };
                show(&args[0], f)?;
                write!(f, "{s}")?;
                show(&args[1], f)
            }
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolInfo {
    pub arity: usize,
}

/// A ranked set of function symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: BTreeMap<Symbol, SymbolInfo>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, arity: usize) -> Result<Symbol> {
        let sym = Symbol::new(name);
        if sym.is_operator() && arity != 2 {
            return Err(Error::Invalid(format!("operator `{name}` must be binary")));
        }
        if let Some(info) = self.symbols.get(&sym) {
            if info.arity != arity {
                return Err(Error::Invalid(format!("symbol `{name}` redeclared with arity {arity}")));
            }
        }
        self.symbols.insert(sym.clone(), SymbolInfo { arity });
        Ok(sym)
    }

    pub fn arity(&self, sym: &Symbol) -> Option<usize> {
        self.symbols.get(sym).map(|i| i.arity)
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.symbols.contains_key(sym)
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        let s = Symbol::new(name);
        self.symbols.contains_key(&s).then_some(s)
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.symbols.iter().map(|(s, i)| (s, i.arity))
    }

    pub fn constants(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter().filter(|(_, i)| i.arity == 0).map(|(s, _)| s)
    }

    pub fn operators(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.symbols().filter(|(_, a)| *a > 0)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Checks that every symbol in `t` is declared with the right arity.
    pub fn check(&self, t: &Term) -> Result<()> {
        match t {
            Term::Var(_) => Ok(()),
            Term::App(s, args) => {
                let arity = self.arity(s).ok_or_else(|| Error::UndeclaredSymbol(s.to_string()))?;
                if arity != args.len() {
                    return Err(Error::Arity {
                        symbol: s.to_string(),
                        expected: arity,
                        got: args.len(),
                    });
                }
                args.iter().try_for_each(|a| self.check(a))
            }
        }
    }

    /// `f(x1,...,xn)` with fresh variables.
    pub fn generic_term(&self, sym: &Symbol) -> Option<Term> {
        let n = self.arity(sym)?;
        Some(Term::App(sym.clone(), (0..n).map(|_| Term::fresh_var()).collect()))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(x: Var, t: Term) -> Self {
        let mut s = Self::new();
        s.insert(x, t);
        s
    }

    pub fn insert(&mut self, x: Var, t: Term) {
        self.map.insert(x, t);
    }

    pub fn get(&self, x: &Var) -> Option<&Term> {
        self.map.get(x)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    /// `self.compose(other).apply(t) == self.apply(&other.apply(t))`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut map: BTreeMap<Var, Term> = other.map.iter().map(|(v, t)| (v.clone(), self.apply(t))).collect();
        for (v, t) in &self.map {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution { map }
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution { map: iter.into_iter().collect() }
    }
}

/// One-sided matching: finds `s` with `s.apply(pattern) == term`.
pub fn match_term(pattern: &Term, term: &Term) -> Option<Substitution> {
    let mut sub = Substitution::new();
    match_into(pattern, term, &mut sub).then_some(sub)
}

pub fn match_into(pattern: &Term, term: &Term, sub: &mut Substitution) -> bool {
    match pattern {
        Term::Var(x) => match sub.map.get(x) {
            Some(bound) => bound == term,
            None => {
                sub.map.insert(x.clone(), term.clone());
                true
            }
        },
        Term::App(f, pargs) => match term {
            Term::App(g, targs) if f == g && pargs.len() == targs.len() => {
                pargs.iter().zip(targs).all(|(p, t)| match_into(p, t, sub))
            }
            _ => false,
        },
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
            prop::sample::select(vec!["c", "d"]).prop_map(Term::constant),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|t| Term::app("g", vec![t])),
                (inner.clone(), inner).prop_map(|(a, b)| Term::app("f", vec![a, b])),
            ]
        })
    }

    fn arb_sub() -> impl Strategy<Value = Substitution> {
        prop::collection::btree_map(prop::sample::select(vec!["x", "y", "z"]), arb_term(), 0..3)
            .prop_map(|m| m.into_iter().map(|(k, v)| (Var::new(k), v)).collect())
    }

    proptest! {
        #[test]
        fn composition_is_sequential_application(s in arb_sub(), r in arb_sub(), t in arb_term()) {
            prop_assert_eq!(s.compose(&r).apply(&t), s.apply(&r.apply(&t)));
        }

        #[test]
        fn match_recovers_instance(p in arb_term(), s in arb_sub()) {
            let t = s.apply(&p);
            let m = match_term(&p, &t).expect("instance must match");
            prop_assert_eq!(m.apply(&p), t);
        }

        #[test]
        fn variables_of_instance(p in arb_term(), s in arb_sub()) {
            let inst = s.apply(&p);
            let mut expected = BTreeSet::new();
            for v in p.variables() {
                match s.get(&v) {
                    Some(t) => expected.extend(t.variables()),
                    None => { expected.insert(v); }
                }
            }
            prop_assert_eq!(inst.variables(), expected);
        }
    }
}
