//! Literals, rules, transition system specifications, rule classes,
//! liquid/frozen argument predicates and patience.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::action::{Action, ActionOrder};
use crate::term::{Path, Signature, Substitution, Symbol, Term, Var};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Pos { source: Term, label: Action, target: Term },
    Neg { source: Term, label: Action },
}

impl Literal {
    pub fn pos(source: Term, label: Action, target: Term) -> Self {
        Literal::Pos { source, label, target }
    }

    pub fn neg(source: Term, label: Action) -> Self {
        Literal::Neg { source, label }
    }

    pub fn source(&self) -> &Term {
        match self {
            Literal::Pos { source, .. } | Literal::Neg { source, .. } => source,
        }
    }

    pub fn label(&self) -> &Action {
        match self {
            Literal::Pos { label, .. } | Literal::Neg { label, .. } => label,
        }
    }

    pub fn target(&self) -> Option<&Term> {
        match self {
            Literal::Pos { target, .. } => Some(target),
            Literal::Neg { .. } => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Literal::Pos { .. })
    }

    /// `t -a-> u` and `t -a-/>` deny each other.
    pub fn denies(&self, other: &Literal) -> bool {
        self.is_positive() != other.is_positive() && self.source() == other.source() && self.label() == other.label()
    }

    pub fn apply(&self, s: &Substitution) -> Literal {
        match self {
            Literal::Pos { source, label, target } => Literal::pos(s.apply(source), label.clone(), s.apply(target)),
            Literal::Neg { source, label } => Literal::neg(s.apply(source), label.clone()),
        }
    }

    pub fn with_label(&self, label: Action) -> Literal {
        match self {
            Literal::Pos { source, target, .. } => Literal::pos(source.clone(), label, target.clone()),
            Literal::Neg { source, .. } => Literal::neg(source.clone(), label),
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = self.source().variables();
        if let Some(t) = self.target() {
            t.collect_vars(&mut out);
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.source().is_closed() && self.target().is_none_or(Term::is_closed)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos { source, label, target } => write!(f, "{source} -{label}-> {target}"),
            Literal::Neg { source, label } => write!(f, "{source} -{label}-/>"),
        }
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A rule `H / conclusion`; premises are a set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    premises: Vec<Literal>,
    conclusion: Literal,
}

impl Rule {
    pub fn new(premises: impl IntoIterator<Item = Literal>, conclusion: Literal) -> Self {
        let set: BTreeSet<Literal> = premises.into_iter().collect();
        Rule {
            premises: set.into_iter().collect(),
            conclusion,
        }
    }

    pub fn premises(&self) -> &[Literal] {
        &self.premises
    }

    pub fn conclusion(&self) -> &Literal {
        &self.conclusion
    }

    pub fn source(&self) -> &Term {
        self.conclusion.source()
    }

    pub fn label(&self) -> &Action {
        self.conclusion.label()
    }

    pub fn target(&self) -> Option<&Term> {
        self.conclusion.target()
    }

    pub fn is_standard(&self) -> bool {
        self.conclusion.is_positive()
    }

    pub fn apply(&self, s: &Substitution) -> Rule {
        Rule::new(self.premises.iter().map(|l| l.apply(s)), self.conclusion.apply(s))
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = self.conclusion.variables();
        for p in &self.premises {
            out.extend(p.variables());
        }
        out
    }

    /// Renames every variable to a fresh one.
    pub fn rename_apart(&self) -> Rule {
        let s: Substitution = self.variables().into_iter().map(|v| (v, Term::fresh_var())).collect();
        self.apply(&s)
    }

    /// Targets of positive premises (only the variable ones).
    pub fn premise_rhs_vars(&self) -> BTreeSet<Var> {
        self.premises
            .iter()
            .filter_map(|l| l.target().and_then(Term::as_var).cloned())
            .collect()
    }

    /// Variables occurring neither in the source nor as a positive premise target.
    pub fn free_variables(&self) -> BTreeSet<Var> {
        let mut bound = self.source().variables();
        for p in &self.premises {
            if let Some(t) = p.target() {
                t.collect_vars(&mut bound);
            }
        }
        self.variables().difference(&bound).cloned().collect()
    }

    /// A pair of premises `(i, j)` where a variable in the target of `i` occurs in the source of `j`.
    pub fn lookahead(&self) -> Option<(usize, usize)> {
        for (i, p) in self.premises.iter().enumerate() {
            let Some(t) = p.target() else { continue };
            let rhs = t.variables();
            for (j, q) in self.premises.iter().enumerate() {
                if q.source().variables().iter().any(|v| rhs.contains(v)) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn classify(&self) -> RuleClass {
        let source = self.source();
        let src_vars = source.variables();
        let mut rhs_seen = BTreeSet::new();
        let mut ntytt = true;
        for p in &self.premises {
            if let Some(t) = p.target() {
                match t.as_var() {
                    Some(y) if !src_vars.contains(y) && rhs_seen.insert(y.clone()) => {}
                    _ => ntytt = false,
                }
            }
        }
        let ntyxt = ntytt && source.is_var();
        let ntyft = ntytt
            && matches!(source, Term::App(_, args) if args.iter().all(Term::is_var))
            && source.is_linear();
        let nxytt = ntytt && self.premises.iter().all(|p| p.source().is_var());
        let lookahead_free = self.lookahead().is_none();
        let decent = lookahead_free && self.free_variables().is_empty();
        RuleClass {
            standard: self.is_standard(),
            ntytt,
            ntyxt,
            ntyft,
            nxytt,
            decent,
            lookahead_free,
        }
    }

    /// Renames variables canonically so that equal-up-to-renaming rules compare equal.
    /// Variables listed in `keep` are left alone.
    pub fn canonical(&self, keep: &BTreeSet<Var>) -> Rule {
        canonical_rule(self, keep)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.premises.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        if !self.premises.is_empty() {
            write!(f, " ")?;
        }
        write!(f, "|- {}", self.conclusion)
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn canonical_rule(rule: &Rule, keep: &BTreeSet<Var>) -> Rule {
    // Try the variable orders induced by all premise permutations within
    // groups that look alike, and keep the smallest result.
    let vars: Vec<Var> = rule.variables().into_iter().filter(|v| !keep.contains(v)).collect();
    if vars.is_empty() {
        return rule.clone();
    }
    let used: BTreeSet<String> = keep.iter().map(|v| v.name().to_string()).collect();
    let names: Vec<Var> = (1..)
        .map(|i| format!("v{i}"))
        .filter(|n| !used.contains(n))
        .take(vars.len())
        .map(|n| Var::new(&n))
        .collect();
    let order_of = |lits: &[&Literal], head: &Literal| -> Vec<Var> {
        let mut order: Vec<Var> = Vec::new();
        let mut push = |t: &Term| {
            for v in t.variables_in_order() {
                if !keep.contains(&v) && !order.contains(&v) {
                    order.push(v);
                }
            }
        };
        push(head.source());
        for l in lits {
            push(l.source());
            if let Some(t) = l.target() {
                push(t);
            }
        }
        if let Some(t) = head.target() {
            push(t);
        }
        order
    };
    let skeleton = |l: &Literal| -> Literal {
        let s: Substitution = l.variables().into_iter().filter(|v| !keep.contains(v)).map(|v| (v, Term::var("_"))).collect();
        l.apply(&s)
    };
    let mut prem: Vec<&Literal> = rule.premises.iter().collect();
    prem.sort_by_key(|l| skeleton(l));
    let mut groups: Vec<Vec<&Literal>> = Vec::new();
    for l in prem {
        match groups.last_mut() {
            Some(g) if skeleton(g[0]) == skeleton(l) => g.push(l),
            _ => groups.push(vec![l]),
        }
    }
    let mut best: Option<Rule> = None;
    let mut budget = 720usize;
    let mut current: Vec<Vec<&Literal>> = groups.clone();
    permute_groups(&mut current, 0, &mut budget, &mut |arrangement| {
        let flat: Vec<&Literal> = arrangement.iter().flatten().copied().collect();
        let order = order_of(&flat, &rule.conclusion);
        let s: Substitution = order.iter().cloned().zip(names.iter().cloned().map(Term::Var)).collect();
        let candidate = rule.apply(&s);
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    });
    best.unwrap_or_else(|| rule.clone())
}

fn permute_groups<'a>(groups: &mut Vec<Vec<&'a Literal>>, gi: usize, budget: &mut usize, visit: &mut dyn FnMut(&[Vec<&'a Literal>])) {
    if *budget == 0 {
        return;
    }
    if gi == groups.len() {
        *budget -= 1;
        visit(groups);
        return;
    }
    let n = groups[gi].len();
    permute_in_place(groups, gi, 0, n, budget, visit);
}

fn permute_in_place<'a>(
    groups: &mut Vec<Vec<&'a Literal>>,
    gi: usize,
    k: usize,
    n: usize,
    budget: &mut usize,
    visit: &mut dyn FnMut(&[Vec<&'a Literal>]),
) {
    if k == n {
        permute_groups(groups, gi + 1, budget, visit);
        return;
    }
    for i in k..n {
        groups[gi].swap(k, i);
        permute_in_place(groups, gi, k + 1, n, budget, visit);
        groups[gi].swap(k, i);
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleClass {
    pub standard: bool,
    pub ntytt: bool,
    pub ntyxt: bool,
    pub ntyft: bool,
    pub nxytt: bool,
    pub decent: bool,
    pub lookahead_free: bool,
}

impl RuleClass {
    pub fn flags(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let table = [
            (self.standard, "standard"),
            (self.ntytt, "ntytt"),
            (self.ntyxt, "ntyxt"),
            (self.ntyft, "ntyft"),
            (self.nxytt, "nxytt"),
            (self.decent, "decent"),
            (self.lookahead_free, "lookahead-free"),
        ];
        for (on, name) in table {
            if on {
                out.push(name);
            }
        }
        out
    }
}

/// A set of argument positions `(f, i)`, `i` 1-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArgPredicate {
    args: BTreeSet<(Symbol, usize)>,
}

impl ArgPredicate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn universal(sig: &Signature) -> Self {
        sig.operators()
            .flat_map(|(f, n)| (1..=n).map(move |i| (f.clone(), i)))
            .collect()
    }

    pub fn contains(&self, f: &Symbol, i: usize) -> bool {
        self.args.contains(&(f.clone(), i))
    }

    pub fn insert(&mut self, f: Symbol, i: usize) {
        self.args.insert((f, i));
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Symbol, usize)> {
        self.args.iter()
    }

    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }

    pub fn intersection(&self, other: &ArgPredicate) -> ArgPredicate {
        self.args.intersection(&other.args).cloned().collect()
    }

    pub fn is_subset(&self, other: &ArgPredicate) -> bool {
        self.args.is_subset(&other.args)
    }

    /// Whether the occurrence at `path` in `t` is liquid.
    pub fn is_liquid_at(&self, t: &Term, path: &[usize]) -> bool {
        t.steps(path).iter().all(|(f, i)| self.contains(f, *i))
    }
}

impl FromIterator<(Symbol, usize)> for ArgPredicate {
    fn from_iter<I: IntoIterator<Item = (Symbol, usize)>>(iter: I) -> Self {
        ArgPredicate { args: iter.into_iter().collect() }
    }
}

impl fmt::Display for ArgPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (s, i)) in self.args.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({s},{i})")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LiquidReport {
    pub liquid: Vec<Path>,
    pub frozen: Vec<Path>,
}

impl LiquidReport {
    pub fn only_liquid(&self) -> bool {
        self.frozen.is_empty()
    }

    pub fn only_frozen(&self) -> bool {
        self.liquid.is_empty()
    }
}

/// Splits the occurrences of `x` in `t` into liquid and frozen ones.
pub fn liquid_occurrences(pred: &ArgPredicate, x: &Var, t: &Term) -> LiquidReport {
    let mut report = LiquidReport::default();
    for p in t.occurrences(x) {
        if pred.is_liquid_at(t, &p) {
            report.liquid.push(p);
        } else {
            report.frozen.push(p);
        }
    }
    report
}

/// The patience rule `x_i -tau-> y / f(x1..xn) -tau-> f(x1..y..xn)`.
pub fn patience_rule(f: &Symbol, i: usize, arity: usize) -> Rule {
    let xs: Vec<Term> = (1..=arity).map(|k| Term::var(&format!("x{k}"))).collect();
    let y = Term::var("y");
    let src = Term::App(f.clone(), xs.clone());
    let mut tgt_args = xs.clone();
    tgt_args[i - 1] = y.clone();
    Rule::new(
        [Literal::pos(xs[i - 1].clone(), Action::tau(), y)],
        Literal::pos(src, Action::tau(), Term::App(f.clone(), tgt_args)),
    )
}

/// If `r` has the shape of a patience rule, the argument it is for.
pub fn patience_shape(r: &Rule) -> Option<(Symbol, usize)> {
    let Literal::Pos { source, label, target } = r.conclusion() else { return None };
    if !label.is_tau() || r.premises().len() != 1 || !r.classify().ntyft {
        return None;
    }
    let Literal::Pos { source: v, label: l, target: y } = &r.premises()[0] else { return None };
    if !l.is_tau() {
        return None;
    }
    let Term::App(f, args) = source else { return None };
    let i = args.iter().position(|a| a == v)? + 1;
    (source.replace_at(&[i], y.clone()) == *target).then(|| (f.clone(), i))
}

pub fn is_patience_rule(r: &Rule, gamma: &ArgPredicate) -> bool {
    patience_shape(r).is_some_and(|(f, i)| gamma.contains(&f, i))
}

/// Whether `r` is irredundantly provable from the Γ-patience rules alone.
///
/// Such proofs chain patience rules down a Γ-liquid path of the source and end
/// in the single hypothesis, so the rule must be `v -tau-> y / t -tau-> t[y at p]`
/// with `t|p = v` and `p` liquid.
pub fn is_gamma_patient_rule(r: &Rule, gamma: &ArgPredicate) -> bool {
    let Literal::Pos { source: t, label, target: u } = r.conclusion() else { return false };
    if !label.is_tau() || r.premises().len() != 1 {
        return false;
    }
    let Literal::Pos { source: v, label: l, target: y } = &r.premises()[0] else { return false };
    if !l.is_tau() || !y.is_var() || t.contains_var(y.as_var().unwrap()) {
        return false;
    }
    t.positions()
        .into_iter()
        .any(|p| t.subterm_at(&p) == Some(v) && gamma.is_liquid_at(t, &p) && t.replace_at(&p, y.clone()) == *u)
}

/// A transition system specification.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tss {
    pub signature: Signature,
    /// The action set including `tau`.
    pub actions: BTreeSet<Action>,
    pub order: Option<ActionOrder>,
    pub rules: Vec<Rule>,
    pub lambda: Option<ArgPredicate>,
    pub aleph: Option<ArgPredicate>,
}

impl Tss {
    pub fn gamma(&self) -> Option<ArgPredicate> {
        Some(self.aleph.as_ref()?.intersection(self.lambda.as_ref()?))
    }

    pub fn observable_actions(&self) -> impl Iterator<Item = &Action> {
        self.actions.iter().filter(|a| !a.is_tau())
    }

    pub fn is_standard(&self) -> bool {
        self.rules.iter().all(Rule::is_standard)
    }

    /// The arguments that have a patience rule in this system.
    pub fn patience_args(&self) -> ArgPredicate {
        self.rules.iter().filter_map(patience_shape).collect()
    }

    /// Γ-arguments that lack a patience rule.
    pub fn missing_patience_rules(&self, gamma: &ArgPredicate) -> Vec<(Symbol, usize)> {
        let have = self.patience_args();
        gamma.iter().filter(|a| !have.args.contains(a)).cloned().collect()
    }

    pub fn is_gamma_patient(&self, gamma: &ArgPredicate) -> bool {
        self.missing_patience_rules(gamma).is_empty()
    }

    /// Standard rules grouped by head symbol of the source; `None` for variable sources.
    pub fn rules_by_head(&self) -> BTreeMap<Option<Symbol>, Vec<&Rule>> {
        let mut out: BTreeMap<Option<Symbol>, Vec<&Rule>> = BTreeMap::new();
        for r in &self.rules {
            out.entry(r.source().head().cloned()).or_default().push(r);
        }
        out
    }

    pub fn closed_constants(&self) -> Vec<Term> {
        self.signature.constants().map(|c| Term::App(c.clone(), Vec::new())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn act(n: &str) -> Action {
        Action::new(n)
    }

    fn priority_rule_a() -> Rule {
        Rule::new(
            [
                Literal::pos(v("x"), act("a"), v("y")),
                Literal::neg(v("x"), act("b")),
                Literal::neg(v("x"), Action::tau()),
            ],
            Literal::pos(Term::app("Theta", vec![v("x")]), act("a"), Term::app("Theta", vec![v("y")])),
        )
    }

    #[test]
    fn priority_rule_flags() {
        let c = priority_rule_a().classify();
        for flag in ["standard", "ntytt", "ntyft", "decent", "lookahead-free"] {
            assert!(c.flags().contains(&flag), "missing {flag}");
        }
        assert!(!c.ntyxt);
    }

    #[test]
    fn axiom_flags() {
        let r = Rule::new([], Literal::pos(Term::constant("c"), act("a"), Term::constant("d")));
        let c = r.classify();
        for flag in ["standard", "ntytt", "ntyft", "nxytt", "decent"] {
            assert!(c.flags().contains(&flag), "missing {flag}");
        }
    }

    #[test]
    fn lookahead_and_free_variables() {
        let r = Rule::new(
            [Literal::pos(v("x"), act("a"), v("y")), Literal::pos(v("y"), act("b"), v("z"))],
            Literal::pos(Term::app("f", vec![v("x")]), act("c"), v("z")),
        );
        assert!(r.lookahead().is_some());
        assert!(!r.classify().decent);
        let free = Rule::new([], Literal::pos(Term::app("f", vec![v("x")]), act("a"), v("w")));
        assert_eq!(free.free_variables().len(), 1);
        assert!(!free.classify().decent);
    }

    #[test]
    fn liquid_positions() {
        let seq = Symbol::new(";");
        let lambda: ArgPredicate = [(seq.clone(), 1)].into_iter().collect();
        let t = Term::App(seq, vec![v("x"), v("y")]);
        assert!(liquid_occurrences(&lambda, &Var::new("x"), &t).only_liquid());
        assert!(liquid_occurrences(&lambda, &Var::new("y"), &t).only_frozen());

        let gamma: ArgPredicate = [(Symbol::new("f"), 1)].into_iter().collect();
        let t = Term::app("f", vec![Term::app("g", vec![v("x")]), v("x")]);
        let rep = liquid_occurrences(&gamma, &Var::new("x"), &t);
        assert_eq!(rep.frozen, vec![vec![1, 1], vec![2]]);
        assert!(rep.liquid.is_empty());
        let t2 = Term::app("f", vec![v("x"), Term::app("g", vec![v("x")])]);
        let rep2 = liquid_occurrences(&gamma, &Var::new("x"), &t2);
        assert_eq!(rep2.liquid, vec![vec![1]]);
        assert_eq!(rep2.frozen, vec![vec![2, 1]]);
    }

    #[test]
    fn composed_patience_is_patient() {
        let gamma: ArgPredicate = [(Symbol::new("f"), 1), (Symbol::new("g"), 1)].into_iter().collect();
        let r = Rule::new(
            [Literal::pos(v("x"), Action::tau(), v("y"))],
            Literal::pos(
                Term::app("f", vec![Term::app("g", vec![v("x")]), v("z")]),
                Action::tau(),
                Term::app("f", vec![Term::app("g", vec![v("y")]), v("z")]),
            ),
        );
        assert!(is_gamma_patient_rule(&r, &gamma));
        let only_f: ArgPredicate = [(Symbol::new("f"), 1)].into_iter().collect();
        assert!(!is_gamma_patient_rule(&r, &only_f));
    }

    #[test]
    fn patience_rule_shape() {
        let r = patience_rule(&Symbol::new(";"), 1, 2);
        assert_eq!(patience_shape(&r), Some((Symbol::new(";"), 1)));
        assert!(is_gamma_patient_rule(&r, &[(Symbol::new(";"), 1)].into_iter().collect()));
        assert_eq!(patience_shape(&priority_rule_a()), None);
    }

    #[test]
    fn canonical_renaming_identifies_variants() {
        let keep: BTreeSet<Var> = [Var::new("x")].into_iter().collect();
        let mk = |a: &str, b: &str| {
            Rule::new(
                [Literal::pos(v("x"), act("a"), v(a)), Literal::pos(v("x"), act("a"), v(b))],
                Literal::pos(Term::app("f", vec![v("x")]), act("c"), Term::app("g", vec![v(a), v(b)])),
            )
        };
        assert_eq!(mk("p", "q").canonical(&keep), mk("q", "p").canonical(&keep));
        assert_eq!(mk("p", "q").canonical(&keep), mk("u", "w").canonical(&keep));
    }
}
