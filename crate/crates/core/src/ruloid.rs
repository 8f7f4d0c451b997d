//! Ruloids: the decent ntyft normalisation, the P⁺ construction with rules
//! for negative conclusions, and backward proof search for decent nxytt
//! rules irredundantly provable from P⁺.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::action::Action;
use crate::error::{Error, Result};
use crate::format::{check_rsbb_safe, Violation};
use crate::term::{match_term, Substitution, Symbol, Term, Var};
use crate::tss::{liquid_occurrences, ArgPredicate, Literal, Rule, Tss};

pub const DEFAULT_DEPTH: usize = 8;

/// Bound on partial proofs kept per goal and on P⁺ choice products.
const PRODUCT_CAP: usize = 1 << 14;

/// Replaces free variables by closed terms from `universe` and instantiates
/// variable sources once per function symbol.
pub fn to_decent_ntyft(tss: &Tss, universe: Option<&[Term]>) -> Result<Tss> {
    let mut rules = Vec::new();
    for r in &tss.rules {
        if let Some((i, j)) = r.lookahead() {
            return Err(Error::NotDecentNtyft(format!("{r} (premise {i} feeds premise {j})")));
        }
        let free: Vec<Var> = r.free_variables().into_iter().collect();
        let mut grounded = vec![r.clone()];
        if !free.is_empty() {
            let Some(u) = universe else {
                let names: Vec<&str> = free.iter().map(Var::name).collect();
                return Err(Error::FreeVariables {
                    rule: r.to_string(),
                    vars: names.join(", "),
                });
            };
            for x in &free {
                grounded = grounded
                    .iter()
                    .flat_map(|g| u.iter().map(move |p| g.apply(&Substitution::singleton(x.clone(), p.clone()))))
                    .collect();
            }
        }
        for g in grounded {
            match g.source().as_var() {
                Some(x) => {
                    for (f, n) in tss.signature.symbols() {
                        let args = (0..n).map(|_| Term::fresh_var()).collect();
                        rules.push(g.apply(&Substitution::singleton(x.clone(), Term::App(f.clone(), args))));
                    }
                }
                None => rules.push(g),
            }
        }
    }
    for r in &rules {
        let c = r.classify();
        if !(c.ntyft && c.decent) {
            return Err(Error::NotDecentNtyft(r.to_string()));
        }
    }
    Ok(Tss { rules, ..tss.clone() })
}

fn denial(l: &Literal) -> Literal {
    match l {
        Literal::Pos { source, label, .. } => Literal::neg(source.clone(), label.clone()),
        Literal::Neg { source, label } => Literal::pos(source.clone(), label.clone(), Term::fresh_var()),
    }
}

/// Adds, for each symbol `f` and action α, the rules `H / f(x⃗) -α-/>` where
/// `H` denies one chosen premise of every `(f, α)`-rule.
pub fn build_p_plus(tss: &Tss) -> Result<Tss> {
    let mut rules = tss.rules.clone();
    for r in &tss.rules {
        if !r.classify().ntyft || !r.is_standard() {
            return Err(Error::NotDecentNtyft(r.to_string()));
        }
    }
    for (f, n) in tss.signature.symbols() {
        let xs: Vec<Term> = (0..n).map(|_| Term::fresh_var()).collect();
        let src = Term::App(f.clone(), xs.clone());
        for a in &tss.actions {
            let mut choices: Vec<Vec<Literal>> = Vec::new();
            for r in tss.rules.iter().filter(|r| r.source().head() == Some(f) && r.label() == a) {
                let r = r.rename_apart();
                let sub: Substitution = r.source().args().iter().map(|v| v.as_var().unwrap().clone()).zip(xs.iter().cloned()).collect();
                choices.push(r.apply(&sub).premises().to_vec());
            }
            let mut product: Vec<Vec<Literal>> = vec![Vec::new()];
            for options in &choices {
                if product.len().saturating_mul(options.len()) > PRODUCT_CAP {
                    return Err(Error::CapExceeded {
                        what: format!("negative rules for ({f}, {a})"),
                        cap: PRODUCT_CAP,
                    });
                }
                product = product
                    .iter()
                    .flat_map(|h| options.iter().map(move |l| h.iter().cloned().chain([denial(l)]).collect()))
                    .collect();
            }
            let mut seen = BTreeSet::new();
            for h in product {
                let rule = Rule::new(h, Literal::neg(src.clone(), a.clone()));
                if seen.insert(rule.canonical(&BTreeSet::new())) {
                    rules.push(rule);
                }
            }
        }
    }
    Ok(Tss { rules, ..tss.clone() })
}

/// The ruloids for one goal `source -label->` (or `-label-/>`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuloidSet {
    pub source: Term,
    pub label: Action,
    pub positive: bool,
    pub rules: Vec<Rule>,
    /// False when some branch of the search reached the depth bound.
    pub complete: bool,
}

impl fmt::Display for RuloidSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        if !self.complete {
            writeln!(f, "# incomplete: depth bound reached")?;
        }
        Ok(())
    }
}

/// Backward proof search over a fixed P⁺.
#[derive(Clone, Debug)]
pub struct RuloidEngine {
    by_goal: HashMap<(Symbol, Action, bool), Vec<Rule>>,
    pub depth: usize,
    cache: HashMap<(Term, Action, bool), RuloidSet>,
}

type Partial = (BTreeSet<Literal>, Option<Term>);

impl RuloidEngine {
    pub fn new(pplus: &Tss, depth: usize) -> Self {
        let mut by_goal: HashMap<_, Vec<Rule>> = HashMap::new();
        for r in &pplus.rules {
            if let Some(f) = r.source().head() {
                by_goal.entry((f.clone(), r.label().clone(), r.is_standard())).or_default().push(r.clone());
            }
        }
        RuloidEngine {
            by_goal,
            depth,
            cache: HashMap::new(),
        }
    }

    /// Builds the engine straight from a TSS in ready simulation format.
    pub fn from_tss(tss: &Tss, depth: usize) -> Result<Self> {
        Ok(Self::new(&build_p_plus(&to_decent_ntyft(tss, None)?)?, depth))
    }

    pub fn ruloids(&mut self, t: &Term, label: &Action, positive: bool) -> Result<RuloidSet> {
        let key = (t.clone(), label.clone(), positive);
        if let Some(s) = self.cache.get(&key) {
            return Ok(s.clone());
        }
        let mut incomplete = false;
        let proofs = self.prove(t, label, positive, self.depth, &mut incomplete)?;
        let keep = t.variables();
        let mut rules = BTreeSet::new();
        for (h, target) in proofs {
            let concl = match target {
                Some(u) => Literal::pos(t.clone(), label.clone(), u),
                None => Literal::neg(t.clone(), label.clone()),
            };
            let r = Rule::new(h, concl);
            let c = r.classify();
            if c.decent && c.nxytt {
                rules.insert(r.canonical(&keep));
            }
        }
        let set = RuloidSet {
            source: t.clone(),
            label: label.clone(),
            positive,
            rules: rules.into_iter().collect(),
            complete: !incomplete,
        };
        self.cache.insert(key, set.clone());
        Ok(set)
    }

    fn prove(&self, s: &Term, label: &Action, positive: bool, depth: usize, incomplete: &mut bool) -> Result<Vec<Partial>> {
        if s.is_var() {
            return Ok(vec![if positive {
                let y = Term::fresh_var();
                (BTreeSet::from([Literal::pos(s.clone(), label.clone(), y.clone())]), Some(y))
            } else {
                (BTreeSet::from([Literal::neg(s.clone(), label.clone())]), None)
            }]);
        }
        if depth == 0 {
            *incomplete = true;
            return Ok(Vec::new());
        }
        let head = s.head().expect("not a variable").clone();
        let Some(rules) = self.by_goal.get(&(head, label.clone(), positive)) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for rule in rules {
            let r = rule.rename_apart();
            let Some(sigma) = match_term(r.source(), s) else { continue };
            let mut partials: Vec<(BTreeSet<Literal>, Substitution)> = vec![(BTreeSet::new(), sigma)];
            for prem in r.premises() {
                let mut next = Vec::new();
                for (h, sub) in &partials {
                    let src = sub.apply(prem.source());
                    for (h2, tgt) in self.prove(&src, prem.label(), prem.is_positive(), depth - 1, incomplete)? {
                        let mut sub2 = sub.clone();
                        if let (Some(y), Some(q)) = (prem.target().and_then(Term::as_var), tgt) {
                            sub2.insert(y.clone(), q);
                        }
                        next.push((h.union(&h2).cloned().collect(), sub2));
                    }
                }
                if next.len() > PRODUCT_CAP {
                    return Err(Error::CapExceeded {
                        what: format!("partial proofs of {s} -{label}->"),
                        cap: PRODUCT_CAP,
                    });
                }
                partials = next;
            }
            for (h, sub) in partials {
                out.push((h, r.target().map(|u| sub.apply(u))));
            }
        }
        Ok(out)
    }
}

/// Ruloids for `t` in a fresh engine over `pplus`.
pub fn ruloids(pplus: &Tss, t: &Term, label: &Action, positive: bool, depth: usize) -> Result<RuloidSet> {
    RuloidEngine::new(pplus, depth).ruloids(t, label, positive)
}

/// Whether no premise denies another one. Inconsistent ruloids have no
/// closed instance with all premises true.
pub fn is_consistent(r: &Rule) -> bool {
    let ps = r.premises();
    !ps.iter().any(|a| ps.iter().any(|b| a.denies(b)))
}

#[derive(Clone, Debug, Default)]
pub struct RuloidSafetyReport {
    pub checked: usize,
    /// Ruloids skipped because their premises contradict each other.
    pub inconsistent: usize,
    pub complete: bool,
    pub violations: Vec<(Rule, Violation)>,
}

/// Enumerates the ruloids of `terms` for every action and both polarities and
/// checks them against the rooted stability-respecting safety conditions.
/// Ruloids whose premises contradict each other are counted but not checked.
/// Negative τ-ruloids must in addition keep a `v -tau-/>` premise for every
/// ℵ∩Λ-liquid variable of the source.
pub fn check_ruloid_safety(tss: &Tss, aleph: &ArgPredicate, lambda: &ArgPredicate, terms: &[Term], depth: usize) -> Result<RuloidSafetyReport> {
    let mut engine = RuloidEngine::from_tss(tss, depth)?;
    let gamma = aleph.intersection(lambda);
    let mut report = RuloidSafetyReport {
        complete: true,
        ..Default::default()
    };
    for t in terms {
        for a in &tss.actions {
            for positive in [true, false] {
                let set = engine.ruloids(t, a, positive)?;
                report.complete &= set.complete;
                for r in &set.rules {
                    if !is_consistent(r) {
                        report.inconsistent += 1;
                        continue;
                    }
                    report.checked += 1;
                    for v in check_rsbb_safe(r, aleph, lambda)? {
                        report.violations.push((r.clone(), v));
                    }
                    if !positive && a.is_tau() {
                        for x in t.variables() {
                            if liquid_occurrences(&gamma, &x, t).only_frozen() {
                                continue;
                            }
                            let kept = r.premises().iter().any(|l| {
                                !l.is_positive() && l.label().is_tau() && !liquid_occurrences(&gamma, &x, l.source()).only_frozen()
                            });
                            if !kept {
                                report.violations.push((
                                    r.clone(),
                                    Violation {
                                        condition: "negative-tau",
                                        rule: None,
                                        detail: format!("no premise v -tau-/> with {x} ℵ∩Λ-liquid in v"),
                                    },
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_tss};

    const PRIORITY: &str = "actions a, b\norder a < b, a < tau\nop Theta : 1\nprio [alpha in A_tau]: x -alpha-> y, x -beta-/> for all beta > alpha |- Theta(x) -alpha-> Theta(y)\n";
    const SEQ: &str = "actions a\nop ; : 2\nseq1 [alpha in A_tau]: x -alpha-> x1 |- x;y -alpha-> x1;y\nseq2 [beta in A_tau]: x -alpha-/> for all alpha in A_tau, y -beta-> y1 |- x;y -beta-> y1\n";

    fn shown(set: &RuloidSet) -> Vec<String> {
        set.rules.iter().map(|r| r.to_string()).collect()
    }

    #[test]
    fn variable_source_gives_hypothesis() {
        let tss = parse_tss(SEQ).unwrap().tss;
        let mut e = RuloidEngine::from_tss(&tss, DEFAULT_DEPTH).unwrap();
        let s = e.ruloids(&Term::var("x"), &Action::new("a"), true).unwrap();
        assert_eq!(shown(&s), vec!["x -a-> v1 |- x -a-> v1"]);
        assert!(s.complete);
    }

    #[test]
    fn priority_ruloid() {
        let tss = parse_tss(PRIORITY).unwrap().tss;
        let mut e = RuloidEngine::from_tss(&tss, DEFAULT_DEPTH).unwrap();
        let t = parse_term("Theta(x)", &tss.signature).unwrap();
        let s = e.ruloids(&t, &Action::new("a"), true).unwrap();
        assert_eq!(s.rules.len(), 1);
        let r = &s.rules[0];
        assert_eq!(r.premises().len(), 3);
        assert_eq!(r.target().unwrap().to_string(), "Theta(v1)");
    }

    #[test]
    fn priority_negative_rules() {
        let tss = parse_tss(PRIORITY).unwrap().tss;
        let pp = build_p_plus(&tss).unwrap();
        let theta_a: Vec<&Rule> = pp
            .rules
            .iter()
            .filter(|r| !r.is_standard() && r.label().name() == "a" && r.source().head().is_some_and(|f| f.name() == "Theta"))
            .collect();
        // one per chosen premise: x -a-/>, x -b-> z, x -tau-> z
        assert_eq!(theta_a.len(), 3);
        assert!(theta_a.iter().all(|r| r.premises().len() == 1));
    }

    #[test]
    fn zero_rules_give_premise_free_denial() {
        let tss = parse_tss("actions a\nconst c, d\n|- c -a-> d\n").unwrap().tss;
        let pp = build_p_plus(&tss).unwrap();
        let neg: Vec<String> = pp.rules.iter().filter(|r| !r.is_standard()).map(|r| r.to_string()).collect();
        assert!(neg.contains(&"|- d -a-/>".to_string()));
        assert!(neg.contains(&"|- c -tau-/>".to_string()));
        assert!(!neg.contains(&"|- c -a-/>".to_string()));
    }

    #[test]
    fn sequencing_ruloids() {
        let tss = parse_tss(SEQ).unwrap().tss;
        let mut e = RuloidEngine::from_tss(&tss, DEFAULT_DEPTH).unwrap();
        let t = parse_term("x;y", &tss.signature).unwrap();
        let s = e.ruloids(&t, &Action::new("a"), true).unwrap();
        let mut got = shown(&s);
        got.sort();
        assert_eq!(got, vec!["x -a-> v1 |- x;y -a-> v1;y", "y -a-> v1, x -a-/>, x -tau-/> |- x;y -a-> v1"]);
    }

    #[test]
    fn ntyxt_instantiation_and_free_variables() {
        let tss = parse_tss("actions a\nop f : 1\nconst c\nx -a-> y |- x -a-> y\n").unwrap().tss;
        assert_eq!(to_decent_ntyft(&tss, None).unwrap().rules.len(), 2);
        let free = parse_tss("actions a\nconst c, zero\n|- c -a-> z\n").unwrap().tss;
        assert!(matches!(to_decent_ntyft(&free, None), Err(Error::FreeVariables { .. })));
        let zero = Term::constant("zero");
        assert_eq!(to_decent_ntyft(&free, Some(&[zero])).unwrap().rules.len(), 1);
    }

    #[test]
    fn ruloids_are_safe() {
        let tss = parse_tss(SEQ).unwrap().tss;
        let aleph = ArgPredicate::universal(&tss.signature);
        let lambda: ArgPredicate = [(tss.signature.lookup(";").unwrap(), 1)].into_iter().collect();
        let terms: Vec<Term> = ["x;y", "(x;y);z", "x;(y;z)"].iter().map(|s| parse_term(s, &tss.signature).unwrap()).collect();
        let rep = check_ruloid_safety(&tss, &aleph, &lambda, &terms, DEFAULT_DEPTH).unwrap();
        assert!(rep.complete);
        assert!(rep.checked > 0);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);

        let prio = parse_tss(PRIORITY).unwrap().tss;
        let p = ArgPredicate::universal(&prio.signature);
        let terms: Vec<Term> = ["Theta(x)", "Theta(Theta(x))"].iter().map(|s| parse_term(s, &prio.signature).unwrap()).collect();
        let rep = check_ruloid_safety(&prio, &p, &p, &terms, DEFAULT_DEPTH).unwrap();
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }
}
