//! Congruence format membership: ready simulation, (rooted) branching
//! bisimulation safety and its stability-respecting relaxation, and the
//! existential search for the ℵ/Λ witnesses.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::term::{Symbol, Term, Var};
use crate::tss::{is_gamma_patient_rule, liquid_occurrences, ArgPredicate, Literal, Rule, Tss};

/// One of the four checked formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormatKind {
    /// branching bisimulation
    Bb,
    /// rooted branching bisimulation
    Rbb,
    /// stability-respecting branching bisimulation
    Sbb,
    /// rooted stability-respecting branching bisimulation
    Rsbb,
}

impl FormatKind {
    pub const ALL: [FormatKind; 4] = [FormatKind::Bb, FormatKind::Rbb, FormatKind::Sbb, FormatKind::Rsbb];

    pub fn name(self) -> &'static str {
        match self {
            FormatKind::Bb => "bb",
            FormatKind::Rbb => "rbb",
            FormatKind::Sbb => "sbb",
            FormatKind::Rsbb => "rsbb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_rooted(self) -> bool {
        matches!(self, FormatKind::Rbb | FormatKind::Rsbb)
    }

    pub fn is_stability_respecting(self) -> bool {
        matches!(self, FormatKind::Sbb | FormatKind::Rsbb)
    }
}

impl fmt::Display for FormatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A violated condition with its witness.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    /// `1`, `2`, `3`, `4`, `4a`, `4b`, `patience`, `lookahead`, `ntytt`, `universal`.
    pub condition: &'static str,
    /// Index into the TSS rules, when the violation belongs to one rule.
    pub rule: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Some(r) => write!(f, "rule={} condition={} {}", r, self.condition, self.detail),
            None => write!(f, "condition={} {}", self.condition, self.detail),
        }
    }
}

fn violation(condition: &'static str, detail: String) -> Violation {
    Violation {
        condition,
        rule: None,
        detail,
    }
}

/// Ready simulation format: ntyft/ntyxt rules without lookahead.
pub fn check_ready_simulation(tss: &Tss) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, r) in tss.rules.iter().enumerate() {
        let c = r.classify();
        if !(c.ntyft || c.ntyxt) {
            out.push(Violation {
                condition: "ntyft",
                rule: Some(i),
                detail: format!("`{r}` is neither ntyft nor ntyxt"),
            });
        }
        if let Some((a, b)) = r.lookahead() {
            out.push(Violation {
                condition: "lookahead",
                rule: Some(i),
                detail: format!("premise `{}` feeds premise `{}`", r.premises()[a], r.premises()[b]),
            });
        }
    }
    out
}

fn occurrence_terms(l: &Literal) -> impl Iterator<Item = &Term> {
    std::iter::once(l.source()).chain(l.target())
}

fn check_ntytt(r: &Rule) -> Result<()> {
    if r.classify().ntytt {
        Ok(())
    } else {
        Err(Error::NotNtytt(r.to_string()))
    }
}

/// Conditions 2 and 3, shared by every variant and by rules with negative conclusions.
fn conditions_2_3(r: &Rule, aleph: &ArgPredicate, lambda: &ArgPredicate, out: &mut Vec<Violation>) {
    let t = r.source();
    for x in t.variables() {
        if liquid_occurrences(lambda, &x, t).only_liquid() {
            let mut bad: Vec<&Term> = r.premises().iter().flat_map(occurrence_terms).collect();
            bad.extend(r.target());
            if let Some(w) = bad.into_iter().find(|w| !liquid_occurrences(lambda, &x, w).only_liquid()) {
                out.push(violation("2", format!("{x} is only Λ-liquid in the source but Λ-frozen in `{w}`")));
            }
        }
        if liquid_occurrences(aleph, &x, t).only_frozen() {
            let bad = r.premises().iter().flat_map(occurrence_terms).find(|w| !liquid_occurrences(aleph, &x, w).only_frozen());
            if let Some(w) = bad {
                out.push(violation("3", format!("{x} is only ℵ-frozen in the source but ℵ-liquid in `{w}`")));
            }
        }
    }
}

fn condition_1(r: &Rule, lambda: &ArgPredicate, out: &mut Vec<Violation>) {
    let Some(u) = r.target() else { return };
    for y in r.premise_rhs_vars() {
        if !liquid_occurrences(lambda, &y, u).only_liquid() {
            out.push(violation("1", format!("premise target {y} occurs Λ-frozen in `{u}`")));
        }
    }
}

/// Variables subject to condition 4: exactly one ℵ-liquid occurrence in the
/// source, which is also Λ-liquid.
fn main_vars(t: &Term, aleph: &ArgPredicate, lambda: &ArgPredicate) -> Vec<Var> {
    t.variables()
        .into_iter()
        .filter(|x| {
            let occ = liquid_occurrences(aleph, x, t);
            occ.liquid.len() == 1 && lambda.is_liquid_at(t, &occ.liquid[0])
        })
        .collect()
}

fn aleph_liquid_count(aleph: &ArgPredicate, x: &Var, w: &Term) -> usize {
    liquid_occurrences(aleph, x, w).liquid.len()
}

/// Rooted stability-respecting branching bisimulation safety.
pub fn check_rsbb_safe(r: &Rule, aleph: &ArgPredicate, lambda: &ArgPredicate) -> Result<Vec<Violation>> {
    check_ntytt(r)?;
    let mut out = Vec::new();
    conditions_2_3(r, aleph, lambda, &mut out);
    if !r.is_standard() {
        return Ok(out);
    }
    condition_1(r, lambda, &mut out);
    let gamma = aleph.intersection(lambda);
    for x in main_vars(r.source(), aleph, lambda) {
        let mut in_neg = 0;
        let mut in_pos = 0;
        let mut neg_tau = false;
        for l in r.premises() {
            let n = aleph_liquid_count(aleph, &x, l.source());
            if l.is_positive() {
                in_pos += n;
            } else {
                in_neg += n;
                neg_tau |= n > 0 && l.label().is_tau();
            }
        }
        if (in_neg > 0 || in_pos > 1) && !neg_tau {
            out.push(violation("4a", format!("{x} needs a premise v -tau-/> with {x} ℵ-liquid in v")));
        }
        let tau_premise = r
            .premises()
            .iter()
            .find(|l| l.is_positive() && l.label().is_tau() && aleph_liquid_count(aleph, &x, l.source()) > 0);
        if let Some(l) = tau_premise {
            if !is_gamma_patient_rule(r, &gamma) {
                out.push(violation("4b", format!("premise `{l}` requires the rule to be ℵ∩Λ-patient")));
            }
        }
    }
    Ok(out)
}

/// Rooted branching bisimulation safety.
pub fn check_rbb_safe(r: &Rule, aleph: &ArgPredicate, lambda: &ArgPredicate) -> Result<Vec<Violation>> {
    check_ntytt(r)?;
    let mut out = Vec::new();
    conditions_2_3(r, aleph, lambda, &mut out);
    if !r.is_standard() {
        return Ok(out);
    }
    condition_1(r, lambda, &mut out);
    let gamma = aleph.intersection(lambda);
    for x in main_vars(r.source(), aleph, lambda) {
        let hits: Vec<&Literal> = r
            .premises()
            .iter()
            .flat_map(|l| std::iter::repeat(l).take(aleph_liquid_count(aleph, &x, l.source())))
            .collect();
        match hits[..] {
            [] => {}
            [l] if l.is_positive() => {
                if l.label().is_tau() && !is_gamma_patient_rule(r, &gamma) {
                    out.push(violation("4", format!("τ-premise `{l}` requires the rule to be ℵ∩Λ-patient")));
                }
            }
            [l] => out.push(violation("4", format!("{x} is ℵ-liquid in negative premise `{l}`"))),
            _ => out.push(violation("4", format!("{x} has {} ℵ-liquid occurrences in the premises", hits.len()))),
        }
    }
    Ok(out)
}

/// Checks every rule and the patience requirement for fixed predicates.
pub fn check_with(tss: &Tss, kind: FormatKind, aleph: &ArgPredicate, lambda: &ArgPredicate) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    if !kind.is_rooted() && *lambda != ArgPredicate::universal(&tss.signature) {
        out.push(violation("universal", format!("Λ = {lambda} is not universal")));
    }
    for (i, r) in tss.rules.iter().enumerate() {
        let vs = if kind.is_stability_respecting() {
            check_rsbb_safe(r, aleph, lambda)?
        } else {
            check_rbb_safe(r, aleph, lambda)?
        };
        out.extend(vs.into_iter().map(|v| Violation { rule: Some(i), ..v }));
    }
    let gamma = aleph.intersection(lambda);
    for (f, i) in tss.missing_patience_rules(&gamma) {
        out.push(violation("patience", format!("no patience rule for ({f},{i})")));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormatVerdict {
    Pass { aleph: ArgPredicate, lambda: ArgPredicate },
    /// No predicates work. `closest` holds the candidate with the fewest violations.
    Fail {
        closest: Option<(ArgPredicate, ArgPredicate)>,
        violations: Vec<Violation>,
        tried: usize,
    },
    /// The search cap was reached before a witness was found.
    Aborted { tried: usize, cap: usize },
}

impl FormatVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, FormatVerdict::Pass { .. })
    }
}

impl fmt::Display for FormatVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatVerdict::Pass { aleph, lambda } => write!(f, "verdict=pass\naleph={aleph}\nlambda={lambda}"),
            FormatVerdict::Fail {
                closest,
                violations,
                tried,
            } => {
                write!(f, "verdict=fail\ntried={tried}")?;
                if let Some((a, l)) = closest {
                    write!(f, "\nclosest_aleph={a}\nclosest_lambda={l}")?;
                }
                for v in violations {
                    write!(f, "\nviolation: {v}")?;
                }
                Ok(())
            }
            FormatVerdict::Aborted { tried, cap } => write!(f, "verdict=aborted\ntried={tried}\ncap={cap}"),
        }
    }
}

pub const DEFAULT_SEARCH_CAP: usize = 1 << 16;

/// Decides membership of `tss` in `kind`. Missing predicates are searched
/// for: Λ from the positions condition 1 forces upwards, smallest first, then ℵ.
pub fn check_format(tss: &Tss, kind: FormatKind, aleph: Option<&ArgPredicate>, lambda: Option<&ArgPredicate>, cap: usize) -> Result<FormatVerdict> {
    if !tss.is_standard() {
        return Err(Error::Invalid("format checks need a standard TSS".into()));
    }
    let rs = check_ready_simulation(tss);
    if !rs.is_empty() {
        return Ok(FormatVerdict::Fail {
            closest: None,
            violations: rs,
            tried: 0,
        });
    }
    let all: Vec<(Symbol, usize)> = ArgPredicate::universal(&tss.signature).iter().cloned().collect();
    let forced = forced_lambda(tss);
    let lambdas: Vec<ArgPredicate> = match (lambda, kind.is_rooted()) {
        (Some(l), _) => vec![l.clone()],
        (None, false) => vec![ArgPredicate::universal(&tss.signature)],
        (None, true) => {
            let free: Vec<(Symbol, usize)> = all.iter().filter(|a| !forced.contains(&a.0, a.1)).cloned().collect();
            match subsets_by_size(&free, cap) {
                Some(subs) => subs.into_iter().map(|s| s.into_iter().chain(forced.iter().cloned()).collect()).collect(),
                None => return Ok(FormatVerdict::Aborted { tried: 0, cap }),
            }
        }
    };
    let alephs: Vec<ArgPredicate> = match aleph {
        Some(a) => vec![a.clone()],
        None => match subsets_by_size(&all, cap) {
            Some(subs) => subs.into_iter().map(|s| s.into_iter().collect()).collect(),
            None => return Ok(FormatVerdict::Aborted { tried: 0, cap }),
        },
    };
    let mut tried = 0;
    let mut best: Option<(ArgPredicate, ArgPredicate, Vec<Violation>)> = None;
    for l in &lambdas {
        for a in &alephs {
            if tried == cap {
                return Ok(FormatVerdict::Aborted { tried, cap });
            }
            tried += 1;
            let vs = check_with(tss, kind, a, l)?;
            if vs.is_empty() {
                return Ok(FormatVerdict::Pass {
                    aleph: a.clone(),
                    lambda: l.clone(),
                });
            }
            if best.as_ref().is_none_or(|b| vs.len() < b.2.len()) {
                best = Some((a.clone(), l.clone(), vs));
            }
        }
    }
    let (closest, violations) = match best {
        Some((a, l, v)) => (Some((a, l)), v),
        None => (None, Vec::new()),
    };
    Ok(FormatVerdict::Fail {
        closest,
        violations,
        tried,
    })
}

/// Positions on the path to a positive-premise target inside a conclusion target.
fn forced_lambda(tss: &Tss) -> ArgPredicate {
    let mut out = ArgPredicate::new();
    for r in &tss.rules {
        let Some(u) = r.target() else { continue };
        for y in r.premise_rhs_vars() {
            for p in u.occurrences(&y) {
                for (f, i) in u.steps(&p) {
                    out.insert(f.clone(), i);
                }
            }
        }
    }
    out
}

/// All subsets ordered by size, then lexicographically; `None` above `cap`.
fn subsets_by_size<T: Clone + Ord>(items: &[T], cap: usize) -> Option<Vec<BTreeSet<T>>> {
    if items.len() >= usize::BITS as usize - 1 || (1usize << items.len()) > cap {
        return None;
    }
    let mut masks: Vec<usize> = (0..1usize << items.len()).collect();
    masks.sort_by_key(|m| (m.count_ones(), m.reverse_bits()));
    Some(
        masks
            .into_iter()
            .map(|m| items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| x.clone()).collect())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_tss;

    fn prio(order: &str) -> Tss {
        let src = format!(
            "actions a, b\norder {order}\nop Theta : 1\nprio [alpha in A_tau]: x -alpha-> y, x -beta-/> for all beta > alpha |- Theta(x) -alpha-> Theta(y)\n"
        );
        parse_tss(&src).unwrap().tss
    }

    fn seq() -> Tss {
        parse_tss(
            "actions a\nop ; : 2\nseq1 [alpha in A_tau]: x -alpha-> x1 |- x;y -alpha-> x1;y\nseq2 [beta in A_tau]: x -alpha-/> for all alpha in A_tau, y -beta-> y1 |- x;y -beta-> y1\n",
        )
        .unwrap()
        .tss
    }

    fn pred(tss: &Tss, args: &[(&str, usize)]) -> ArgPredicate {
        args.iter().map(|(f, i)| (tss.signature.lookup(f).unwrap(), *i)).collect()
    }

    fn rule_with_label<'a>(tss: &'a Tss, label: &str, premises: usize) -> &'a Rule {
        tss.rules
            .iter()
            .find(|r| r.label().name() == label && r.premises().len() == premises)
            .unwrap()
    }

    #[test]
    fn priority_rule_safety() {
        let tss = prio("a < b, a < tau");
        let p = pred(&tss, &[("Theta", 1)]);
        let r = rule_with_label(&tss, "a", 3);
        assert!(check_rsbb_safe(r, &p, &p).unwrap().is_empty());
        let rbb = check_rbb_safe(r, &p, &p).unwrap();
        assert_eq!(rbb.iter().map(|v| v.condition).collect::<Vec<_>>(), vec!["4"]);

        let weak = prio("a < b");
        let r = rule_with_label(&weak, "a", 2);
        let vs = check_rsbb_safe(r, &p, &p).unwrap();
        assert_eq!(vs.iter().map(|v| v.condition).collect::<Vec<_>>(), vec!["4a"]);
    }

    #[test]
    fn sequencing_rule_safety() {
        let tss = seq();
        let aleph = pred(&tss, &[(";", 1), (";", 2)]);
        let lambda = pred(&tss, &[(";", 1)]);
        for r in &tss.rules {
            assert!(check_rsbb_safe(r, &aleph, &lambda).unwrap().is_empty(), "{r}");
        }
        let r2 = rule_with_label(&tss, "a", 3);
        assert!(!check_rbb_safe(r2, &aleph, &lambda).unwrap().is_empty());
    }

    #[test]
    fn format_search() {
        let tss = prio("a < b, a < tau");
        match check_format(&tss, FormatKind::Sbb, None, None, DEFAULT_SEARCH_CAP).unwrap() {
            FormatVerdict::Pass { aleph, lambda } => {
                assert_eq!(aleph, pred(&tss, &[("Theta", 1)]));
                assert_eq!(lambda, ArgPredicate::universal(&tss.signature));
            }
            v => panic!("{v}"),
        }
        assert!(!check_format(&tss, FormatKind::Rbb, None, None, DEFAULT_SEARCH_CAP).unwrap().is_pass());

        let s = seq();
        match check_format(&s, FormatKind::Rsbb, None, None, DEFAULT_SEARCH_CAP).unwrap() {
            FormatVerdict::Pass { aleph, lambda } => {
                assert_eq!(aleph, pred(&s, &[(";", 1), (";", 2)]));
                assert_eq!(lambda, pred(&s, &[(";", 1)]));
            }
            v => panic!("{v}"),
        }
        assert!(!check_format(&s, FormatKind::Sbb, None, None, DEFAULT_SEARCH_CAP).unwrap().is_pass());
    }

    #[test]
    fn negative_patience_example_fails() {
        let tss = parse_tss(
            "actions a\nop f : 2\nx -tau-> x1, y -tau-/> |- f(x,y) -tau-> f(x1,y)\nx -tau-/>, y -tau-> y1 |- f(x,y) -tau-> f(x,y1)\nx -a-> x1 |- f(x,y) -a-> f(x1,y)\n",
        )
        .unwrap()
        .tss;
        let both = ArgPredicate::universal(&tss.signature);
        let vs = check_with(&tss, FormatKind::Sbb, &both, &both).unwrap();
        assert!(vs.iter().any(|v| v.condition == "patience"));
        assert!(!check_format(&tss, FormatKind::Sbb, None, None, DEFAULT_SEARCH_CAP).unwrap().is_pass());
    }

    #[test]
    fn lookahead_is_rejected() {
        let tss = parse_tss("actions a, b, c\nop f : 1\nx -a-> y, y -b-> z |- f(x) -c-> z\n").unwrap().tss;
        let vs = check_ready_simulation(&tss);
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].condition, "lookahead");
        assert!(check_ready_simulation(&Tss::default()).is_empty());
        assert!(check_ready_simulation(&seq()).is_empty());
    }

    #[test]
    fn search_cap_aborts() {
        let tss = seq();
        let v = check_format(&tss, FormatKind::Rsbb, None, None, 2).unwrap();
        assert!(matches!(v, FormatVerdict::Aborted { .. }));
    }
}
