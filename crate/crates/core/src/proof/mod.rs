//! Well-supported provability over a finite universe of closed terms.
//!
//! The universe is grown in rounds from seed terms using an over-approximation
//! of the transition relation that ignores negative premises. Truth of ground
//! literals is then the alternating fixpoint of the least-model operator.

mod ground;
mod wsp;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::action::Action;
use crate::error::{Error, Result};
use crate::lts::Lts;
use crate::term::Term;
use crate::tss::{Literal, Tss};

pub use ground::Universe;
pub use wsp::ws_provable_bruteforce;

use ground::{GroundSystem, Instance};

/// Truth value of a closed literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Ambiguous,
}

/// Grows `seeds` (and their subterms) by up to `depth` rounds of target and
/// premise-source discovery. The result is flagged truncated when the last
/// round still found new terms.
pub fn ground_universe(tss: &Tss, seeds: &[Term], depth: usize) -> Result<Universe> {
    for s in seeds {
        if !s.is_closed() {
            return Err(Error::Invalid(format!("seed `{s}` is not closed")));
        }
        tss.signature.check(s)?;
    }
    let mut univ = Universe::default();
    for s in seeds {
        univ.insert_with_subterms(s);
    }
    let actions: Vec<Action> = tss.actions.iter().cloned().collect();
    for round in 0..=depth {
        let sys = GroundSystem::build(tss, &univ, &actions)?;
        if sys.missing.is_empty() {
            return Ok(univ);
        }
        if round == depth {
            univ.truncated = true;
            return Ok(univ);
        }
        for t in &sys.missing {
            univ.insert_with_subterms(t);
        }
    }
    unreachable!()
}

/// Truth assignment to the ground literals over a universe.
#[derive(Clone, Debug)]
pub struct Model {
    universe: Universe,
    actions: Vec<Action>,
    /// Positive atoms that are certainly true.
    certain: BTreeSet<(usize, usize, usize)>,
    /// Positive atoms that are possibly true (superset of `certain`).
    possible: BTreeSet<(usize, usize, usize)>,
    instances: Vec<Instance>,
    /// Some rule instance needed a term outside the universe.
    pub escaped: bool,
}

pub fn well_founded_model(tss: &Tss, universe: &Universe) -> Result<Model> {
    let actions: Vec<Action> = tss.actions.iter().cloned().collect();
    let sys = GroundSystem::build(tss, universe, &actions)?;
    let n = universe.len();
    let na = actions.len();
    let mut atom_id: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut atoms = Vec::new();
    for inst in &sys.instances {
        for a in std::iter::once(&inst.head).chain(&inst.pos) {
            atom_id.entry(*a).or_insert_with(|| {
                atoms.push(*a);
                atoms.len() - 1
            });
        }
    }
    let heads: Vec<usize> = sys.instances.iter().map(|i| atom_id[&i.head]).collect();
    let pos: Vec<Vec<usize>> = sys
        .instances
        .iter()
        .map(|i| {
            let mut v: Vec<usize> = i.pos.iter().map(|a| atom_id[a]).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut watchers: Vec<Vec<usize>> = vec![Vec::new(); atoms.len()];
    for (i, ps) in pos.iter().enumerate() {
        for &a in ps {
            watchers[a].push(i);
        }
    }
    // least model where `s -b-/>` holds iff no (s, b, _) is in `j`
    let gamma = |j: &[bool]| -> Vec<bool> {
        let mut enabled = vec![false; n * na];
        for (k, &(s, b, _)) in atoms.iter().enumerate() {
            if j[k] {
                enabled[s * na + b] = true;
            }
        }
        let mut derived = vec![false; atoms.len()];
        let mut count: Vec<usize> = pos.iter().map(Vec::len).collect();
        let mut active = vec![false; sys.instances.len()];
        let mut queue = Vec::new();
        for (i, inst) in sys.instances.iter().enumerate() {
            active[i] = inst.neg.iter().all(|&(s, b)| !enabled[s * na + b]);
            if active[i] && count[i] == 0 {
                queue.push(i);
            }
        }
        while let Some(i) = queue.pop() {
            let h = heads[i];
            if derived[h] {
                continue;
            }
            derived[h] = true;
            for &w in &watchers[h] {
                count[w] -= 1;
                if active[w] && count[w] == 0 {
                    queue.push(w);
                }
            }
        }
        derived
    };
    let mut under = vec![false; atoms.len()];
    let over = loop {
        let over = gamma(&under);
        let next = gamma(&over);
        if next == under {
            break over;
        }
        under = next;
    };
    let collect = |v: &[bool]| atoms.iter().zip(v).filter(|(_, &b)| b).map(|(a, _)| *a).collect();
    Ok(Model {
        universe: universe.clone(),
        actions,
        certain: collect(&under),
        possible: collect(&over),
        instances: sys.instances,
        escaped: !sys.missing.is_empty(),
    })
}

/// Completeness over the universe: every `p -a-/>` is decided.
#[derive(Clone, Debug)]
pub struct CompletenessReport {
    pub complete: bool,
    pub ambiguous: Vec<Literal>,
}

pub fn is_complete(tss: &Tss, universe: &Universe) -> Result<CompletenessReport> {
    Ok(well_founded_model(tss, universe)?.completeness())
}

impl Model {
    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    fn action_index(&self, a: &Action) -> Option<usize> {
        self.actions.iter().position(|b| b == a)
    }

    pub fn positive(&self, p: &Term, a: &Action, q: &Term) -> Truth {
        let (Some(p), Some(a), Some(q)) = (self.universe.get(p), self.action_index(a), self.universe.get(q)) else {
            return Truth::False;
        };
        let key = (p, a, q);
        if self.certain.contains(&key) {
            Truth::True
        } else if self.possible.contains(&key) {
            Truth::Ambiguous
        } else {
            Truth::False
        }
    }

    pub fn negative(&self, p: &Term, a: &Action) -> Truth {
        let (Some(p), Some(a)) = (self.universe.get(p), self.action_index(a)) else {
            return Truth::Ambiguous;
        };
        self.negative_idx(p, a)
    }

    fn negative_idx(&self, p: usize, a: usize) -> Truth {
        let range = (p, a, 0)..(p, a + 1, 0);
        if self.certain.range(range.clone()).next().is_some() {
            Truth::False
        } else if self.possible.range(range).next().is_some() {
            Truth::Ambiguous
        } else {
            Truth::True
        }
    }

    pub fn literal(&self, lit: &Literal) -> Truth {
        match lit {
            Literal::Pos { source, label, target } => self.positive(source, label, target),
            Literal::Neg { source, label } => self.negative(source, label),
        }
    }

    pub fn completeness(&self) -> CompletenessReport {
        let mut ambiguous = Vec::new();
        for p in 0..self.universe.len() {
            for a in 0..self.actions.len() {
                if self.negative_idx(p, a) == Truth::Ambiguous {
                    ambiguous.push(Literal::neg(self.universe.term(p).clone(), self.actions[a].clone()));
                }
            }
        }
        CompletenessReport {
            complete: ambiguous.is_empty(),
            ambiguous,
        }
    }

    /// The true transitions as an LTS over the universe.
    pub fn to_lts(&self, initial: usize) -> Result<Lts> {
        let trans: Vec<(usize, usize, usize)> = self.certain.iter().copied().collect();
        let names = (0..self.universe.len()).map(|i| Some(self.universe.term(i).to_string())).collect();
        Ok(Lts::from_indexed(self.universe.len(), initial, self.actions.clone(), trans)?.with_names(names))
    }

    /// A proof of a true positive literal. Negative literals appear as leaves
    /// marked as hypotheses; each of them is true in the model.
    pub fn proof(&self, p: &Term, a: &Action, q: &Term) -> Option<ProofTree> {
        let key = (self.universe.get(p)?, self.action_index(a)?, self.universe.get(q)?);
        if !self.certain.contains(&key) {
            return None;
        }
        // the rank of an atom is the round of the least-model run it first appeared in
        let mut rank: HashMap<(usize, usize, usize), (usize, usize)> = HashMap::new();
        let mut round = 0;
        loop {
            let mut added = Vec::new();
            for (i, inst) in self.instances.iter().enumerate() {
                if rank.contains_key(&inst.head) || !self.certain.contains(&inst.head) {
                    continue;
                }
                let ok = inst.pos.iter().all(|a| rank.contains_key(a))
                    && inst.neg.iter().all(|&(s, b)| self.negative_idx(s, b) == Truth::True);
                if ok {
                    added.push((inst.head, i));
                }
            }
            if added.is_empty() {
                break;
            }
            for (h, i) in added {
                rank.entry(h).or_insert((round, i));
            }
            round += 1;
        }
        Some(self.build_proof(key, &rank))
    }

    fn build_proof(&self, atom: (usize, usize, usize), rank: &HashMap<(usize, usize, usize), (usize, usize)>) -> ProofTree {
        let (_, i) = rank[&atom];
        let inst = &self.instances[i];
        let mut children: Vec<ProofTree> = inst.pos.iter().map(|&a| self.build_proof(a, rank)).collect();
        for &(s, b) in &inst.neg {
            children.push(ProofTree {
                literal: Literal::neg(self.universe.term(s).clone(), self.actions[b].clone()),
                children: Vec::new(),
                hypothesis: true,
            });
        }
        ProofTree {
            literal: self.atom_literal(atom),
            children,
            hypothesis: false,
        }
    }

    fn atom_literal(&self, (p, a, q): (usize, usize, usize)) -> Literal {
        Literal::pos(self.universe.term(p).clone(), self.actions[a].clone(), self.universe.term(q).clone())
    }
}

/// A proof tree; leaves marked `hypothesis` are not justified by a rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub literal: Literal,
    pub children: Vec<ProofTree>,
    pub hypothesis: bool,
}

impl ProofTree {
    /// Whether every non-hypothesis node is a closed instance of a rule of `tss`.
    pub fn replays(&self, tss: &Tss) -> bool {
        if self.hypothesis {
            return true;
        }
        let kids: BTreeSet<&Literal> = self.children.iter().map(|c| &c.literal).collect();
        let fits = tss.rules.iter().any(|r| {
            let r = r.rename_apart();
            let mut sub = crate::term::Substitution::new();
            if !literal_match(r.conclusion(), &self.literal, &mut sub) {
                return false;
            }
            premises_match(r.premises(), &kids, sub)
        });
        fits && self.children.iter().all(|c| c.replays(tss))
    }
}

fn literal_match(pat: &Literal, lit: &Literal, sub: &mut crate::term::Substitution) -> bool {
    use crate::term::match_into;
    if pat.label() != lit.label() || pat.is_positive() != lit.is_positive() {
        return false;
    }
    if !match_into(pat.source(), lit.source(), sub) {
        return false;
    }
    match (pat.target(), lit.target()) {
        (Some(a), Some(b)) => match_into(a, b, sub),
        (None, None) => true,
        _ => false,
    }
}

fn premises_match(prem: &[Literal], kids: &BTreeSet<&Literal>, sub: crate::term::Substitution) -> bool {
    let Some((first, rest)) = prem.split_first() else {
        return true;
    };
    kids.iter().any(|k| {
        let mut s = sub.clone();
        literal_match(first, k, &mut s) && premises_match(rest, kids, s)
    })
}

/// The LTS of a TSS over the universe grown from `seeds`.
#[derive(Clone, Debug)]
pub struct Generated {
    pub lts: Lts,
    pub model: Model,
    pub truncated: bool,
}

impl Generated {
    pub fn state(&self, t: &Term) -> Option<usize> {
        self.model.universe.get(t)
    }
}

/// Generates the LTS associated with `tss` on the terms reachable from `seeds`.
/// Refuses incomplete systems.
pub fn generate_lts(tss: &Tss, seeds: &[Term], depth: usize) -> Result<Generated> {
    let universe = ground_universe(tss, seeds, depth)?;
    let model = well_founded_model(tss, &universe)?;
    let report = model.completeness();
    if !report.complete {
        let first = report.ambiguous.first().map(|l| l.to_string()).unwrap_or_default();
        return Err(Error::Incomplete(report.ambiguous.len(), first));
    }
    let initial = seeds.first().and_then(|s| universe.get(s)).unwrap_or(0);
    let lts = model.to_lts(initial)?;
    Ok(Generated {
        truncated: universe.truncated,
        lts,
        model,
    })
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Ambiguous => "ambiguous",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_tss;

    const PRIORITY: &str = "
actions a, b
order a < b, a < tau
op Theta : 1
const s, s1, s2, 0
|- s -a-> s1
|- s -b-> s2
prio [alpha in A_tau]: x -alpha-> y, x -beta-/> for all beta > alpha |- Theta(x) -alpha-> Theta(y)
";

    const SEQ: &str = "
actions a
op ; : 2
const p, q, r, 0
|- p -tau-> p
|- r -a-> 0
seq1 [alpha in A_tau]: x -alpha-> x1 |- x;y -alpha-> x1;y
seq2 [beta in A_tau]: x -alpha-/> for all alpha in A_tau, y -beta-> y1 |- x;y -beta-> y1
";

    fn t(tss: &Tss, s: &str) -> Term {
        crate::syntax::parse_term(s, &tss.signature).unwrap()
    }

    #[test]
    fn priority_blocks_lower_action() {
        let tss = parse_tss(PRIORITY).unwrap().tss;
        let seed = t(&tss, "Theta(s)");
        let g = generate_lts(&tss, &[seed.clone()], 4).unwrap();
        let m = &g.model;
        assert_eq!(m.positive(&seed, &Action::new("a"), &t(&tss, "Theta(s1)")), Truth::False);
        assert_eq!(m.negative(&seed, &Action::new("a")), Truth::True);
        assert_eq!(m.positive(&seed, &Action::new("b"), &t(&tss, "Theta(s2)")), Truth::True);
        assert!(!g.truncated && !m.escaped);
    }

    #[test]
    fn sequencing_examples() {
        let tss = parse_tss(SEQ).unwrap().tss;
        let (pr, qr) = (t(&tss, "p;r"), t(&tss, "q;r"));
        let g = generate_lts(&tss, &[pr.clone(), qr.clone()], 4).unwrap();
        let s = g.state(&pr).unwrap();
        let outs: Vec<_> = g.lts.out(s).iter().map(|&(l, d)| (g.lts.label(l).name().to_string(), d)).collect();
        assert_eq!(outs, vec![("tau".to_string(), s)]);
        let q = g.state(&qr).unwrap();
        let zero = g.state(&t(&tss, "0")).unwrap();
        assert_eq!(g.lts.out(q).len(), 1);
        assert_eq!(g.lts.out(q)[0].1, zero);
    }

    #[test]
    fn universe_rounds() {
        let tss = parse_tss(SEQ).unwrap().tss;
        let u = ground_universe(&tss, &[t(&tss, "p")], 0).unwrap();
        assert_eq!(u.len(), 1);
        let u = ground_universe(&tss, &[t(&tss, "p;r")], 2).unwrap();
        let names: BTreeSet<String> = u.terms().iter().map(|x| x.to_string()).collect();
        assert!(["p;r", "p", "r", "0"].iter().all(|n| names.contains(*n)), "{names:?}");
        assert!(!u.truncated);
    }

    #[test]
    fn truncation_is_flagged() {
        let tss = parse_tss("actions a\nop s : 1\nconst z\n|- z -a-> s(z)\nx -a-> y |- s(x) -a-> s(y)").unwrap().tss;
        let u = ground_universe(&tss, &[Term::constant("z")], 3).unwrap();
        assert!(u.truncated);
    }

    #[test]
    fn self_refuting_rule_is_ambiguous() {
        let tss = parse_tss("actions a\nconst c, d\nc -a-/> |- c -a-> d").unwrap().tss;
        let u = ground_universe(&tss, &[Term::constant("c")], 2).unwrap();
        let m = well_founded_model(&tss, &u).unwrap();
        assert_eq!(m.positive(&Term::constant("c"), &Action::new("a"), &Term::constant("d")), Truth::Ambiguous);
        let rep = m.completeness();
        assert!(!rep.complete);
        assert_eq!(rep.ambiguous.len(), 1);
        assert!(matches!(generate_lts(&tss, &[Term::constant("c")], 2), Err(Error::Incomplete(..))));
    }

    #[test]
    fn proofs_replay() {
        let tss = parse_tss(PRIORITY).unwrap().tss;
        let g = generate_lts(&tss, &[t(&tss, "Theta(s)")], 4).unwrap();
        let pf = g.model.proof(&t(&tss, "Theta(s)"), &Action::new("b"), &t(&tss, "Theta(s2)")).unwrap();
        assert!(pf.replays(&tss));
        assert_eq!(pf.children.len(), 1);
    }

    #[test]
    fn agrees_with_bruteforce_on_small_systems() {
        for src in [SEQ, PRIORITY, "actions a\nconst c, d\nc -a-/> |- c -a-> d"] {
            let tss = parse_tss(src).unwrap().tss;
            let seeds: Vec<Term> = tss.closed_constants();
            let u = ground_universe(&tss, &seeds, 1).unwrap();
            let m = well_founded_model(&tss, &u).unwrap();
            let Ok(ws) = ws_provable_bruteforce(&tss, &u, 30) else { continue };
            for lit in &ws {
                assert_eq!(m.literal(lit), Truth::True, "{lit}");
            }
            for p in u.terms() {
                for a in &tss.actions {
                    let neg = Literal::neg(p.clone(), a.clone());
                    assert_eq!(m.negative(p, a) == Truth::True, ws.contains(&neg), "{neg}");
                }
            }
        }
    }
}
