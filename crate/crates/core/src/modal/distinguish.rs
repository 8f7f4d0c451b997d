use std::collections::HashMap;

use crate::equiv::{branching_history, coarsest, Kind, Partition};
use crate::error::{Error, Result};
use crate::lts::Lts;

use super::{Class, Formula};

/// A formula of `class` satisfied by `s1` and not by `s2`, or `None` when the
/// two states are equivalent for the equivalence the class characterises.
///
/// Formulas are assembled along the refinement history: a pair first split at
/// round `i` is separated using sub-formulas for pairs split earlier.
pub fn distinguish(lts: &Lts, s1: usize, s2: usize, class: Class) -> Result<Option<Formula>> {
    let n = lts.num_states();
    if s1 >= n || s2 >= n {
        return Err(Error::StateOutOfRange(s1.max(s2)));
    }
    let (stab, rooted) = match class {
        Class::Ob => (false, false),
        Class::Obs => (true, false),
        Class::Orb => (false, true),
        Class::Orbs => (true, true),
        Class::O => return Err(Error::Invalid("class O characterises no equivalence here".into())),
    };
    let mut d = Distinguisher::new(lts, stab);
    if !rooted {
        if d.final_partition().same(s1, s2) {
            return Ok(None);
        }
        return d.delta(s1, s2).map(Some);
    }
    let base_kind = if stab { Kind::Rsb } else { Kind::Rb };
    if coarsest(lts, base_kind).same(s1, s2) {
        return Ok(None);
    }
    match d.rooted_witness(s1, s2)? {
        Some(f) => Ok(Some(f)),
        None => match d.rooted_witness(s2, s1)? {
            Some(f) => Ok(Some(Formula::neg(f))),
            None => Err(Error::Internal("rooted inequivalence without a one-step difference".into())),
        },
    }
}

struct Distinguisher<'a> {
    lts: &'a Lts,
    stab: bool,
    history: Vec<Partition>,
    reach: Vec<Vec<usize>>,
    memo: HashMap<(usize, usize), Formula>,
}

impl<'a> Distinguisher<'a> {
    fn new(lts: &'a Lts, stab: bool) -> Self {
        Distinguisher {
            lts,
            stab,
            history: branching_history(lts, stab),
            reach: lts.eps_closures(),
            memo: HashMap::new(),
        }
    }

    fn final_partition(&self) -> &Partition {
        self.history.last().unwrap()
    }

    fn level(&self, p: usize, q: usize) -> Option<usize> {
        self.history.iter().position(|h| !h.same(p, q))
    }

    fn signature(&self, part: &Partition, s: usize) -> Vec<(usize, usize, usize, usize)> {
        // (label, target block, via state, target state)
        let tau = self.lts.tau();
        let b = part.block(s);
        let mut out = Vec::new();
        for &s2 in &self.reach[s] {
            if part.block(s2) != b {
                continue;
            }
            for &(l, t) in self.lts.out(s2) {
                if Some(l) == tau && part.block(t) == b {
                    continue;
                }
                out.push((l, part.block(t), s2, t));
            }
        }
        out
    }

    fn stable_in_block(&self, part: &Partition, s: usize) -> Option<usize> {
        self.reach[s]
            .iter()
            .copied()
            .find(|&t| part.block(t) == part.block(s) && self.lts.is_stable(t))
    }

    /// Conjunction of `delta(witness, r)` over the given states outside `block`.
    fn separate(&mut self, part: &Partition, witness: usize, block: usize, states: impl IntoIterator<Item = usize>) -> Result<Formula> {
        let mut targets: Vec<usize> = states.into_iter().filter(|&r| part.block(r) != block).collect();
        targets.sort_unstable();
        targets.dedup();
        let mut items = Vec::new();
        for r in targets {
            items.push(self.delta(witness, r)?);
        }
        Ok(Formula::Conj(items))
    }

    /// A formula true at `p` and false at `q`; they must be inequivalent.
    fn delta(&mut self, p: usize, q: usize) -> Result<Formula> {
        if let Some(f) = self.memo.get(&(p, q)) {
            return Ok(f.clone());
        }
        let level = self
            .level(p, q)
            .ok_or_else(|| Error::Internal(format!("states {p} and {q} are not separated")))?;
        if level == 0 {
            return Err(Error::Internal("initial partition separates states".into()));
        }
        let part = self.history[level - 1].clone();
        let f = match self.delta_one_sided(&part, p, q)? {
            Some(f) => f,
            None => match self.delta_one_sided(&part, q, p)? {
                Some(f) => Formula::neg(f),
                None => return Err(Error::Internal(format!("no signature difference between {p} and {q}"))),
            },
        };
        self.memo.insert((p, q), f.clone());
        Ok(f)
    }

    /// Uses something `p` can do that `q` cannot, if there is such a thing.
    fn delta_one_sided(&mut self, part: &Partition, p: usize, q: usize) -> Result<Option<Formula>> {
        let b = part.block(p);
        let sig_q: Vec<(usize, usize)> = self.signature(part, q).into_iter().map(|(l, c, _, _)| (l, c)).collect();
        let missing = self
            .signature(part, p)
            .into_iter()
            .find(|(l, c, _, _)| !sig_q.contains(&(*l, *c)));
        let reach_q = self.reach[q].clone();
        if let Some((l, c, p1, p2)) = missing {
            let phi = self.separate(part, p1, b, reach_q.iter().copied())?;
            let label = self.lts.label(l).clone();
            let step = if label.is_tau() {
                let psi = self.separate(part, p2, c, reach_q.iter().copied())?;
                Formula::tau_hat(psi)
            } else {
                let succ: Vec<usize> = reach_q
                    .iter()
                    .flat_map(|&q1| self.lts.out(q1).iter().filter(|(l2, _)| *l2 == l).map(|&(_, r)| r))
                    .collect();
                let psi = self.separate(part, p2, c, succ)?;
                Formula::diam(label, psi)
            };
            return Ok(Some(Formula::eps(Formula::and([phi, step]))));
        }
        if self.stab {
            if let (Some(p1), None) = (self.stable_in_block(part, p), self.stable_in_block(part, q)) {
                let phi = self.separate(part, p1, b, reach_q)?;
                return Ok(Some(Formula::eps(Formula::and([Formula::stable(), phi]))));
            }
        }
        Ok(None)
    }

    /// `<a>chi` for a step of `p` that `q` cannot mimic into the same class.
    fn rooted_witness(&mut self, p: usize, q: usize) -> Result<Option<Formula>> {
        let fin = self.final_partition().clone();
        for &(l, p1) in self.lts.out(p) {
            let succ: Vec<usize> = self.lts.out(q).iter().filter(|(l2, _)| *l2 == l).map(|&(_, r)| r).collect();
            if succ.iter().any(|&r| fin.same(p1, r)) {
                continue;
            }
            let mut items = Vec::new();
            for r in succ {
                items.push(self.delta(p1, r)?);
            }
            return Ok(Some(Formula::diam(self.lts.label(l).clone(), Formula::Conj(items))));
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::modal::{class_membership, satisfies};

    #[test]
    fn separates_divergent_loop_from_deadlock_under_stability() {
        // 0 -tau-> 0 ; 1 deadlock
        let l = Lts::new(2, 0, [(0, Action::tau(), 0)]).unwrap();
        assert!(distinguish(&l, 0, 1, Class::Ob).unwrap().is_none());
        let f = distinguish(&l, 0, 1, Class::Obs).unwrap().unwrap();
        assert!(class_membership(&f, Class::Obs));
        assert!(satisfies(&l, 0, &f) && !satisfies(&l, 1, &f));
    }

    #[test]
    fn rooted_witness_starts_with_diamond() {
        // 0 -tau-> 1 -a-> 2 ; 3 -a-> 4
        let a = Action::new("a");
        let l = Lts::new(5, 0, [(0, Action::tau(), 1), (1, a.clone(), 2), (3, a, 4)]).unwrap();
        assert!(distinguish(&l, 0, 3, Class::Ob).unwrap().is_none());
        let f = distinguish(&l, 0, 3, Class::Orb).unwrap().unwrap();
        assert!(class_membership(&f, Class::Orb));
        assert!(satisfies(&l, 0, &f) && !satisfies(&l, 3, &f));
    }
}
