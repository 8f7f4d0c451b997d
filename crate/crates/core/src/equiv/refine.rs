use crate::lts::Lts;

use super::Partition;

/// Signature-based partition refinement over one LTS.
pub(crate) struct Refinement<'a> {
    lts: &'a Lts,
    reach: Vec<Vec<usize>>,
    stable: Vec<bool>,
    tau: Option<usize>,
}

impl<'a> Refinement<'a> {
    pub fn new(lts: &'a Lts) -> Self {
        Refinement {
            lts,
            reach: lts.eps_closures(),
            stable: (0..lts.num_states()).map(|s| lts.is_stable(s)).collect(),
            tau: lts.tau(),
        }
    }

    pub fn strong(&self) -> Partition {
        let n = self.lts.num_states();
        let mut p = Partition::trivial(n);
        loop {
            let next = Partition::from_keys((0..n).map(|s| {
                let mut sig: Vec<(usize, usize)> = self.lts.out(s).iter().map(|&(l, t)| (l, p.block(t))).collect();
                sig.sort_unstable();
                sig.dedup();
                (p.block(s), sig)
            }));
            if next.num_blocks() == p.num_blocks() {
                return next;
            }
            p = next;
        }
    }

    /// `{(a, [t]) | s ==> s' -a-> t, s' in [s], not (a = tau and [t] = [s])}`.
    fn branching_signature(&self, p: &Partition, s: usize) -> Vec<(usize, usize)> {
        let b = p.block(s);
        let mut sig = Vec::new();
        for &s2 in &self.reach[s] {
            if p.block(s2) != b {
                continue;
            }
            for &(l, t) in self.lts.out(s2) {
                let bt = p.block(t);
                if Some(l) == self.tau && bt == b {
                    continue;
                }
                sig.push((l, bt));
            }
        }
        sig.sort_unstable();
        sig.dedup();
        sig
    }

    fn reaches_stable_in_block(&self, p: &Partition, s: usize) -> bool {
        self.reach[s].iter().any(|&t| p.block(t) == p.block(s) && self.stable[t])
    }

    pub fn branching(&self, stab: bool, marks: Option<&[bool]>) -> Partition {
        self.branching_history(stab, marks).pop().expect("history is never empty")
    }

    /// All intermediate partitions, coarsest first.
    pub fn branching_history(&self, stab: bool, marks: Option<&[bool]>) -> Vec<Partition> {
        let n = self.lts.num_states();
        let start = match marks {
            Some(m) => Partition::from_keys(m.iter().copied()),
            None => Partition::trivial(n),
        };
        let mut history = vec![start];
        loop {
            let p = history.last().unwrap();
            let next = Partition::from_keys((0..n).map(|s| {
                let flag = stab && self.reaches_stable_in_block(p, s);
                (p.block(s), self.branching_signature(p, s), flag)
            }));
            if next.num_blocks() == p.num_blocks() {
                return history;
            }
            history.push(next);
        }
    }

    /// Branching refinement where divergence inside the own block is observable.
    pub fn divergence_preserving(&self) -> Partition {
        let n = self.lts.num_states();
        let mut p = Partition::trivial(n);
        loop {
            let mut div = vec![false; n];
            for b in 0..p.num_blocks() {
                let within = self.lts.divergent_within_set(&p.mask(b));
                for s in 0..n {
                    div[s] |= within[s];
                }
            }
            let next = Partition::from_keys((0..n).map(|s| (p.block(s), self.branching_signature(&p, s), div[s])));
            if next.num_blocks() == p.num_blocks() {
                return next;
            }
            p = next;
        }
    }

    /// One strong matching step into `base`.
    pub fn rooted(&self, base: &Partition) -> Partition {
        let n = self.lts.num_states();
        Partition::from_keys((0..n).map(|s| {
            let mut sig: Vec<(usize, usize)> = self.lts.out(s).iter().map(|&(l, t)| (l, base.block(t))).collect();
            sig.sort_unstable();
            sig.dedup();
            sig
        }))
    }
}

/// Refinement history for `b` (`stab = false`) or `sb` (`stab = true`).
pub(crate) fn branching_history(lts: &Lts, stab: bool) -> Vec<Partition> {
    Refinement::new(lts).branching_history(stab, None)
}
