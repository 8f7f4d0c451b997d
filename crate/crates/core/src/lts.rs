//! Finite labelled transition systems.

use std::collections::BTreeSet;

use rand::Rng;

use crate::action::Action;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    num_states: usize,
    initial: usize,
    labels: Vec<Action>,
    transitions: Vec<(usize, usize, usize)>,
    out: Vec<Vec<(usize, usize)>>,
    names: Vec<Option<String>>,
}

impl Lts {
    /// Builds an LTS; transitions are `(source, label, target)` and get sorted and deduplicated.
    pub fn new(num_states: usize, initial: usize, transitions: impl IntoIterator<Item = (usize, Action, usize)>) -> Result<Self> {
        let mut labels: Vec<Action> = Vec::new();
        let mut raw = Vec::new();
        for (s, a, t) in transitions {
            let li = match labels.iter().position(|l| *l == a) {
                Some(i) => i,
                None => {
                    labels.push(a);
                    labels.len() - 1
                }
            };
            raw.push((s, li, t));
        }
        Self::from_indexed(num_states, initial, labels, raw)
    }

    pub fn from_indexed(num_states: usize, initial: usize, labels: Vec<Action>, mut transitions: Vec<(usize, usize, usize)>) -> Result<Self> {
        if num_states == 0 || initial >= num_states {
            return Err(Error::StateOutOfRange(initial));
        }
        for &(s, l, t) in &transitions {
            if s >= num_states || t >= num_states {
                return Err(Error::StateOutOfRange(s.max(t)));
            }
            if l >= labels.len() {
                return Err(Error::Invalid(format!("label index {l} out of range")));
            }
        }
        transitions.sort_unstable();
        transitions.dedup();
        let mut out = vec![Vec::new(); num_states];
        for &(s, l, t) in &transitions {
            out[s].push((l, t));
        }
        Ok(Lts {
            num_states,
            initial,
            labels,
            transitions,
            out,
            names: vec![None; num_states],
        })
    }

    pub fn with_names(mut self, names: Vec<Option<String>>) -> Self {
        assert_eq!(names.len(), self.num_states);
        self.names = names;
        self
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn labels(&self) -> &[Action] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &Action {
        &self.labels[i]
    }

    pub fn label_index(&self, a: &Action) -> Option<usize> {
        self.labels.iter().position(|l| l == a)
    }

    pub fn tau(&self) -> Option<usize> {
        self.labels.iter().position(Action::is_tau)
    }

    pub fn transitions(&self) -> &[(usize, usize, usize)] {
        &self.transitions
    }

    pub fn out(&self, s: usize) -> &[(usize, usize)] {
        &self.out[s]
    }

    pub fn name(&self, s: usize) -> Option<&str> {
        self.names[s].as_deref()
    }

    /// The state named `name`, or the state whose index is `name`.
    pub fn find_state(&self, name: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|n| n.as_deref() == Some(name))
            .or_else(|| name.parse::<usize>().ok().filter(|&s| s < self.num_states))
    }

    pub fn display_state(&self, s: usize) -> String {
        self.names[s].clone().unwrap_or_else(|| s.to_string())
    }

    pub fn tau_successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        let tau = self.tau();
        self.out[s].iter().filter(move |(l, _)| Some(*l) == tau).map(|&(_, t)| t)
    }

    pub fn is_stable(&self, s: usize) -> bool {
        self.tau_successors(s).next().is_none()
    }

    /// All states reachable from `s` by zero or more tau steps, sorted.
    pub fn eps_closure(&self, s: usize) -> Vec<usize> {
        let mut seen = vec![false; self.num_states];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(p) = stack.pop() {
            for q in self.tau_successors(p) {
                if !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        (0..self.num_states).filter(|&q| seen[q]).collect()
    }

    pub fn eps_closures(&self) -> Vec<Vec<usize>> {
        (0..self.num_states).map(|s| self.eps_closure(s)).collect()
    }

    /// States in `allowed` with an infinite tau path that never leaves `allowed`.
    pub fn divergent_within_set(&self, allowed: &[bool]) -> Vec<bool> {
        let mut div = allowed.to_vec();
        loop {
            let mut changed = false;
            for s in 0..self.num_states {
                if div[s] && !self.tau_successors(s).any(|t| div[t]) {
                    div[s] = false;
                    changed = true;
                }
            }
            if !changed {
                return div;
            }
        }
    }

    pub fn divergent_within(&self, s: usize, allowed: &[bool]) -> bool {
        allowed[s] && self.divergent_within_set(allowed)[s]
    }

    /// States that can perform an infinite tau sequence.
    pub fn divergent_states(&self) -> Vec<bool> {
        self.divergent_within_set(&vec![true; self.num_states])
    }

    pub fn is_divergent(&self, s: usize) -> bool {
        self.divergent_states()[s]
    }

    /// Disjoint union; states of `other` are shifted by `self.num_states()`.
    pub fn disjoint_union(&self, other: &Lts) -> Lts {
        let off = self.num_states;
        let trans = self
            .transitions
            .iter()
            .map(|&(s, l, t)| (s, self.labels[l].clone(), t))
            .chain(other.transitions.iter().map(|&(s, l, t)| (s + off, other.labels[l].clone(), t + off)));
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        Lts::new(off + other.num_states, self.initial, trans.collect::<Vec<_>>())
            .expect("union of valid systems")
            .with_names(names)
    }

    /// Renames or drops labels.
    pub fn relabel(&self, f: impl Fn(&Action) -> Option<Action>) -> Lts {
        let trans: Vec<_> = self
            .transitions
            .iter()
            .filter_map(|&(s, l, t)| f(&self.labels[l]).map(|a| (s, a, t)))
            .collect();
        Lts::new(self.num_states, self.initial, trans)
            .expect("relabelling keeps states")
            .with_names(self.names.clone())
    }

    /// Adds a self-loop labelled `label` on each marked state.
    pub fn with_marks(&self, marks: &[bool], label: &Action) -> Lts {
        let mut trans: Vec<_> = self.transitions.iter().map(|&(s, l, t)| (s, self.labels[l].clone(), t)).collect();
        trans.extend((0..self.num_states).filter(|&s| marks[s]).map(|s| (s, label.clone(), s)));
        Lts::new(self.num_states, self.initial, trans)
            .expect("marks keep states")
            .with_names(self.names.clone())
    }

    pub fn label_set(&self) -> BTreeSet<Action> {
        self.transitions.iter().map(|&(_, l, _)| self.labels[l].clone()).collect()
    }

    /// A random system with `n` states over `labels`, each transition present with probability `density`.
    pub fn random(rng: &mut impl Rng, n: usize, labels: &[Action], density: f64) -> Lts {
        let mut trans = Vec::new();
        for s in 0..n {
            for a in labels {
                for t in 0..n {
                    if rng.gen_bool(density) {
                        trans.push((s, a.clone(), t));
                    }
                }
            }
        }
        Lts::new(n, 0, trans).expect("random system is well formed")
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    proptest! {
        #[test]
        fn divergence_matches_cycle_reachability(seed in 0u64..5000, n in 1usize..6) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let l = Lts::random(&mut rng, n, &[Action::tau(), Action::new("a")], 0.25);
            let div = l.divergent_states();
            for s in 0..n {
                // brute force: s reaches some state on a tau cycle
                let reach = l.eps_closure(s);
                let on_cycle = reach.iter().any(|&p| l.tau_successors(p).any(|q| l.eps_closure(q).contains(&p)));
                prop_assert_eq!(div[s], on_cycle);
                prop_assert!(reach.contains(&s));
                for &p in &reach {
                    for q in l.eps_closure(p) { prop_assert!(reach.contains(&q)); }
                }
            }
        }
    }
}
