//! Modal formulas, satisfaction, normalisation, syntactic classes and
//! distinguishing formulas.

mod class;
mod distinguish;
mod normalize;

use std::fmt;

use crate::action::Action;
use crate::lts::Lts;

pub use class::{class_membership, Class};
pub use distinguish::distinguish;
pub use normalize::normalize;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Conj(Vec<Formula>),
    Neg(Box<Formula>),
    Diam(Action, Box<Formula>),
    Eps(Box<Formula>),
    TauHat(Box<Formula>),
    Delta(Box<Formula>),
}

impl Formula {
    pub fn top() -> Formula {
        Formula::Conj(Vec::new())
    }

    pub fn bottom() -> Formula {
        Formula::neg(Formula::top())
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Box::new(f))
    }

    pub fn diam(a: Action, f: Formula) -> Formula {
        Formula::Diam(a, Box::new(f))
    }

    pub fn eps(f: Formula) -> Formula {
        Formula::Eps(Box::new(f))
    }

    pub fn tau_hat(f: Formula) -> Formula {
        Formula::TauHat(Box::new(f))
    }

    pub fn delta(f: Formula) -> Formula {
        Formula::Delta(Box::new(f))
    }

    pub fn and(items: impl IntoIterator<Item = Formula>) -> Formula {
        Formula::Conj(items.into_iter().collect())
    }

    /// `¬<tau>T`
    pub fn stable() -> Formula {
        Formula::neg(Formula::diam(Action::tau(), Formula::top()))
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Formula::Conj(v) if v.is_empty())
    }

    /// Conjuncts with nested conjunctions flattened.
    pub fn conjuncts(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        self.flatten_into(&mut out);
        out
    }

    fn flatten_into(&self, out: &mut Vec<Formula>) {
        match self {
            Formula::Conj(items) => items.iter().for_each(|i| i.flatten_into(out)),
            other => out.push(other.clone()),
        }
    }

    pub fn contains_delta(&self) -> bool {
        match self {
            Formula::Conj(items) => items.iter().any(Formula::contains_delta),
            Formula::Delta(_) => true,
            Formula::Neg(f) | Formula::Diam(_, f) | Formula::Eps(f) | Formula::TauHat(f) => f.contains_delta(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Conj(items) => 1 + items.iter().map(Formula::size).sum::<usize>(),
            Formula::Neg(f) | Formula::Diam(_, f) | Formula::Eps(f) | Formula::TauHat(f) | Formula::Delta(f) => 1 + f.size(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Conj(items) if items.is_empty() => write!(f, "T"),
            Formula::Conj(items) => {
                write!(f, "/\\{{")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{it}")?;
                }
                write!(f, "}}")
            }
            Formula::Neg(g) => write!(f, "~{g}"),
            Formula::Diam(a, g) => write!(f, "<{a}>{g}"),
            Formula::Eps(g) => write!(f, "<eps>{g}"),
            Formula::TauHat(g) => write!(f, "<that>{g}"),
            Formula::Delta(g) => write!(f, "D {g}"),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The set of states satisfying `phi`.
pub fn sat_set(lts: &Lts, phi: &Formula) -> Vec<bool> {
    let n = lts.num_states();
    match phi {
        Formula::Conj(items) => {
            let mut acc = vec![true; n];
            for it in items {
                let s = sat_set(lts, it);
                for i in 0..n {
                    acc[i] &= s[i];
                }
            }
            acc
        }
        Formula::Neg(g) => sat_set(lts, g).into_iter().map(|b| !b).collect(),
        Formula::Diam(a, g) => {
            let inner = sat_set(lts, g);
            let Some(l) = lts.label_index(a) else { return vec![false; n] };
            (0..n).map(|s| lts.out(s).iter().any(|&(l2, t)| l2 == l && inner[t])).collect()
        }
        Formula::Eps(g) => {
            let inner = sat_set(lts, g);
            (0..n).map(|s| lts.eps_closure(s).into_iter().any(|t| inner[t])).collect()
        }
        Formula::TauHat(g) => {
            let inner = sat_set(lts, g);
            (0..n).map(|s| inner[s] || lts.tau_successors(s).any(|t| inner[t])).collect()
        }
        Formula::Delta(g) => lts.divergent_within_set(&sat_set(lts, g)),
    }
}

pub fn satisfies(lts: &Lts, s: usize, phi: &Formula) -> bool {
    sat_set(lts, phi)[s]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Action {
        Action::new("a")
    }

    #[test]
    fn satisfaction_basics() {
        // 0 -tau-> 1 -a-> 2, 3 -tau-> 3
        let l = Lts::new(4, 0, [(0, Action::tau(), 1), (1, a(), 2), (3, Action::tau(), 3)]).unwrap();
        let has_a = Formula::diam(a(), Formula::top());
        assert_eq!(sat_set(&l, &has_a), vec![false, true, false, false]);
        assert_eq!(sat_set(&l, &Formula::eps(has_a.clone())), vec![true, true, false, false]);
        assert_eq!(sat_set(&l, &Formula::tau_hat(has_a.clone())), vec![true, true, false, false]);
        assert_eq!(sat_set(&l, &Formula::stable()), vec![false, true, true, false]);
        assert_eq!(sat_set(&l, &Formula::delta(Formula::top())), vec![false, false, false, true]);
        assert_eq!(sat_set(&l, &Formula::diam(Action::new("zz"), Formula::top())), vec![false; 4]);
    }

    #[test]
    fn display() {
        let f = Formula::eps(Formula::and([Formula::stable(), Formula::diam(a(), Formula::top())]));
        assert_eq!(f.to_string(), "<eps>/\\{~<tau>T, <a>T}");
        assert_eq!(Formula::delta(Formula::top()).to_string(), "D T");
    }
}
