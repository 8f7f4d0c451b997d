//! Action labels and strict orders on them.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const TAU: &str = "tau";
pub const IOTA: &str = "iota";
pub const ORACLE_PREFIX: char = '@';

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(Arc<str>);

impl Action {
    pub fn new(name: &str) -> Self {
        Action(Arc::from(name))
    }

    pub fn tau() -> Self {
        Action::new(TAU)
    }

    pub fn iota() -> Self {
        Action::new(IOTA)
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_tau(&self) -> bool {
        &*self.0 == TAU
    }

    pub fn is_iota(&self) -> bool {
        &*self.0 == IOTA
    }

    pub fn is_oracle(&self) -> bool {
        self.0.starts_with(ORACLE_PREFIX)
    }
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A strict partial order, stored transitively closed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActionOrder {
    pairs: BTreeSet<(Action, Action)>,
}

impl ActionOrder {
    /// Builds the transitive closure of `less` and rejects cycles.
    pub fn new(less: impl IntoIterator<Item = (Action, Action)>) -> Result<Self> {
        let mut pairs: BTreeSet<(Action, Action)> = less.into_iter().collect();
        loop {
            let mut added = Vec::new();
            for (a, b) in &pairs {
                for (c, d) in &pairs {
                    if b == c && !pairs.contains(&(a.clone(), d.clone())) {
                        added.push((a.clone(), d.clone()));
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            pairs.extend(added);
        }
        if let Some((a, _)) = pairs.iter().find(|(a, b)| a == b) {
            return Err(Error::IllFormedOrder(format!("cycle through `{a}`")));
        }
        Ok(ActionOrder { pairs })
    }

    pub fn less(&self, a: &Action, b: &Action) -> bool {
        self.pairs.contains(&(a.clone(), b.clone()))
    }

    /// All actions strictly above `a`.
    pub fn above(&self, a: &Action) -> Vec<Action> {
        self.pairs.iter().filter(|(x, _)| x == a).map(|(_, y)| y.clone()).collect()
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(Action, Action)> {
        self.pairs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_and_cycle() {
        let a = Action::new("a");
        let b = Action::new("b");
        let c = Action::new("c");
        let o = ActionOrder::new([(a.clone(), b.clone()), (b.clone(), c.clone())]).unwrap();
        assert!(o.less(&a, &c));
        assert_eq!(o.above(&a), vec![b.clone(), c.clone()]);
        assert!(ActionOrder::new([(a.clone(), b.clone()), (b, a)]).is_err());
    }

    #[test]
    fn special_labels() {
        assert!(Action::tau().is_tau());
        assert!(Action::iota().is_iota());
        assert!(Action::new("@div").is_oracle());
        assert!(!Action::new("a").is_oracle());
    }
}
