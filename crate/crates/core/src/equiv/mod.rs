//! Behavioural equivalences: strong bisimilarity and the branching family
//! (plain, stability-respecting, weakly and fully divergence-preserving, and
//! their rooted versions).

mod oracle;
mod refine;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lts::Lts;

pub use oracle::oracle_coarsest;
pub(crate) use refine::{branching_history, Refinement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Strong,
    B,
    Sb,
    Wdb,
    Db,
    Rb,
    Rsb,
    Rwdb,
    Rdb,
}

impl Kind {
    pub const ALL: [Kind; 9] = [Kind::Strong, Kind::B, Kind::Sb, Kind::Wdb, Kind::Db, Kind::Rb, Kind::Rsb, Kind::Rwdb, Kind::Rdb];

    pub fn is_rooted(self) -> bool {
        matches!(self, Kind::Rb | Kind::Rsb | Kind::Rwdb | Kind::Rdb)
    }

    /// The unrooted equivalence a rooted one is built on.
    pub fn base(self) -> Kind {
        match self {
            Kind::Rb => Kind::B,
            Kind::Rsb => Kind::Sb,
            Kind::Rwdb => Kind::Wdb,
            Kind::Rdb => Kind::Db,
            k => k,
        }
    }

    pub fn rooted(self) -> Kind {
        match self {
            Kind::B => Kind::Rb,
            Kind::Sb => Kind::Rsb,
            Kind::Wdb => Kind::Rwdb,
            Kind::Db => Kind::Rdb,
            k => k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Strong => "strong",
            Kind::B => "b",
            Kind::Sb => "sb",
            Kind::Wdb => "wdb",
            Kind::Db => "db",
            Kind::Rb => "rb",
            Kind::Rsb => "rsb",
            Kind::Rwdb => "rwdb",
            Kind::Rdb => "rdb",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown equivalence `{s}`")))
    }
}

/// A partition of the states, stored as canonically numbered block ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    block: Vec<usize>,
    count: usize,
}

impl Partition {
    /// Renumbers blocks in order of first occurrence.
    pub fn from_keys<K: Eq + std::hash::Hash>(keys: impl IntoIterator<Item = K>) -> Partition {
        let mut ids = std::collections::HashMap::new();
        let block: Vec<usize> = keys
            .into_iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Partition { count: ids.len(), block }
    }

    pub fn trivial(n: usize) -> Partition {
        Partition { block: vec![0; n], count: usize::from(n > 0) }
    }

    pub fn block(&self, s: usize) -> usize {
        self.block[s]
    }

    pub fn blocks_of(&self) -> &[usize] {
        &self.block
    }

    pub fn num_blocks(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    pub fn same(&self, s: usize, t: usize) -> bool {
        self.block[s] == self.block[t]
    }

    pub fn members(&self, b: usize) -> Vec<usize> {
        (0..self.block.len()).filter(|&s| self.block[s] == b).collect()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        (0..self.count).map(|b| self.members(b)).collect()
    }

    pub fn mask(&self, b: usize) -> Vec<bool> {
        self.block.iter().map(|&x| x == b).collect()
    }

    /// Every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        let n = self.block.len();
        (0..n).all(|s| (0..n).all(|t| !self.same(s, t) || other.same(s, t)))
    }

    /// `state<TAB>block` lines.
    pub fn dump(&self, lts: &Lts) -> String {
        let mut out = String::new();
        for s in 0..self.block.len() {
            out.push_str(&format!("{}\t{}\n", lts.display_state(s), self.block[s]));
        }
        out
    }
}

/// The coarsest partition for `kind` by signature refinement.
pub fn coarsest(lts: &Lts, kind: Kind) -> Partition {
    let r = Refinement::new(lts);
    match kind {
        Kind::Strong => r.strong(),
        Kind::B => r.branching(false, None),
        Kind::Sb => r.branching(true, None),
        Kind::Wdb => r.branching(false, Some(&lts.divergent_states())),
        Kind::Db => r.divergence_preserving(),
        rooted => r.rooted(&coarsest(lts, rooted.base())),
    }
}

pub fn equivalent(lts: &Lts, kind: Kind, s: usize, t: usize) -> Result<bool> {
    if s >= lts.num_states() || t >= lts.num_states() {
        return Err(Error::StateOutOfRange(s.max(t)));
    }
    Ok(coarsest(lts, kind).same(s, t))
}

/// Checks `b ⊇ sb ⊇ wdb ⊇ db` and the rooted counterparts, each rooted kind
/// inside its base. Returns the first violated inclusion.
pub fn inclusion_chain_check(lts: &Lts) -> std::result::Result<(), String> {
    let p = |k| coarsest(lts, k);
    let chain = [
        (Kind::Sb, Kind::B),
        (Kind::Wdb, Kind::Sb),
        (Kind::Db, Kind::Wdb),
        (Kind::Rsb, Kind::Rb),
        (Kind::Rwdb, Kind::Rsb),
        (Kind::Rdb, Kind::Rwdb),
        (Kind::Rb, Kind::B),
        (Kind::Rsb, Kind::Sb),
        (Kind::Rwdb, Kind::Wdb),
        (Kind::Rdb, Kind::Db),
        (Kind::Strong, Kind::Rdb),
    ];
    for (fine, coarse) in chain {
        if !p(fine).refines(&p(coarse)) {
            return Err(format!("{fine} is not included in {coarse}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;

    fn a() -> Action {
        Action::new("a")
    }
    fn tau() -> Action {
        Action::tau()
    }

    #[test]
    fn tau_loop_with_action_against_plain_action() {
        // s0 -tau-> s0, s0 -a-> s1 ; t0 -a-> t1
        let l = Lts::new(4, 0, [(0, tau(), 0), (0, a(), 1), (2, a(), 3)]).unwrap();
        assert!(equivalent(&l, Kind::B, 0, 2).unwrap());
        assert!(!equivalent(&l, Kind::Sb, 0, 2).unwrap());
        assert!(!equivalent(&l, Kind::Wdb, 0, 2).unwrap());
        assert!(!equivalent(&l, Kind::Db, 0, 2).unwrap());
    }

    #[test]
    fn sequencing_constants() {
        // p = tau loop, q = deadlock, r -a-> 0, 0 = deadlock
        let l = Lts::new(4, 0, [(0, tau(), 0), (2, a(), 3)]).unwrap();
        let sb = coarsest(&l, Kind::Sb);
        assert_eq!(sb.blocks(), vec![vec![0], vec![1, 3], vec![2]]);
        let b = coarsest(&l, Kind::B);
        assert!(b.same(0, 1) && b.same(1, 3) && !b.same(0, 2));
    }

    #[test]
    fn rooted_needs_initial_match() {
        // p0 -tau-> p (p deadlock) ; q0 deadlock
        let l = Lts::new(3, 0, [(0, tau(), 1)]).unwrap();
        assert!(equivalent(&l, Kind::B, 0, 2).unwrap());
        assert!(!equivalent(&l, Kind::Rb, 0, 2).unwrap());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in Kind::ALL {
            assert_eq!(k.name().parse::<Kind>().unwrap(), k);
        }
        assert!("x".parse::<Kind>().is_err());
    }

    #[test]
    fn partition_dump_format() {
        let l = Lts::new(2, 0, [(0, a(), 1)]).unwrap();
        assert_eq!(coarsest(&l, Kind::Strong).dump(&l), "0\t0\n1\t1\n");
    }
}
