//! Direct well-supported provability by enumeration of negative supports.
//! Exponential; only for cross-checking the fixpoint on small systems.

use std::collections::{BTreeSet, HashMap};

use crate::action::Action;
use crate::error::{Error, Result};
use crate::tss::{Literal, Tss};

use super::ground::{GroundSystem, Universe};

type NegSet = BTreeSet<(usize, usize)>;

/// The ws-provable closed literals over `universe`. Fails when more than
/// `cap` ground literals are in play.
pub fn ws_provable_bruteforce(tss: &Tss, universe: &Universe, cap: usize) -> Result<BTreeSet<Literal>> {
    let actions: Vec<Action> = tss.actions.iter().cloned().collect();
    let sys = GroundSystem::build(tss, universe, &actions)?;
    let heads: BTreeSet<(usize, usize, usize)> = sys.instances.iter().map(|i| i.head).collect();
    let total = heads.len() + universe.len() * actions.len();
    if total > cap {
        return Err(Error::CapExceeded {
            what: format!("{total} ground literals"),
            cap,
        });
    }

    // minimal sets N of negative hypotheses with N / atom irredundantly provable
    let mut supp: HashMap<(usize, usize, usize), Vec<NegSet>> = HashMap::new();
    loop {
        let mut changed = false;
        for inst in &sys.instances {
            let mut acc: Vec<NegSet> = vec![inst.neg.iter().copied().collect()];
            for a in &inst.pos {
                let Some(fam) = supp.get(a) else {
                    acc.clear();
                    break;
                };
                acc = acc
                    .iter()
                    .flat_map(|n| fam.iter().map(move |m| n.union(m).copied().collect()))
                    .collect();
            }
            let fam = supp.entry(inst.head).or_default();
            for n in acc {
                if fam.iter().any(|m| m.is_subset(&n)) {
                    continue;
                }
                fam.retain(|m| !n.is_subset(m));
                fam.push(n);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    supp.retain(|_, f| !f.is_empty());

    let mut pos: BTreeSet<(usize, usize, usize)> = BTreeSet::new();
    let mut neg: BTreeSet<(usize, usize)> = BTreeSet::new();
    let enabled = |pos: &BTreeSet<(usize, usize, usize)>, s: usize, b: usize| pos.range((s, b, 0)..(s, b + 1, 0)).next().is_some();
    loop {
        let mut changed = false;
        for inst in &sys.instances {
            if !pos.contains(&inst.head) && inst.pos.iter().all(|a| pos.contains(a)) && inst.neg.iter().all(|n| neg.contains(n)) {
                pos.insert(inst.head);
                changed = true;
            }
        }
        for p in 0..universe.len() {
            for a in 0..actions.len() {
                if neg.contains(&(p, a)) {
                    continue;
                }
                // every support of every p -a-> q must contain a refuted hypothesis
                let refuted = supp
                    .iter()
                    .filter(|((s, b, _), _)| *s == p && *b == a)
                    .all(|(_, fam)| fam.iter().all(|n| n.iter().any(|&(s, b)| enabled(&pos, s, b))));
                if refuted {
                    neg.insert((p, a));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = BTreeSet::new();
    for (p, a, q) in pos {
        out.insert(Literal::pos(universe.term(p).clone(), actions[a].clone(), universe.term(q).clone()));
    }
    for (p, a) in neg {
        out.insert(Literal::neg(universe.term(p).clone(), actions[a].clone()));
    }
    Ok(out)
}
