//! Brute-force reference: enumerate every equivalence relation on a small LTS,
//! keep those satisfying the defining transfer clauses, return the coarsest.
//! Shares nothing with the refinement code beyond basic LTS queries.

use crate::error::{Error, Result};
use crate::lts::Lts;

use super::{Kind, Partition};

const MAX_STATES: usize = 8;

struct Ctx<'a> {
    lts: &'a Lts,
    eps: Vec<Vec<usize>>,
    stable: Vec<bool>,
    divergent: Vec<bool>,
    tau: Option<usize>,
}

pub fn oracle_coarsest(lts: &Lts, kind: Kind) -> Result<Partition> {
    let n = lts.num_states();
    if n > MAX_STATES {
        return Err(Error::CapExceeded {
            what: "oracle state count".into(),
            cap: MAX_STATES,
        });
    }
    let ctx = Ctx {
        lts,
        eps: (0..n).map(|s| lts.eps_closure(s)).collect(),
        stable: (0..n).map(|s| lts.is_stable(s)).collect(),
        divergent: lts.divergent_states(),
        tau: lts.tau(),
    };
    let base = if kind.is_rooted() {
        Some(oracle_coarsest(lts, kind.base())?)
    } else {
        None
    };
    let mut valid: Vec<Vec<usize>> = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let ok = match &base {
            Some(b) => ctx.rooted_ok(&rgs, b),
            None => ctx.ok(kind, &rgs),
        };
        if ok {
            valid.push(rgs.clone());
        }
        if !next_rgs(&mut rgs) {
            break;
        }
    }
    let best = valid
        .iter()
        .min_by_key(|r| r.iter().max().map_or(0, |m| m + 1))
        .ok_or_else(|| Error::Internal("identity relation rejected".into()))?;
    for r in &valid {
        for s in 0..n {
            for t in 0..n {
                if r[s] == r[t] && best[s] != best[t] {
                    return Err(Error::Internal(format!("{kind}: valid relations have no largest element")));
                }
            }
        }
    }
    Ok(Partition::from_keys(best.iter().copied()))
}

/// Next restricted growth string; false after the last one.
fn next_rgs(a: &mut [usize]) -> bool {
    let n = a.len();
    for i in (1..n).rev() {
        let max_prefix = a[..i].iter().copied().max().unwrap_or(0);
        if a[i] <= max_prefix {
            a[i] += 1;
            for x in a.iter_mut().skip(i + 1) {
                *x = 0;
            }
            return true;
        }
    }
    false
}

impl Ctx<'_> {
    fn class(&self, r: &[usize], s: usize) -> Vec<usize> {
        (0..r.len()).filter(|&t| r[t] == r[s]).collect()
    }

    fn ok(&self, kind: Kind, r: &[usize]) -> bool {
        let n = r.len();
        for p in 0..n {
            let class = self.class(r, p);
            for &(l, p1) in self.lts.out(p) {
                for &q in &class {
                    let matched = match kind {
                        Kind::Strong => self.lts.out(q).iter().any(|&(l2, q1)| l2 == l && r[q1] == r[p1]),
                        _ => {
                            (Some(l) == self.tau && r[p1] == r[q])
                                || self.eps[q].iter().any(|&q1| {
                                    r[q1] == r[p] && self.lts.out(q1).iter().any(|&(l2, q2)| l2 == l && r[q2] == r[p1])
                                })
                        }
                    };
                    if !matched {
                        return false;
                    }
                }
            }
            if matches!(kind, Kind::Sb) && self.stable[p] {
                for &q in &class {
                    if !self.eps[q].iter().any(|&q1| self.stable[q1] && r[q1] == r[p]) {
                        return false;
                    }
                }
            }
            if matches!(kind, Kind::Wdb | Kind::Db) {
                let mask: Vec<bool> = (0..n).map(|t| r[t] == r[p]).collect();
                if self.lts.divergent_within(p, &mask) {
                    for &q in &class {
                        let ok = match kind {
                            Kind::Wdb => self.divergent[q],
                            _ => self.lts.divergent_within(q, &mask),
                        };
                        if !ok {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn rooted_ok(&self, r: &[usize], base: &Partition) -> bool {
        let n = r.len();
        (0..n).all(|p| {
            self.class(r, p).into_iter().all(|q| {
                self.lts
                    .out(p)
                    .iter()
                    .all(|&(l, p1)| self.lts.out(q).iter().any(|&(l2, q1)| l2 == l && base.same(p1, q1)))
            })
        })
    }
}
