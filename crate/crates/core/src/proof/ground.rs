use std::collections::{BTreeSet, HashMap};

use crate::action::Action;
use crate::error::{Error, Result};
use crate::term::{match_into, Substitution, Term};
use crate::tss::{Literal, Rule, Tss};

/// A finite indexed set of closed terms.
#[derive(Clone, Debug, Default)]
pub struct Universe {
    terms: Vec<Term>,
    index: HashMap<Term, usize>,
    /// The construction stopped at its round bound with new terms pending.
    pub truncated: bool,
}

impl Universe {
    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut u = Universe::default();
        for t in terms {
            u.insert_with_subterms(&t);
        }
        u
    }

    pub fn insert(&mut self, t: Term) -> usize {
        if let Some(&i) = self.index.get(&t) {
            return i;
        }
        self.terms.push(t.clone());
        self.index.insert(t, self.terms.len() - 1);
        self.terms.len() - 1
    }

    pub fn insert_with_subterms(&mut self, t: &Term) {
        self.insert(t.clone());
        for s in t.subterms() {
            self.insert(s);
        }
    }

    pub fn get(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn term(&self, i: usize) -> &Term {
        &self.terms[i]
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A closed rule instance over universe indices.
#[derive(Clone, Debug)]
pub(crate) struct Instance {
    pub head: (usize, usize, usize),
    pub pos: Vec<(usize, usize, usize)>,
    pub neg: Vec<(usize, usize)>,
}

/// All rule instances that can fire in the over-approximation where negative
/// premises are ignored, plus the terms they needed but the universe lacks.
pub(crate) struct GroundSystem {
    pub instances: Vec<Instance>,
    pub missing: BTreeSet<Term>,
}

impl GroundSystem {
    pub fn build(tss: &Tss, univ: &Universe, actions: &[Action]) -> Result<Self> {
        let act: HashMap<&Action, usize> = actions.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let rules: Vec<PreparedRule> = tss.rules.iter().map(|r| PreparedRule::new(r, &act)).collect::<Result<_>>()?;
        let mut rel: HashMap<(usize, usize), BTreeSet<usize>> = HashMap::new();
        loop {
            let mut g = Grounder {
                univ,
                rel: &rel,
                missing: BTreeSet::new(),
                out: Vec::new(),
            };
            for p in 0..univ.len() {
                for r in &rules {
                    let mut sub = Substitution::new();
                    if match_into(r.rule.source(), univ.term(p), &mut sub) {
                        g.bind(r, p, sub, &mut vec![false; r.pos.len()], &mut Vec::new())?;
                    }
                }
            }
            let (out, missing) = (g.out, g.missing);
            let mut grew = false;
            for inst in &out {
                let (p, a, q) = inst.head;
                grew |= rel.entry((p, a)).or_default().insert(q);
            }
            if !grew {
                return Ok(GroundSystem { instances: out, missing });
            }
        }
    }
}

struct PreparedRule<'a> {
    rule: &'a Rule,
    label: usize,
    pos: Vec<(&'a Term, usize, &'a Term)>,
    neg: Vec<(&'a Term, usize)>,
}

impl<'a> PreparedRule<'a> {
    fn new(rule: &'a Rule, act: &HashMap<&Action, usize>) -> Result<Self> {
        let idx = |a: &Action| act.get(a).copied().ok_or_else(|| Error::UndeclaredAction(a.to_string()));
        if rule.target().is_none() {
            return Err(Error::Invalid(format!("rule `{rule}` has a negative conclusion")));
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for l in rule.premises() {
            match l {
                Literal::Pos { source, label, target } => pos.push((source, idx(label)?, target)),
                Literal::Neg { source, label } => neg.push((source, idx(label)?)),
            }
        }
        Ok(PreparedRule {
            rule,
            label: idx(rule.label())?,
            pos,
            neg,
        })
    }
}

struct Grounder<'u> {
    univ: &'u Universe,
    rel: &'u HashMap<(usize, usize), BTreeSet<usize>>,
    missing: BTreeSet<Term>,
    out: Vec<Instance>,
}

impl Grounder<'_> {
    fn closed(&self, r: &PreparedRule, t: &Term, sub: &Substitution) -> Result<Term> {
        let s = sub.apply(t);
        if !s.is_closed() {
            let vars: Vec<String> = s.variables().iter().map(|v| v.name().to_string()).collect();
            return Err(Error::FreeVariables {
                rule: r.rule.to_string(),
                vars: vars.join(", "),
            });
        }
        Ok(s)
    }

    /// Resolves positive premises in an order where each source is bound.
    fn bind(&mut self, r: &PreparedRule, p: usize, sub: Substitution, done: &mut Vec<bool>, pos: &mut Vec<(usize, usize, usize)>) -> Result<()> {
        let next = (0..r.pos.len()).find(|&k| !done[k] && r.pos[k].0.variables().iter().all(|v| sub.get(v).is_some()));
        let Some(k) = next else {
            if done.iter().any(|d| !d) {
                // remaining sources mention variables no premise binds
                let k = done.iter().position(|d| !d).unwrap();
                self.closed(r, r.pos[k].0, &sub)?;
            }
            return self.finish(r, p, &sub, pos);
        };
        let (src, label, tgt) = r.pos[k];
        let s = self.closed(r, src, &sub)?;
        let Some(si) = self.univ.get(&s) else {
            self.missing.insert(s);
            return Ok(());
        };
        let Some(succ) = self.rel.get(&(si, label)) else {
            return Ok(());
        };
        done[k] = true;
        for &q in succ {
            let mut s2 = sub.clone();
            if match_into(tgt, self.univ.term(q), &mut s2) {
                pos.push((si, label, q));
                self.bind(r, p, s2, done, pos)?;
                pos.pop();
            }
        }
        done[k] = false;
        Ok(())
    }

    fn finish(&mut self, r: &PreparedRule, p: usize, sub: &Substitution, pos: &[(usize, usize, usize)]) -> Result<()> {
        let mut neg = Vec::new();
        let mut escaped = false;
        for &(src, label) in &r.neg {
            let s = self.closed(r, src, sub)?;
            match self.univ.get(&s) {
                Some(i) => neg.push((i, label)),
                None => {
                    self.missing.insert(s);
                    escaped = true;
                }
            }
        }
        let tgt = self.closed(r, r.rule.target().expect("checked positive"), sub)?;
        let Some(q) = self.univ.get(&tgt) else {
            self.missing.insert(tgt);
            return Ok(());
        };
        if !escaped {
            self.out.push(Instance {
                head: (p, r.label, q),
                pos: pos.to_vec(),
                neg,
            });
        }
        Ok(())
    }
}
