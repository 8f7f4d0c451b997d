//! Decomposition of modal formulas through ruloids: for a term `t` and a
//! formula `phi`, the mappings `psi` with `rho(t) |= phi` iff some `psi` has
//! `rho(x) |= psi(x)` for every variable `x` of `t`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::action::Action;
use crate::error::{Error, Result};
use crate::format::check_ready_simulation;
use crate::modal::{class_membership, normalize, sat_set, Class, Formula};
use crate::proof::generate_lts;
use crate::ruloid::{is_consistent, RuloidEngine, DEFAULT_DEPTH};
use crate::term::{Substitution, Term, Var};
use crate::tss::{is_gamma_patient_rule, liquid_occurrences, ArgPredicate, Literal, Rule, Tss};

/// Bound on |t⁻¹(φ)| entering the negation clause.
pub const DEFAULT_NEGATION_CAP: usize = 64;
/// Bound on nested τ-ruloid steps and on fixpoint rounds.
pub const DEFAULT_CYCLE_GUARD: usize = 16;
/// Bound on intermediate mapping sets.
const SET_CAP: usize = 1 << 14;

/// A decomposition mapping; variables outside the explicit domain map to `T`.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mapping(BTreeMap<Var, Formula>);

impl Mapping {
    pub fn get(&self, x: &Var) -> Formula {
        self.0.get(x).cloned().unwrap_or_else(Formula::top)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Formula)> {
        self.0.iter()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_empty()
    }

    /// Normalises every entry and drops `T` entries; `None` if some entry is `~T`.
    fn from_entries(entries: impl IntoIterator<Item = (Var, Formula)>) -> Option<Mapping> {
        let mut m = BTreeMap::new();
        for (x, f) in entries {
            let n = normalize(&f);
            if n == Formula::bottom() {
                return None;
            }
            if !n.is_top() {
                m.insert(x, n);
            }
        }
        Some(Mapping(m))
    }

    fn rename(&self, back: &HashMap<Var, Var>) -> Mapping {
        Mapping(self.0.iter().map(|(x, f)| (back.get(x).cloned().unwrap_or_else(|| x.clone()), f.clone())).collect())
    }

    fn conjunct_sets(&self) -> BTreeMap<&Var, BTreeSet<Formula>> {
        self.0.iter().map(|(x, f)| (x, f.conjuncts().into_iter().collect())).collect()
    }

    /// Every requirement of `self` is also a requirement of `other`.
    fn weaker_than(&self, other: &Mapping) -> bool {
        let mine = self.conjunct_sets();
        let theirs = other.conjunct_sets();
        mine.iter().all(|(x, s)| theirs.get(x).is_some_and(|o| s.is_subset(o)))
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, (x, phi)) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{x} := {phi}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, phi)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x} := {phi}")?;
        }
        write!(f, "}}")
    }
}

/// Dedups and drops mappings that demand more than another one.
fn prune(ms: impl IntoIterator<Item = Mapping>) -> Vec<Mapping> {
    let all: BTreeSet<Mapping> = ms.into_iter().collect();
    let all: Vec<Mapping> = all.into_iter().collect();
    let mut out: Vec<Mapping> = Vec::new();
    // fewer conjuncts first, so survivors are only compared against weaker ones
    let mut order: Vec<&Mapping> = all.iter().collect();
    order.sort_by_key(|m| m.conjunct_sets().values().map(BTreeSet::len).sum::<usize>());
    for m in order {
        if !out.iter().any(|o| o.weaker_than(m)) {
            out.push(m.clone());
        }
    }
    out.sort();
    out
}

type Key = (Term, Formula);

/// Renames the variables of `t` in order of appearance to reserved names.
fn canonical_term(t: &Term) -> (Term, HashMap<Var, Var>) {
    let mut sub = Substitution::new();
    let mut back = HashMap::new();
    for (i, x) in t.variables_in_order().into_iter().enumerate() {
        let c = Var::new(&format!("#k{}", i + 1));
        sub.insert(x.clone(), Term::Var(c.clone()));
        back.insert(c, x);
    }
    (sub.apply(t), back)
}

/// Stateful decomposition with memoisation over canonical `(t, phi)` keys.
pub struct Decomposer {
    engine: RuloidEngine,
    gamma: ArgPredicate,
    pub negation_cap: usize,
    pub cycle_guard: usize,
    memo: HashMap<Key, Vec<Mapping>>,
    approx: HashMap<Key, Vec<Mapping>>,
    in_progress: HashSet<Key>,
    touched: BTreeSet<Key>,
    tau_nesting: usize,
}

impl Decomposer {
    /// Requires a Γ-patient TSS in ready simulation format.
    pub fn new(tss: &Tss, gamma: &ArgPredicate, depth: usize) -> Result<Self> {
        if let Some(v) = check_ready_simulation(tss).first() {
            return Err(Error::Invalid(format!("not in ready simulation format: {v}")));
        }
        if let Some((f, i)) = tss.missing_patience_rules(gamma).first() {
            return Err(Error::Invalid(format!("not Γ-patient: no patience rule for ({f},{i})")));
        }
        Ok(Decomposer {
            engine: RuloidEngine::from_tss(tss, depth)?,
            gamma: gamma.clone(),
            negation_cap: DEFAULT_NEGATION_CAP,
            cycle_guard: DEFAULT_CYCLE_GUARD,
            memo: HashMap::new(),
            approx: HashMap::new(),
            in_progress: HashSet::new(),
            touched: BTreeSet::new(),
            tau_nesting: 0,
        })
    }

    pub fn decompose(&mut self, t: &Term, phi: &Formula) -> Result<Vec<Mapping>> {
        if phi.contains_delta() {
            return Err(Error::Invalid("formulas with D cannot be decomposed".into()));
        }
        let out = self.dec(t, phi);
        if out.is_err() {
            self.in_progress.clear();
            self.approx.clear();
            self.touched.clear();
            self.tau_nesting = 0;
        }
        out
    }

    fn dec(&mut self, t: &Term, phi: &Formula) -> Result<Vec<Mapping>> {
        let (tc, back) = canonical_term(t);
        let key = (tc, phi.clone());
        let res = self.dec_key(&key)?;
        Ok(res.iter().map(|m| m.rename(&back)).collect())
    }

    /// Least fixpoint over keys that reach themselves through τ-ruloid targets.
    fn dec_key(&mut self, key: &Key) -> Result<Vec<Mapping>> {
        if let Some(r) = self.memo.get(key) {
            return Ok(r.clone());
        }
        if self.in_progress.contains(key) {
            self.touched.insert(key.clone());
            return Ok(self.approx.get(key).cloned().unwrap_or_default());
        }
        self.in_progress.insert(key.clone());
        let saved = std::mem::take(&mut self.touched);
        let mut rounds = 0;
        let (res, deps) = loop {
            let res = self.compute(&key.0, &key.1)?;
            let mut hit = std::mem::take(&mut self.touched);
            let own = hit.remove(key);
            if !own || self.approx.get(key) == Some(&res) {
                break (res, hit);
            }
            rounds += 1;
            if rounds > self.cycle_guard {
                return Err(Error::Cycle(format!("{} / {}", key.0, key.1)));
            }
            self.approx.insert(key.clone(), res);
        };
        self.in_progress.remove(key);
        self.approx.remove(key);
        if deps.is_empty() {
            self.memo.insert(key.clone(), res.clone());
        }
        self.touched = saved;
        self.touched.extend(deps);
        Ok(res)
    }

    fn compute(&mut self, t: &Term, phi: &Formula) -> Result<Vec<Mapping>> {
        if !t.is_linear() {
            return self.clause_6(t, phi);
        }
        let out = match phi {
            Formula::Conj(items) => {
                let mut acc = vec![Mapping::default()];
                for it in items {
                    let part = self.dec(t, it)?;
                    let mut next = Vec::new();
                    for a in &acc {
                        for b in &part {
                            let vars: BTreeSet<&Var> = a.0.keys().chain(b.0.keys()).collect();
                            next.extend(Mapping::from_entries(vars.into_iter().map(|x| (x.clone(), Formula::and([a.get(x), b.get(x)])))));
                        }
                    }
                    acc = prune(next);
                    cap(acc.len(), "conjunction")?;
                }
                acc
            }
            Formula::Neg(g) => self.clause_2(t, g)?,
            Formula::Diam(a, g) => {
                let mut out = Vec::new();
                for r in self.ruloids(t, a)? {
                    for chi in self.dec(r.target().unwrap(), g)? {
                        out.extend(premise_mapping(t, &r, &chi, |_, body| body));
                    }
                }
                out
            }
            Formula::Eps(g) => {
                let mut out = Vec::new();
                for chi in self.dec(t, g)? {
                    let entries = t.variables().into_iter().map(|x| {
                        let f = chi.get(&x);
                        (x.clone(), if self.liquid(t, &x) { Formula::eps(f) } else { f })
                    });
                    out.extend(Mapping::from_entries(entries));
                }
                for r in self.impatient_tau_ruloids(t)? {
                    self.enter_tau(t, phi)?;
                    let chis = self.dec(r.target().unwrap(), phi);
                    self.tau_nesting -= 1;
                    for chi in chis? {
                        let gamma = self.gamma.clone();
                        out.extend(premise_mapping(t, &r, &chi, |x, body| {
                            if is_liquid(&gamma, t, x) {
                                Formula::eps(body)
                            } else {
                                body
                            }
                        }));
                    }
                }
                out
            }
            Formula::TauHat(g) => {
                let base = self.dec(t, g)?;
                let mut out = base.clone();
                for x0 in t.variables().into_iter().filter(|x| self.liquid(t, x)) {
                    for chi in &base {
                        let entries = t.variables().into_iter().map(|x| {
                            let f = chi.get(&x);
                            (x.clone(), if x == x0 { Formula::tau_hat(f) } else { f })
                        });
                        out.extend(Mapping::from_entries(entries));
                    }
                }
                for r in self.impatient_tau_ruloids(t)? {
                    self.enter_tau(t, phi)?;
                    let chis = self.dec(r.target().unwrap(), g);
                    self.tau_nesting -= 1;
                    for chi in chis? {
                        out.extend(premise_mapping(t, &r, &chi, |_, body| body));
                    }
                }
                out
            }
            Formula::Delta(_) => return Err(Error::Invalid("formulas with D cannot be decomposed".into())),
        };
        let out = prune(out);
        cap(out.len(), "decomposition set")?;
        Ok(out)
    }

    fn enter_tau(&mut self, t: &Term, phi: &Formula) -> Result<()> {
        self.tau_nesting += 1;
        if self.tau_nesting > self.cycle_guard {
            self.tau_nesting -= 1;
            return Err(Error::Cycle(format!("{t} / {phi}")));
        }
        Ok(())
    }

    fn liquid(&self, t: &Term, x: &Var) -> bool {
        is_liquid(&self.gamma, t, x)
    }

    /// Consistent positive ruloids; an incomplete set is an error.
    fn ruloids(&mut self, t: &Term, a: &Action) -> Result<Vec<Rule>> {
        let set = self.engine.ruloids(t, a, true)?;
        if !set.complete {
            return Err(Error::DepthExceeded(self.engine.depth));
        }
        Ok(set.rules.into_iter().filter(is_consistent).collect())
    }

    fn impatient_tau_ruloids(&mut self, t: &Term) -> Result<Vec<Rule>> {
        let gamma = self.gamma.clone();
        Ok(self
            .ruloids(t, &Action::tau())?
            .into_iter()
            .filter(|r| !is_gamma_patient_rule(r, &gamma))
            .collect())
    }

    fn clause_2(&mut self, t: &Term, g: &Formula) -> Result<Vec<Mapping>> {
        let inner = self.dec(t, g)?;
        if inner.len() > self.negation_cap {
            return Err(Error::CapExceeded {
                what: format!("|{t}⁻¹({g})| = {}", inner.len()),
                cap: self.negation_cap,
            });
        }
        let vars: Vec<Var> = t.variables().into_iter().collect();
        let mut states: Vec<BTreeMap<Var, BTreeSet<Formula>>> = vec![BTreeMap::new()];
        for chi in &inner {
            // sending chi to x with chi(x) = T would add ~T
            let options: Vec<&Var> = vars.iter().filter(|x| !chi.get(x).is_top()).collect();
            let mut next = Vec::new();
            for st in &states {
                for x in &options {
                    let mut s = st.clone();
                    s.entry((*x).clone()).or_default().insert(normalize(&Formula::neg(chi.get(x))));
                    next.push(s);
                }
            }
            let ms = prune(next.into_iter().filter_map(|s| Mapping::from_entries(s.into_iter().map(|(x, fs)| (x, Formula::and(fs))))));
            cap(ms.len(), "negation")?;
            states = ms
                .into_iter()
                .map(|m| m.0.into_iter().map(|(x, f)| (x, f.conjuncts().into_iter().collect())).collect())
                .collect();
        }
        Ok(states
            .into_iter()
            .filter_map(|s| Mapping::from_entries(s.into_iter().map(|(x, fs)| (x, Formula::and(fs)))))
            .collect())
    }

    fn clause_6(&mut self, t: &Term, phi: &Formula) -> Result<Vec<Mapping>> {
        let (lin, sigma) = linearize(t);
        let mut out = Vec::new();
        for chi in self.dec(&lin, phi)? {
            let entries = t.variables().into_iter().map(|x| {
                let parts = sigma.iter().filter(|(_, y)| *y == x).map(|(z, _)| chi.get(z));
                (x.clone(), Formula::and(parts.chain([chi.get(&x)])))
            });
            out.extend(Mapping::from_entries(entries));
        }
        Ok(out)
    }
}

fn cap(n: usize, what: &str) -> Result<()> {
    if n > SET_CAP {
        return Err(Error::CapExceeded {
            what: format!("{what} with {n} mappings"),
            cap: SET_CAP,
        });
    }
    Ok(())
}

fn is_liquid(gamma: &ArgPredicate, t: &Term, x: &Var) -> bool {
    !liquid_occurrences(gamma, x, t).liquid.is_empty()
}

/// Renames repeated occurrences apart; returns the univariate term and the
/// map from each new variable to the variable it replaces.
fn linearize(t: &Term) -> (Term, Vec<(Var, Var)>) {
    let mut seen = BTreeSet::new();
    let mut sigma = Vec::new();
    fn walk(t: &Term, seen: &mut BTreeSet<Var>, sigma: &mut Vec<(Var, Var)>) -> Term {
        match t {
            Term::Var(x) => {
                if seen.insert(x.clone()) {
                    t.clone()
                } else {
                    let z = Var::fresh();
                    sigma.push((z.clone(), x.clone()));
                    Term::Var(z)
                }
            }
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| walk(a, seen, sigma)).collect()),
        }
    }
    let lin = walk(t, &mut seen, &mut sigma);
    (lin, sigma)
}

/// `chi(x) /\ <b>chi(y) for x -b-> y in H /\ ~<c>T for x -c-/> in H`, wrapped per variable.
fn premise_mapping(t: &Term, r: &Rule, chi: &Mapping, wrap: impl Fn(&Var, Formula) -> Formula) -> Option<Mapping> {
    let entries = t.variables().into_iter().map(|x| {
        let mut parts = vec![chi.get(&x)];
        for l in r.premises() {
            if l.source().as_var() != Some(&x) {
                continue;
            }
            match l {
                Literal::Pos { label, target, .. } => {
                    let y = target.as_var().expect("ruloid premise targets are variables");
                    parts.push(Formula::diam(label.clone(), chi.get(y)));
                }
                Literal::Neg { label, .. } => parts.push(Formula::neg(Formula::diam(label.clone(), Formula::top()))),
            }
        }
        let body = Formula::and(parts);
        (x.clone(), wrap(&x, body))
    });
    Mapping::from_entries(entries)
}

/// One-shot decomposition.
pub fn decompose(tss: &Tss, t: &Term, phi: &Formula, gamma: &ArgPredicate, depth: usize) -> Result<Vec<Mapping>> {
    Decomposer::new(tss, gamma, depth)?.decompose(t, phi)
}

#[derive(Clone, Debug, Default)]
pub struct TheoremReport {
    pub mappings: usize,
    pub substitutions: usize,
    pub counterexamples: Vec<String>,
    pub truncated: bool,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty() && !self.truncated
    }
}

/// All closed substitutions from `vars` into `terms`.
pub fn substitutions(vars: &[Var], terms: &[Term]) -> Vec<Substitution> {
    let mut out = vec![Substitution::new()];
    for x in vars {
        out = out
            .iter()
            .flat_map(|s| {
                terms.iter().map(move |p| {
                    let mut s = s.clone();
                    s.insert(x.clone(), p.clone());
                    s
                })
            })
            .collect();
    }
    out
}

/// Exhaustively checks `rho(t) |= phi` against the decomposition for every
/// `rho: var(t) -> closed`.
pub fn verify_decomposition_theorem(
    tss: &Tss,
    t: &Term,
    phi: &Formula,
    gamma: &ArgPredicate,
    closed: &[Term],
    universe_depth: usize,
) -> Result<TheoremReport> {
    let mappings = decompose(tss, t, phi, gamma, DEFAULT_DEPTH)?;
    let vars: Vec<Var> = t.variables().into_iter().collect();
    let subs = substitutions(&vars, closed);
    let mut seeds: Vec<Term> = closed.to_vec();
    seeds.extend(subs.iter().map(|s| s.apply(t)));
    let g = generate_lts(tss, &seeds, universe_depth)?;
    let mut cache: HashMap<Formula, Vec<bool>> = HashMap::new();
    let mut sat = |f: &Formula, p: &Term| -> bool {
        let s = g.state(p).expect("seeded term");
        cache.entry(f.clone()).or_insert_with(|| sat_set(&g.lts, f))[s]
    };
    let mut report = TheoremReport {
        mappings: mappings.len(),
        substitutions: subs.len(),
        truncated: g.truncated || g.model.escaped,
        ..Default::default()
    };
    for rho in &subs {
        let lhs = sat(phi, &rho.apply(t));
        let rhs = mappings.iter().any(|m| vars.iter().all(|x| sat(&m.get(x), rho.get(x).unwrap())));
        if lhs != rhs {
            let shown: Vec<String> = vars.iter().map(|x| format!("{x}:={}", rho.get(x).unwrap())).collect();
            report.counterexamples.push(format!("[{}] lhs={lhs} rhs={rhs}", shown.join(", ")));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Default)]
pub struct ClassReport {
    pub mappings: usize,
    pub checked: usize,
    pub violations: Vec<String>,
}

/// Checks the class-preservation claims: for `phi` in `Obs`, entries of
/// variables only Λ-liquid in `t` stay in `Obs`; for `phi` in `Orbs` every
/// entry stays in `Orbs`, and entries of variables only Λ-liquid and only
/// ℵ-frozen in `t` land in `Obs`.
pub fn verify_class_preservation(tss: &Tss, aleph: &ArgPredicate, lambda: &ArgPredicate, t: &Term, phi: &Formula) -> Result<ClassReport> {
    let gamma = aleph.intersection(lambda);
    let mappings = decompose(tss, t, phi, &gamma, DEFAULT_DEPTH)?;
    let in_obs = class_membership(phi, Class::Obs);
    let in_orbs = class_membership(phi, Class::Orbs);
    let mut report = ClassReport {
        mappings: mappings.len(),
        ..Default::default()
    };
    for m in &mappings {
        for x in t.variables() {
            let f = m.get(&x);
            let l_only = liquid_occurrences(lambda, &x, t).only_liquid();
            let a_frozen = liquid_occurrences(aleph, &x, t).only_frozen();
            let mut need = Vec::new();
            if in_obs && l_only {
                need.push(("1", Class::Obs));
            }
            if in_orbs {
                need.push(("2", Class::Orbs));
            }
            if in_orbs && l_only && a_frozen {
                need.push(("3", Class::Obs));
            }
            for (claim, class) in need {
                report.checked += 1;
                if !class_membership(&f, class) {
                    report.violations.push(format!("claim {claim}: {x} := {} not in {class}", normalize(&f)));
                }
            }
        }
    }
    Ok(report)
}
