//! The abstraction-free-oracle transformation, the decoding `dec` into the
//! LTS K, and harnesses that check the congruence-lifting requirements and
//! congruence properties on finite generated fragments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::{Action, ORACLE_PREFIX};
use crate::equiv::{coarsest, Kind};
use crate::error::{Error, Result};
use crate::format::{check_format, FormatKind, DEFAULT_SEARCH_CAP};
use crate::lts::Lts;
use crate::proof::{generate_lts, well_founded_model, Generated, Universe};
use crate::term::{Signature, Symbol, Term};
use crate::tss::{is_patience_rule, ArgPredicate, Literal, Rule, Tss};

pub const DIVERGENCE_LABEL: &str = "@div";
const CLASS_PREFIX: &str = "@c";
const SQRT: &str = "√";
/// Positive τ-premises per rule beyond which step 1 refuses to enumerate subsets.
const MAX_TAU_PREMISES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    Divergence,
    ClassNaming,
}

/// The derived labels `O` and the partial oracle ζ on closed terms.
#[derive(Clone, Debug)]
pub struct OracleSpec {
    pub kind: OracleKind,
    pub labels: BTreeSet<Action>,
    pub zeta: BTreeMap<Term, Action>,
}

impl OracleSpec {
    /// `O = {@div}`, with ζ defined exactly on divergent states. `terms[i]` names state `i`.
    pub fn divergence(lts: &Lts, terms: &[Term]) -> Self {
        let div = Action::new(DIVERGENCE_LABEL);
        let flags = lts.divergent_states();
        OracleSpec {
            kind: OracleKind::Divergence,
            labels: [div.clone()].into_iter().collect(),
            zeta: terms.iter().zip(flags).filter(|(_, d)| *d).map(|(t, _)| (t.clone(), div.clone())).collect(),
        }
    }

    /// One label per divergence-preserving branching bisimilarity class.
    pub fn class_naming(lts: &Lts, terms: &[Term]) -> Self {
        let part = coarsest(lts, Kind::Db);
        let label = |b: usize| Action::new(&format!("{CLASS_PREFIX}{b}"));
        OracleSpec {
            kind: OracleKind::ClassNaming,
            labels: (0..part.num_blocks()).map(label).collect(),
            zeta: terms.iter().enumerate().map(|(i, t)| (t.clone(), label(part.block(i)))).collect(),
        }
    }

    /// The oracle the lifting of `sim` uses: divergence for the weak variants,
    /// class naming for the strong ones.
    pub fn for_kind(sim: Kind, lts: &Lts, terms: &[Term]) -> Result<Self> {
        match sim.base() {
            Kind::Wdb => Ok(Self::divergence(lts, terms)),
            Kind::Db => Ok(Self::class_naming(lts, terms)),
            k => Err(Error::Invalid(format!("no oracle construction for `{k}`"))),
        }
    }

    /// Keeps `O` but leaves ζ undefined everywhere.
    pub fn without_assignments(mut self) -> Self {
        self.zeta.clear();
        self
    }

    fn validate(&self) -> Result<()> {
        for a in &self.labels {
            if !a.name().starts_with(ORACLE_PREFIX) {
                return Err(Error::Invalid(format!("oracle label `{a}` lacks the `{ORACLE_PREFIX}` prefix")));
            }
        }
        if let Some((t, a)) = self.zeta.iter().find(|(_, a)| !self.labels.contains(a)) {
            return Err(Error::Invalid(format!("oracle maps {t} to undeclared `{a}`")));
        }
        Ok(())
    }
}

/// The fresh constant standing for the closed term `p`.
pub fn hat(p: &Term) -> Term {
    Term::constant(&format!("^{p}"))
}

/// `f(^p1, ..., ^pn)` for `t = f(p1, ..., pn)`.
pub fn hat_image(t: &Term) -> Term {
    match t {
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(hat).collect()),
        Term::Var(_) => t.clone(),
    }
}

pub fn sqrt() -> Term {
    Term::constant(SQRT)
}

#[derive(Clone, Debug)]
pub struct AfoResult {
    pub tss: Tss,
    pub gamma: ArgPredicate,
    pub oracle: OracleSpec,
    /// The closed terms `p` with a constant `^p`; state `i` of `g` is `^universe[i]`.
    pub universe: Vec<Term>,
    pub g: Lts,
    /// `g` plus `√` as the last state and the oracle transitions.
    pub h: Lts,
}

/// Rules concluding with τ that are neither Γ-patience rules nor premise-free
/// rules between constants.
pub fn abstraction_violations(tss: &Tss, gamma: &ArgPredicate) -> Vec<usize> {
    tss.rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.label().is_tau())
        .filter(|(_, r)| {
            let constant_step = r.premises().is_empty() && r.source().is_closed() && r.target().is_some_and(Term::is_closed);
            !is_patience_rule(r, gamma) && !constant_step
        })
        .map(|(i, _)| i)
        .collect()
}

/// Steps 1 to 3: ι-copies of τ-premises, ι in non-patience τ-conclusions,
/// and `v -iota-/>` next to every `v -tau-/>`.
pub fn abstraction_free_rules(rules: &[Rule], gamma: &ArgPredicate) -> Result<Vec<Rule>> {
    let tau = Action::tau();
    let iota = Action::iota();
    let mut r1 = Vec::new();
    for r in rules {
        let taus: Vec<usize> = r
            .premises()
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_positive() && l.label().is_tau())
            .map(|(i, _)| i)
            .collect();
        if taus.len() > MAX_TAU_PREMISES {
            return Err(Error::CapExceeded {
                what: format!("τ-premises of `{r}`"),
                cap: MAX_TAU_PREMISES,
            });
        }
        for mask in 0..(1usize << taus.len()) {
            let chosen: BTreeSet<usize> = taus.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| i).collect();
            let premises = r.premises().iter().enumerate().map(|(i, l)| match l {
                Literal::Pos { source, target, .. } if chosen.contains(&i) => Literal::pos(source.clone(), iota.clone(), target.clone()),
                _ => l.clone(),
            });
            r1.push(Rule::new(premises, r.conclusion().clone()));
        }
    }
    let mut out = Vec::new();
    for r in r1 {
        let conclusion = match r.conclusion() {
            Literal::Pos { source, label, target } if *label == tau && !is_patience_rule(&r, gamma) => {
                Literal::pos(source.clone(), iota.clone(), target.clone())
            }
            c => c.clone(),
        };
        let mut premises = r.premises().to_vec();
        for l in r.premises() {
            if let Literal::Neg { source, label } = l {
                if label.is_tau() {
                    premises.push(Literal::neg(source.clone(), iota.clone()));
                }
            }
        }
        out.push(Rule::new(premises, conclusion));
    }
    Ok(out)
}

/// Oracle inheritance: `x_k -w-> y |- f(x1..xn) -w-> y` for Γ(f,k).
fn inheritance_rules(sig: &Signature, gamma: &ArgPredicate, labels: &BTreeSet<Action>) -> Vec<Rule> {
    let mut out = Vec::new();
    for w in labels {
        for (f, n) in sig.operators() {
            for k in 1..=n {
                if !gamma.contains(f, k) {
                    continue;
                }
                let xs: Vec<Term> = (1..=n).map(|i| Term::var(&format!("x{i}"))).collect();
                let y = Term::var("y");
                out.push(Rule::new(
                    [Literal::pos(xs[k - 1].clone(), w.clone(), y.clone())],
                    Literal::pos(Term::App(f.clone(), xs), w.clone(), y),
                ));
            }
        }
    }
    out
}

/// The transformation on a finite universe of closed terms, which must be
/// closed under the transitions of `p`.
pub fn afo_transform(p: &Tss, gamma: &ArgPredicate, oracle: &OracleSpec, universe: &[Term]) -> Result<AfoResult> {
    oracle.validate()?;
    if let Some((f, i)) = p.missing_patience_rules(gamma).first() {
        return Err(Error::Invalid(format!("not Γ-patient: no patience rule for ({f},{i})")));
    }
    for r in &p.rules {
        let c = r.classify();
        if !(c.decent && c.ntyft) {
            return Err(Error::NotDecentNtyft(r.to_string()));
        }
    }
    let iota = Action::iota();
    for a in oracle.labels.iter().chain([&iota]) {
        if p.actions.contains(a) {
            return Err(Error::Invalid(format!("label `{a}` is not fresh")));
        }
    }

    // G over the universe
    let univ = Universe::from_terms(universe.iter().cloned());
    let terms: Vec<Term> = univ.terms().to_vec();
    let (g, trans) = if terms.is_empty() {
        (None, Vec::new())
    } else {
        let model = well_founded_model(p, &univ)?;
        if model.escaped {
            return Err(Error::UniverseEscape("transitions leave the given universe".into()));
        }
        let report = model.completeness();
        if !report.complete {
            let first = report.ambiguous.first().map(|l| l.to_string()).unwrap_or_default();
            return Err(Error::Incomplete(report.ambiguous.len(), first));
        }
        let lts = model.to_lts(0)?;
        let trans: Vec<(usize, Action, usize)> = lts.transitions().iter().map(|&(s, l, t)| (s, lts.label(l).clone(), t)).collect();
        (Some(lts), trans)
    };

    let mut sig = p.signature.clone();
    sig.declare(SQRT, 0)?;
    for t in &terms {
        if let Some(f) = hat(t).head() {
            sig.declare(f.name(), 0)?;
        }
    }
    let mut actions = p.actions.clone();
    actions.insert(iota);
    actions.extend(oracle.labels.iter().cloned());

    let mut rules = abstraction_free_rules(&p.rules, gamma)?;
    for (s, a, t) in &trans {
        rules.push(Rule::new([], Literal::pos(hat(&terms[*s]), a.clone(), hat(&terms[*t]))));
    }
    for t in &terms {
        if let Some(w) = oracle.zeta.get(t) {
            rules.push(Rule::new([], Literal::pos(hat(t), w.clone(), sqrt())));
        }
    }
    rules.extend(inheritance_rules(&p.signature, gamma, &oracle.labels));
    let mut seen = BTreeSet::new();
    rules.retain(|r| seen.insert(r.clone()));

    let names: Vec<Option<String>> = terms.iter().map(|t| Some(hat(t).to_string())).collect();
    let n = terms.len();
    let (g, h) = match g {
        None => {
            let only = Lts::new(1, 0, Vec::<(usize, Action, usize)>::new())?.with_names(vec![Some(SQRT.into())]);
            (only.clone(), only)
        }
        Some(lts) => {
            let g = lts.with_names(names.clone());
            let mut htrans = trans.clone();
            for (i, t) in terms.iter().enumerate() {
                if let Some(w) = oracle.zeta.get(t) {
                    htrans.push((i, w.clone(), n));
                }
            }
            let mut hnames = names;
            hnames.push(Some(SQRT.into()));
            let h = Lts::new(n + 1, 0, htrans)?.with_names(hnames);
            (g, h)
        }
    };

    Ok(AfoResult {
        tss: Tss {
            signature: sig,
            actions,
            order: p.order.clone(),
            rules,
            lambda: p.lambda.clone(),
            aleph: p.aleph.clone(),
        },
        gamma: gamma.clone(),
        oracle: oracle.clone(),
        universe: terms,
        g,
        h,
    })
}

/// The transformed system's fragment and its decoding K: oracle labels
/// erased, ι renamed to τ. State `i` of `k` is `dec` of state `i` of `afo`.
#[derive(Clone, Debug)]
pub struct Decoded {
    pub afo: Generated,
    pub k: Lts,
}

pub fn dec_lts(afo: &AfoResult, seeds: &[Term], depth: usize) -> Result<Decoded> {
    let generated = generate_lts(&afo.tss, seeds, depth)?;
    let k = generated.lts.relabel(|a| {
        if a.is_iota() {
            Some(Action::tau())
        } else if afo.oracle.labels.contains(a) {
            None
        } else {
            Some(a.clone())
        }
    });
    let names = (0..k.num_states()).map(|s| Some(format!("dec({})", generated.lts.display_state(s)))).collect();
    Ok(Decoded {
        afo: generated,
        k: k.with_names(names),
    })
}

/// A (behavioural equivalence, coarser equivalence) pair the lifting theorem
/// is instantiated with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KindPair {
    pub sim: Kind,
    pub approx: Kind,
}

impl KindPair {
    pub const ALL: [KindPair; 4] = [
        KindPair { sim: Kind::Wdb, approx: Kind::Sb },
        KindPair { sim: Kind::Rwdb, approx: Kind::Rsb },
        KindPair { sim: Kind::Db, approx: Kind::Sb },
        KindPair { sim: Kind::Rdb, approx: Kind::Rsb },
    ];

    pub fn format(self) -> FormatKind {
        if self.approx.is_rooted() {
            FormatKind::Rsbb
        } else {
            FormatKind::Sbb
        }
    }

    pub fn parse(s: &str) -> Result<KindPair> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Invalid(format!("expected `sim,approx`, got `{s}`")))?;
        let pair = KindPair {
            sim: a.trim().parse()?,
            approx: b.trim().parse()?,
        };
        if !Self::ALL.contains(&pair) {
            return Err(Error::Invalid(format!("unsupported pair ({s})")));
        }
        Ok(pair)
    }
}

impl fmt::Display for KindPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.sim, self.approx)
    }
}

#[derive(Clone, Debug)]
pub struct AfoOptions {
    /// Universe growth rounds for every generated fragment.
    pub depth: usize,
    /// Operator images `f(p1..pn)` checked per operator; sampled beyond this.
    pub max_tuples: usize,
    pub seed: u64,
    pub format_cap: usize,
    /// Keep `O` but drop every oracle transition.
    pub omit_oracle: bool,
}

impl Default for AfoOptions {
    fn default() -> Self {
        AfoOptions {
            depth: 8,
            max_tuples: 256,
            seed: 0,
            format_cap: DEFAULT_SEARCH_CAP,
            omit_oracle: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Check {
    pub id: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct AfoReport {
    pub pair: KindPair,
    pub universe: usize,
    pub afo_states: usize,
    pub tuples: usize,
    pub truncated: bool,
    pub checks: Vec<Check>,
}

impl AfoReport {
    pub fn passes(&self) -> bool {
        !self.truncated && self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

impl fmt::Display for AfoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "pair={} universe={} afo_states={} tuples={} truncated={}",
            self.pair, self.universe, self.afo_states, self.tuples, self.truncated
        )?;
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.pass { "pass" } else { "FAIL" }, c.id, c.detail)?;
        }
        Ok(())
    }
}

/// Closed images `f(p1..pn)` over `terms`, all of them or a seeded sample.
pub fn operator_images(sig: &Signature, terms: &[Term], max: usize, seed: u64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    if terms.is_empty() {
        return out;
    }
    for (f, n) in sig.operators() {
        let total = (terms.len() as f64).powi(n as i32);
        if total <= max as f64 {
            let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
            for _ in 0..n {
                tuples = tuples
                    .iter()
                    .flat_map(|tu| {
                        terms.iter().map(move |t| {
                            let mut tu = tu.clone();
                            tu.push(t.clone());
                            tu
                        })
                    })
                    .collect();
            }
            out.extend(tuples.into_iter().map(|args| Term::App(f.clone(), args)));
        } else {
            let mut seen = BTreeSet::new();
            while seen.len() < max {
                let args: Vec<Term> = (0..n).map(|_| terms.choose(&mut rng).unwrap().clone()).collect();
                seen.insert(Term::App(f.clone(), args));
            }
            out.extend(seen);
        }
    }
    out
}

fn pairs_detail(bad: &[(String, String)]) -> String {
    match bad.first() {
        None => "ok".into(),
        Some((a, b)) => format!("{} pair(s), first {a} / {b}", bad.len()),
    }
}

/// Runs the transformation for `pair` on the fragment of `p` generated from
/// `seeds`, and checks the six lifting requirements plus the oracle and
/// abstraction-freeness invariants.
pub fn verify_afo_requirements(p: &Tss, pair: KindPair, seeds: &[Term], opts: &AfoOptions) -> Result<AfoReport> {
    let mut report = AfoReport {
        pair,
        universe: 0,
        afo_states: 0,
        tuples: 0,
        truncated: false,
        checks: Vec::new(),
    };
    let names = ["completeness", "format", "encoding", "coincide", "decoding", "enc-dec"];
    if seeds.is_empty() {
        for id in names {
            report.checks.push(Check {
                id,
                pass: true,
                detail: "vacuous (no closed terms)".into(),
            });
        }
        return Ok(report);
    }
    let gp = generate_lts(p, seeds, opts.depth)?;
    let terms: Vec<Term> = gp.model.universe().terms().to_vec();
    report.universe = terms.len();
    report.truncated |= gp.truncated;
    let mut oracle = OracleSpec::for_kind(pair.sim, &gp.lts, &terms)?;
    if opts.omit_oracle {
        oracle = oracle.without_assignments();
    }
    let gamma = p.patience_args();
    let afo = afo_transform(p, &gamma, &oracle, &terms)?;
    let images = operator_images(&p.signature, &terms, opts.max_tuples, opts.seed);
    report.tuples = images.len();
    let mut afo_seeds: Vec<Term> = terms.iter().map(hat).collect();
    afo_seeds.push(sqrt());
    afo_seeds.extend(images.iter().map(hat_image));

    // 1
    let dec = match dec_lts(&afo, &afo_seeds, opts.depth) {
        Ok(d) => d,
        Err(Error::Incomplete(n, lit)) => {
            report.checks.push(Check {
                id: names[0],
                pass: false,
                detail: format!("{n} ambiguous literal(s), first {lit}"),
            });
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.truncated |= dec.afo.truncated;
    report.afo_states = dec.afo.lts.num_states();
    report.checks.push(Check {
        id: names[0],
        pass: true,
        detail: format!("{} states, no ambiguous literal", report.afo_states),
    });

    // 2
    let fmt_kind = pair.format();
    let base = check_format(p, fmt_kind, None, None, opts.format_cap)?;
    let (pass, detail) = if !base.is_pass() {
        (true, format!("vacuous (input not in {} format)", fmt_kind.name()))
    } else {
        let v = check_format(&afo.tss, fmt_kind, None, None, opts.format_cap)?;
        (v.is_pass(), v.to_string())
    };
    report.checks.push(Check { id: names[1], pass, detail });

    let afo_state = |t: &Term| dec.afo.state(t).ok_or_else(|| Error::Internal(format!("{t} missing from fragment")));

    // 3
    let p_sim = coarsest(&gp.lts, pair.sim);
    let a_sim = coarsest(&dec.afo.lts, pair.sim);
    let mut bad = Vec::new();
    for (i, s) in terms.iter().enumerate() {
        for (j, t) in terms.iter().enumerate().skip(i + 1) {
            if p_sim.same(i, j) && !a_sim.same(afo_state(&hat(s))?, afo_state(&hat(t))?) {
                bad.push((s.to_string(), t.to_string()));
            }
        }
    }
    report.checks.push(Check {
        id: names[2],
        pass: bad.is_empty(),
        detail: pairs_detail(&bad),
    });

    // 4
    let a_approx = coarsest(&dec.afo.lts, pair.approx);
    let n = dec.afo.lts.num_states();
    let mut bad = Vec::new();
    for s in 0..n {
        for t in s + 1..n {
            if a_sim.same(s, t) != a_approx.same(s, t) {
                bad.push((dec.afo.lts.display_state(s), dec.afo.lts.display_state(t)));
            }
        }
    }
    report.checks.push(Check {
        id: names[3],
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} and {} agree on {n} states", pair.sim, pair.approx)
        } else {
            pairs_detail(&bad)
        },
    });

    // 5
    let k_sim = coarsest(&dec.k, pair.sim);
    let mut bad = Vec::new();
    for s in 0..n {
        for t in s + 1..n {
            if a_sim.same(s, t) && !k_sim.same(s, t) {
                bad.push((dec.afo.lts.display_state(s), dec.afo.lts.display_state(t)));
            }
        }
    }
    report.checks.push(Check {
        id: names[4],
        pass: bad.is_empty(),
        detail: pairs_detail(&bad),
    });

    // 6
    let mut bad = Vec::new();
    if !images.is_empty() {
        let gi = generate_lts(p, &images, opts.depth)?;
        report.truncated |= gi.truncated;
        let union = gi.lts.disjoint_union(&dec.k);
        let off = gi.lts.num_states();
        let strong = coarsest(&union, Kind::Strong);
        for t in &images {
            let a = gi.state(t).ok_or_else(|| Error::Internal(format!("{t} missing")))?;
            let b = off + afo_state(&hat_image(t))?;
            if !strong.same(a, b) {
                bad.push((t.to_string(), format!("dec({})", hat_image(t))));
            }
        }
    }
    report.checks.push(Check {
        id: names[5],
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} images strongly bisimilar to their decodings", images.len())
        } else {
            pairs_detail(&bad)
        },
    });

    // invariants of the construction
    let offending = abstraction_violations(&afo.tss, &gamma);
    report.checks.push(Check {
        id: "abstraction-free",
        pass: offending.is_empty(),
        detail: match offending.first() {
            None => format!("{} rules", afo.tss.rules.len()),
            Some(&i) => format!("rule {i}: {}", afo.tss.rules[i]),
        },
    });
    if oracle.kind == OracleKind::Divergence && !opts.omit_oracle {
        let div = Action::new(DIVERGENCE_LABEL);
        let flags = dec.afo.lts.divergent_states();
        let li = dec.afo.lts.label_index(&div);
        let mut bad = Vec::new();
        for (s, &d) in flags.iter().enumerate() {
            let has = li.is_some_and(|l| dec.afo.lts.out(s).iter().any(|&(m, _)| m == l));
            if has != d {
                bad.push((dec.afo.lts.display_state(s), format!("divergent={d}")));
            }
        }
        report.checks.push(Check {
            id: "oracle-divergence",
            pass: bad.is_empty(),
            detail: pairs_detail(&bad),
        });
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct CongruenceReport {
    pub kind: Kind,
    pub op: Symbol,
    pub checked: usize,
    /// Pairs whose arguments were not all equivalent.
    pub skipped: usize,
    pub violations: Vec<String>,
    pub truncated: bool,
}

impl fmt::Display for CongruenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "kind={} op={} checked={} skipped={} violations={} truncated={}",
            self.kind,
            self.op,
            self.checked,
            self.skipped,
            self.violations.len(),
            self.truncated
        )?;
        for v in &self.violations {
            writeln!(f, "violation {v}")?;
        }
        Ok(())
    }
}

/// For each pair of argument tuples that are argument-wise `kind`-equivalent,
/// checks that their `op`-images are `kind`-equivalent.
pub fn congruence_harness(tss: &Tss, kind: Kind, op: &Symbol, pairs: &[(Vec<Term>, Vec<Term>)], depth: usize) -> Result<CongruenceReport> {
    let arity = tss
        .signature
        .arity(op)
        .ok_or_else(|| Error::UndeclaredSymbol(op.name().to_string()))?;
    let mut report = CongruenceReport {
        kind,
        op: op.clone(),
        checked: 0,
        skipped: 0,
        violations: Vec::new(),
        truncated: false,
    };
    if pairs.is_empty() {
        return Ok(report);
    }
    let mut seeds = Vec::new();
    for (ps, qs) in pairs {
        if ps.len() != arity || qs.len() != arity {
            return Err(Error::Arity {
                symbol: op.name().to_string(),
                expected: arity,
                got: ps.len().max(qs.len()),
            });
        }
        seeds.push(Term::App(op.clone(), ps.clone()));
        seeds.push(Term::App(op.clone(), qs.clone()));
        seeds.extend(ps.iter().chain(qs).cloned());
    }
    let g = generate_lts(tss, &seeds, depth)?;
    report.truncated = g.truncated;
    let part = coarsest(&g.lts, kind);
    let st = |t: &Term| g.state(t).ok_or_else(|| Error::Internal(format!("{t} missing")));
    let mut seen = BTreeSet::new();
    for (ps, qs) in pairs {
        let mut equal = true;
        for (a, b) in ps.iter().zip(qs) {
            equal &= part.same(st(a)?, st(b)?);
        }
        if !equal {
            report.skipped += 1;
            continue;
        }
        report.checked += 1;
        let fp = Term::App(op.clone(), ps.clone());
        let fq = Term::App(op.clone(), qs.clone());
        if !part.same(st(&fp)?, st(&fq)?) && seen.insert((fp.clone(), fq.clone())) {
            report.violations.push(format!("{fp} !{kind} {fq}"));
        }
    }
    Ok(report)
}

/// `n` random argument-tuple pairs over `pool` in which each `q_i` is drawn
/// from the `kind`-class of `p_i` within the generated fragment.
pub fn sample_equivalent_pairs(
    tss: &Tss,
    kind: Kind,
    op: &Symbol,
    pool: &[Term],
    n: usize,
    seed: u64,
    depth: usize,
) -> Result<Vec<(Vec<Term>, Vec<Term>)>> {
    let arity = tss
        .signature
        .arity(op)
        .ok_or_else(|| Error::UndeclaredSymbol(op.name().to_string()))?;
    if pool.is_empty() {
        return Ok(Vec::new());
    }
    let g = generate_lts(tss, pool, depth)?;
    let part = coarsest(&g.lts, kind);
    let idx: Vec<usize> = pool
        .iter()
        .map(|t| g.state(t).ok_or_else(|| Error::Internal(format!("{t} missing"))))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut ps = Vec::new();
        let mut qs = Vec::new();
        for _ in 0..arity {
            let i = rng.gen_range(0..pool.len());
            let mates: Vec<usize> = (0..pool.len()).filter(|&j| part.same(idx[i], idx[j])).collect();
            let j = *mates.choose(&mut rng).expect("a term is its own mate");
            ps.push(pool[i].clone());
            qs.push(pool[j].clone());
        }
        out.push((ps, qs));
    }
    Ok(out)
}
