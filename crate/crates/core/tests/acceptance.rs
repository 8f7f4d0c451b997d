//! End-to-end acceptance suite. Prints one line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sosforge::afo::{afo_transform, congruence_harness, sample_equivalent_pairs, verify_afo_requirements, AfoOptions, KindPair, OracleKind, OracleSpec};
use sosforge::decompose::{verify_class_preservation, verify_decomposition_theorem};
use sosforge::equiv::{coarsest, equivalent, inclusion_chain_check, oracle_coarsest, Kind};
use sosforge::format::{check_format, FormatKind, FormatVerdict, DEFAULT_SEARCH_CAP};
use sosforge::modal::{class_membership, distinguish, satisfies, Class, Formula};
use sosforge::proof::generate_lts;
use sosforge::ruloid::{check_ruloid_safety, DEFAULT_DEPTH};
use sosforge::syntax::{parse_formulas, parse_term, parse_tss};
use sosforge::{Action, ArgPredicate, Lts, Rule, Symbol, Term, Tss, Var};

const PRIORITY: &str = include_str!("../fixtures/priority.tss");
const PRIORITY_NO_TAU: &str = include_str!("../fixtures/priority_no_tau.tss");
const SEQUENCING: &str = include_str!("../fixtures/sequencing.tss");
const NEGATIVE_PATIENCE: &str = include_str!("../fixtures/negative_patience.tss");
const LOOKAHEAD: &str = include_str!("../fixtures/lookahead.tss");
const G_EXAMPLE: &str = include_str!("../fixtures/g_example.tss");
const BATTERY: &str = include_str!("../fixtures/battery.hml");

const SEED: u64 = 20_240_611;
const RANDOM_LTS: usize = 500;

type Outcome = Result<String, String>;

fn tss(src: &str) -> Tss {
    parse_tss(src).expect("fixture parses").tss
}

fn term(t: &Tss, s: &str) -> Term {
    parse_term(s, &t.signature).expect("fixture term parses")
}

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))
}

fn eq(g: &sosforge::proof::Generated, kind: Kind, a: &Term, b: &Term) -> bool {
    equivalent(&g.lts, kind, g.state(a).unwrap(), g.state(b).unwrap()).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let t = tss(SEQUENCING);
    let names = ["p", "q", "r", "p;r", "q;r", "p0", "q0", "p0;r", "q0;r"];
    let seeds: Vec<Term> = names.iter().map(|s| term(&t, s)).collect();
    let g = generate_lts(&t, &seeds, 6).map_err(|e| e.to_string())?;
    let [p, q, r, pr, qr, p0, q0, p0r, q0r] = seeds.as_slice() else { unreachable!() };
    let checks = [
        ("p =b q", eq(&g, Kind::B, p, q), true),
        ("p =sb q", eq(&g, Kind::Sb, p, q), false),
        ("p;r = p", eq(&g, Kind::Strong, pr, p), true),
        ("q;r = r", eq(&g, Kind::Strong, qr, r), true),
        ("p;r =b q;r", eq(&g, Kind::B, pr, qr), false),
        ("p0 =rb q0", eq(&g, Kind::Rb, p0, q0), true),
        ("p0;r =rb q0;r", eq(&g, Kind::Rb, p0r, q0r), false),
    ];
    for (what, got, want) in checks {
        ensure(got == want, format!("{what}: got {got}, want {want}"))?;
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{} verdicts match", checks.len()))
}

fn violated_conditions(v: &FormatVerdict) -> BTreeSet<&'static str> {
    match v {
        FormatVerdict::Fail { violations, .. } => violations.iter().map(|x| x.condition).collect(),
        _ => BTreeSet::new(),
    }
}

fn criterion_2() -> Outcome {
    let t = tss(PRIORITY);
    let theta = t.signature.lookup("Theta").unwrap();
    match check_format(&t, FormatKind::Rsbb, None, None, DEFAULT_SEARCH_CAP).map_err(|e| e.to_string())? {
        FormatVerdict::Pass { aleph, lambda } => {
            ensure(aleph.contains(&theta, 1), format!("aleph={aleph} misses (Theta,1)"))?;
            ensure(lambda == ArgPredicate::universal(&t.signature), format!("lambda={lambda} not universal"))?;
        }
        v => return Err(format!("rsbb: {v}")),
    }
    let rbb = check_format(&t, FormatKind::Rbb, None, None, DEFAULT_SEARCH_CAP).map_err(|e| e.to_string())?;
    ensure(violated_conditions(&rbb).contains("4"), format!("rbb: {rbb}"))?;
    let weak = tss(PRIORITY_NO_TAU);
    let v = check_format(&weak, FormatKind::Rsbb, None, None, DEFAULT_SEARCH_CAP).map_err(|e| e.to_string())?;
    ensure(violated_conditions(&v).contains("4a"), format!("rsbb without a<tau: {v}"))?;
    Ok("rsbb pass, rbb fails on 4, rsbb without a<tau fails on 4a".into())
}

fn criterion_3() -> Outcome {
    let t = tss(NEGATIVE_PATIENCE);
    let [p, p1, q] = ["p", "p1", "q"].map(|s| term(&t, s));
    let fpq = term(&t, "f(p,q)");
    let fp1q = term(&t, "f(p1,q)");
    let g = generate_lts(&t, &[fpq.clone(), fp1q.clone()], 6).map_err(|e| e.to_string())?;
    ensure(eq(&g, Kind::Sb, &p, &p1), "p and p1 not sb-equivalent")?;
    ensure(!eq(&g, Kind::Sb, &fpq, &fp1q), "f(p,q) and f(p1,q) sb-equivalent")?;
    let f = t.signature.lookup("f").unwrap();
    let rep = congruence_harness(&t, Kind::Sb, &f, &[(vec![p, q.clone()], vec![p1, q])], 6).map_err(|e| e.to_string())?;
    ensure(rep.violations == vec!["f(p,q) !sb f(p1,q)".to_string()], format!("harness: {rep}"))?;
    Ok("harness reports f(p,q) !sb f(p1,q)".into())
}

fn random_lts(rng: &mut ChaCha8Rng) -> Lts {
    let n = rng.gen_range(1..=6);
    let k = rng.gen_range(1..=3);
    let labels: Vec<Action> = ["tau", "a", "b"][..k].iter().map(|l| Action::new(l)).collect();
    let density = rng.gen_range(0.1..0.45);
    Lts::random(rng, n, &labels, density)
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..RANDOM_LTS {
        let l = random_lts(&mut rng);
        for kind in Kind::ALL {
            let fast = coarsest(&l, kind);
            let slow = oracle_coarsest(&l, kind).map_err(|e| e.to_string())?;
            ensure(fast.blocks() == slow.blocks(), format!("instance {i}, {kind}: {:?} vs {:?}", fast.blocks(), slow.blocks()))?;
        }
        inclusion_chain_check(&l).map_err(|e| format!("instance {i}: {e}"))?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{RANDOM_LTS} systems x 9 kinds agree, chain holds"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let pairs = [(Kind::B, Class::Ob), (Kind::Rb, Class::Orb), (Kind::Sb, Class::Obs), (Kind::Rsb, Class::Orbs)];
    let mut witnesses = 0;
    for i in 0..RANDOM_LTS {
        let l = random_lts(&mut rng);
        for (kind, class) in pairs {
            let part = coarsest(&l, kind);
            for s in 0..l.num_states() {
                for t in s + 1..l.num_states() {
                    let w = distinguish(&l, s, t, class).map_err(|e| e.to_string())?;
                    match (part.same(s, t), w) {
                        (true, None) => {}
                        (false, Some(phi)) => {
                            witnesses += 1;
                            ensure(class_membership(&phi, class), format!("instance {i}: {phi} not in {class}"))?;
                            ensure(
                                satisfies(&l, s, &phi) != satisfies(&l, t, &phi),
                                format!("instance {i}: {phi} does not separate {s},{t}"),
                            )?;
                        }
                        (same, w) => return Err(format!("instance {i}, {kind}, states {s},{t}: equivalent={same}, witness={w:?}")),
                    }
                }
            }
        }
    }
    Ok(format!("{witnesses} witnesses checked"))
}

/// Open terms with at most `max_ops` operator occurrences, every variable
/// pattern included.
fn open_terms(t: &Tss, max_ops: usize) -> Vec<Term> {
    fn shapes(ops: &[(Symbol, usize)], budget: usize) -> Vec<(Term, usize)> {
        let mut out = vec![(Term::var("_"), 0)];
        for (f, n) in ops {
            if budget == 0 {
                continue;
            }
            let mut partial: Vec<(Vec<Term>, usize)> = vec![(Vec::new(), 1)];
            for _ in 0..*n {
                let mut next = Vec::new();
                for (args, used) in &partial {
                    for (s, u) in shapes(ops, budget - used) {
                        if used + u <= budget {
                            let mut a = args.clone();
                            a.push(s);
                            next.push((a, used + u));
                        }
                    }
                }
                partial = next;
            }
            out.extend(partial.into_iter().map(|(args, used)| (Term::App(f.clone(), args), used)));
        }
        out
    }
    fn fill(t: &Term, names: &mut std::slice::Iter<'_, usize>) -> Term {
        match t {
            Term::Var(_) => Term::var(&format!("x{}", names.next().unwrap())),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| fill(a, names)).collect()),
        }
    }
    let ops: Vec<(Symbol, usize)> = t.signature.operators().map(|(f, n)| (f.clone(), n)).collect();
    let mut out = BTreeSet::new();
    for (shape, _) in shapes(&ops, max_ops) {
        let slots = shape.positions().iter().filter(|p| shape.subterm_at(p).is_some_and(Term::is_var)).count();
        // restricted growth strings enumerate the variable patterns
        let mut rgs: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..slots {
            rgs = rgs
                .into_iter()
                .flat_map(|v| {
                    let top = v.iter().copied().max().map_or(0, |m| m + 1);
                    (0..=top).map(move |k| {
                        let mut w = v.clone();
                        w.push(k);
                        w
                    })
                })
                .collect();
        }
        for pattern in rgs {
            out.insert(fill(&shape, &mut pattern.iter()));
        }
    }
    out.into_iter().collect()
}

struct Corpus {
    name: &'static str,
    tss: Tss,
    universe: Vec<Term>,
}

fn corpus() -> Vec<Corpus> {
    let prio = tss(PRIORITY);
    let seq = tss(SEQUENCING);
    vec![
        Corpus {
            name: "priority",
            universe: ["s", "s1", "s2", "0"].iter().map(|c| term(&prio, c)).collect(),
            tss: prio,
        },
        Corpus {
            name: "sequencing",
            universe: ["p", "q", "r", "0"].iter().map(|c| term(&seq, c)).collect(),
            tss: seq,
        },
    ]
}

fn battery() -> Vec<Formula> {
    parse_formulas(BATTERY).expect("battery parses")
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let formulas = battery();
    ensure(formulas.len() == 20, format!("battery has {} formulas", formulas.len()))?;
    let mut checked = 0;
    for c in corpus() {
        let gamma = c.tss.patience_args();
        for t in open_terms(&c.tss, 2) {
            for phi in &formulas {
                let rep = verify_decomposition_theorem(&c.tss, &t, phi, &gamma, &c.universe, 6).map_err(|e| format!("{}: {t} / {phi}: {e}", c.name))?;
                ensure(!rep.truncated, format!("{}: {t} / {phi}: fragment truncated", c.name))?;
                ensure(
                    rep.counterexamples.is_empty(),
                    format!("{}: {t} / {phi}: {}", c.name, rep.counterexamples.join("; ")),
                )?;
                checked += rep.substitutions;
            }
        }
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{checked} instances, zero counterexamples"))
}

fn witness(t: &Tss) -> Result<(ArgPredicate, ArgPredicate), String> {
    match check_format(t, FormatKind::Rsbb, None, None, DEFAULT_SEARCH_CAP).map_err(|e| e.to_string())? {
        FormatVerdict::Pass { aleph, lambda } => Ok((aleph, lambda)),
        v => Err(format!("no rsbb witness: {v}")),
    }
}

fn criterion_7() -> Outcome {
    let formulas: Vec<Formula> = battery()
        .into_iter()
        .filter(|f| class_membership(f, Class::Obs) || class_membership(f, Class::Orbs))
        .collect();
    let mut checked = 0;
    for c in corpus() {
        let (aleph, lambda) = witness(&c.tss)?;
        for t in open_terms(&c.tss, 2) {
            for phi in &formulas {
                let rep = verify_class_preservation(&c.tss, &aleph, &lambda, &t, phi).map_err(|e| format!("{}: {t} / {phi}: {e}", c.name))?;
                ensure(rep.violations.is_empty(), format!("{}: {t} / {phi}: {}", c.name, rep.violations.join("; ")))?;
                checked += rep.checked;
            }
        }
    }
    Ok(format!("{} class formulas, {checked} obligations, zero violations", formulas.len()))
}

fn criterion_8() -> Outcome {
    let mut checked = 0;
    for c in corpus() {
        let (aleph, lambda) = witness(&c.tss)?;
        let terms = open_terms(&c.tss, 2);
        let rep = check_ruloid_safety(&c.tss, &aleph, &lambda, &terms, DEFAULT_DEPTH).map_err(|e| e.to_string())?;
        ensure(rep.complete, format!("{}: ruloid enumeration incomplete", c.name))?;
        if let Some((r, v)) = rep.violations.first() {
            return Err(format!("{}: {r}: {v}", c.name));
        }
        checked += rep.checked;
    }
    Ok(format!("{checked} ruloids safe"))
}

fn criterion_9() -> Outcome {
    let seq = tss(SEQUENCING);
    let prio = tss(PRIORITY);
    let fixtures = [
        ("sequencing", &seq, vec!["p;r", "q;r", "p0", "q0"]),
        ("priority", &prio, vec!["Theta(s)", "s"]),
    ];
    let mut lines = 0;
    for (name, t, seeds) in fixtures {
        let seeds: Vec<Term> = seeds.iter().map(|s| term(t, s)).collect();
        for pair in KindPair::ALL {
            let rep = verify_afo_requirements(t, pair, &seeds, &AfoOptions::default()).map_err(|e| format!("{name} {pair}: {e}"))?;
            ensure(rep.universe <= 12, format!("{name}: universe of {} terms", rep.universe))?;
            ensure(rep.passes(), format!("{name} {pair}:\n{rep}"))?;
            ensure(rep.check("coincide").is_some_and(|c| c.pass), format!("{name} {pair}: coincide unchecked"))?;
            lines += rep.checks.len();
        }
    }
    let g = tss(G_EXAMPLE);
    let oracle = OracleSpec {
        kind: OracleKind::Divergence,
        labels: [Action::new("@w")].into_iter().collect(),
        zeta: Default::default(),
    };
    let res = afo_transform(&g, &g.gamma().unwrap(), &oracle, &[]).map_err(|e| e.to_string())?;
    let expected = tss(G_EXPECTED);
    let canon = |rs: &[Rule]| -> BTreeSet<String> { rs.iter().map(|r| r.canonical(&BTreeSet::<Var>::new()).to_string()).collect() };
    ensure(res.tss.rules.len() == 9, format!("g-example gives {} rules", res.tss.rules.len()))?;
    ensure(canon(&res.tss.rules) == canon(&expected.rules), "g-example rules differ from the expected nine")?;
    Ok(format!("{lines} requirement checks pass, g-example matches 9 rules"))
}

const G_EXPECTED: &str = "actions a, iota, @w
op g : 3
x1 -tau-> y |- g(x1,x2,x3) -tau-> g(y,x2,x3)
x1 -iota-> y |- g(x1,x2,x3) -iota-> g(y,x2,x3)
x1 -a-> y1, x1 -tau-> y2, x3 -tau-> y3 |- g(x1,x2,x3) -iota-> x2
x1 -a-> y1, x1 -iota-> y2, x3 -iota-> y3 |- g(x1,x2,x3) -iota-> x2
x1 -a-> y1, x1 -iota-> y2, x3 -tau-> y3 |- g(x1,x2,x3) -iota-> x2
x1 -a-> y1, x1 -tau-> y2, x3 -iota-> y3 |- g(x1,x2,x3) -iota-> x2
x2 -tau-> y, x3 -tau-/>, x3 -iota-/> |- g(x1,x2,x3) -a-> y
x2 -iota-> y, x3 -tau-/>, x3 -iota-/> |- g(x1,x2,x3) -a-> y
x1 -@w-> y |- g(x1,x2,x3) -@w-> y
";

fn criterion_10() -> Outcome {
    let prio = tss(PRIORITY);
    let seq = tss(SEQUENCING);
    let unrooted = [Kind::Sb, Kind::Wdb, Kind::Db];
    let rooted = [Kind::Rsb, Kind::Rwdb, Kind::Rdb];
    let cases: [(&str, &Tss, &str, Vec<&str>, Vec<Kind>); 2] = [
        ("priority", &prio, "Theta", vec!["s", "s1", "s2", "0", "Theta(s)", "Theta(s1)"], unrooted.iter().chain(&rooted).copied().collect()),
        ("sequencing", &seq, ";", vec!["p", "q", "r", "0", "p0", "q0", "p;r", "q;r", "r;q"], rooted.to_vec()),
    ];
    let mut checked = 0;
    for (name, t, op, pool, kinds) in cases {
        // the format the kinds rely on must hold
        let fmt = if kinds.contains(&Kind::Sb) { FormatKind::Sbb } else { FormatKind::Rsbb };
        ensure(check_format(t, fmt, None, None, DEFAULT_SEARCH_CAP).map_err(|e| e.to_string())?.is_pass(), format!("{name} not in {}", fmt.name()))?;
        let f = t.signature.lookup(op).unwrap();
        let pool: Vec<Term> = pool.iter().map(|s| term(t, s)).collect();
        for (i, kind) in kinds.into_iter().enumerate() {
            let pairs = sample_equivalent_pairs(t, kind, &f, &pool, 200, SEED + i as u64, 6).map_err(|e| e.to_string())?;
            let rep = congruence_harness(t, kind, &f, &pairs, 6).map_err(|e| e.to_string())?;
            ensure(rep.violations.is_empty(), format!("{name}: {rep}"))?;
            checked += rep.checked;
        }
    }

    let neg = tss(NEGATIVE_PATIENCE);
    let f = neg.signature.lookup("f").unwrap();
    let pool: Vec<Term> = ["p", "p1", "p2", "q", "q1"].iter().map(|s| term(&neg, s)).collect();
    let pairs = sample_equivalent_pairs(&neg, Kind::Sb, &f, &pool, 200, SEED, 6).map_err(|e| e.to_string())?;
    let rep = congruence_harness(&neg, Kind::Sb, &f, &pairs, 6).map_err(|e| e.to_string())?;
    ensure(rep.violations.iter().any(|v| v == "f(p,q) !sb f(p1,q)"), format!("negative patience: {rep}"))?;
    let known_neg = rep.violations.len();

    let look = tss(LOOKAHEAD);
    let f = look.signature.lookup("f").unwrap();
    let [p, q] = ["p", "q"].map(|s| term(&look, s));
    let rep = congruence_harness(&look, Kind::Rb, &f, &[(vec![p], vec![q])], 6).map_err(|e| e.to_string())?;
    ensure(rep.violations == vec!["f(p) !rb f(q)".to_string()], format!("lookahead: {rep}"))?;
    Ok(format!("{checked} in-format pairs clean; {known_neg} negative-patience and 1 lookahead violation reproduced"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("sequencing counterexamples", criterion_1),
        ("priority format verdicts", criterion_2),
        ("negative-patience counterexample", criterion_3),
        ("partition algorithms vs oracle", criterion_4),
        ("modal characterisation", criterion_5),
        ("decomposition theorem", criterion_6),
        ("class preservation", criterion_7),
        ("ruloid safety", criterion_8),
        ("oracle transformation pipeline", criterion_9),
        ("congruence harness", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({detail}; {took:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({why}; {took:.2}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
