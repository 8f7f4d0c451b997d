use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sosforge::afo::{self, AfoOptions, KindPair};
use sosforge::decompose::{verify_decomposition_theorem, Decomposer, DEFAULT_CYCLE_GUARD, DEFAULT_NEGATION_CAP};
use sosforge::equiv::{coarsest, Kind};
use sosforge::format::{check_format, check_with, FormatKind, FormatVerdict, DEFAULT_SEARCH_CAP};
use sosforge::modal::{distinguish, sat_set, Class};
use sosforge::proof::generate_lts;
use sosforge::ruloid::{ruloids, build_p_plus, DEFAULT_DEPTH};
use sosforge::syntax::{emit_aut, emit_formula, emit_tss, parse_aut, parse_formula, parse_formulas, parse_term, parse_tss, TssDocument};
use sosforge::{Action, ArgPredicate, Error, Lts, Term, Tss};

#[derive(Parser)]
#[command(name = "sosforge", version, about = "Congruence formats, equivalences, modal decomposition and oracle transformation for SOS")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Ob,
    Orb,
    Obs,
    Orbs,
}

impl From<ClassArg> for Class {
    fn from(c: ClassArg) -> Class {
        match c {
            ClassArg::Ob => Class::Ob,
            ClassArg::Orb => Class::Orb,
            ClassArg::Obs => Class::Obs,
            ClassArg::Orbs => Class::Orbs,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a .tss, .aut or .hml file and print it back in canonical form.
    Parse { file: PathBuf },
    /// Check a TSS against a congruence format.
    CheckFormat {
        file: PathBuf,
        #[arg(long, default_value = "rsbb")]
        format: String,
        /// Search for the predicates instead of using the declared ones.
        #[arg(long)]
        search: bool,
        /// ℵ as `f/1,g/2`; overrides the file.
        #[arg(long)]
        aleph: Option<String>,
        /// Λ as `f/1,g/2`; overrides the file.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        cap: usize,
    },
    /// Generate the LTS of a TSS from closed terms and print it as .aut.
    Lts {
        file: PathBuf,
        /// Closed seed term; repeatable.
        #[arg(short = 't', long = "term", required = true)]
        terms: Vec<String>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Decide an equivalence: dump the partition, or query a pair of states.
    Equiv {
        file: PathBuf,
        #[arg(long)]
        rel: Kind,
        /// Seed terms when the input is a .tss.
        #[arg(short = 't', long = "term")]
        terms: Vec<String>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Two states, by index or name.
        states: Vec<String>,
    },
    /// Model-check each formula of a .hml file on every state.
    Check {
        file: PathBuf,
        formulas: PathBuf,
        #[arg(short = 't', long = "term")]
        terms: Vec<String>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Print a formula of the class telling two states apart.
    Distinguish {
        file: PathBuf,
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(short = 't', long = "term")]
        terms: Vec<String>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        s: String,
        u: String,
    },
    /// Print the ruloids of an open term for one action.
    Ruloids {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        action: String,
        #[arg(long)]
        negative: bool,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
    },
    /// Decompose a formula through an open term.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        term: String,
        #[arg(long)]
        formula: String,
        /// Γ as `f/1,g/2`; defaults to the arguments with patience rules.
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_NEGATION_CAP)]
        negation_cap: usize,
        #[arg(long, default_value_t = DEFAULT_CYCLE_GUARD)]
        cycle_guard: usize,
        /// Check the result on every substitution over the --universe terms.
        #[arg(long)]
        verify: bool,
        #[arg(short = 'u', long = "universe")]
        universe: Vec<String>,
    },
    /// Apply the oracle transformation and print or write the result.
    Afo {
        file: PathBuf,
        #[arg(short = 't', long = "term")]
        terms: Vec<String>,
        #[arg(long, default_value = "wdb,sb")]
        pair: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long)]
        omit_oracle: bool,
        /// Directory receiving afo.tss, g.aut and h.aut.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the lifting requirements on the generated fragment.
    VerifyAfo {
        file: PathBuf,
        #[arg(short = 't', long = "term")]
        terms: Vec<String>,
        /// One pair such as `wdb,sb`; all four when omitted.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 256)]
        max_tuples: usize,
        #[arg(long)]
        omit_oracle: bool,
    },
    /// Check that an operator preserves an equivalence on sampled argument pairs.
    Congruence {
        file: PathBuf,
        #[arg(long)]
        kind: Kind,
        #[arg(long)]
        op: String,
        /// Closed terms to draw arguments from.
        #[arg(short = 't', long = "term", required = true)]
        terms: Vec<String>,
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
}

enum Failure {
    Negative,
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) => Failure::Internal(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn color() -> bool {
    std::env::var("SOSFORGE_COLOR").is_ok_and(|v| matches!(v.as_str(), "1" | "always" | "true" | "yes"))
}

fn verdict(ok: bool) -> String {
    let word = if ok { "pass" } else { "FAIL" };
    if color() {
        format!("\x1b[{}m{word}\x1b[0m", if ok { 32 } else { 31 })
    } else {
        word.to_string()
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_tss(path: &Path) -> Result<TssDocument, Failure> {
    Ok(parse_tss(&read(path)?)?)
}

fn terms(t: &Tss, srcs: &[String]) -> Result<Vec<Term>, Failure> {
    srcs.iter().map(|s| parse_term(s, &t.signature).map_err(Failure::from)).collect()
}

fn predicate(t: &Tss, src: &str) -> Result<ArgPredicate, Failure> {
    let mut p = ArgPredicate::default();
    for item in src.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (f, i) = item
            .rsplit_once('/')
            .ok_or_else(|| Failure::Input(format!("expected `name/index`, got `{item}`")))?;
        let sym = t
            .signature
            .lookup(f)
            .ok_or_else(|| Failure::Input(format!("undeclared symbol `{f}`")))?;
        let i: usize = i.parse().map_err(|_| Failure::Input(format!("bad index in `{item}`")))?;
        p.insert(sym, i);
    }
    Ok(p)
}

/// An LTS from a .aut file, or generated from a .tss and seed terms.
fn load_lts(path: &Path, seeds: &[String], depth: usize) -> Result<Lts, Failure> {
    let src = read(path)?;
    if path.extension().is_some_and(|e| e == "aut") {
        return Ok(parse_aut(&src)?);
    }
    let doc = parse_tss(&src)?;
    let mut ts = terms(&doc.tss, seeds)?;
    if ts.is_empty() {
        ts = doc.tss.closed_constants();
    }
    let g = generate_lts(&doc.tss, &ts, depth)?;
    if g.truncated {
        eprintln!("warning: universe truncated at depth {depth}");
    }
    Ok(g.lts)
}

fn state(l: &Lts, s: &str) -> Result<usize, Failure> {
    if let Some(i) = l.find_state(s) {
        return Ok(i);
    }
    let i: usize = s.parse().map_err(|_| Failure::Input(format!("unknown state `{s}`")))?;
    if i >= l.num_states() {
        return Err(Error::StateOutOfRange(i).into());
    }
    Ok(i)
}

fn pairs(spec: Option<&str>) -> Result<Vec<KindPair>, Failure> {
    match spec {
        None => Ok(KindPair::ALL.to_vec()),
        Some(s) => Ok(vec![KindPair::parse(s)?]),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.cmd {
        Cmd::Parse { file } => {
            let src = read(&file)?;
            match file.extension().and_then(|e| e.to_str()) {
                Some("aut") => print!("{}", emit_aut(&parse_aut(&src)?)),
                Some("hml") => {
                    for f in parse_formulas(&src)? {
                        println!("{}", emit_formula(&f));
                    }
                }
                _ => print!("{}", emit_tss(&parse_tss(&src)?)),
            }
            Ok(())
        }
        Cmd::CheckFormat {
            file,
            format,
            search,
            aleph,
            lambda,
            cap,
        } => {
            let t = load_tss(&file)?.tss;
            let kind = FormatKind::parse(&format).ok_or_else(|| Failure::Input(format!("unknown format `{format}`")))?;
            let aleph = match aleph {
                Some(s) => Some(predicate(&t, &s)?),
                None if !search => t.aleph.clone(),
                None => None,
            };
            let lambda = match lambda {
                Some(s) => Some(predicate(&t, &s)?),
                None if !search => t.lambda.clone(),
                None => None,
            };
            let v = check_format(&t, kind, aleph.as_ref(), lambda.as_ref(), cap)?;
            println!("format={}", kind.name());
            println!("{v}");
            let witness = match &v {
                FormatVerdict::Pass { aleph, lambda } => Some((aleph.clone(), lambda.clone())),
                FormatVerdict::Fail { closest, .. } => closest.clone(),
                FormatVerdict::Aborted { .. } => None,
            };
            if let Some((a, l)) = witness {
                let vs = check_with(&t, kind, &a, &l)?;
                for (i, r) in t.rules.iter().enumerate() {
                    let mine: Vec<String> = vs.iter().filter(|x| x.rule == Some(i)).map(|x| x.condition.to_string()).collect();
                    let status = if mine.is_empty() { "ok".to_string() } else { format!("violates={}", mine.join(",")) };
                    println!("rule={i} status={status} text={r}");
                }
            }
            if v.is_pass() {
                Ok(())
            } else {
                Err(Failure::Negative)
            }
        }
        Cmd::Lts { file, terms: ts, depth } => {
            let t = load_tss(&file)?.tss;
            let seeds = terms(&t, &ts)?;
            let g = generate_lts(&t, &seeds, depth)?;
            print!("{}", emit_aut(&g.lts));
            for s in 0..g.lts.num_states() {
                println!("# {s} {}", g.lts.display_state(s));
            }
            if g.truncated {
                eprintln!("warning: universe truncated at depth {depth}");
            }
            Ok(())
        }
        Cmd::Equiv {
            file,
            rel,
            terms: ts,
            depth,
            states,
        } => {
            let l = load_lts(&file, &ts, depth)?;
            let part = coarsest(&l, rel);
            match states.as_slice() {
                [] => {
                    print!("{}", part.dump(&l));
                    Ok(())
                }
                [a, b] => {
                    let (a, b) = (state(&l, a)?, state(&l, b)?);
                    let same = part.same(a, b);
                    println!("{} {} {}", l.display_state(a), if same { "~" } else { "!~" }, l.display_state(b));
                    if same {
                        Ok(())
                    } else {
                        Err(Failure::Negative)
                    }
                }
                _ => Err(Failure::Input("give no states or exactly two".into())),
            }
        }
        Cmd::Check {
            file,
            formulas,
            terms: ts,
            depth,
        } => {
            let l = load_lts(&file, &ts, depth)?;
            for f in parse_formulas(&read(&formulas)?)? {
                let sat = sat_set(&l, &f);
                let holds: Vec<String> = (0..l.num_states()).filter(|&s| sat[s]).map(|s| l.display_state(s)).collect();
                println!("{}\t{}", emit_formula(&f), holds.join(" "));
            }
            Ok(())
        }
        Cmd::Distinguish {
            file,
            class,
            terms: ts,
            depth,
            s,
            u,
        } => {
            let l = load_lts(&file, &ts, depth)?;
            let (a, b) = (state(&l, &s)?, state(&l, &u)?);
            match distinguish(&l, a, b, class.into())? {
                Some(f) => {
                    println!("{}", emit_formula(&f));
                    Ok(())
                }
                None => {
                    println!("equivalent");
                    Err(Failure::Negative)
                }
            }
        }
        Cmd::Ruloids {
            file,
            term,
            action,
            negative,
            depth,
        } => {
            let t = load_tss(&file)?.tss;
            let open = parse_term(&term, &t.signature)?;
            let pplus = build_p_plus(&t)?;
            let set = ruloids(&pplus, &open, &Action::new(&action), !negative, depth)?;
            for r in &set.rules {
                println!("{r}");
            }
            if set.rules.is_empty() && t.rules.iter().any(|r| !r.classify().lookahead_free) {
                eprintln!("warning: rules with lookahead yield no ruloids");
            }
            if !set.complete {
                eprintln!("warning: depth {depth} reached, set may be incomplete");
            }
            Ok(())
        }
        Cmd::Decompose {
            file,
            term,
            formula,
            gamma,
            depth,
            negation_cap,
            cycle_guard,
            verify,
            universe,
        } => {
            let t = load_tss(&file)?.tss;
            let open = parse_term(&term, &t.signature)?;
            let phi = parse_formula(&formula)?;
            let gamma = match gamma {
                Some(s) => predicate(&t, &s)?,
                None => t.patience_args(),
            };
            let mut d = Decomposer::new(&t, &gamma, depth)?;
            d.negation_cap = negation_cap;
            d.cycle_guard = cycle_guard;
            let ms = d.decompose(&open, &phi)?;
            for (i, m) in ms.iter().enumerate() {
                println!("# mapping {}", i + 1);
                println!("{m}");
            }
            if verify {
                let closed = terms(&t, &universe)?;
                if closed.is_empty() {
                    return Err(Failure::Input("--verify needs --universe terms".into()));
                }
                let rep = verify_decomposition_theorem(&t, &open, &phi, &gamma, &closed, depth)?;
                println!(
                    "verify {} substitutions={} counterexamples={} truncated={}",
                    verdict(rep.holds()),
                    rep.substitutions,
                    rep.counterexamples.len(),
                    rep.truncated
                );
                for c in &rep.counterexamples {
                    println!("counterexample {c}");
                }
                if !rep.holds() {
                    return Err(Failure::Negative);
                }
            }
            Ok(())
        }
        Cmd::Afo {
            file,
            terms: ts,
            pair,
            depth,
            omit_oracle,
            out,
        } => {
            let doc = load_tss(&file)?;
            let t = &doc.tss;
            let pair = KindPair::parse(&pair)?;
            let seeds = terms(t, &ts)?;
            let universe: Vec<Term> = if seeds.is_empty() {
                Vec::new()
            } else {
                generate_lts(t, &seeds, depth)?.model.universe().terms().to_vec()
            };
            let g = if universe.is_empty() { None } else { Some(generate_lts(t, &universe, depth)?) };
            let mut oracle = match &g {
                Some(g) => afo::OracleSpec::for_kind(pair.sim, &g.lts, &universe)?,
                None => afo::OracleSpec::for_kind(pair.sim, &Lts::new(1, 0, Vec::<(usize, Action, usize)>::new())?, &[])?,
            };
            if omit_oracle {
                oracle = oracle.without_assignments();
            }
            let res = afo::afo_transform(t, &t.patience_args(), &oracle, &universe)?;
            let text = emit_tss(&TssDocument {
                rule_names: vec![None; res.tss.rules.len()],
                tss: res.tss.clone(),
            });
            match out {
                None => print!("{text}"),
                Some(dir) => {
                    let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", dir.display()));
                    fs::create_dir_all(&dir).map_err(io)?;
                    fs::write(dir.join("afo.tss"), text).map_err(io)?;
                    fs::write(dir.join("g.aut"), emit_aut(&res.g)).map_err(io)?;
                    fs::write(dir.join("h.aut"), emit_aut(&res.h)).map_err(io)?;
                    println!("wrote afo.tss, g.aut, h.aut to {}", dir.display());
                }
            }
            Ok(())
        }
        Cmd::VerifyAfo {
            file,
            terms: ts,
            pair,
            depth,
            max_tuples,
            omit_oracle,
        } => {
            let t = load_tss(&file)?.tss;
            let seeds = terms(&t, &ts)?;
            let opts = AfoOptions {
                depth,
                max_tuples,
                seed: cli.seed,
                omit_oracle,
                ..Default::default()
            };
            let mut all = true;
            for p in pairs(pair.as_deref())? {
                let rep = afo::verify_afo_requirements(&t, p, &seeds, &opts)?;
                println!("{} pair={}", verdict(rep.passes()), p);
                for line in rep.to_string().lines() {
                    println!("  {line}");
                }
                all &= rep.passes();
            }
            if all {
                Ok(())
            } else {
                Err(Failure::Negative)
            }
        }
        Cmd::Congruence {
            file,
            kind,
            op,
            terms: ts,
            pairs: n,
            depth,
        } => {
            let t = load_tss(&file)?.tss;
            let f = t
                .signature
                .lookup(&op)
                .ok_or_else(|| Failure::Input(format!("undeclared symbol `{op}`")))?;
            let pool = terms(&t, &ts)?;
            let sample = afo::sample_equivalent_pairs(&t, kind, &f, &pool, n, cli.seed, depth)?;
            let rep = afo::congruence_harness(&t, kind, &f, &sample, depth)?;
            println!("{} {}", verdict(rep.violations.is_empty()), rep.to_string().trim_end());
            if rep.violations.is_empty() {
                Ok(())
            } else {
                Err(Failure::Negative)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
