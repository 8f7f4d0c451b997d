//! Decomposes <a>T through sequential composition and checks the result
//! against every closed instance over a small universe.

use sosforge::decompose::{decompose, verify_decomposition_theorem};
use sosforge::modal::Formula;
use sosforge::syntax::{parse_formula, parse_term, parse_tss};

fn main() -> sosforge::Result<()> {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/sequencing.tss")).expect("fixture");
    let tss = parse_tss(&src)?.tss;
    let gamma = tss.patience_args();
    let t = parse_term("x;y", &tss.signature)?;
    let closed = ["p", "q", "r", "0"]
        .iter()
        .map(|s| parse_term(s, &tss.signature))
        .collect::<sosforge::Result<Vec<_>>>()?;
    for src in ["<a>T", "<eps><a>T", "~<a>T"] {
        let phi: Formula = parse_formula(src)?;
        println!("{src} through {t}:");
        for m in decompose(&tss, &t, &phi, &gamma, 8)? {
            println!("  - {}", m.to_string().replace('\n', "\n    "));
        }
        let rep = verify_decomposition_theorem(&tss, &t, &phi, &gamma, &closed, 8)?;
        println!("  holds on {} substitutions: {}", rep.substitutions, rep.holds());
    }
    Ok(())
}
