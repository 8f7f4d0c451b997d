//! Searches for predicates that put the priority operator in each format,
//! then shows a congruence failure once the tau rule is dropped.

use sosforge::format::{check_format, FormatKind, DEFAULT_SEARCH_CAP};
use sosforge::syntax::parse_tss;

fn main() -> sosforge::Result<()> {
    for file in ["priority.tss", "priority_no_tau.tss"] {
        let path = format!("{}/fixtures/{file}", env!("CARGO_MANIFEST_DIR"));
        let src = std::fs::read_to_string(&path).expect("fixture");
        let tss = parse_tss(&src)?.tss;
        for kind in [FormatKind::parse("rsbb").unwrap(), FormatKind::parse("sbb").unwrap()] {
            let v = check_format(&tss, kind, None, None, DEFAULT_SEARCH_CAP)?;
            println!("{file} {}: {}", kind.name(), v.to_string().replace('\n', " "));
        }
    }
    Ok(())
}
