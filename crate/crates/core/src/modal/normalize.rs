use super::Formula;

/// Equivalence-preserving cleanup that exposes the syntactic class of a formula.
///
/// Rewrites, applied bottom-up:
/// - nested conjunctions are flattened, `T` conjuncts dropped, duplicates removed, items sorted;
/// - a conjunction containing `~T` becomes `~T`; a singleton conjunction becomes its item;
/// - `~~f` becomes `f`;
/// - `<that>T` and `<eps>T` become `T`;
/// - `<a>~T`, `<eps>~T`, `<that>~T` and `D ~T` become `~T`;
/// - `<eps>f` whose conjuncts offer no `<a>g` (a not tau) or `<that>g` gets a
///   `<that>T` conjunct, which is always true.
pub fn normalize(phi: &Formula) -> Formula {
    let bottom = Formula::bottom();
    match phi {
        Formula::Conj(items) => {
            let mut out = Vec::new();
            for it in items {
                match normalize(it) {
                    Formula::Conj(sub) => out.extend(sub),
                    other => out.push(other),
                }
            }
            if out.contains(&bottom) {
                return bottom;
            }
            out.sort();
            out.dedup();
            if out.len() == 1 {
                out.pop().unwrap()
            } else {
                Formula::Conj(out)
            }
        }
        Formula::Neg(g) => match normalize(g) {
            Formula::Neg(h) => *h,
            n => Formula::neg(n),
        },
        Formula::Diam(a, g) => {
            let n = normalize(g);
            if n == bottom {
                bottom
            } else {
                Formula::diam(a.clone(), n)
            }
        }
        Formula::TauHat(g) => {
            let n = normalize(g);
            if n.is_top() || n == bottom {
                n
            } else {
                Formula::tau_hat(n)
            }
        }
        Formula::Delta(g) => {
            let n = normalize(g);
            if n == bottom {
                bottom
            } else {
                Formula::delta(n)
            }
        }
        Formula::Eps(g) => {
            let n = normalize(g);
            if n.is_top() || n == bottom {
                return n;
            }
            let mut items = n.conjuncts();
            if !items.iter().any(is_split_point) {
                items.push(Formula::tau_hat(Formula::top()));
            }
            items.sort();
            items.dedup();
            if items.len() == 1 {
                Formula::eps(items.pop().unwrap())
            } else {
                Formula::eps(Formula::Conj(items))
            }
        }
    }
}

pub(super) fn is_split_point(f: &Formula) -> bool {
    matches!(f, Formula::TauHat(_)) || matches!(f, Formula::Diam(a, _) if !a.is_tau())
}
