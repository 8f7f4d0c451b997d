use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::normalize::{is_split_point, normalize};
use super::Formula;

/// Syntactic formula classes.
///
/// `Ob` and `Obs` are the unrooted branching classes (without and with the
/// stability clause), `Orb` and `Orbs` their rooted extensions, `O` is
/// every formula without `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Class {
    O,
    Ob,
    Orb,
    Obs,
    Orbs,
}

impl Class {
    pub fn name(self) -> &'static str {
        match self {
            Class::O => "O",
            Class::Ob => "Ob",
            Class::Orb => "Orb",
            Class::Obs => "Obs",
            Class::Orbs => "Orbs",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Class> {
        [Class::O, Class::Ob, Class::Orb, Class::Obs, Class::Orbs]
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown formula class `{s}`")))
    }
}

/// Membership of `normalize(phi)` in `class`.
pub fn class_membership(phi: &Formula, class: Class) -> bool {
    let n = normalize(phi);
    match class {
        Class::O => !n.contains_delta(),
        Class::Ob => unrooted(&n, false),
        Class::Obs => unrooted(&n, true),
        Class::Orb => rooted(&n, false),
        Class::Orbs => rooted(&n, true),
    }
}

fn unrooted(phi: &Formula, stab: bool) -> bool {
    match phi {
        Formula::Conj(items) => items.iter().all(|i| unrooted(i, stab)),
        Formula::Neg(g) => unrooted(g, stab),
        Formula::Eps(g) => {
            let items = g.conjuncts();
            let rest_ok = |skip: usize, pred: &dyn Fn(&Formula) -> bool| items.iter().enumerate().all(|(j, f)| j == skip || pred(f));
            let split = items.iter().enumerate().any(|(i, f)| {
                let inner = match f {
                    Formula::TauHat(h) => Some(h),
                    Formula::Diam(_, h) if is_split_point(f) => Some(h),
                    _ => None,
                };
                inner.is_some_and(|h| unrooted(h, stab) && rest_ok(i, &|x| unrooted(x, stab)))
            });
            let padded = items.iter().all(|f| unrooted(f, stab));
            // the padding conjunct added by normalize is trivially true
            let pad = Formula::tau_hat(Formula::top());
            let stable = stab
                && items
                    .iter()
                    .enumerate()
                    .any(|(i, f)| *f == Formula::stable() && rest_ok(i, &|x| *x == pad || rooted(x, true)));
            split || padded || stable
        }
        _ => false,
    }
}

fn rooted(phi: &Formula, stab: bool) -> bool {
    match phi {
        Formula::Conj(items) => items.iter().all(|i| rooted(i, stab)),
        Formula::Neg(g) => rooted(g, stab),
        Formula::Diam(_, g) => unrooted(g, stab),
        other => unrooted(other, stab),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::Action;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn tau_diamond_is_rooted_only() {
        let phi = f("<tau>T");
        assert!(class_membership(&phi, Class::Orbs));
        assert!(!class_membership(&phi, Class::Obs));
    }

    #[test]
    fn stability_clause_needs_obs() {
        let phi = f("<eps>/\\{~<tau>T, <a>T}");
        assert!(class_membership(&phi, Class::Obs));
        assert!(!class_membership(&phi, Class::Ob));
    }

    #[test]
    fn padded_eps_is_in_ob() {
        let phi = Formula::eps(Formula::diam(Action::new("a"), Formula::top()));
        assert!(class_membership(&phi, Class::Ob));
        assert!(class_membership(&f("<eps>~<eps><a>T"), Class::Ob));
        assert!(!class_membership(&f("<a>T"), Class::Ob));
        assert!(class_membership(&f("<a>T"), Class::Orb));
        assert!(!class_membership(&f("<eps><tau>T"), Class::Orbs));
        assert!(!class_membership(&f("D T"), Class::O));
    }

    #[test]
    fn closed_under_negation_and_conjunction() {
        for s in ["<eps>/\\{~<tau>T, <a>T}", "<tau><eps><b>T", "<eps><that><eps><a>T"] {
            for c in [Class::Ob, Class::Obs, Class::Orb, Class::Orbs] {
                let phi = f(s);
                let member = class_membership(&phi, c);
                assert_eq!(class_membership(&Formula::neg(phi.clone()), c), member);
                assert_eq!(class_membership(&Formula::and([phi.clone(), phi.clone()]), c), member);
            }
        }
    }

    #[test]
    fn class_inclusions() {
        for s in ["<eps>/\\{~<tau>T, <a>T}", "<tau>T", "<eps><a>T", "~<eps><that><b>T"] {
            let phi = f(s);
            if class_membership(&phi, Class::Ob) {
                assert!(class_membership(&phi, Class::Obs));
                assert!(class_membership(&phi, Class::Orb));
            }
            if class_membership(&phi, Class::Obs) {
                assert!(class_membership(&phi, Class::Orbs));
            }
            if class_membership(&phi, Class::Orb) {
                assert!(class_membership(&phi, Class::Orbs));
            }
        }
    }
}
