//! Structural operational semantics toolkit for branching bisimulation
//! congruence formats.

pub mod action;
pub mod afo;
pub mod decompose;
pub mod equiv;
pub mod error;
pub mod format;
pub mod lts;
pub mod modal;
pub mod proof;
pub mod ruloid;
pub mod syntax;
pub mod term;
pub mod tss;

pub use action::{Action, ActionOrder};
pub use error::{Error, Result};
pub use lts::Lts;
pub use term::{Signature, Substitution, Symbol, Term, Var};
pub use tss::{ArgPredicate, Literal, Rule, Tss};
