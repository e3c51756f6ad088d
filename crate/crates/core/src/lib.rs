//! Effect quantales as executable algebra: law checking, derived iteration,
//! concrete instances, products, indexed substitution and Kleene algebras.

pub mod automata;
pub mod indexed;
pub mod instances;
pub mod kleene;
pub mod multiset;
pub mod quantale;
pub mod report;

pub use quantale::{
    check_laws, check_star_laws, check_star_precision, derive_star_finite, leq, seq_power, Budget, LawError, Quantale,
    StarTable, WithStar,
};
pub use report::{Counterexample, LawReport, LawResult, Mismatch};
