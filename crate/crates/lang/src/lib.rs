//! A polymorphic sequential type-and-effect calculus over pluggable effect
//! quantales: syntax, effect equivalence, typing, a labelled small-step
//! interpreter with safety monitoring, and concrete instantiations.

pub mod domain;
pub mod calculus;
pub mod effect;
pub mod parse;
pub mod runtime;
pub mod systems;
pub mod syntax;

pub use domain::Domain;
pub use syntax::{EffectExpr, Ground, Kind, Term, Type};
