//! Concrete instantiations of the calculus and the λ_trace embedding.

use std::collections::BTreeMap;

use crate::calculus::{last_effect, Signature, StateEnv};
use crate::domain::Domain;
use crate::effect::ground_of;
use crate::parse::{read_sexps, ParseError, Parser};
use crate::runtime::Instantiation;
use crate::syntax::{Arg, Ground, Kind, Term};

pub mod crit;
pub mod gen;
pub mod history;
pub mod lambda_trace;
pub mod lockatom;

pub use crit::CritSystem;
pub use history::{History, HistoryState};
pub use lockatom::{LockAtom, LockAtomState};

/// Builds a signature from a table of `(primitive, type, arity)` written in
/// surface syntax.
pub(crate) fn signature(domain: Domain, kinds: &[(&str, Kind)], prims: &[(&str, &str, usize)]) -> Signature {
    let kinds: BTreeMap<String, Kind> = kinds.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    let mut delta = StateEnv::default();
    {
        let p = Parser::new(&domain, &kinds);
        for (name, src, arity) in prims {
            let s = &read_sexps(src).unwrap_or_else(|e| panic!("δ({name}): {e}"))[0];
            delta.insert(name, p.ty(s).unwrap_or_else(|e| panic!("δ({name}): {e}")), *arity);
        }
    }
    Signature { domain, kinds, delta }
}

/// The last latent effect of `δ(p)` with the arguments substituted, as a
/// ground element.
pub(crate) fn dynamic_effect(delta: &StateEnv, q: &Domain, p: &str, args: &[Arg<'_>]) -> Option<Ground> {
    ground_of(&last_effect(delta, p, args)?.0, q)
}

/// Parses a program for an instantiation, resolving its primitive names.
pub fn parse_program<I: Instantiation>(inst: &I, src: &str) -> Result<Term, ParseError> {
    let sig = inst.signature();
    Parser::new(&sig.domain, &sig.kinds).program(src, &|p| sig.delta.contains(p))
}
