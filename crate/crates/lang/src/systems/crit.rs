//! Critical sections tracked with the five-element crit effects.

use std::fmt;

use crate::calculus::{Signature, StateEnv};
use crate::domain::Domain;
use crate::runtime::{Instantiation, PrimStep};
use crate::syntax::{Arg, Term};

use super::{dynamic_effect, signature};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CritState {
    pub inside: bool,
}

impl fmt::Display for CritState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.inside { "inside" } else { "outside" })
    }
}

#[derive(Clone, Debug)]
pub struct CritSystem {
    sig: Signature,
}

impl CritSystem {
    pub fn new() -> Self {
        let sig = signature(
            Domain::crit(),
            &[],
            &[
                ("enter", "(-> unit [locking] unit)", 1),
                ("exit", "(-> unit [unlocking] unit)", 1),
                ("work", "(-> unit [critical] unit)", 1),
            ],
        );
        CritSystem { sig }
    }
}

impl Default for CritSystem {
    fn default() -> Self {
        CritSystem::new()
    }
}

impl Instantiation for CritSystem {
    type State = CritState;

    fn name(&self) -> String {
        "crit".into()
    }

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn initial_state(&self) -> CritState {
        CritState::default()
    }

    fn prim(&self, p: &str, args: &[Arg<'_>], state: &CritState, sigma: &StateEnv) -> Option<PrimStep<CritState>> {
        let [Arg::Val(Term::Unit)] = args else { return None };
        let inside = match p {
            "enter" if !state.inside => true,
            "exit" if state.inside => false,
            "work" if state.inside => true,
            _ => return None,
        };
        let effect = dynamic_effect(&self.sig.delta, &self.sig.domain, p, args)?;
        Some(PrimStep { term: Term::Unit, effect, state: CritState { inside }, sigma: sigma.clone() })
    }

    fn state_typed(&self, _state: &CritState, _sigma: &StateEnv) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{check_primitive_table, infer_closed};
    use crate::systems::parse_program;

    #[test]
    fn section_is_entrant() {
        let inst = CritSystem::new();
        assert!(check_primitive_table(inst.signature()).passed());
        let prog = parse_program(&inst, "(seq (enter unit) (work unit) (exit unit))").unwrap();
        assert_eq!(infer_closed(inst.signature(), &prog).unwrap().eff.to_string(), "entrant");
    }

    #[test]
    fn double_enter_is_trivially_invalid() {
        let inst = CritSystem::new();
        let prog = parse_program(&inst, "(seq (enter unit) (enter unit))").unwrap();
        assert!(infer_closed(inst.signature(), &prog).unwrap_err().is_trivially_invalid());
    }
}
