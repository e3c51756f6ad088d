//! Event histories: effects are regular trace languages and the state is
//! the trace emitted so far.

use std::fmt;

use crate::calculus::{Signature, StateEnv};
use crate::domain::Domain;
use crate::runtime::{Instantiation, PrimStep};
use crate::syntax::{Arg, Ground, Kind, Term};

use super::{dynamic_effect, signature};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HistoryState {
    pub trace: Vec<String>,
}

impl fmt::Display for HistoryState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.trace.join(","))
    }
}

#[derive(Clone, Debug)]
pub struct History {
    sig: Signature,
    pub alphabet: Vec<String>,
}

impl History {
    /// Event constants `alphabet` and `ev`, over nonempty trace languages.
    pub fn new(alphabet: &[&str]) -> Self {
        History::build(alphabet, false)
    }

    /// The same primitives over the regular-language Kleene algebra, which
    /// also has the empty language.
    pub fn ka(alphabet: &[&str]) -> Self {
        History::build(alphabet, true)
    }

    fn build(alphabet: &[&str], empty: bool) -> Self {
        assert!(!alphabet.is_empty(), "history needs at least one event");
        let mut prims: Vec<(&str, &str, usize)> = alphabet.iter().map(|c| (*c, "event", 0)).collect();
        prims.push(("ev", "(pi (x event) [ev(x)] unit)", 1));
        let sig = signature(Domain::trace(alphabet, empty), &[("event", Kind::Star)], &prims);
        History { sig, alphabet: alphabet.iter().map(|s| s.to_string()).collect() }
    }
}

impl Instantiation for History {
    type State = HistoryState;

    fn name(&self) -> String {
        match self.sig.domain {
            Domain::Trace { empty: true, .. } => "ka-regex".into(),
            _ => "history".into(),
        }
    }

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn initial_state(&self) -> HistoryState {
        HistoryState::default()
    }

    fn prim(&self, p: &str, args: &[Arg<'_>], state: &HistoryState, sigma: &StateEnv) -> Option<PrimStep<HistoryState>> {
        let ("ev", [Arg::Val(Term::Prim(c))]) = (p, args) else { return None };
        self.alphabet.contains(c).then_some(())?;
        let effect = dynamic_effect(&self.sig.delta, &self.sig.domain, p, args)?;
        let mut st = state.clone();
        st.trace.push(c.clone());
        Some(PrimStep { term: Term::Unit, effect, state: st, sigma: sigma.clone() })
    }

    fn state_typed(&self, state: &HistoryState, _sigma: &StateEnv) -> bool {
        state.trace.iter().all(|c| self.alphabet.contains(c))
    }

    /// `post = pre ++ w` for some `w` in the language of the effect.
    fn interpret(&self, g: &Ground, pre: &HistoryState, post: &HistoryState) -> Option<bool> {
        let Ground::Trace(h) = g else { return Some(false) };
        let Some(w) = post.trace.strip_prefix(pre.trace.as_slice()) else { return Some(false) };
        let w: Vec<Term> = w.iter().map(|c| Term::prim(c)).collect();
        Some(h.accepts(&w))
    }
}
