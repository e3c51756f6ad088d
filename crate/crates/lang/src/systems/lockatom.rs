//! Locks, references guarded by locks, and atomicity: effects in `ℒ ⊗ 𝒜`.

use std::collections::BTreeMap;
use std::fmt;

use eqkit_core::multiset::Multiset;

use crate::calculus::{infer, type_equiv, Ctx, Signature, StateEnv};
use crate::domain::Domain;
use crate::runtime::{Instantiation, PrimStep};
use crate::syntax::{Arg, Ground, Kind, Term, Type};

use super::{dynamic_effect, signature};

const FULL: &[(&str, &str, usize)] = &[
    ("new_lock", "(-> unit I lock)", 1),
    ("acquire", "(pi (x lock) [Locking0-1(x) & R] unit)", 1),
    ("release", "(pi (x lock) [Locking1-0(x) & L] unit)", 1),
    ("alloc", "(pi (x lock) I (all (a *) I (-> a I (ref (S x) a))))", 3),
    ("read", "(pi (x lock) I (all (a *) I (-> (ref (S x) a) [Locking1-1(x,x)] a)))", 3),
    ("write", "(pi (x lock) I (all (a *) I (-> (ref (S x) a) I (-> a [Locking1-1(x,x)] a))))", 4),
];

const MOVERS: &[(&str, &str, usize)] = &[
    ("new_lock", "(-> unit I lock)", 1),
    ("acquire", "(-> lock R unit)", 1),
    ("release", "(-> lock L unit)", 1),
];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LockAtomState {
    /// Lock name to whether it is held.
    pub locks: BTreeMap<String, bool>,
    pub heap: BTreeMap<String, Term>,
    next: usize,
}

impl LockAtomState {
    pub fn held(&self) -> Multiset<Term> {
        self.locks.iter().filter(|(_, h)| **h).map(|(l, _)| Term::prim(l)).collect()
    }

    fn fresh(&mut self, stem: &str) -> String {
        loop {
            let n = format!("{stem}{}", self.next);
            self.next += 1;
            if !self.locks.contains_key(&n) && !self.heap.contains_key(&n) {
                return n;
            }
        }
    }
}

impl fmt::Display for LockAtomState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let locks: Vec<String> = self.locks.iter().map(|(l, h)| format!("{l}:{}", if *h { "held" } else { "free" })).collect();
        let heap: Vec<String> = self.heap.iter().map(|(r, v)| format!("{r}={v}")).collect();
        write!(f, "locks{{{}}} heap{{{}}}", locks.join(", "), heap.join(", "))
    }
}

/// The lock/reference instantiation. `sig` is what programs are typed
/// against; `semantics` fixes the effects primitives actually produce.
#[derive(Clone, Debug)]
pub struct LockAtom {
    name: String,
    sig: Signature,
    semantics: StateEnv,
    /// Lock constants that exist, free, before the program starts.
    universe: Vec<String>,
}

fn kinds() -> Vec<(&'static str, Kind)> {
    vec![("lock", Kind::Star), ("ref", Kind::arrow(Kind::Star, Kind::arrow(Kind::Star, Kind::Star)))]
}

impl LockAtom {
    pub fn new() -> Self {
        let sig = signature(Domain::lock_atomicity(&["l0", "l1"]), &kinds(), FULL);
        LockAtom { name: "lockatom".into(), semantics: sig.delta.clone(), sig, universe: Vec::new() }
    }

    /// The same semantics, but δ claims `release` has effect I.
    pub fn with_faulty_release() -> Self {
        let mut inst = LockAtom::new();
        let bad = signature(Domain::lock_atomicity(&[]), &kinds(), &[("release", "(pi (x lock) I unit)", 1)]);
        inst.sig.delta.prims.extend(bad.delta.prims);
        inst.name = "lockatom-faulty".into();
        inst
    }

    /// Only the atomicity component: locks without references.
    pub fn movers_only() -> Self {
        let sig = signature(Domain::atomicity(), &kinds()[..1], MOVERS);
        LockAtom { name: "atomicity".into(), semantics: sig.delta.clone(), sig, universe: Vec::new() }
    }

    /// Adds lock constants `locks`, free in the initial state.
    pub fn with_universe(mut self, locks: &[&str]) -> Self {
        for l in locks {
            self.sig.delta.insert(l, Type::con("lock"), 0);
            self.semantics.insert(l, Type::con("lock"), 0);
            self.universe.push(l.to_string());
        }
        self
    }

    fn has_locks_component(&self) -> bool {
        matches!(self.sig.domain, Domain::Product(..))
    }
}

impl Default for LockAtom {
    fn default() -> Self {
        LockAtom::new()
    }
}

fn prim_name(t: &Term) -> Option<&str> {
    match t {
        Term::Prim(p) => Some(p),
        _ => None,
    }
}

impl Instantiation for LockAtom {
    type State = LockAtomState;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn initial_state(&self) -> LockAtomState {
        let locks = self.universe.iter().map(|l| (l.clone(), false)).collect();
        LockAtomState { locks, ..LockAtomState::default() }
    }

    fn prim(&self, p: &str, args: &[Arg<'_>], state: &LockAtomState, sigma: &StateEnv) -> Option<PrimStep<LockAtomState>> {
        let effect = dynamic_effect(&self.semantics, &self.sig.domain, p, args)?;
        let mut st = state.clone();
        let mut sigma = sigma.clone();
        let term = match (p, args) {
            ("new_lock", [Arg::Val(Term::Unit)]) => {
                let l = st.fresh("l");
                st.locks.insert(l.clone(), false);
                sigma.insert(&l, Type::con("lock"), 0);
                Term::prim(&l)
            }
            ("acquire", [Arg::Val(l)]) => {
                let l = prim_name(l)?;
                (st.locks.get(l) == Some(&false)).then_some(())?;
                st.locks.insert(l.to_string(), true);
                Term::Unit
            }
            ("release", [Arg::Val(l)]) => {
                let l = prim_name(l)?;
                (st.locks.get(l) == Some(&true)).then_some(())?;
                st.locks.insert(l.to_string(), false);
                Term::Unit
            }
            ("alloc", [Arg::Val(l), Arg::Ty(t), Arg::Val(v)]) => {
                let l = prim_name(l)?;
                st.locks.contains_key(l).then_some(())?;
                let r = st.fresh("r");
                st.heap.insert(r.clone(), (*v).clone());
                sigma.insert(&r, Type::app(Type::app(Type::con("ref"), Type::sing(Term::prim(l))), (*t).clone()), 0);
                Term::prim(&r)
            }
            ("read", [Arg::Val(_), Arg::Ty(_), Arg::Val(r)]) => st.heap.get(prim_name(r)?)?.clone(),
            ("write", [Arg::Val(_), Arg::Ty(_), Arg::Val(r), Arg::Val(v)]) => {
                let r = prim_name(r)?;
                st.heap.contains_key(r).then_some(())?;
                st.heap.insert(r.to_string(), (*v).clone());
                (*v).clone()
            }
            _ => return None,
        };
        Some(PrimStep { term, effect, state: st, sigma })
    }

    fn state_typed(&self, state: &LockAtomState, sigma: &StateEnv) -> bool {
        let locks_ok = state.locks.keys().all(|l| sigma.get(l).map(|s| &s.ty) == Some(&Type::con("lock")));
        let heap_ok = state.heap.iter().all(|(r, v)| {
            let Some(Type::App(f, content)) = sigma.get(r).map(|s| &s.ty) else { return false };
            let Type::App(head, lock) = &**f else { return false };
            let lock_ok = matches!(&**lock, Type::Sing(l) if prim_name(l).is_some_and(|l| state.locks.contains_key(l)));
            let typed = infer(&self.sig, &Ctx::default(), sigma, v)
                .is_ok_and(|t| type_equiv(&t.ty, content, &self.sig.domain));
            **head == Type::con("ref") && lock_ok && v.is_value() && typed
        });
        locks_ok && heap_ok
    }

    /// Held locks must cover the effect's precondition, and the post-state
    /// holds exactly what the effect says was kept or acquired.
    fn interpret(&self, g: &Ground, pre: &LockAtomState, post: &LockAtomState) -> Option<bool> {
        if !self.has_locks_component() {
            return None;
        }
        let Ground::Pair(locks, _) = g else { return Some(false) };
        let Ground::Locks(e) = &**locks else { return Some(false) };
        let before = pre.held();
        Some(e.pre.is_sub(&before) && post.held() == before.sub(&e.released()).sum(&e.acquired()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{check_primitive_table, infer_closed};
    use crate::runtime::{run, Status};
    use crate::systems::parse_program;
    use eqkit_core::instances::atomicity::Atomicity;
    use eqkit_core::instances::lock::LockEffect;
    use eqkit_core::Quantale;

    #[test]
    fn delta_tables_are_valid() {
        for inst in [LockAtom::new(), LockAtom::movers_only(), LockAtom::with_faulty_release()] {
            let r = check_primitive_table(inst.signature());
            assert!(r.passed(), "{}: {:?}", inst.name(), r.failed_laws());
        }
    }

    #[test]
    fn acquire_type() {
        let inst = LockAtom::new();
        assert_eq!(inst.sig.delta.get("acquire").unwrap().ty.to_string(), "Πx:lock →[(∅,{x})⊗R] unit");
    }

    #[test]
    fn acquire_flips_the_lock() {
        let inst = LockAtom::new();
        let prog = parse_program(&inst, "(let (l (new_lock unit)) (acquire l))").unwrap();
        let rec = run(&inst, &prog, 100, true);
        assert_eq!(rec.status, Status::Value);
        assert_eq!(rec.last.state.locks.get("l0"), Some(&true));
        assert_eq!(rec.steps.last().unwrap().label.to_string(), "(∅,{l0})⊗R");
    }

    #[test]
    fn universe_locks_start_free() {
        let inst = LockAtom::new().with_universe(&["m"]);
        let prog = parse_program(&inst, "(seq (acquire m) (release m))").unwrap();
        assert_eq!(infer_closed(inst.signature(), &prog).unwrap().eff.to_string(), "(∅,∅)⊗A");
        let rec = run(&inst, &prog, 100, false);
        assert_eq!(rec.status, Status::Value);
        assert_eq!(rec.last.state.locks.get("m"), Some(&false));
        assert!(inst.state_typed(&rec.last.state, &rec.last.sigma));
    }

    #[test]
    fn double_acquire_has_no_rule() {
        let inst = LockAtom::new();
        let prog = parse_program(&inst, "(let (l (new_lock unit)) (seq (acquire l) (acquire l)))").unwrap();
        let rec = run(&inst, &prog, 100, false);
        assert_eq!(rec.status, Status::PrimError);
    }

    #[test]
    fn acquire_release_folds_to_atomic() {
        let inst = LockAtom::new();
        let prog = parse_program(&inst, "(let (l (new_lock unit)) (seq (acquire l) (release l)))").unwrap();
        let rec = run(&inst, &prog, 100, false);
        assert_eq!(rec.status, Status::Value);
        let q = inst.domain();
        let l0 = Term::prim("l0");
        let acq = Ground::pair(Ground::Locks(LockEffect::acquire(l0.clone())), Ground::Atom(Atomicity::R));
        let rel = Ground::pair(Ground::Locks(LockEffect::release(l0)), Ground::Atom(Atomicity::L));
        assert_eq!(rec.accumulated, q.seq(&acq, &rel));
        assert_eq!(rec.accumulated.unwrap().to_string(), "(∅,∅)⊗A");
    }
}
