use eqkit_core::quantale::rng;
use eqkit_core::Quantale;
use proptest::prelude::*;
use rand::Rng as _;

use eqkit_lang::calculus::{infer, infer_closed, type_equiv, Ctx};
use eqkit_lang::effect::{equiv, ground_of, nontrivial, nontrivial_search, normalize, subeffect, NONTRIVIAL_CAP};
use eqkit_lang::runtime::{step, Config, Instantiation, Step};
use eqkit_lang::systems::{gen, History, LockAtom};
use eqkit_lang::{Domain, EffectExpr, Ground, Term, Type};

fn domains() -> Vec<Domain> {
    vec![Domain::atomicity(), Domain::crit(), Domain::lock_atomicity(&["l0", "l1"]), Domain::trace(&["a", "b"], false)]
}

/// Direct evaluation of a closed effect tree, bracketing as written.
fn eval(q: &Domain, e: &EffectExpr) -> Option<Ground> {
    match e {
        EffectExpr::Var(_) => None,
        EffectExpr::Unit => Some(q.unit()),
        EffectExpr::Ground(g) => Some(g.clone()),
        EffectExpr::Seq(a, b) => q.seq(&eval(q, a)?, &eval(q, b)?),
        EffectExpr::Join(a, b) => q.join(&eval(q, a)?, &eval(q, b)?),
        EffectExpr::Star(a) => q.star(&eval(q, a)?),
    }
}

fn ground_at(q: &Domain, i: usize) -> EffectExpr {
    let g = q.interesting();
    EffectExpr::Ground(g[i % g.len()].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn collapse_agrees_with_direct_evaluation(seed in any::<u64>(), d in 0usize..4) {
        let q = &domains()[d];
        let e = gen::random_effect(q, &[], 6, &mut rng(seed));
        if nontrivial(&e, q) {
            let direct = eval(q, &e);
            prop_assert!(direct.is_some(), "{e} is nontrivial but does not evaluate");
            prop_assert_eq!(ground_of(&e, q), direct);
        }
    }

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>(), d in 0usize..4) {
        let q = &domains()[d];
        let e = gen::random_effect(q, &["x", "y"], 6, &mut rng(seed));
        let n = normalize(&e, q);
        prop_assert_eq!(normalize(&n, q), n.clone());
        prop_assert!(equiv(&e, &n, q));
    }

    #[test]
    fn subeffect_is_a_preorder(seed in any::<u64>(), d in 0usize..4) {
        let q = &domains()[d];
        let mut r = rng(seed);
        let [a, b, c] = [0; 3].map(|_| gen::random_effect(q, &["x"], 3, &mut r));
        prop_assert!(subeffect(&a, &a, q));
        if subeffect(&a, &b, q) && subeffect(&b, &c, q) {
            prop_assert!(subeffect(&a, &c, q), "{a} ⊑ {b} ⊑ {c}");
        }
    }

    #[test]
    fn star_axioms_hold_syntactically(i in 0usize..64, j in 0usize..64, d in 0usize..4) {
        let q = &domains()[d];
        let (x, y) = (ground_at(q, i), ground_at(q, j));
        let star = |e: &EffectExpr| EffectExpr::star(e.clone());
        prop_assume!(nontrivial(&star(&x), q));
        prop_assert!(equiv(&star(&star(&x)), &star(&x), q));
        prop_assert!(subeffect(&x, &star(&x), q));
        prop_assert!(subeffect(&EffectExpr::Unit, &star(&x), q));
        prop_assert!(equiv(&EffectExpr::seq(star(&x), star(&x)), &star(&x), q));
        if subeffect(&x, &y, q) && nontrivial(&star(&y), q) {
            prop_assert!(subeffect(&star(&x), &star(&y), q));
        }
    }

    #[test]
    fn nontrivial_search_terminates(seed in any::<u64>(), d in 0usize..4) {
        let q = &domains()[d];
        let e = gen::random_effect(q, &["x", "y"], 8, &mut rng(seed));
        prop_assert!(e.depth() <= 8);
        let r = nontrivial_search(&e, q);
        prop_assert!(r.explored <= NONTRIVIAL_CAP);
    }

    #[test]
    fn undefinedness_survives_substitution(seed in any::<u64>(), d in 0usize..4, i in 0usize..64) {
        let q = &domains()[d];
        let mut r = rng(seed);
        let e = gen::random_effect(q, &["x"], 5, &mut r);
        prop_assume!(!nontrivial(&e, q));
        let closed = e.subst_type("x", &Type::Eff(ground_at(q, i)));
        prop_assert!(!nontrivial(&closed, q), "{e} is trivially invalid but {closed} is not");
    }

    #[test]
    fn substitution_preserves_typing(seed in any::<u64>(), c in 0usize..3) {
        let events = ["a", "b", "c"];
        let inst = History::new(&events);
        let sig = inst.signature();
        let prog = gen::history_open_program(&mut rng(seed), &events, "x", 4);
        let ctx = Ctx::default().with_term("x", Type::con("event"));
        let open = infer(sig, &ctx, &sig.delta, &prog).unwrap();
        let v = Term::prim(events[c]);
        let closed = infer_closed(sig, &prog.subst("x", &v)).unwrap();
        prop_assert!(type_equiv(&closed.ty, &open.ty.subst("x", &v), &sig.domain));
        prop_assert!(equiv(&closed.eff, &open.eff.subst_value("x", &v), &sig.domain), "{} vs {}", closed.eff, open.eff);
    }

    #[test]
    fn weakening_preserves_typing(seed in any::<u64>()) {
        let inst = History::new(&["a", "b"]);
        let sig = inst.signature();
        let mut r = rng(seed);
        let prog = gen::history_program(&mut r, &["a", "b"], 4);
        let base = infer_closed(sig, &prog).unwrap();
        let ctx = Ctx::default().with_term("unused", Type::Bool).with_type("e", eqkit_lang::Kind::Effect);
        let weak = infer(sig, &ctx, &sig.delta, &prog).unwrap();
        prop_assert_eq!(weak.ty, base.ty);
        prop_assert!(equiv(&weak.eff, &base.eff, &sig.domain));
    }

    #[test]
    fn step_is_a_function(seed in any::<u64>()) {
        let inst = LockAtom::new();
        let prog = gen::lockatom_program(&mut rng(seed));
        let mut cfg = Config { state: inst.initial_state(), term: prog, sigma: inst.signature().delta.clone() };
        let steps = rng(seed).gen_range(0..200);
        for _ in 0..steps {
            let (a, b) = (step(&inst, &cfg), step(&inst, &cfg));
            match (a, b) {
                (Step::Next { config: c1, label: l1, rule: r1 }, Step::Next { config: c2, label: l2, rule: r2 }) => {
                    prop_assert_eq!((&c1.term, &l1, r1), (&c2.term, &l2, r2));
                    prop_assert_eq!(&c1.state, &c2.state);
                    cfg = c1;
                }
                (Step::Value, Step::Value) => break,
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }
    }
}
