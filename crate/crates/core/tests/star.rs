use std::collections::BTreeMap;

use eqkit_core::instances::atomicity::{Atomicity, AtomicityQuantale};
use eqkit_core::instances::crit::{Crit, CritQuantale};
use eqkit_core::instances::lift::powerset;
use eqkit_core::instances::lock::{LockEffect, LockQuantale};
use eqkit_core::instances::patched::Patched;
use eqkit_core::instances::product::Product;
use eqkit_core::instances::trivial::TrivialQuantale;
use eqkit_core::quantale::{is_subidempotent, star_table_laws, StarTable};
use eqkit_core::{check_star_laws, check_star_precision, derive_star_finite, leq, seq_power, Budget, Quantale, WithStar};

/// Star by repeated powers of `x ⊔ I` until an idempotent power appears,
/// independent of the candidate search.
fn star_by_powers<Q: Quantale>(q: &Q, x: &Q::Elem) -> Option<Q::Elem> {
    let base = q.join(x, &q.unit())?;
    let mut p = base.clone();
    for _ in 0..64 {
        let pp = q.seq(&p, &p)?;
        if pp == p {
            return Some(p);
        }
        p = q.seq(&p, &base)?;
    }
    None
}

fn assert_powers_agree<Q: Quantale>(q: &Q) {
    let t = derive_star_finite(q).unwrap();
    for (x, s) in &t.entries {
        assert_eq!(s.as_ref(), star_by_powers(q, x).as_ref(), "{x}");
    }
}

#[test]
fn atomicity_star_table() {
    use Atomicity::*;
    let t = derive_star_finite(&AtomicityQuantale).unwrap();
    let expected: BTreeMap<_, _> = [(B, Some(B)), (L, Some(L)), (R, Some(R)), (A, Some(Top)), (Top, Some(Top))].into();
    assert_eq!(t.entries, expected);
    assert!(t.laxly_iterable);
    assert_powers_agree(&AtomicityQuantale);
}

#[test]
fn crit_star_table() {
    use Crit::*;
    let t = derive_star_finite(&CritQuantale).unwrap();
    let expected: BTreeMap<_, _> = [
        (Eps, Some(Eps)),
        (Locking, None),
        (Unlocking, None),
        (Critical, Some(Critical)),
        (Entrant, Some(Entrant)),
    ]
    .into();
    assert_eq!(t.entries, expected);
    assert_powers_agree(&CritQuantale);
}

#[test]
fn lift_star_is_identity() {
    let q = powerset(&["IOError", "ArgError"]);
    let t = derive_star_finite(&q).unwrap();
    assert!(t.is_identity());
    let w = WithStar::derived(q.clone()).unwrap();
    for c1 in q.elements().unwrap() {
        for c2 in q.elements().unwrap() {
            let loop_ = w.star(&w.seq(&c2, &c1).unwrap()).unwrap();
            assert_eq!(w.seq(&c1, &loop_), w.join(&c1, &c2));
        }
    }
}

#[test]
fn lock_star_defined_exactly_on_invariant_claims() {
    let q = LockQuantale::new(vec!["a", "b"]);
    let mut r = eqkit_core::quantale::rng(11);
    for _ in 0..500 {
        let x = q.sample(&mut r).unwrap();
        assert_eq!(q.star(&x).is_some(), x.pre == x.post, "{x}");
        assert_eq!(is_subidempotent(&q, &x), x.pre == x.post, "{x}");
        if let Some(s) = q.star(&x) {
            assert_eq!(s, x);
        }
    }
    assert_eq!(q.star(&LockEffect::acquire("a")), None);
}

#[test]
fn derived_stars_satisfy_the_axioms() {
    let a = WithStar::derived(AtomicityQuantale).unwrap();
    assert!(check_star_laws(&a, Budget::Exhaustive).unwrap().passed());
    let c = WithStar::derived(CritQuantale).unwrap();
    assert!(check_star_laws(&c, Budget::Exhaustive).unwrap().passed());
    let p = WithStar::derived(Product::new(AtomicityQuantale, CritQuantale)).unwrap();
    assert!(check_star_laws(&p, Budget::Exhaustive).unwrap().passed());
    let l = WithStar::derived(powerset(&["x", "y", "z"])).unwrap();
    assert!(check_star_laws(&l, Budget::Exhaustive).unwrap().passed());
}

#[test]
fn undefined_everywhere_star_is_lawful() {
    let entries = Atomicity::ALL.iter().map(|a| (*a, None)).collect();
    let t = StarTable { entries, laxly_iterable: true, witness: None };
    assert!(star_table_laws(&AtomicityQuantale, t).unwrap().passed());
}

#[test]
fn corrupted_star_fails_foldable() {
    let mut t = derive_star_finite(&AtomicityQuantale).unwrap();
    t.entries.insert(Atomicity::A, Some(Atomicity::A));
    let r = star_table_laws(&AtomicityQuantale, t).unwrap();
    assert!(!r.law("star_foldable").unwrap().passed());
    let c = r.law("star_foldable").unwrap().failures[0].clone();
    assert_eq!(c.witnesses, vec![Atomicity::A]);
    assert_eq!(c.mismatch.observed, "TOP");
}

#[test]
fn precision_on_finite_instances() {
    assert!(check_star_precision(&AtomicityQuantale).unwrap());
    assert!(check_star_precision(&CritQuantale).unwrap());
    assert!(check_star_precision(&Product::new(AtomicityQuantale, CritQuantale)).unwrap());
    assert!(check_star_precision(&powerset(&["x", "y"])).unwrap());
    assert!(check_star_precision(&TrivialQuantale).unwrap());
}

#[test]
fn top_is_the_only_subidempotent_above_a() {
    let q = AtomicityQuantale;
    let above: Vec<_> = Atomicity::ALL
        .into_iter()
        .filter(|y| leq(&q, &Atomicity::A, y) && is_subidempotent(&q, y))
        .collect();
    assert_eq!(above, vec![Atomicity::Top]);
}

#[test]
fn star_domain_is_downward_closed() {
    fn check<Q: Quantale>(q: &Q) {
        let t = derive_star_finite(q).unwrap();
        let c = q.elements().unwrap();
        for x in &c {
            for y in &c {
                if leq(q, x, y) && t.get(y).is_some() {
                    assert!(t.get(x).is_some(), "{x} ⊑ {y}");
                }
            }
        }
    }
    check(&AtomicityQuantale);
    check(&CritQuantale);
    check(&Product::new(AtomicityQuantale, CritQuantale));
}

#[test]
fn star_table_entries_are_closed_candidates() {
    let q = Product::new(AtomicityQuantale, CritQuantale);
    let t = derive_star_finite(&q).unwrap();
    for (x, s) in &t.entries {
        match s {
            Some(s) => {
                assert!(leq(&q, x, s) && leq(&q, &q.unit(), s) && is_subidempotent(&q, s));
            }
            None => {
                let cands = eqkit_core::quantale::star_candidates(&q, &q.elements().unwrap(), x);
                assert!(cands.is_empty(), "{x}");
            }
        }
    }
}

#[test]
fn product_star_is_componentwise() {
    let a = WithStar::derived(AtomicityQuantale).unwrap();
    let c = WithStar::derived(CritQuantale).unwrap();
    let p = Product::new(a.clone(), c.clone());
    let derived = derive_star_finite(&Product::new(AtomicityQuantale, CritQuantale)).unwrap();
    for (x, s) in &derived.entries {
        assert_eq!(p.star(x).as_ref(), s.as_ref(), "{x}");
    }
}

#[test]
fn reduction_chain_in_atomicity() {
    use Atomicity::*;
    let q = WithStar::derived(AtomicityQuantale).unwrap();
    let st = |x| q.star(&x).unwrap();
    let sq = |x, y| q.seq(&x, &y).unwrap();
    let left = st(sq(st(R), st(B)));
    let right = st(sq(st(B), st(L)));
    assert_eq!(left, R);
    assert_eq!(right, L);
    assert_eq!(sq(sq(left, A), right), A);
    assert_eq!(seq_power(&q, &R, 3), Some(R));
}

#[test]
fn patched_star_entries_override() {
    let q = Patched::new(WithStar::derived(CritQuantale).unwrap()).with_star(Crit::Locking, Some(Crit::Locking));
    let r = check_star_laws(&q, Budget::Exhaustive).unwrap();
    assert!(!r.law("star_foldable").unwrap().passed());
}
