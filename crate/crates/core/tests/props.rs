use eqkit_core::indexed::map_effect;
use eqkit_core::instances::lift::lift_semilattice;
use eqkit_core::instances::lock::LockEffect;
use eqkit_core::multiset::Multiset;
use eqkit_core::{check_laws, derive_star_finite, leq, Budget, Quantale};
use proptest::prelude::*;

fn multiset() -> impl Strategy<Value = Multiset<u8>> {
    proptest::collection::vec((0u8..3, 0u32..3), 0..4).prop_map(Multiset::from_counts)
}

fn lock_effect() -> impl Strategy<Value = LockEffect<u8>> {
    (multiset(), multiset()).prop_map(|(a, b)| LockEffect::new(a, b))
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: &u64, b: &u64) -> u64 {
    a / gcd(*a, *b) * b
}

proptest! {
    #[test]
    fn multisets_never_store_zero(a in multiset(), b in multiset()) {
        for m in [a.sub(&b), a.sum(&b), a.pointwise_max(&b), a.pointwise_min(&b)] {
            prop_assert!(m.iter().all(|(_, n)| n > 0));
        }
    }

    #[test]
    fn lock_join_definedness_is_symmetric(a in lock_effect(), b in lock_effect()) {
        prop_assert_eq!(a.join(&b).is_some(), b.join(&a).is_some());
        prop_assert_eq!(a.join(&b), b.join(&a));
    }

    #[test]
    fn lock_seq_is_monotone(a in lock_effect(), b in lock_effect(), c in lock_effect(), d in lock_effect()) {
        if let (Some(ab), Some(cd)) = (a.join(&b), c.join(&d)) {
            let small = a.seq(&c);
            let big = ab.seq(&cd);
            prop_assert!(small.join(&big) == Some(big.clone()), "{} vs {}", small, big);
        }
    }

    #[test]
    fn substitution_refines_lock_seq(a in lock_effect(), b in lock_effect(), to in 0u8..3) {
        let f = move |k: &u8| if *k == 0 { to } else { *k };
        let whole = map_effect(&f, &a.seq(&b));
        let parts = map_effect(&f, &a).seq(&map_effect(&f, &b));
        prop_assert!(parts.join(&whole) == Some(whole.clone()));
    }

    #[test]
    fn commutative_lifts_are_quantales(n in 1u64..40) {
        let q = lift_semilattice("divisors", divisors(n), lcm).unwrap();
        prop_assert!(check_laws(&q, Budget::Exhaustive).unwrap().passed());
        prop_assert!(derive_star_finite(&q).unwrap().is_identity());
        prop_assert_eq!(q.unit(), 1);
        prop_assert!(leq(&q, &1, &n));
    }
}
