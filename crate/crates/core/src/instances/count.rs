//! Lower bounds on how often an event occurs.

use rand::Rng as _;

use crate::quantale::{Quantale, Rng};

/// Naturals with `min` as join and `+` as sequencing. The unit `0` is the
/// greatest element.
#[derive(Clone, Copy, Debug, Default)]
pub struct CountQuantale {
    pub max_sample: u64,
}

impl CountQuantale {
    pub fn new() -> Self {
        CountQuantale { max_sample: 20 }
    }
}

impl Quantale for CountQuantale {
    type Elem = u64;
    fn name(&self) -> String {
        "count".into()
    }
    fn unit(&self) -> u64 {
        0
    }
    fn join(&self, a: &u64, b: &u64) -> Option<u64> {
        Some(*a.min(b))
    }
    fn seq(&self, a: &u64, b: &u64) -> Option<u64> {
        a.checked_add(*b)
    }
    fn has_star(&self) -> bool {
        true
    }
    /// Only `0` lies above the unit, so every iteration collapses to it.
    fn star(&self, _a: &u64) -> Option<u64> {
        Some(0)
    }
    fn sample(&self, rng: &mut Rng) -> Option<u64> {
        Some(rng.gen_range(0..=self.max_sample.max(1)))
    }
    fn interesting(&self) -> Vec<u64> {
        vec![0, 1, 2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::{is_subidempotent, leq};

    #[test]
    fn unit_is_greatest() {
        let q = CountQuantale::new();
        for n in 0..10 {
            assert!(leq(&q, &n, &0));
        }
        assert!(!leq(&q, &0, &1));
    }

    #[test]
    fn positive_counts_are_strictly_subidempotent() {
        let q = CountQuantale::new();
        for n in 1..10u64 {
            assert!(is_subidempotent(&q, &n));
            assert_ne!(q.seq(&n, &n), Some(n));
        }
    }
}
