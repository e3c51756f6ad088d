//! Lock claims as pairs of multisets: locks required before, locks held after.

use std::fmt;

use rand::Rng as _;

use crate::multiset::Multiset;
use crate::quantale::{Quantale, Rng};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct LockEffect<K: Ord> {
    pub pre: Multiset<K>,
    pub post: Multiset<K>,
}

impl<K: Ord + Clone> LockEffect<K> {
    pub fn new(pre: Multiset<K>, post: Multiset<K>) -> Self {
        LockEffect { pre, post }
    }

    pub fn unit() -> Self {
        LockEffect { pre: Multiset::new(), post: Multiset::new() }
    }

    pub fn acquire(k: K) -> Self {
        LockEffect { pre: Multiset::new(), post: Multiset::singleton(k) }
    }

    pub fn release(k: K) -> Self {
        LockEffect { pre: Multiset::singleton(k), post: Multiset::new() }
    }

    pub fn holding(k: K) -> Self {
        LockEffect { pre: Multiset::singleton(k.clone()), post: Multiset::singleton(k) }
    }

    /// Locks given up (`a − a′`).
    pub fn released(&self) -> Multiset<K> {
        self.pre.sub(&self.post)
    }

    /// Locks newly claimed (`a′ − a`).
    pub fn acquired(&self) -> Multiset<K> {
        self.post.sub(&self.pre)
    }

    pub fn join(&self, other: &Self) -> Option<Self> {
        if self.released() != other.released() || self.acquired() != other.acquired() {
            return None;
        }
        Some(LockEffect { pre: self.pre.pointwise_max(&other.pre), post: self.post.pointwise_max(&other.post) })
    }

    pub fn seq(&self, other: &Self) -> Self {
        let (a, a2) = (&self.pre, &self.post);
        let (b, b2) = (&other.pre, &other.post);
        let c = a.sum(&b.sub(a2));
        let c2 = c
            .sub(&a.sub(a2))
            .sum(&a2.sub(a))
            .sub(&b.sub(b2))
            .sum(&b2.sub(b));
        LockEffect { pre: c, post: c2 }
    }

    pub fn star(&self) -> Option<Self> {
        (self.pre == self.post).then(|| self.clone())
    }

    pub fn map(&self, f: impl Fn(&K) -> K) -> Self {
        LockEffect { pre: self.pre.map(&f), post: self.post.map(&f) }
    }
}

impl<K: Ord + fmt::Display> fmt::Display for LockEffect<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.pre, self.post)
    }
}

/// The lock quantale over a finite universe of lock names used for sampling.
#[derive(Clone, Debug)]
pub struct LockQuantale<K> {
    pub universe: Vec<K>,
    pub max_count: u32,
}

impl<K: Clone> LockQuantale<K> {
    pub fn new(universe: Vec<K>) -> Self {
        LockQuantale { universe, max_count: 2 }
    }
}

impl<K: Ord + Clone> LockQuantale<K> {
    fn sample_multiset(&self, rng: &mut Rng) -> Multiset<K> {
        let mut m = Multiset::new();
        for k in &self.universe {
            if rng.gen_ratio(1, 2) {
                m.add(k.clone(), rng.gen_range(1..=self.max_count));
            }
        }
        m
    }
}

impl<K: Ord + Clone + fmt::Debug + fmt::Display> Quantale for LockQuantale<K> {
    type Elem = LockEffect<K>;
    fn name(&self) -> String {
        "lockset".into()
    }
    fn unit(&self) -> LockEffect<K> {
        LockEffect::unit()
    }
    fn join(&self, a: &LockEffect<K>, b: &LockEffect<K>) -> Option<LockEffect<K>> {
        a.join(b)
    }
    fn seq(&self, a: &LockEffect<K>, b: &LockEffect<K>) -> Option<LockEffect<K>> {
        Some(a.seq(b))
    }
    fn has_star(&self) -> bool {
        true
    }
    fn star(&self, a: &LockEffect<K>) -> Option<LockEffect<K>> {
        a.star()
    }
    fn sample(&self, rng: &mut Rng) -> Option<LockEffect<K>> {
        let pre = self.sample_multiset(rng);
        let post = if rng.gen_ratio(1, 3) { pre.clone() } else { self.sample_multiset(rng) };
        Some(LockEffect { pre, post })
    }
    fn interesting(&self) -> Vec<LockEffect<K>> {
        let mut out = vec![LockEffect::unit()];
        for k in self.universe.iter().take(2) {
            out.push(LockEffect::acquire(k.clone()));
            out.push(LockEffect::release(k.clone()));
            out.push(LockEffect::holding(k.clone()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type E = LockEffect<&'static str>;

    fn ms(xs: &[&'static str]) -> Multiset<&'static str> {
        xs.iter().copied().collect()
    }

    fn e(pre: &[&'static str], post: &[&'static str]) -> E {
        LockEffect::new(ms(pre), ms(post))
    }

    #[test]
    fn acquire_then_release_cancels() {
        assert_eq!(e(&[], &["l"]).seq(&e(&["l"], &[])), e(&[], &[]));
    }

    #[test]
    fn hand_over_hand() {
        assert_eq!(e(&[], &["l2"]).seq(&e(&["l1"], &[])), e(&["l1"], &["l2"]));
    }

    #[test]
    fn double_claim() {
        assert_eq!(e(&[], &["l"]).seq(&e(&[], &["l"])), e(&[], &["l", "l"]));
    }

    #[test]
    fn join_requires_equal_deltas() {
        assert_eq!(e(&["l1"], &["l1"]).join(&e(&[], &[])), Some(e(&["l1"], &["l1"])));
        assert_eq!(e(&[], &["l"]).join(&e(&[], &[])), None);
    }

    #[test]
    fn star_only_on_invariant_claims() {
        assert_eq!(e(&["l"], &["l"]).star(), Some(e(&["l"], &["l"])));
        assert_eq!(e(&[], &[]).star(), Some(e(&[], &[])));
        assert_eq!(e(&[], &["l"]).star(), None);
    }

    #[test]
    fn display() {
        assert_eq!(e(&[], &["l"]).to_string(), "(∅,{l})");
    }
}
