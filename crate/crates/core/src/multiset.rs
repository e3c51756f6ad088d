//! Finite multisets stored as sorted count maps with no zero entries.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Multiset<K: Ord> {
    counts: BTreeMap<K, u32>,
}

impl<K: Ord + Clone> Multiset<K> {
    pub fn new() -> Self {
        Multiset { counts: BTreeMap::new() }
    }

    pub fn singleton(k: K) -> Self {
        Self::from_counts([(k, 1)])
    }

    pub fn from_counts(it: impl IntoIterator<Item = (K, u32)>) -> Self {
        let mut m = Self::new();
        for (k, n) in it {
            m.add(k, n);
        }
        m
    }

    pub fn add(&mut self, k: K, n: u32) {
        if n > 0 {
            *self.counts.entry(k).or_insert(0) += n;
        }
    }

    pub fn count(&self, k: &K) -> u32 {
        self.counts.get(k).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> u32 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, u32)> {
        self.counts.iter().map(|(k, n)| (k, *n))
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.counts.keys()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u32, u32) -> u32) -> Self {
        let mut out = Self::new();
        for k in self.counts.keys().chain(other.counts.keys()) {
            if out.counts.contains_key(k) {
                continue;
            }
            let n = f(self.count(k), other.count(k));
            if n > 0 {
                out.counts.insert(k.clone(), n);
            }
        }
        out
    }

    /// Pointwise maximum (∨).
    pub fn pointwise_max(&self, other: &Self) -> Self {
        self.zip_with(other, u32::max)
    }

    /// Pointwise minimum.
    pub fn pointwise_min(&self, other: &Self) -> Self {
        self.zip_with(other, u32::min)
    }

    /// Multiset sum (∪).
    pub fn sum(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    /// Subtraction floored at zero.
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, u32::saturating_sub)
    }

    pub fn is_sub(&self, other: &Self) -> bool {
        self.counts.iter().all(|(k, n)| *n <= other.count(k))
    }

    /// Image under `f`; multiplicities of merged keys are summed.
    pub fn map(&self, f: impl Fn(&K) -> K) -> Self {
        Self::from_counts(self.counts.iter().map(|(k, n)| (f(k), *n)))
    }
}

impl<K: Ord + Clone> FromIterator<K> for Multiset<K> {
    fn from_iter<I: IntoIterator<Item = K>>(it: I) -> Self {
        Self::from_counts(it.into_iter().map(|k| (k, 1)))
    }
}

impl<K: Ord + fmt::Display> fmt::Display for Multiset<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return write!(f, "∅");
        }
        write!(f, "{{")?;
        let mut first = true;
        for (k, n) in &self.counts {
            for _ in 0..*n {
                if !first {
                    write!(f, ",")?;
                }
                first = false;
                write!(f, "{k}")?;
            }
        }
        write!(f, "}}")
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for Multiset<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.counts.iter()).finish()
    }
}
