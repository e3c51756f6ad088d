//! Overrides individual table entries of another quantale.

use std::collections::BTreeMap;

use crate::quantale::{Quantale, Rng};

/// `inner` with selected `seq`, `join` and `star` results replaced.
#[derive(Clone, Debug)]
pub struct Patched<Q: Quantale> {
    pub inner: Q,
    pub seq: BTreeMap<(Q::Elem, Q::Elem), Option<Q::Elem>>,
    pub join: BTreeMap<(Q::Elem, Q::Elem), Option<Q::Elem>>,
    pub star: BTreeMap<Q::Elem, Option<Q::Elem>>,
}

impl<Q: Quantale> Patched<Q> {
    pub fn new(inner: Q) -> Self {
        Patched { inner, seq: BTreeMap::new(), join: BTreeMap::new(), star: BTreeMap::new() }
    }

    pub fn with_seq(mut self, a: Q::Elem, b: Q::Elem, r: Option<Q::Elem>) -> Self {
        self.seq.insert((a, b), r);
        self
    }

    /// Patches both argument orders.
    pub fn with_join(mut self, a: Q::Elem, b: Q::Elem, r: Option<Q::Elem>) -> Self {
        self.join.insert((a.clone(), b.clone()), r.clone());
        self.join.insert((b, a), r);
        self
    }

    pub fn with_star(mut self, a: Q::Elem, r: Option<Q::Elem>) -> Self {
        self.star.insert(a, r);
        self
    }
}

impl<Q: Quantale> Quantale for Patched<Q> {
    type Elem = Q::Elem;
    fn name(&self) -> String {
        format!("{} (patched)", self.inner.name())
    }
    fn unit(&self) -> Q::Elem {
        self.inner.unit()
    }
    fn join(&self, a: &Q::Elem, b: &Q::Elem) -> Option<Q::Elem> {
        match self.join.get(&(a.clone(), b.clone())) {
            Some(r) => r.clone(),
            None => self.inner.join(a, b),
        }
    }
    fn seq(&self, a: &Q::Elem, b: &Q::Elem) -> Option<Q::Elem> {
        match self.seq.get(&(a.clone(), b.clone())) {
            Some(r) => r.clone(),
            None => self.inner.seq(a, b),
        }
    }
    fn has_star(&self) -> bool {
        self.inner.has_star() || !self.star.is_empty()
    }
    fn star(&self, a: &Q::Elem) -> Option<Q::Elem> {
        match self.star.get(a) {
            Some(r) => r.clone(),
            None => self.inner.star(a),
        }
    }
    fn elements(&self) -> Option<Vec<Q::Elem>> {
        self.inner.elements()
    }
    fn sample(&self, rng: &mut Rng) -> Option<Q::Elem> {
        self.inner.sample(rng)
    }
    fn interesting(&self) -> Vec<Q::Elem> {
        self.inner.interesting()
    }
}
