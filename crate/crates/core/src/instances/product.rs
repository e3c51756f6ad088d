//! Componentwise products of effect quantales.

use std::fmt;

use crate::quantale::{Quantale, Rng};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair<A, B>(pub A, pub B);

impl<A: fmt::Display, B: fmt::Display> fmt::Display for Pair<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}⊗{}", self.0, self.1)
    }
}

#[derive(Clone, Debug)]
pub struct Product<Q, R> {
    pub left: Q,
    pub right: R,
}

impl<Q, R> Product<Q, R> {
    pub fn new(left: Q, right: R) -> Self {
        Product { left, right }
    }
}

impl<Q: Quantale, R: Quantale> Quantale for Product<Q, R> {
    type Elem = Pair<Q::Elem, R::Elem>;
    fn name(&self) -> String {
        format!("{}⊗{}", self.left.name(), self.right.name())
    }
    fn unit(&self) -> Self::Elem {
        Pair(self.left.unit(), self.right.unit())
    }
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        Some(Pair(self.left.join(&a.0, &b.0)?, self.right.join(&a.1, &b.1)?))
    }
    fn seq(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        Some(Pair(self.left.seq(&a.0, &b.0)?, self.right.seq(&a.1, &b.1)?))
    }
    fn has_star(&self) -> bool {
        self.left.has_star() && self.right.has_star()
    }
    fn star(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if !self.has_star() {
            return None;
        }
        Some(Pair(self.left.star(&a.0)?, self.right.star(&a.1)?))
    }
    fn elements(&self) -> Option<Vec<Self::Elem>> {
        let ls = self.left.elements()?;
        let rs = self.right.elements()?;
        Some(ls.iter().flat_map(|l| rs.iter().map(move |r| Pair(l.clone(), r.clone()))).collect())
    }
    fn sample(&self, rng: &mut Rng) -> Option<Self::Elem> {
        Some(Pair(self.left.sample(rng)?, self.right.sample(rng)?))
    }
    fn interesting(&self) -> Vec<Self::Elem> {
        let ls = self.left.interesting();
        let rs = self.right.interesting();
        ls.iter().flat_map(|l| rs.iter().map(move |r| Pair(l.clone(), r.clone()))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::atomicity::{Atomicity, AtomicityQuantale};
    use crate::instances::crit::CritQuantale;
    use crate::instances::lock::{LockEffect, LockQuantale};

    #[test]
    fn lock_atomicity_unit_and_seq() {
        let q = Product::new(LockQuantale::new(vec!["l"]), AtomicityQuantale);
        assert_eq!(q.unit(), Pair(LockEffect::unit(), Atomicity::B));
        let acq = Pair(LockEffect::acquire("l"), Atomicity::R);
        let rel = Pair(LockEffect::release("l"), Atomicity::L);
        assert_eq!(q.seq(&acq, &rel), Some(Pair(LockEffect::unit(), Atomicity::A)));
        assert_eq!(q.unit().to_string(), "(∅,∅)⊗B");
    }

    #[test]
    fn carrier_is_cartesian() {
        let q = Product::new(AtomicityQuantale, CritQuantale);
        assert_eq!(q.elements().unwrap().len(), 25);
        assert!(!q.has_star());
    }
}
