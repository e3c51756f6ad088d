//! Commutative effects: a bounded join semilattice reused as sequencing.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng as _;
use thiserror::Error;

use crate::quantale::{Quantale, Rng};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("semilattice has no elements")]
    Empty,
    #[error("join of {0} and {1} leaves the carrier")]
    NotClosed(String, String),
    #[error("semilattice has no bottom element")]
    MissingBottom,
    #[error("semilattice has no top element")]
    MissingTop,
}

/// `(E, ∨, ∨, ⊥)` for a finite join semilattice with bottom and top.
#[derive(Clone, Debug)]
pub struct Lift<E> {
    name: String,
    elements: Vec<E>,
    join: fn(&E, &E) -> E,
    bottom: E,
    top: E,
}

pub fn lift_semilattice<E: Clone + Ord + fmt::Debug>(
    name: &str,
    elements: Vec<E>,
    join: fn(&E, &E) -> E,
) -> Result<Lift<E>, LiftError> {
    if elements.is_empty() {
        return Err(LiftError::Empty);
    }
    for a in &elements {
        for b in &elements {
            if !elements.contains(&join(a, b)) {
                return Err(LiftError::NotClosed(format!("{a:?}"), format!("{b:?}")));
            }
        }
    }
    let bottom = elements
        .iter()
        .find(|b| elements.iter().all(|x| join(b, x) == *x))
        .cloned()
        .ok_or(LiftError::MissingBottom)?;
    let top = elements
        .iter()
        .find(|t| elements.iter().all(|x| join(t, x) == **t))
        .cloned()
        .ok_or(LiftError::MissingTop)?;
    Ok(Lift { name: name.to_string(), elements, join, bottom, top })
}

impl<E> Lift<E> {
    pub fn top(&self) -> &E {
        &self.top
    }
}

impl<E: Clone + Ord + fmt::Debug + fmt::Display> Quantale for Lift<E> {
    type Elem = E;
    fn name(&self) -> String {
        self.name.clone()
    }
    fn unit(&self) -> E {
        self.bottom.clone()
    }
    fn join(&self, a: &E, b: &E) -> Option<E> {
        Some((self.join)(a, b))
    }
    fn seq(&self, a: &E, b: &E) -> Option<E> {
        Some((self.join)(a, b))
    }
    fn elements(&self) -> Option<Vec<E>> {
        Some(self.elements.clone())
    }
    fn sample(&self, rng: &mut Rng) -> Option<E> {
        Some(self.elements[rng.gen_range(0..self.elements.len())].clone())
    }
    fn interesting(&self) -> Vec<E> {
        self.elements.clone()
    }
}

/// A finite set of atom names, e.g. checked exception types.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomSet(pub BTreeSet<String>);

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let names: Vec<&str> = self.0.iter().map(String::as_str).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

fn union(a: &AtomSet, b: &AtomSet) -> AtomSet {
    AtomSet(a.0.union(&b.0).cloned().collect())
}

/// The powerset of `atoms` ordered by inclusion.
pub fn powerset(atoms: &[&str]) -> Lift<AtomSet> {
    let mut elements = Vec::new();
    for mask in 0u32..(1 << atoms.len()) {
        let set = atoms.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, a)| a.to_string());
        elements.push(AtomSet(set.collect()));
    }
    elements.sort();
    lift_semilattice("powerset", elements, union).expect("powersets are bounded lattices")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequencing_is_union() {
        let q = powerset(&["IOError", "ArgError"]);
        let io = AtomSet(BTreeSet::from(["IOError".to_string()]));
        let arg = AtomSet(BTreeSet::from(["ArgError".to_string()]));
        assert_eq!(q.seq(&io, &arg), q.join(&io, &arg));
        assert_eq!(q.unit().to_string(), "∅");
        assert_eq!(q.top().0.len(), 2);
    }

    #[test]
    fn missing_bounds_are_rejected() {
        fn max(a: &u8, b: &u8) -> u8 {
            *a.max(b)
        }
        fn or_keep(a: &u8, b: &u8) -> u8 {
            if a == b {
                *a
            } else {
                2
            }
        }
        assert!(lift_semilattice("chain", vec![0, 1, 2], max).is_ok());
        assert_eq!(lift_semilattice("flat", vec![0, 1, 2], or_keep).unwrap_err(), LiftError::MissingBottom);
    }
}
