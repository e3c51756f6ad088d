//! The one-element effect quantale.

use std::fmt;

use crate::quantale::{Quantale, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct One;

impl fmt::Display for One {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I")
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct TrivialQuantale;

impl Quantale for TrivialQuantale {
    type Elem = One;
    fn name(&self) -> String {
        "trivial".into()
    }
    fn unit(&self) -> One {
        One
    }
    fn join(&self, _: &One, _: &One) -> Option<One> {
        Some(One)
    }
    fn seq(&self, _: &One, _: &One) -> Option<One> {
        Some(One)
    }
    fn has_star(&self) -> bool {
        true
    }
    fn star(&self, _: &One) -> Option<One> {
        Some(One)
    }
    fn elements(&self) -> Option<Vec<One>> {
        Some(vec![One])
    }
    fn sample(&self, _: &mut Rng) -> Option<One> {
        Some(One)
    }
}
