//! Kleene algebras, their law suite, and their reading as iterable effect
//! quantales.

use std::fmt::{Debug, Display};

use rand::Rng as _;

use crate::automata::Regex;
use crate::instances::regex::{random_regex, RegexEffect};
use crate::quantale::{run_laws, Budget, Law, LawError, Quantale, Rng, Shape};
use crate::report::{LawReport, Mismatch};

pub trait KleeneAlgebra {
    type Elem: Clone + Ord + Debug + Display;

    fn name(&self) -> String;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn plus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn times(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn star(&self, a: &Self::Elem) -> Self::Elem;

    fn elements(&self) -> Option<Vec<Self::Elem>> {
        None
    }
    fn sample(&self, _rng: &mut Rng) -> Option<Self::Elem> {
        None
    }
    fn interesting(&self) -> Vec<Self::Elem> {
        vec![self.zero(), self.one()]
    }

    /// `a ≤ b` iff `a + b = b`.
    fn le(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.plus(a, b) == *b
    }
}

/// `(K, +, ·, 1)` with the algebra's own star.
#[derive(Clone, Debug)]
pub struct KaEq<K>(pub K);

impl<K: KleeneAlgebra> Quantale for KaEq<K> {
    type Elem = K::Elem;
    fn name(&self) -> String {
        self.0.name()
    }
    fn unit(&self) -> K::Elem {
        self.0.one()
    }
    fn join(&self, a: &K::Elem, b: &K::Elem) -> Option<K::Elem> {
        Some(self.0.plus(a, b))
    }
    fn seq(&self, a: &K::Elem, b: &K::Elem) -> Option<K::Elem> {
        Some(self.0.times(a, b))
    }
    fn has_star(&self) -> bool {
        true
    }
    fn star(&self, a: &K::Elem) -> Option<K::Elem> {
        Some(self.0.star(a))
    }
    fn elements(&self) -> Option<Vec<K::Elem>> {
        self.0.elements()
    }
    fn sample(&self, rng: &mut Rng) -> Option<K::Elem> {
        self.0.sample(rng)
    }
    fn interesting(&self) -> Vec<K::Elem> {
        self.0.interesting()
    }
}

pub fn as_effect_quantale<K: KleeneAlgebra>(k: K) -> KaEq<K> {
    KaEq(k)
}

fn eq<E: PartialEq + Display>(observed: E, expected: E) -> Result<(), Mismatch> {
    if observed == expected {
        Ok(())
    } else {
        Err(Mismatch::new(observed.to_string(), expected.to_string()))
    }
}

fn le<K: KleeneAlgebra>(k: &K, a: K::Elem, b: K::Elem) -> Result<(), Mismatch> {
    if k.le(&a, &b) {
        Ok(())
    } else {
        Err(Mismatch::new(a.to_string(), format!("≤ {b}")))
    }
}

fn plus_assoc<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    eq(k.plus(&k.plus(&w[0], &w[1]), &w[2]), k.plus(&w[0], &k.plus(&w[1], &w[2])))
}

fn plus_comm<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    eq(q.0.plus(&w[0], &w[1]), q.0.plus(&w[1], &w[0]))
}

fn plus_idem<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    eq(q.0.plus(&w[0], &w[0]), w[0].clone())
}

fn plus_zero<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    eq(q.0.plus(&w[0], &q.0.zero()), w[0].clone())
}

fn times_assoc<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    eq(k.times(&k.times(&w[0], &w[1]), &w[2]), k.times(&w[0], &k.times(&w[1], &w[2])))
}

fn times_one<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    eq(k.times(&k.one(), &w[0]), w[0].clone())?;
    eq(k.times(&w[0], &k.one()), w[0].clone())
}

fn zero_nilpotent<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    eq(k.times(&k.zero(), &w[0]), k.zero())?;
    eq(k.times(&w[0], &k.zero()), k.zero())
}

fn distrib_left<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    eq(k.times(&w[0], &k.plus(&w[1], &w[2])), k.plus(&k.times(&w[0], &w[1]), &k.times(&w[0], &w[2])))
}

fn distrib_right<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    eq(k.times(&k.plus(&w[0], &w[1]), &w[2]), k.plus(&k.times(&w[0], &w[2]), &k.times(&w[1], &w[2])))
}

fn unfold_left<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    let s = k.star(&w[0]);
    le(k, k.plus(&k.one(), &k.times(&w[0], &s)), s)
}

fn unfold_right<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    let s = k.star(&w[0]);
    le(k, k.plus(&k.one(), &k.times(&s, &w[0])), s)
}

/// `b + a·x ≤ x → a*·b ≤ x`, tried with `x = c` and with `x = a*·(b + c)`,
/// which always satisfies the premise in a lawful algebra.
fn induct_left<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    let (a, b, c) = (&w[0], &w[1], &w[2]);
    let sa = k.star(a);
    for x in [c.clone(), k.times(&sa, &k.plus(b, c))] {
        if k.le(&k.plus(b, &k.times(a, &x)), &x) {
            le(k, k.times(&sa, b), x)?;
        }
    }
    Ok(())
}

/// `b + x·a ≤ x → b·a* ≤ x`, mirrored.
fn induct_right<K: KleeneAlgebra>(q: &KaEq<K>, w: &[K::Elem]) -> Result<(), Mismatch> {
    let k = &q.0;
    let (a, b, c) = (&w[0], &w[1], &w[2]);
    let sa = k.star(a);
    for x in [c.clone(), k.times(&k.plus(b, c), &sa)] {
        if k.le(&k.plus(b, &k.times(&x, a)), &x) {
            le(k, k.times(b, &sa), x)?;
        }
    }
    Ok(())
}

pub fn ka_laws<K: KleeneAlgebra>() -> Vec<Law<KaEq<K>>> {
    vec![
        Law { name: "plus_associative", shape: Shape::Three, check: plus_assoc::<K> },
        Law { name: "plus_commutative", shape: Shape::Two, check: plus_comm::<K> },
        Law { name: "plus_idempotent", shape: Shape::One, check: plus_idem::<K> },
        Law { name: "plus_zero", shape: Shape::One, check: plus_zero::<K> },
        Law { name: "times_associative", shape: Shape::Three, check: times_assoc::<K> },
        Law { name: "times_one", shape: Shape::One, check: times_one::<K> },
        Law { name: "zero_nilpotent", shape: Shape::One, check: zero_nilpotent::<K> },
        Law { name: "distrib_left", shape: Shape::Three, check: distrib_left::<K> },
        Law { name: "distrib_right", shape: Shape::Three, check: distrib_right::<K> },
        Law { name: "star_unfold_left", shape: Shape::One, check: unfold_left::<K> },
        Law { name: "star_unfold_right", shape: Shape::One, check: unfold_right::<K> },
        Law { name: "star_induct_left", shape: Shape::Three, check: induct_left::<K> },
        Law { name: "star_induct_right", shape: Shape::Three, check: induct_right::<K> },
    ]
}

pub fn check_ka_laws<K: KleeneAlgebra + Clone>(k: &K, budget: Budget) -> Result<LawReport<K::Elem>, LawError> {
    run_laws(&KaEq(k.clone()), &ka_laws::<K>(), budget)
}

/// Regular languages over a finite alphabet, including the empty language.
#[derive(Clone, Debug)]
pub struct RegularLanguageKa {
    pub alphabet: Vec<String>,
    pub depth: u32,
}

impl RegularLanguageKa {
    pub fn new<S: Into<String>>(alphabet: impl IntoIterator<Item = S>) -> Self {
        RegularLanguageKa { alphabet: alphabet.into_iter().map(Into::into).collect(), depth: 3 }
    }
}

impl KleeneAlgebra for RegularLanguageKa {
    type Elem = RegexEffect<String>;
    fn name(&self) -> String {
        "ka-regex".into()
    }
    fn zero(&self) -> Self::Elem {
        RegexEffect::empty()
    }
    fn one(&self) -> Self::Elem {
        RegexEffect::eps()
    }
    fn plus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.join(b)
    }
    fn times(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.seq(b)
    }
    fn star(&self, a: &Self::Elem) -> Self::Elem {
        a.star()
    }
    fn sample(&self, rng: &mut Rng) -> Option<Self::Elem> {
        if self.alphabet.is_empty() {
            return Some(if rng.gen_ratio(1, 2) { self.zero() } else { self.one() });
        }
        Some(RegexEffect::from_regex(random_regex(&self.alphabet, self.depth, true, rng)))
    }
    fn interesting(&self) -> Vec<Self::Elem> {
        let mut out = vec![self.zero(), self.one()];
        for s in self.alphabet.iter().take(2) {
            out.push(RegexEffect::from_regex(Regex::Sym(s.clone())));
        }
        out
    }
}

/// `({0,1}, ∨, ∧, _ ↦ 1, 0, 1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BoolKa;

impl KleeneAlgebra for BoolKa {
    type Elem = bool;
    fn name(&self) -> String {
        "bool".into()
    }
    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn plus(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn times(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn star(&self, _a: &bool) -> bool {
        true
    }
    fn elements(&self) -> Option<Vec<bool>> {
        Some(vec![false, true])
    }
    fn sample(&self, rng: &mut Rng) -> Option<bool> {
        Some(rng.gen_ratio(1, 2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bool_ka_is_lawful() {
        let r = check_ka_laws(&BoolKa, Budget::Exhaustive).unwrap();
        assert!(r.passed(), "{:?}", r.failed_laws());
    }

    #[test]
    fn one_is_the_unit() {
        let q = as_effect_quantale(BoolKa);
        assert!(q.unit());
        let r = as_effect_quantale(RegularLanguageKa::new(["a"]));
        assert_eq!(r.unit(), RegexEffect::eps());
    }

    #[test]
    fn empty_language_annihilates() {
        let k = RegularLanguageKa::new(["a", "b"]);
        let x = RegexEffect::sym("a".to_string()).star();
        assert_eq!(k.times(&k.zero(), &x), k.zero());
        assert_eq!(k.times(&x, &k.zero()), k.zero());
    }
}
