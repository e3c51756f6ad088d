//! Finite-trace effects: regular languages of events.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::Rng as _;

use crate::automata::{Dfa, Nfa, Regex};
use crate::quantale::{Quantale, Rng};

/// A regular language, compared by its canonical minimal DFA. The regex is
/// only a representative kept for printing.
#[derive(Clone, Debug)]
pub struct RegexEffect<S> {
    dfa: Dfa<S>,
    repr: Regex<S>,
}

impl<S: Clone + Ord> RegexEffect<S> {
    pub fn from_regex(repr: Regex<S>) -> Self {
        RegexEffect { dfa: Dfa::from_regex(&repr), repr }
    }

    pub fn empty() -> Self {
        Self::from_regex(Regex::Empty)
    }

    pub fn eps() -> Self {
        Self::from_regex(Regex::Eps)
    }

    pub fn sym(s: S) -> Self {
        Self::from_regex(Regex::Sym(s))
    }

    pub fn word(w: &[S]) -> Self {
        Self::from_regex(w.iter().fold(Regex::Eps, |r, s| Regex::cat(r, Regex::Sym(s.clone()))))
    }

    pub fn dfa(&self) -> &Dfa<S> {
        &self.dfa
    }

    pub fn regex(&self) -> &Regex<S> {
        &self.repr
    }

    fn build(nfa: Nfa<S>, repr: Regex<S>, keep: &[&Self]) -> Self {
        let dfa = nfa.to_dfa();
        if let Some(k) = keep.iter().find(|k| k.dfa == dfa) {
            return (*k).clone();
        }
        let repr = if dfa.is_empty() {
            Regex::Empty
        } else if dfa == Dfa::from_regex(&Regex::Eps) {
            Regex::Eps
        } else {
            repr
        };
        RegexEffect { dfa, repr }
    }

    pub fn seq(&self, other: &Self) -> Self {
        let n = Nfa::concat(&Nfa::from_dfa(&self.dfa), &Nfa::from_dfa(&other.dfa));
        Self::build(n, Regex::cat(self.repr.clone(), other.repr.clone()), &[])
    }

    pub fn join(&self, other: &Self) -> Self {
        let n = Nfa::union(&Nfa::from_dfa(&self.dfa), &Nfa::from_dfa(&other.dfa));
        Self::build(n, Regex::alt(self.repr.clone(), other.repr.clone()), &[other, self])
    }

    pub fn star(&self) -> Self {
        let n = Nfa::star(&Nfa::from_dfa(&self.dfa));
        Self::build(n, Regex::star(self.repr.clone()), &[self])
    }

    pub fn accepts(&self, word: &[S]) -> bool {
        self.dfa.accepts(word)
    }

    pub fn is_empty(&self) -> bool {
        self.dfa.is_empty()
    }

    /// Language inclusion.
    pub fn subset_of(&self, other: &Self) -> bool {
        self.join(other) == *other
    }

    /// Relabels every event; the image of a language under a letter map.
    pub fn map<T: Clone + Ord>(&self, f: &dyn Fn(&S) -> T) -> RegexEffect<T> {
        let dfa = Nfa::from_dfa(&self.dfa).relabel(f).to_dfa();
        RegexEffect { dfa, repr: self.repr.map(f) }
    }
}

impl<S: PartialEq> PartialEq for RegexEffect<S> {
    fn eq(&self, other: &Self) -> bool {
        self.dfa == other.dfa
    }
}

impl<S: Eq> Eq for RegexEffect<S> {}

impl<S: Ord> PartialOrd for RegexEffect<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Ord> Ord for RegexEffect<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dfa.cmp(&other.dfa)
    }
}

impl<S: Hash> Hash for RegexEffect<S> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.dfa.hash(state)
    }
}

impl<S: fmt::Display> fmt::Display for RegexEffect<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.repr)
    }
}

/// Random regular expressions over a finite alphabet.
pub fn random_regex<S: Clone + PartialEq>(alphabet: &[S], depth: u32, allow_empty: bool, rng: &mut Rng) -> Regex<S> {
    let leaf = |rng: &mut Rng| match rng.gen_range(0..8) {
        0 => Regex::Eps,
        1 if allow_empty => Regex::Empty,
        _ => Regex::Sym(alphabet[rng.gen_range(0..alphabet.len())].clone()),
    };
    if depth == 0 || rng.gen_ratio(1, 4) {
        return leaf(rng);
    }
    match rng.gen_range(0..3) {
        0 => Regex::Cat(
            Box::new(random_regex(alphabet, depth - 1, allow_empty, rng)),
            Box::new(random_regex(alphabet, depth - 1, allow_empty, rng)),
        ),
        1 => Regex::Alt(
            Box::new(random_regex(alphabet, depth - 1, allow_empty, rng)),
            Box::new(random_regex(alphabet, depth - 1, allow_empty, rng)),
        ),
        _ => Regex::Star(Box::new(random_regex(alphabet, depth - 1, allow_empty, rng))),
    }
}

/// Regular languages with union, concatenation and Kleene star. The empty
/// language is excluded from samples unless `allow_empty` is set.
#[derive(Clone, Debug)]
pub struct RegexQuantale<S> {
    pub alphabet: Vec<S>,
    pub depth: u32,
    pub allow_empty: bool,
}

impl<S> RegexQuantale<S> {
    pub fn new(alphabet: Vec<S>) -> Self {
        RegexQuantale { alphabet, depth: 3, allow_empty: false }
    }
}

impl<S: Clone + Ord + fmt::Debug + fmt::Display> Quantale for RegexQuantale<S> {
    type Elem = RegexEffect<S>;
    fn name(&self) -> String {
        "regex".into()
    }
    fn unit(&self) -> RegexEffect<S> {
        RegexEffect::eps()
    }
    fn join(&self, a: &RegexEffect<S>, b: &RegexEffect<S>) -> Option<RegexEffect<S>> {
        Some(a.join(b))
    }
    fn seq(&self, a: &RegexEffect<S>, b: &RegexEffect<S>) -> Option<RegexEffect<S>> {
        Some(a.seq(b))
    }
    fn has_star(&self) -> bool {
        true
    }
    fn star(&self, a: &RegexEffect<S>) -> Option<RegexEffect<S>> {
        Some(a.star())
    }
    fn sample(&self, rng: &mut Rng) -> Option<RegexEffect<S>> {
        if self.alphabet.is_empty() {
            return Some(RegexEffect::eps());
        }
        Some(RegexEffect::from_regex(random_regex(&self.alphabet, self.depth, self.allow_empty, rng)))
    }
    fn interesting(&self) -> Vec<RegexEffect<S>> {
        let mut out = vec![RegexEffect::eps()];
        if self.allow_empty {
            out.push(RegexEffect::empty());
        }
        for s in self.alphabet.iter().take(2) {
            out.push(RegexEffect::sym(s.clone()));
            out.push(RegexEffect::sym(s.clone()).star());
        }
        out
    }
}
