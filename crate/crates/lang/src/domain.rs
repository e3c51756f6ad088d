//! The effect quantales available to the calculus, over [`Ground`] elements.

use std::fmt;

use eqkit_core::instances::atomicity::{Atomicity, AtomicityQuantale};
use eqkit_core::instances::crit::{Crit, CritQuantale};
use eqkit_core::instances::lock::{LockEffect, LockQuantale};
use eqkit_core::instances::regex::{random_regex, RegexEffect};
use eqkit_core::multiset::Multiset;
use eqkit_core::quantale::Rng;
use eqkit_core::{Quantale, WithStar};

use crate::syntax::{Ground, Term};

#[derive(Clone, Debug)]
pub enum Domain {
    Atomicity(WithStar<AtomicityQuantale>),
    Crit(WithStar<CritQuantale>),
    /// Lock claims indexed by values; `sample_locks` only feeds the sampler.
    Locks { sample_locks: Vec<String> },
    /// Regular trace languages; `empty` admits the empty language.
    Trace { events: Vec<String>, empty: bool },
    Product(Box<Domain>, Box<Domain>),
}

impl Domain {
    pub fn atomicity() -> Domain {
        Domain::Atomicity(WithStar::derived(AtomicityQuantale).expect("finite"))
    }

    pub fn crit() -> Domain {
        Domain::Crit(WithStar::derived(CritQuantale).expect("finite"))
    }

    pub fn locks(sample_locks: &[&str]) -> Domain {
        Domain::Locks { sample_locks: sample_locks.iter().map(|s| s.to_string()).collect() }
    }

    pub fn trace(events: &[&str], empty: bool) -> Domain {
        Domain::Trace { events: events.iter().map(|s| s.to_string()).collect(), empty }
    }

    pub fn product(a: Domain, b: Domain) -> Domain {
        Domain::Product(Box::new(a), Box::new(b))
    }

    pub fn lock_atomicity(sample_locks: &[&str]) -> Domain {
        Domain::product(Domain::locks(sample_locks), Domain::atomicity())
    }

    /// Builds a constructor application `name(args)`, or `None` if this
    /// domain has no constructor by that name.
    pub fn construct(&self, name: &str, args: &[Term]) -> Result<Option<Ground>, String> {
        let nullary = |g: Ground| {
            if args.is_empty() {
                Ok(Some(g))
            } else {
                Err(format!("`{name}` takes no arguments"))
            }
        };
        match self {
            Domain::Atomicity(_) => match name.parse::<Atomicity>() {
                Ok(a) => nullary(Ground::Atom(a)),
                Err(_) => Ok(None),
            },
            Domain::Crit(_) => match name.parse::<Crit>() {
                Ok(c) => nullary(Ground::Crit(c)),
                Err(_) => Ok(None),
            },
            Domain::Locks { .. } => {
                let Some(counts) = name.strip_prefix("Locking") else { return Ok(None) };
                let Some((n, m)) = counts.split_once('-') else { return Ok(None) };
                let (Ok(n), Ok(m)) = (n.parse::<usize>(), m.parse::<usize>()) else { return Ok(None) };
                if args.len() != n + m {
                    return Err(format!("`{name}` takes {} arguments, got {}", n + m, args.len()));
                }
                let pre = Multiset::from_counts(args[..n].iter().map(|a| (a.clone(), 1)));
                let post = Multiset::from_counts(args[n..].iter().map(|a| (a.clone(), 1)));
                Ok(Some(Ground::Locks(LockEffect::new(pre, post))))
            }
            Domain::Trace { empty, .. } => match name {
                "ev" => match args {
                    [a] => Ok(Some(Ground::Trace(RegexEffect::sym(a.clone())))),
                    _ => Err(format!("`ev` takes one argument, got {}", args.len())),
                },
                "nil" if *empty => nullary(Ground::Trace(RegexEffect::empty())),
                _ => Ok(None),
            },
            Domain::Product(a, b) => {
                if let Some(g) = a.construct(name, args)? {
                    return Ok(Some(Ground::pair(g, b.unit())));
                }
                if let Some(g) = b.construct(name, args)? {
                    return Ok(Some(Ground::pair(a.unit(), g)));
                }
                Ok(None)
            }
        }
    }

    /// Pairs two component literals written `g1 & g2`.
    pub fn pair_literal(&self, parts: Vec<Ground>) -> Result<Ground, String> {
        match self {
            Domain::Product(_, _) if parts.len() == 2 => {
                let mut it = parts.into_iter();
                let (a, b) = (it.next().unwrap(), it.next().unwrap());
                match (a, b) {
                    (Ground::Pair(a, _), Ground::Pair(_, b)) => Ok(Ground::Pair(a, b)),
                    (a, b) => Ok(Ground::pair(a, b)),
                }
            }
            _ => Err(format!("`&` needs a two-component product, not {}", self.name())),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Quantale for Domain {
    type Elem = Ground;

    fn name(&self) -> String {
        match self {
            Domain::Atomicity(_) => "atomicity".into(),
            Domain::Crit(_) => "crit".into(),
            Domain::Locks { .. } => "lockset".into(),
            Domain::Trace { empty: false, .. } => "trace".into(),
            Domain::Trace { empty: true, .. } => "ka-regex".into(),
            Domain::Product(a, b) => format!("{}⊗{}", a.name(), b.name()),
        }
    }

    fn unit(&self) -> Ground {
        match self {
            Domain::Atomicity(q) => Ground::Atom(q.unit()),
            Domain::Crit(q) => Ground::Crit(q.unit()),
            Domain::Locks { .. } => Ground::Locks(LockEffect::unit()),
            Domain::Trace { .. } => Ground::Trace(RegexEffect::eps()),
            Domain::Product(a, b) => Ground::pair(a.unit(), b.unit()),
        }
    }

    fn join(&self, x: &Ground, y: &Ground) -> Option<Ground> {
        match (self, x, y) {
            (Domain::Atomicity(q), Ground::Atom(a), Ground::Atom(b)) => q.join(a, b).map(Ground::Atom),
            (Domain::Crit(q), Ground::Crit(a), Ground::Crit(b)) => q.join(a, b).map(Ground::Crit),
            (Domain::Locks { .. }, Ground::Locks(a), Ground::Locks(b)) => a.join(b).map(Ground::Locks),
            (Domain::Trace { .. }, Ground::Trace(a), Ground::Trace(b)) => Some(Ground::Trace(a.join(b))),
            (Domain::Product(p, q), Ground::Pair(a1, b1), Ground::Pair(a2, b2)) => {
                Some(Ground::pair(p.join(a1, a2)?, q.join(b1, b2)?))
            }
            _ => None,
        }
    }

    fn seq(&self, x: &Ground, y: &Ground) -> Option<Ground> {
        match (self, x, y) {
            (Domain::Atomicity(q), Ground::Atom(a), Ground::Atom(b)) => q.seq(a, b).map(Ground::Atom),
            (Domain::Crit(q), Ground::Crit(a), Ground::Crit(b)) => q.seq(a, b).map(Ground::Crit),
            (Domain::Locks { .. }, Ground::Locks(a), Ground::Locks(b)) => Some(Ground::Locks(a.seq(b))),
            (Domain::Trace { .. }, Ground::Trace(a), Ground::Trace(b)) => Some(Ground::Trace(a.seq(b))),
            (Domain::Product(p, q), Ground::Pair(a1, b1), Ground::Pair(a2, b2)) => {
                Some(Ground::pair(p.seq(a1, a2)?, q.seq(b1, b2)?))
            }
            _ => None,
        }
    }

    fn has_star(&self) -> bool {
        true
    }

    fn star(&self, x: &Ground) -> Option<Ground> {
        match (self, x) {
            (Domain::Atomicity(q), Ground::Atom(a)) => q.star(a).map(Ground::Atom),
            (Domain::Crit(q), Ground::Crit(a)) => q.star(a).map(Ground::Crit),
            (Domain::Locks { .. }, Ground::Locks(a)) => a.star().map(Ground::Locks),
            (Domain::Trace { .. }, Ground::Trace(a)) => Some(Ground::Trace(a.star())),
            (Domain::Product(p, q), Ground::Pair(a, b)) => Some(Ground::pair(p.star(a)?, q.star(b)?)),
            _ => None,
        }
    }

    fn elements(&self) -> Option<Vec<Ground>> {
        match self {
            Domain::Atomicity(q) => Some(q.elements()?.into_iter().map(Ground::Atom).collect()),
            Domain::Crit(q) => Some(q.elements()?.into_iter().map(Ground::Crit).collect()),
            Domain::Product(p, q) => {
                let (xs, ys) = (p.elements()?, q.elements()?);
                Some(xs.iter().flat_map(|x| ys.iter().map(move |y| Ground::pair(x.clone(), y.clone()))).collect())
            }
            _ => None,
        }
    }

    fn sample(&self, rng: &mut Rng) -> Option<Ground> {
        match self {
            Domain::Atomicity(q) => q.sample(rng).map(Ground::Atom),
            Domain::Crit(q) => q.sample(rng).map(Ground::Crit),
            Domain::Locks { sample_locks } => {
                let q = LockQuantale::new(sample_locks.iter().map(|l| Term::prim(l)).collect());
                q.sample(rng).map(Ground::Locks)
            }
            Domain::Trace { events, empty } => {
                let alphabet: Vec<Term> = events.iter().map(|e| Term::prim(e)).collect();
                Some(Ground::Trace(RegexEffect::from_regex(random_regex(&alphabet, 3, *empty, rng))))
            }
            Domain::Product(p, q) => Some(Ground::pair(p.sample(rng)?, q.sample(rng)?)),
        }
    }

    fn interesting(&self) -> Vec<Ground> {
        match self {
            Domain::Atomicity(q) => q.interesting().into_iter().map(Ground::Atom).collect(),
            Domain::Crit(q) => q.interesting().into_iter().map(Ground::Crit).collect(),
            Domain::Locks { sample_locks } => {
                let q = LockQuantale::new(sample_locks.iter().map(|l| Term::prim(l)).collect());
                q.interesting().into_iter().map(Ground::Locks).collect()
            }
            Domain::Trace { events, .. } => {
                let mut out = vec![self.unit()];
                out.extend(events.iter().map(|e| Ground::Trace(RegexEffect::sym(Term::prim(e)))));
                out
            }
            Domain::Product(p, q) => {
                let ys = q.interesting();
                p.interesting().into_iter().flat_map(|x| ys.iter().map(move |y| Ground::pair(x.clone(), y.clone()))).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use eqkit_core::{check_laws, check_star_laws, Budget};

    #[test]
    fn lock_atomicity_is_lawful_on_samples() {
        let d = Domain::lock_atomicity(&["l", "m"]);
        assert!(check_laws(&d, Budget::sampled(300, 1)).unwrap().passed());
        assert!(check_star_laws(&d, Budget::sampled(300, 1)).unwrap().passed());
    }

    #[test]
    fn constructors() {
        let d = Domain::lock_atomicity(&[]);
        let acq = d.construct("Locking0-1", &[Term::var("x")]).unwrap().unwrap();
        assert_eq!(acq.to_string(), "(∅,{x})⊗B");
        let r = d.construct("R", &[]).unwrap().unwrap();
        assert_eq!(d.pair_literal(vec![acq, r]).unwrap().to_string(), "(∅,{x})⊗R");
        assert!(d.construct("Locking1-0", &[]).is_err());
        assert_eq!(d.construct("Nope", &[]).unwrap(), None);
    }

    #[test]
    fn mismatched_components_are_undefined() {
        let d = Domain::atomicity();
        assert_eq!(d.seq(&Ground::Crit(Crit::Eps), &Ground::Atom(Atomicity::B)), None);
    }
}
