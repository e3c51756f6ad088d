//! Value-indexed families of effect quantales, substitution of index values,
//! and checks for homomorphisms and monotone families.

use std::fmt;

use crate::instances::atomicity::Atomicity;
use crate::instances::crit::Crit;
use crate::instances::lock::{LockEffect, LockQuantale};
use crate::instances::product::{Pair, Product};
use crate::instances::regex::{RegexEffect, RegexQuantale};
use crate::instances::trivial::One;
use crate::quantale::{leq, rng, Budget, LawError, Quantale, WitnessSource};
use crate::report::{Counterexample, LawReport, LawResult, Mismatch};

/// Elements that mention index values of type `K`.
pub trait Reindex<K>: Sized {
    fn reindex(&self, f: &dyn Fn(&K) -> K) -> Self;
}

/// Applies `f` to every index value inside `e`.
pub fn map_effect<K, E: Reindex<K>>(f: &dyn Fn(&K) -> K, e: &E) -> E {
    e.reindex(f)
}

impl<K: Ord + Clone> Reindex<K> for LockEffect<K> {
    fn reindex(&self, f: &dyn Fn(&K) -> K) -> Self {
        self.map(f)
    }
}

impl<K: Ord + Clone> Reindex<K> for RegexEffect<K> {
    fn reindex(&self, f: &dyn Fn(&K) -> K) -> Self {
        self.map(f)
    }
}

impl<K, A: Reindex<K>, B: Reindex<K>> Reindex<K> for Pair<A, B> {
    fn reindex(&self, f: &dyn Fn(&K) -> K) -> Self {
        Pair(self.0.reindex(f), self.1.reindex(f))
    }
}

macro_rules! constant_reindex {
    ($($t:ty),*) => {
        $(impl<K> Reindex<K> for $t {
            fn reindex(&self, _f: &dyn Fn(&K) -> K) -> Self {
                self.clone()
            }
        })*
    };
}

constant_reindex!(Atomicity, Crit, One, u64, bool);

/// A family `Q(S)` of effect quantales indexed by finite sets of values.
pub trait IndexedQuantale<K> {
    type Q: Quantale;
    fn at(&self, index: &[K]) -> Self::Q;
    fn map(&self, f: &dyn Fn(&K) -> K, e: &<Self::Q as Quantale>::Elem) -> <Self::Q as Quantale>::Elem;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LockFamily;

impl<K: Ord + Clone + fmt::Debug + fmt::Display> IndexedQuantale<K> for LockFamily {
    type Q = LockQuantale<K>;
    fn at(&self, index: &[K]) -> LockQuantale<K> {
        LockQuantale::new(index.to_vec())
    }
    fn map(&self, f: &dyn Fn(&K) -> K, e: &LockEffect<K>) -> LockEffect<K> {
        e.reindex(f)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RegexFamily;

impl<K: Ord + Clone + fmt::Debug + fmt::Display> IndexedQuantale<K> for RegexFamily {
    type Q = RegexQuantale<K>;
    fn at(&self, index: &[K]) -> RegexQuantale<K> {
        RegexQuantale::new(index.to_vec())
    }
    fn map(&self, f: &dyn Fn(&K) -> K, e: &RegexEffect<K>) -> RegexEffect<K> {
        e.reindex(f)
    }
}

/// A quantale that ignores its index.
#[derive(Clone, Debug)]
pub struct Constant<Q>(pub Q);

impl<K, Q: Quantale + Clone> IndexedQuantale<K> for Constant<Q> {
    type Q = Q;
    fn at(&self, _index: &[K]) -> Q {
        self.0.clone()
    }
    fn map(&self, _f: &dyn Fn(&K) -> K, e: &Q::Elem) -> Q::Elem {
        e.clone()
    }
}

/// Pointwise product of two families over the same index values.
#[derive(Clone, Debug)]
pub struct ProductFamily<F, G>(pub F, pub G);

impl<K, F: IndexedQuantale<K>, G: IndexedQuantale<K>> IndexedQuantale<K> for ProductFamily<F, G> {
    type Q = Product<F::Q, G::Q>;
    fn at(&self, index: &[K]) -> Self::Q {
        Product::new(self.0.at(index), self.1.at(index))
    }
    fn map(&self, f: &dyn Fn(&K) -> K, e: &<Self::Q as Quantale>::Elem) -> <Self::Q as Quantale>::Elem {
        Pair(self.0.map(f, &e.0), self.1.map(f, &e.1))
    }
}

/// A candidate homomorphism `m : S → T` to be checked on samples of `S`.
pub struct HomomorphismWitness<'a, S: Quantale, T: Quantale> {
    pub source: &'a S,
    pub target: &'a T,
    pub map: &'a dyn Fn(&S::Elem) -> T::Elem,
}

fn refines<T: Quantale>(target: &T, image: Option<T::Elem>, of_result: T::Elem) -> Result<(), Mismatch> {
    match image {
        None => Err(Mismatch::new("undefined", format!("defined and below {of_result}"))),
        Some(r) if leq(target, &r, &of_result) => Ok(()),
        Some(r) => Err(Mismatch::new(r.to_string(), format!("below {of_result}"))),
    }
}

/// Checks `m(x)▷m(y) ⊑ m(x▷y)` and `m(x)⊔m(y) ⊑ m(x⊔y)` whenever the source
/// side is defined, and `m(I) = I`.
pub fn check_homomorphism<S: Quantale, T: Quantale>(
    w: &HomomorphismWitness<'_, S, T>,
    budget: Budget,
) -> Result<LawReport<S::Elem>, LawError> {
    let src = WitnessSource::new(w.source, budget)?;
    let m = w.map;
    let pairs: Vec<Vec<S::Elem>> = match budget {
        Budget::Exhaustive => src.all(crate::quantale::Shape::Two),
        Budget::Sampled { samples, seed } => {
            let mut r = rng(seed);
            (0..samples).map(|_| src.random(crate::quantale::Shape::Two, &mut r)).collect()
        }
    };
    let mut report = LawReport::new(format!("{} → {}", w.source.name(), w.target.name()));
    type Op<Q> = fn(&Q, &<Q as Quantale>::Elem, &<Q as Quantale>::Elem) -> Option<<Q as Quantale>::Elem>;
    let ops: [(&'static str, Op<S>, Op<T>); 2] = [
        ("refines_seq", |q, a, b| q.seq(a, b), |q, a, b| q.seq(a, b)),
        ("refines_join", |q, a, b| q.join(a, b), |q, a, b| q.join(a, b)),
    ];
    for (name, sop, top) in ops {
        let mut res = LawResult::new(name);
        for p in &pairs {
            let Some(z) = sop(w.source, &p[0], &p[1]) else { continue };
            res.checked += 1;
            if let Err(mm) = refines(w.target, top(w.target, &m(&p[0]), &m(&p[1])), m(&z)) {
                res.record(Counterexample { law: name, witnesses: p.clone(), mismatch: mm });
            }
        }
        report.laws.push(res);
    }
    let mut unit = LawResult::new("preserves_unit");
    unit.checked = 1;
    let mu = m(&w.source.unit());
    if mu != w.target.unit() {
        unit.record(Counterexample {
            law: "preserves_unit",
            witnesses: vec![w.source.unit()],
            mismatch: Mismatch::new(mu.to_string(), w.target.unit().to_string()),
        });
    }
    report.laws.push(unit);
    Ok(report)
}

/// For `S ⊆ T`, checks that elements of `Q(S)` behave identically in `Q(T)`:
/// same unit, and `seq`/`join` defined with the same results.
pub fn check_monotone<K, F>(family: &F, small: &[K], large: &[K], budget: Budget) -> Result<LawReport<<F::Q as Quantale>::Elem>, LawError>
where
    K: PartialEq,
    F: IndexedQuantale<K>,
{
    assert!(small.iter().all(|k| large.contains(k)), "index sets must be nested");
    let qs = family.at(small);
    let qt = family.at(large);
    let src = WitnessSource::new(&qs, budget)?;
    let pairs: Vec<Vec<<F::Q as Quantale>::Elem>> = match budget {
        Budget::Exhaustive => src.all(crate::quantale::Shape::Two),
        Budget::Sampled { samples, seed } => {
            let mut r = rng(seed);
            (0..samples).map(|_| src.random(crate::quantale::Shape::Two, &mut r)).collect()
        }
    };
    let mut report = LawReport::new(format!("{} (inclusion)", qs.name()));
    for name in ["same_seq", "same_join"] {
        let mut res = LawResult::new(name);
        for p in &pairs {
            res.checked += 1;
            let (a, b) = if name == "same_seq" {
                (qs.seq(&p[0], &p[1]), qt.seq(&p[0], &p[1]))
            } else {
                (qs.join(&p[0], &p[1]), qt.join(&p[0], &p[1]))
            };
            if a != b {
                res.record(Counterexample {
                    law: name,
                    witnesses: p.clone(),
                    mismatch: Mismatch::new(crate::quantale::show(&b), crate::quantale::show(&a)),
                });
            }
        }
        report.laws.push(res);
    }
    let mut unit = LawResult::new("same_unit");
    unit.checked = 1;
    if qs.unit() != qt.unit() {
        unit.record(Counterexample {
            law: "same_unit",
            witnesses: vec![],
            mismatch: Mismatch::new(qt.unit().to_string(), qs.unit().to_string()),
        });
    }
    report.laws.push(unit);
    Ok(report)
}

/// Checks `map(id) = id` and `map(f∘g) = map(f)∘map(g)` on samples of `Q(S)`.
pub fn check_functor_laws<K, F>(
    family: &F,
    index: &[K],
    f: &dyn Fn(&K) -> K,
    g: &dyn Fn(&K) -> K,
    budget: Budget,
) -> Result<LawReport<<F::Q as Quantale>::Elem>, LawError>
where
    K: Clone,
    F: IndexedQuantale<K>,
{
    let q = family.at(index);
    let src = WitnessSource::new(&q, budget)?;
    let xs: Vec<Vec<<F::Q as Quantale>::Elem>> = match budget {
        Budget::Exhaustive => src.all(crate::quantale::Shape::One),
        Budget::Sampled { samples, seed } => {
            let mut r = rng(seed);
            (0..samples).map(|_| src.random(crate::quantale::Shape::One, &mut r)).collect()
        }
    };
    let mut report = LawReport::new(format!("{} (functor)", q.name()));
    let mut ident = LawResult::new("map_identity");
    let mut comp = LawResult::new("map_composition");
    let fg = |k: &K| f(&g(k));
    for x in xs {
        ident.checked += 1;
        let y = family.map(&|k: &K| k.clone(), &x[0]);
        if y != x[0] {
            ident.record(Counterexample {
                law: "map_identity",
                witnesses: x.clone(),
                mismatch: Mismatch::new(y.to_string(), x[0].to_string()),
            });
        }
        comp.checked += 1;
        let whole = family.map(&fg, &x[0]);
        let parts = family.map(f, &family.map(g, &x[0]));
        if whole != parts {
            comp.record(Counterexample {
                law: "map_composition",
                witnesses: x,
                mismatch: Mismatch::new(parts.to_string(), whole.to_string()),
            });
        }
    }
    report.laws.push(ident);
    report.laws.push(comp);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiset::Multiset;

    #[test]
    fn substituting_a_concrete_lock() {
        let e = LockEffect::acquire("x");
        let r = map_effect(&|k: &&str| if *k == "x" { "l" } else { k }, &e);
        assert_eq!(r, LockEffect::acquire("l"));
    }

    #[test]
    fn merged_locks_sum_multiplicities() {
        let e = LockEffect::new(Multiset::new(), ["x", "y"].into_iter().collect());
        let r = map_effect(&|_: &&str| "z", &e);
        assert_eq!(r.post.count(&"z"), 2);
    }

    #[test]
    fn product_maps_only_the_indexed_half() {
        let e = Pair(LockEffect::release("x"), Atomicity::L);
        let r = map_effect(&|_: &&str| "l", &e);
        assert_eq!(r, Pair(LockEffect::release("l"), Atomicity::L));
    }

    #[test]
    fn unit_breaking_map_is_reported() {
        let q = LockQuantale::new(vec!["a"]);
        let bad = |e: &LockEffect<&'static str>| LockEffect::new(e.pre.clone(), e.post.sum(&Multiset::singleton("a")));
        let w = HomomorphismWitness { source: &q, target: &q, map: &bad };
        let r = check_homomorphism(&w, Budget::sampled(50, 0)).unwrap();
        assert!(!r.law("preserves_unit").unwrap().passed());
    }
}
