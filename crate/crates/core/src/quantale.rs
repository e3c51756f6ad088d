//! The effect quantale interface, its derived order, the law-checking engine
//! and the free iteration operator on finite carriers.

use std::collections::BTreeMap;
use std::fmt::{Debug, Display};

use rand::{Rng as _, SeedableRng};
use thiserror::Error;

use crate::report::{Counterexample, LawReport, LawResult, Mismatch};

/// Deterministic generator used by every sampler in the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// A partial join semilattice with a partial monoid whose product distributes
/// over joins. Absent results mean "undefined".
pub trait Quantale {
    type Elem: Clone + Ord + Debug + Display;

    fn name(&self) -> String;
    fn unit(&self) -> Self::Elem;
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;
    fn seq(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;

    /// Whether this quantale carries an iteration operator at all.
    fn has_star(&self) -> bool {
        false
    }
    fn star(&self, _a: &Self::Elem) -> Option<Self::Elem> {
        None
    }

    /// The whole carrier, when it is finite.
    fn elements(&self) -> Option<Vec<Self::Elem>> {
        None
    }
    fn sample(&self, _rng: &mut Rng) -> Option<Self::Elem> {
        None
    }
    /// Elements mixed into sampled law checks alongside random ones.
    fn interesting(&self) -> Vec<Self::Elem> {
        vec![self.unit()]
    }
}

impl<Q: Quantale + ?Sized> Quantale for &Q {
    type Elem = Q::Elem;
    fn name(&self) -> String {
        (**self).name()
    }
    fn unit(&self) -> Self::Elem {
        (**self).unit()
    }
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        (**self).join(a, b)
    }
    fn seq(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        (**self).seq(a, b)
    }
    fn has_star(&self) -> bool {
        (**self).has_star()
    }
    fn star(&self, a: &Self::Elem) -> Option<Self::Elem> {
        (**self).star(a)
    }
    fn elements(&self) -> Option<Vec<Self::Elem>> {
        (**self).elements()
    }
    fn sample(&self, rng: &mut Rng) -> Option<Self::Elem> {
        (**self).sample(rng)
    }
    fn interesting(&self) -> Vec<Self::Elem> {
        (**self).interesting()
    }
}

/// `a ⊑ b` iff `a ⊔ b` is defined and equals `b`.
pub fn leq<Q: Quantale + ?Sized>(q: &Q, a: &Q::Elem, b: &Q::Elem) -> bool {
    q.join(a, b).as_ref() == Some(b)
}

pub fn is_subidempotent<Q: Quantale + ?Sized>(q: &Q, a: &Q::Elem) -> bool {
    q.seq(a, a).is_some_and(|aa| leq(q, &aa, a))
}

/// `x⁰ = I`, `xⁿ = xⁿ⁻¹ ▷ x`.
pub fn seq_power<Q: Quantale + ?Sized>(q: &Q, x: &Q::Elem, n: usize) -> Option<Q::Elem> {
    let mut acc = q.unit();
    for _ in 0..n {
        acc = q.seq(&acc, x)?;
    }
    Some(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

impl Budget {
    pub fn sampled(samples: usize, seed: u64) -> Self {
        Budget::Sampled { samples, seed }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::Sampled { samples: 1000, seed: 0 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LawError {
    #[error("{0} has no finite enumerator")]
    NoEnumerator(String),
    #[error("{0} has neither a sampler nor an enumerator")]
    NoSampler(String),
    #[error("{0} has no iteration operator")]
    NoStar(String),
}

/// How the witnesses of a law are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    One,
    Two,
    Three,
    /// `[a, b, c, d]` with `a ⊑ b` and `c ⊑ d`.
    OrderedPairs,
}

pub type LawCheck<Q> = fn(&Q, &[<Q as Quantale>::Elem]) -> Result<(), Mismatch>;

pub struct Law<Q: Quantale + ?Sized> {
    pub name: &'static str,
    pub shape: Shape,
    pub check: LawCheck<Q>,
}

impl<Q: Quantale + ?Sized> Clone for Law<Q> {
    fn clone(&self) -> Self {
        Law { name: self.name, shape: self.shape, check: self.check }
    }
}

pub(crate) fn show<E: Display>(e: &Option<E>) -> String {
    match e {
        Some(e) => e.to_string(),
        None => "undefined".to_string(),
    }
}

fn same<E: PartialEq + Display>(observed: Option<E>, expected: Option<E>) -> Result<(), Mismatch> {
    if observed == expected {
        Ok(())
    } else {
        Err(Mismatch::new(show(&observed), show(&expected)))
    }
}

fn require(ok: bool, observed: impl Into<String>, expected: impl Into<String>) -> Result<(), Mismatch> {
    if ok {
        Ok(())
    } else {
        Err(Mismatch::new(observed, expected))
    }
}

fn bind2<Q: Quantale + ?Sized>(
    q: &Q,
    f: fn(&Q, &Q::Elem, &Q::Elem) -> Option<Q::Elem>,
    a: Option<Q::Elem>,
    b: Option<Q::Elem>,
) -> Option<Q::Elem> {
    f(q, a.as_ref()?, b.as_ref()?)
}

fn join_op<Q: Quantale + ?Sized>(q: &Q, a: &Q::Elem, b: &Q::Elem) -> Option<Q::Elem> {
    q.join(a, b)
}

fn seq_op<Q: Quantale + ?Sized>(q: &Q, a: &Q::Elem, b: &Q::Elem) -> Option<Q::Elem> {
    q.seq(a, b)
}

fn join_idempotent<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    same(q.join(&w[0], &w[0]), Some(w[0].clone()))
}

fn join_commutative<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    same(q.join(&w[0], &w[1]), q.join(&w[1], &w[0]))
}

fn join_associative<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    let (a, b, c) = (&w[0], &w[1], &w[2]);
    let left = bind2(q, join_op, q.join(a, b), Some(c.clone()));
    let right = bind2(q, join_op, Some(a.clone()), q.join(b, c));
    same(left, right)
}

fn seq_associative<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    let (a, b, c) = (&w[0], &w[1], &w[2]);
    let left = bind2(q, seq_op, q.seq(a, b), Some(c.clone()));
    let right = bind2(q, seq_op, Some(a.clone()), q.seq(b, c));
    same(left, right)
}

fn unit_left<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    same(q.seq(&q.unit(), &w[0]), Some(w[0].clone()))
}

fn unit_right<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    same(q.seq(&w[0], &q.unit()), Some(w[0].clone()))
}

fn distrib_left<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    let (a, b, c) = (&w[0], &w[1], &w[2]);
    let left = bind2(q, seq_op, Some(a.clone()), q.join(b, c));
    let right = bind2(q, join_op, q.seq(a, b), q.seq(a, c));
    same(left, right)
}

fn distrib_right<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    let (a, b, c) = (&w[0], &w[1], &w[2]);
    let left = bind2(q, seq_op, q.join(a, b), Some(c.clone()));
    let right = bind2(q, join_op, q.seq(a, c), q.seq(b, c));
    same(left, right)
}

fn monotone<Q: Quantale + ?Sized>(
    q: &Q,
    w: &[Q::Elem],
    op: fn(&Q, &Q::Elem, &Q::Elem) -> Option<Q::Elem>,
) -> Result<(), Mismatch> {
    let (a, b, c, d) = (&w[0], &w[1], &w[2], &w[3]);
    let Some(big) = op(q, b, d) else { return Ok(()) };
    match op(q, a, c) {
        None => Err(Mismatch::new("undefined", format!("defined and below {big}"))),
        Some(small) => require(leq(q, &small, &big), small.to_string(), format!("below {big}")),
    }
}

fn seq_monotone<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    monotone(q, w, seq_op)
}

fn join_monotone<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    monotone(q, w, join_op)
}

fn undefined_upward<Q: Quantale + ?Sized>(
    q: &Q,
    w: &[Q::Elem],
    op: fn(&Q, &Q::Elem, &Q::Elem) -> Option<Q::Elem>,
) -> Result<(), Mismatch> {
    let (a, b, c, d) = (&w[0], &w[1], &w[2], &w[3]);
    if op(q, a, c).is_some() {
        return Ok(());
    }
    let big = op(q, b, d);
    require(big.is_none(), show(&big), "undefined")
}

fn seq_undefined_upward<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    undefined_upward(q, w, seq_op)
}

fn join_undefined_upward<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    undefined_upward(q, w, join_op)
}

pub fn quantale_laws<Q: Quantale + ?Sized>() -> Vec<Law<Q>> {
    vec![
        Law { name: "join_idempotent", shape: Shape::One, check: join_idempotent::<Q> },
        Law { name: "join_commutative", shape: Shape::Two, check: join_commutative::<Q> },
        Law { name: "join_associative", shape: Shape::Three, check: join_associative::<Q> },
        Law { name: "seq_associative", shape: Shape::Three, check: seq_associative::<Q> },
        Law { name: "unit_left", shape: Shape::One, check: unit_left::<Q> },
        Law { name: "unit_right", shape: Shape::One, check: unit_right::<Q> },
        Law { name: "distrib_left", shape: Shape::Three, check: distrib_left::<Q> },
        Law { name: "distrib_right", shape: Shape::Three, check: distrib_right::<Q> },
        Law { name: "seq_monotone", shape: Shape::OrderedPairs, check: seq_monotone::<Q> },
        Law { name: "join_monotone", shape: Shape::OrderedPairs, check: join_monotone::<Q> },
        Law {
            name: "seq_undefined_upward_closed",
            shape: Shape::OrderedPairs,
            check: seq_undefined_upward::<Q>,
        },
        Law {
            name: "join_undefined_upward_closed",
            shape: Shape::OrderedPairs,
            check: join_undefined_upward::<Q>,
        },
    ]
}

fn star_extensive<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    let Some(s) = q.star(&w[0]) else { return Ok(()) };
    require(leq(q, &w[0], &s), s.to_string(), format!("above {}", w[0]))
}

fn star_idempotent<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    let Some(s) = q.star(&w[0]) else { return Ok(()) };
    same(q.star(&s), Some(s))
}

fn star_monotone<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    let (a, b) = (&w[0], &w[1]);
    match (q.star(a), q.star(b)) {
        (Some(sa), Some(sb)) => require(leq(q, &sa, &sb), sa.to_string(), format!("below {sb}")),
        _ => Ok(()),
    }
}

fn star_foldable<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    let Some(s) = q.star(&w[0]) else { return Ok(()) };
    match q.seq(&s, &s) {
        None => Err(Mismatch::new("undefined", format!("defined and below {s}"))),
        Some(ss) => require(leq(q, &ss, &s), ss.to_string(), format!("below {s}")),
    }
}

fn star_possibly_empty<Q: Quantale + ?Sized>(q: &Q, w: &[Q::Elem]) -> Result<(), Mismatch> {
    let Some(s) = q.star(&w[0]) else { return Ok(()) };
    require(leq(q, &q.unit(), &s), s.to_string(), format!("above {}", q.unit()))
}

pub fn star_laws<Q: Quantale + ?Sized>() -> Vec<Law<Q>> {
    vec![
        Law { name: "star_extensive", shape: Shape::One, check: star_extensive::<Q> },
        Law { name: "star_idempotent", shape: Shape::One, check: star_idempotent::<Q> },
        Law { name: "star_monotone", shape: Shape::OrderedPairs, check: star_monotone::<Q> },
        Law { name: "star_foldable", shape: Shape::One, check: star_foldable::<Q> },
        Law { name: "star_possibly_empty", shape: Shape::One, check: star_possibly_empty::<Q> },
    ]
}

/// Draws law witnesses either from the full carrier or from the sampler.
pub struct WitnessSource<'a, Q: Quantale + ?Sized> {
    q: &'a Q,
    pool: Vec<Q::Elem>,
    carrier: Option<Vec<Q::Elem>>,
    sampled: bool,
}

impl<'a, Q: Quantale + ?Sized> WitnessSource<'a, Q> {
    pub fn new(q: &'a Q, budget: Budget) -> Result<Self, LawError> {
        let carrier = q.elements();
        match budget {
            Budget::Exhaustive if carrier.is_none() => Err(LawError::NoEnumerator(q.name())),
            Budget::Exhaustive => Ok(WitnessSource { q, pool: Vec::new(), carrier, sampled: false }),
            Budget::Sampled { .. } => {
                let mut probe = rng(0);
                if carrier.is_none() && q.sample(&mut probe).is_none() {
                    return Err(LawError::NoSampler(q.name()));
                }
                Ok(WitnessSource { q, pool: q.interesting(), carrier, sampled: true })
            }
        }
    }

    pub fn draw(&self, rng: &mut Rng) -> Q::Elem {
        if !self.pool.is_empty() && rng.gen_ratio(1, 5) {
            return self.pool[rng.gen_range(0..self.pool.len())].clone();
        }
        if let Some(c) = &self.carrier {
            return c[rng.gen_range(0..c.len())].clone();
        }
        self.q.sample(rng).expect("sampler checked at construction")
    }

    /// A pair `(a, b)` with `a ⊑ b`, built by joining `a` with another draw.
    pub fn draw_ordered(&self, rng: &mut Rng) -> (Q::Elem, Q::Elem) {
        let a = self.draw(rng);
        for _ in 0..4 {
            if rng.gen_ratio(1, 6) {
                break;
            }
            let x = self.draw(rng);
            if let Some(b) = self.q.join(&a, &x) {
                return (a, b);
            }
        }
        (a.clone(), a)
    }

    fn ordered_pairs(&self) -> Vec<(Q::Elem, Q::Elem)> {
        let c = self.carrier.as_ref().expect("exhaustive source");
        let mut out = Vec::new();
        for a in c {
            for b in c {
                if leq(self.q, a, b) {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }

    /// Every witness tuple of the given shape (exhaustive mode).
    pub fn all(&self, shape: Shape) -> Vec<Vec<Q::Elem>> {
        let c = self.carrier.as_ref().expect("exhaustive source");
        let mut out = Vec::new();
        match shape {
            Shape::One => out.extend(c.iter().map(|a| vec![a.clone()])),
            Shape::Two => {
                for a in c {
                    for b in c {
                        out.push(vec![a.clone(), b.clone()]);
                    }
                }
            }
            Shape::Three => {
                for a in c {
                    for b in c {
                        for d in c {
                            out.push(vec![a.clone(), b.clone(), d.clone()]);
                        }
                    }
                }
            }
            Shape::OrderedPairs => {
                let pairs = self.ordered_pairs();
                for (a, b) in &pairs {
                    for (x, y) in &pairs {
                        out.push(vec![a.clone(), b.clone(), x.clone(), y.clone()]);
                    }
                }
            }
        }
        out
    }

    pub fn random(&self, shape: Shape, rng: &mut Rng) -> Vec<Q::Elem> {
        match shape {
            Shape::One => vec![self.draw(rng)],
            Shape::Two => vec![self.draw(rng), self.draw(rng)],
            Shape::Three => vec![self.draw(rng), self.draw(rng), self.draw(rng)],
            Shape::OrderedPairs => {
                let (a, b) = self.draw_ordered(rng);
                let (c, d) = self.draw_ordered(rng);
                vec![a, b, c, d]
            }
        }
    }
}

/// Runs a list of laws. Each law gets its own generator derived from the seed
/// so adding a law never perturbs the witnesses of another.
pub fn run_laws<Q: Quantale + ?Sized>(
    q: &Q,
    laws: &[Law<Q>],
    budget: Budget,
) -> Result<LawReport<Q::Elem>, LawError> {
    let src = WitnessSource::new(q, budget)?;
    let mut report = LawReport::new(q.name());
    for (i, law) in laws.iter().enumerate() {
        let mut result = LawResult::new(law.name);
        let mut eval = |w: Vec<Q::Elem>| {
            result.checked += 1;
            if let Err(m) = (law.check)(q, &w) {
                result.record(Counterexample { law: law.name, witnesses: w, mismatch: m });
            }
        };
        match (budget, src.sampled) {
            (Budget::Sampled { samples, seed }, true) => {
                let mut r = rng(seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
                for _ in 0..samples {
                    eval(src.random(law.shape, &mut r));
                }
            }
            _ => {
                for w in src.all(law.shape) {
                    eval(w);
                }
            }
        }
        report.laws.push(result);
    }
    Ok(report)
}

/// Re-evaluates a single law on given witnesses.
pub fn replay<Q: Quantale + ?Sized>(q: &Q, laws: &[Law<Q>], name: &str, witnesses: &[Q::Elem]) -> Option<Result<(), Mismatch>> {
    laws.iter().find(|l| l.name == name).map(|l| (l.check)(q, witnesses))
}

pub fn check_laws<Q: Quantale + ?Sized>(q: &Q, budget: Budget) -> Result<LawReport<Q::Elem>, LawError> {
    run_laws(q, &quantale_laws::<Q>(), budget)
}

pub fn check_star_laws<Q: Quantale + ?Sized>(q: &Q, budget: Budget) -> Result<LawReport<Q::Elem>, LawError> {
    if !q.has_star() {
        return Err(LawError::NoStar(q.name()));
    }
    run_laws(q, &star_laws::<Q>(), budget)
}

/// The free iteration operator tabulated over a finite carrier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarTable<E> {
    pub entries: BTreeMap<E, Option<E>>,
    pub laxly_iterable: bool,
    /// An element whose candidate set is nonempty without a least element.
    pub witness: Option<E>,
}

impl<E: Ord> StarTable<E> {
    pub fn get(&self, x: &E) -> Option<&E> {
        self.entries.get(x).and_then(|e| e.as_ref())
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().all(|(k, v)| v.as_ref() == Some(k))
    }
}

/// `x↑ ∩ I↑ ∩ SubIdem(Q)` over a finite carrier.
pub fn star_candidates<Q: Quantale + ?Sized>(q: &Q, carrier: &[Q::Elem], x: &Q::Elem) -> Vec<Q::Elem> {
    let unit = q.unit();
    carrier
        .iter()
        .filter(|y| leq(q, x, y) && leq(q, &unit, y) && is_subidempotent(q, y))
        .cloned()
        .collect()
}

pub fn derive_star_finite<Q: Quantale + ?Sized>(q: &Q) -> Result<StarTable<Q::Elem>, LawError> {
    let carrier = q.elements().ok_or_else(|| LawError::NoEnumerator(q.name()))?;
    let mut entries = BTreeMap::new();
    let mut witness = None;
    for x in &carrier {
        let cands = star_candidates(q, &carrier, x);
        let least = cands.iter().find(|c| cands.iter().all(|d| leq(q, c, d))).cloned();
        if least.is_none() && !cands.is_empty() && witness.is_none() {
            witness = Some(x.clone());
        }
        entries.insert(x.clone(), least);
    }
    Ok(StarTable { entries, laxly_iterable: witness.is_none(), witness })
}

/// True iff no derived star value has a strictly smaller candidate below it.
pub fn check_star_precision<Q: Quantale + ?Sized>(q: &Q) -> Result<bool, LawError> {
    let carrier = q.elements().ok_or_else(|| LawError::NoEnumerator(q.name()))?;
    let table = derive_star_finite(q)?;
    for (x, s) in &table.entries {
        let Some(s) = s else { continue };
        let cands = star_candidates(q, &carrier, x);
        if cands.iter().any(|y| y != s && leq(q, y, s)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A quantale whose iteration operator is given by a table.
#[derive(Clone, Debug)]
pub struct WithStar<Q: Quantale> {
    pub inner: Q,
    pub table: StarTable<Q::Elem>,
}

impl<Q: Quantale> WithStar<Q> {
    pub fn derived(inner: Q) -> Result<Self, LawError> {
        let table = derive_star_finite(&inner)?;
        Ok(WithStar { inner, table })
    }

    pub fn with_table(inner: Q, table: StarTable<Q::Elem>) -> Self {
        WithStar { inner, table }
    }
}

impl<Q: Quantale> Quantale for WithStar<Q> {
    type Elem = Q::Elem;
    fn name(&self) -> String {
        self.inner.name()
    }
    fn unit(&self) -> Q::Elem {
        self.inner.unit()
    }
    fn join(&self, a: &Q::Elem, b: &Q::Elem) -> Option<Q::Elem> {
        self.inner.join(a, b)
    }
    fn seq(&self, a: &Q::Elem, b: &Q::Elem) -> Option<Q::Elem> {
        self.inner.seq(a, b)
    }
    fn has_star(&self) -> bool {
        true
    }
    fn star(&self, a: &Q::Elem) -> Option<Q::Elem> {
        self.table.get(a).cloned()
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

/// Star laws of an arbitrary candidate operator, evaluated exhaustively.
pub fn star_table_laws<Q: Quantale + Clone>(q: &Q, table: StarTable<Q::Elem>) -> Result<LawReport<Q::Elem>, LawError> {
    let with = WithStar::with_table(q.clone(), table);
    check_star_laws(&with, Budget::Exhaustive)
}
