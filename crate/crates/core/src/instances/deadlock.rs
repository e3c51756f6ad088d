//! Level-ordered lock ownership for deadlock freedom.
//!
//! An effect `(X, L, Y)` records ownership of each tracked lock before and
//! after, together with a lower bound `L` on the levels of locks acquired.
//! `Levels_held(M)` is the set of levels of locks marked held in `M`, and
//! `Levels(X) = Levels(Y)` is read per lock: every lock keeps its level.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng as _;

use crate::quantale::{Quantale, Rng};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Level {
    Fin(u32),
    Inf,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Fin(n) => write!(f, "{n}"),
            Level::Inf => write!(f, "∞"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Ob {
    Free,
    Held,
}

pub type LockMap<K> = BTreeMap<K, (Level, Ob)>;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DLEffect<K: Ord> {
    pub pre: LockMap<K>,
    pub bound: Level,
    pub post: LockMap<K>,
}

fn held_levels<K: Ord>(m: &LockMap<K>) -> impl Iterator<Item = Level> + '_ {
    m.values().filter(|(_, o)| *o == Ob::Held).map(|(l, _)| *l)
}

/// `max(Levels_held(m)) < bound`, vacuous when nothing is held.
fn held_below<K: Ord>(m: &LockMap<K>, bound: Level) -> bool {
    held_levels(m).all(|l| l < bound)
}

fn unique_held<K: Ord>(m: &LockMap<K>) -> bool {
    let mut seen = BTreeSet::new();
    held_levels(m).all(|l| seen.insert(l))
}

fn compatible_union<K: Ord + Clone>(a: &LockMap<K>, b: &LockMap<K>) -> Option<LockMap<K>> {
    let mut out = a.clone();
    for (k, v) in b {
        match out.get(k) {
            Some(w) if w != v => return None,
            _ => {
                out.insert(k.clone(), *v);
            }
        }
    }
    Some(out)
}

fn restrict_away<K: Ord + Clone>(m: &LockMap<K>, away: &LockMap<K>) -> LockMap<K> {
    m.iter().filter(|(k, _)| !away.contains_key(*k)).map(|(k, v)| (k.clone(), *v)).collect()
}

fn sym_diff<K: Ord + Clone>(a: &LockMap<K>, b: &LockMap<K>) -> BTreeSet<(K, (Level, Ob))> {
    let pa: BTreeSet<_> = a.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let pb: BTreeSet<_> = b.iter().map(|(k, v)| (k.clone(), *v)).collect();
    pa.symmetric_difference(&pb).cloned().collect()
}

impl<K: Ord + Clone> DLEffect<K> {
    pub fn unit() -> Self {
        DLEffect { pre: BTreeMap::new(), bound: Level::Inf, post: BTreeMap::new() }
    }

    pub fn new(pre: LockMap<K>, bound: Level, post: LockMap<K>) -> Self {
        DLEffect { pre, bound, post }
    }

    pub fn well_formed(&self) -> bool {
        self.pre.len() == self.post.len()
            && self.pre.iter().all(|(k, (l, _))| self.post.get(k).is_some_and(|(l2, _)| l == l2))
            && held_below(&self.pre, self.bound)
            && unique_held(&self.pre)
            && unique_held(&self.post)
    }

    fn checked(self) -> Option<Self> {
        self.well_formed().then_some(self)
    }

    pub fn join(&self, other: &Self) -> Option<Self> {
        if sym_diff(&self.pre, &self.post) != sym_diff(&other.pre, &other.post) {
            return None;
        }
        DLEffect {
            pre: compatible_union(&self.pre, &other.pre)?,
            bound: self.bound.min(other.bound),
            post: compatible_union(&self.post, &other.post)?,
        }
        .checked()
    }

    /// The post-state restriction keeps locks the second effect does not
    /// mention (`dom(Y) ∖ dom(X′)`), which is what makes `I` a right unit.
    pub fn seq(&self, other: &Self) -> Option<Self> {
        let (x, l, y) = (&self.pre, self.bound, &self.post);
        let (x2, l2, y2) = (&other.pre, other.bound, &other.post);
        if y.iter().any(|(k, v)| x2.get(k).is_some_and(|w| w != v)) {
            return None;
        }
        if !held_below(&restrict_away(y, x2), l2) || !held_below(&restrict_away(x2, y), l) {
            return None;
        }
        let mut pre = x.clone();
        pre.extend(restrict_away(x2, x));
        let mut post = restrict_away(y, x2);
        post.extend(y2.iter().map(|(k, v)| (k.clone(), *v)));
        DLEffect { pre, bound: l.min(l2), post }.checked()
    }

    pub fn star(&self) -> Option<Self> {
        (self.pre == self.post && self.well_formed()).then(|| self.clone())
    }
}

fn show_map<K: fmt::Display>(m: &LockMap<K>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{{")?;
    for (i, (k, (l, o))) in m.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{k}:{l}{}", if *o == Ob::Held { "h" } else { "" })?;
    }
    write!(f, "}}")
}

impl<K: Ord + fmt::Display> fmt::Display for DLEffect<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        show_map(&self.pre, f)?;
        write!(f, ",{},", self.bound)?;
        show_map(&self.post, f)?;
        write!(f, ")")
    }
}

/// Deadlock effects over a fixed set of locks, each with a preferred level.
#[derive(Clone, Debug)]
pub struct DLQuantale<K> {
    pub locks: Vec<(K, Level)>,
}

impl<K: Ord + Clone> DLQuantale<K> {
    pub fn new(locks: Vec<(K, Level)>) -> Self {
        DLQuantale { locks }
    }

    fn sample_level(&self, rng: &mut Rng, preferred: Level) -> Level {
        match rng.gen_range(0..10) {
            0 => Level::Inf,
            1 => Level::Fin(rng.gen_range(0..4)),
            _ => preferred,
        }
    }

    fn sample_bound(rng: &mut Rng) -> Level {
        if rng.gen_ratio(1, 3) {
            Level::Inf
        } else {
            Level::Fin(rng.gen_range(0..5))
        }
    }

    fn ob(rng: &mut Rng) -> Ob {
        if rng.gen_ratio(1, 2) {
            Ob::Held
        } else {
            Ob::Free
        }
    }
}

impl<K: Ord + Clone + fmt::Debug + fmt::Display> Quantale for DLQuantale<K> {
    type Elem = DLEffect<K>;
    fn name(&self) -> String {
        "deadlock".into()
    }
    fn unit(&self) -> DLEffect<K> {
        DLEffect::unit()
    }
    fn join(&self, a: &DLEffect<K>, b: &DLEffect<K>) -> Option<DLEffect<K>> {
        a.join(b)
    }
    fn seq(&self, a: &DLEffect<K>, b: &DLEffect<K>) -> Option<DLEffect<K>> {
        a.seq(b)
    }
    fn has_star(&self) -> bool {
        true
    }
    fn star(&self, a: &DLEffect<K>) -> Option<DLEffect<K>> {
        a.star()
    }
    fn sample(&self, rng: &mut Rng) -> Option<DLEffect<K>> {
        for _ in 0..64 {
            let mut pre = BTreeMap::new();
            let mut post = BTreeMap::new();
            for (k, lvl) in &self.locks {
                if rng.gen_ratio(1, 2) {
                    let l = self.sample_level(rng, *lvl);
                    let o = Self::ob(rng);
                    let o2 = if rng.gen_ratio(1, 2) { o } else { Self::ob(rng) };
                    pre.insert(k.clone(), (l, o));
                    post.insert(k.clone(), (l, o2));
                }
            }
            let e = DLEffect { pre, bound: Self::sample_bound(rng), post };
            if e.well_formed() {
                return Some(e);
            }
        }
        Some(DLEffect::unit())
    }
    fn interesting(&self) -> Vec<DLEffect<K>> {
        let mut out = vec![DLEffect::unit()];
        for (k, l) in self.locks.iter().take(2) {
            let free = BTreeMap::from([(k.clone(), (*l, Ob::Free))]);
            let held = BTreeMap::from([(k.clone(), (*l, Ob::Held))]);
            out.push(DLEffect::new(free.clone(), *l, held.clone()));
            out.push(DLEffect::new(held.clone(), Level::Inf, free.clone()));
            out.push(DLEffect::new(free.clone(), Level::Inf, free));
        }
        out
    }
}
