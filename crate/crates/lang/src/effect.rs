//! Normal forms of syntactic effects: equivalence, subeffecting and the
//! NonTrivial decision procedure.

use std::collections::{BTreeSet, VecDeque};

use eqkit_core::Quantale;

use crate::domain::Domain;
use crate::syntax::{EffectExpr, Ground};

/// Flattened effects: sequences are lists, joins are sorted sets and `I` is
/// the ground unit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Nf {
    Var(String),
    G(Ground),
    Seq(Vec<Nf>),
    Join(Vec<Nf>),
    Star(Box<Nf>),
}

impl Nf {
    fn from_expr(e: &EffectExpr, q: &Domain) -> Nf {
        match e {
            EffectExpr::Var(a) => Nf::Var(a.clone()),
            EffectExpr::Unit => Nf::G(q.unit()),
            EffectExpr::Ground(g) => Nf::G(g.clone()),
            EffectExpr::Seq(a, b) => Nf::Seq(vec![Nf::from_expr(a, q), Nf::from_expr(b, q)]),
            EffectExpr::Join(a, b) => Nf::Join(vec![Nf::from_expr(a, q), Nf::from_expr(b, q)]),
            EffectExpr::Star(a) => Nf::Star(Box::new(Nf::from_expr(a, q))),
        }
    }

    fn to_expr(&self) -> EffectExpr {
        match self {
            Nf::Var(a) => EffectExpr::Var(a.clone()),
            Nf::G(g) => EffectExpr::Ground(g.clone()),
            Nf::Seq(xs) => xs.iter().map(Nf::to_expr).reduce(EffectExpr::seq).unwrap_or(EffectExpr::Unit),
            Nf::Join(xs) => xs.iter().map(Nf::to_expr).reduce(EffectExpr::join).unwrap_or(EffectExpr::Unit),
            Nf::Star(a) => EffectExpr::star(a.to_expr()),
        }
    }

    fn size(&self) -> usize {
        match self {
            Nf::Var(_) | Nf::G(_) => 1,
            Nf::Seq(xs) | Nf::Join(xs) => 1 + xs.iter().map(Nf::size).sum::<usize>(),
            Nf::Star(a) => 1 + a.size(),
        }
    }
}

/// A concrete operation whose semantic result is undefined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Undefined(pub String);

struct Canon<'a> {
    q: &'a Domain,
    /// Report undefined ground operations instead of leaving them symbolic.
    strict: bool,
}

impl Canon<'_> {
    fn run(&self, nf: Nf) -> Result<Nf, Undefined> {
        match nf {
            Nf::Var(_) | Nf::G(_) => Ok(nf),
            Nf::Star(a) => self.star(self.run(*a)?),
            Nf::Seq(xs) => {
                let mut flat = Vec::new();
                for x in xs {
                    match self.run(x)? {
                        Nf::Seq(ys) => flat.extend(ys),
                        y => flat.push(y),
                    }
                }
                self.seq(flat)
            }
            Nf::Join(xs) => {
                let mut flat = Vec::new();
                for x in xs {
                    match self.run(x)? {
                        Nf::Join(ys) => flat.extend(ys),
                        y => flat.push(y),
                    }
                }
                self.join(flat)
            }
        }
    }

    fn star(&self, a: Nf) -> Result<Nf, Undefined> {
        match a {
            Nf::G(g) => match self.q.star(&g) {
                Some(s) => Ok(Nf::G(s)),
                None if self.strict => Err(Undefined(format!("{g}*"))),
                None => Ok(Nf::Star(Box::new(Nf::G(g)))),
            },
            Nf::Star(_) => Ok(a),
            a => Ok(Nf::Star(Box::new(a))),
        }
    }

    fn seq(&self, xs: Vec<Nf>) -> Result<Nf, Undefined> {
        let unit = self.q.unit();
        let mut out: Vec<Nf> = Vec::new();
        let mut run: Vec<Ground> = Vec::new();
        for x in xs {
            match x {
                Nf::G(g) => run.push(g),
                other => {
                    out.extend(self.collapse_run(std::mem::take(&mut run))?.into_iter().map(Nf::G));
                    out.push(other);
                }
            }
        }
        out.extend(self.collapse_run(run)?.into_iter().map(Nf::G));
        if out.len() > 1 {
            out.retain(|x| *x != Nf::G(unit.clone()));
        }
        out.dedup_by(|b, a| matches!(a, Nf::Star(_)) && a == b);
        Ok(match out.len() {
            0 => Nf::G(unit),
            1 => out.pop().unwrap(),
            _ => Nf::Seq(out),
        })
    }

    /// Collapses a run of adjacent ground effects. In strict mode every
    /// bracketing is evaluated, so any undefined grouping is reported.
    fn collapse_run(&self, run: Vec<Ground>) -> Result<Vec<Ground>, Undefined> {
        if run.len() <= 1 {
            return Ok(run);
        }
        if !self.strict {
            let mut out: Vec<Ground> = Vec::new();
            for g in run {
                match out.last().and_then(|l| self.q.seq(l, &g)) {
                    Some(s) => *out.last_mut().unwrap() = s,
                    None => out.push(g),
                }
            }
            return Ok(out);
        }
        let n = run.len();
        let mut table: Vec<Vec<BTreeSet<Ground>>> = vec![vec![BTreeSet::new(); n]; n];
        for (i, g) in run.iter().enumerate() {
            table[i][i].insert(g.clone());
        }
        for len in 2..=n {
            for i in 0..=n - len {
                let j = i + len - 1;
                let mut vals = BTreeSet::new();
                for k in i..j {
                    for a in &table[i][k] {
                        for b in &table[k + 1][j] {
                            match self.q.seq(a, b) {
                                Some(s) => {
                                    vals.insert(s);
                                }
                                None => return Err(Undefined(format!("{a} ▷ {b}"))),
                            }
                        }
                    }
                }
                table[i][j] = vals;
            }
        }
        Ok(vec![table[0][n - 1].iter().next().unwrap().clone()])
    }

    fn join(&self, xs: Vec<Nf>) -> Result<Nf, Undefined> {
        let mut grounds: Vec<Ground> = Vec::new();
        let mut rest: BTreeSet<Nf> = BTreeSet::new();
        for x in xs {
            match x {
                Nf::G(g) => grounds.push(g),
                other => {
                    rest.insert(other);
                }
            }
        }
        grounds.sort();
        grounds.dedup();
        if self.strict {
            for (i, a) in grounds.iter().enumerate() {
                for b in &grounds[i + 1..] {
                    if self.q.join(a, b).is_none() {
                        return Err(Undefined(format!("{a} ⊔ {b}")));
                    }
                }
            }
        }
        let mut folded: Vec<Ground> = Vec::new();
        for g in grounds {
            match folded.iter().position(|f| self.q.join(f, &g).is_some()) {
                Some(i) => folded[i] = self.q.join(&folded[i], &g).unwrap(),
                None if self.strict && !folded.is_empty() => {
                    return Err(Undefined(format!("{} ⊔ {g}", folded[0])));
                }
                None => folded.push(g),
            }
        }
        let mut all: BTreeSet<Nf> = rest;
        all.extend(folded.into_iter().map(Nf::G));
        let stars: Vec<Nf> = all.iter().filter_map(|x| if let Nf::Star(a) = x { Some((**a).clone()) } else { None }).collect();
        if !stars.is_empty() {
            let unit = Nf::G(self.q.unit());
            all.retain(|x| *x != unit && !stars.contains(x));
        }
        let mut all: Vec<Nf> = all.into_iter().collect();
        Ok(match all.len() {
            1 => all.pop().unwrap(),
            _ => Nf::Join(all),
        })
    }
}

fn canon(e: &EffectExpr, q: &Domain, strict: bool) -> Result<Nf, Undefined> {
    Canon { q, strict }.run(Nf::from_expr(e, q))
}

/// Canonical form: flattened, unit-free sequences, sorted deduplicated joins,
/// and every defined operation on ground operands evaluated. Undefined ground
/// operations are left in place.
pub fn normalize(e: &EffectExpr, q: &Domain) -> EffectExpr {
    canon(e, q, false).expect("lenient canonicalisation never fails").to_expr()
}

/// The ground element a closed effect collapses to, if it does.
pub fn ground_of(e: &EffectExpr, q: &Domain) -> Option<Ground> {
    match canon(e, q, true).ok()? {
        Nf::G(g) => Some(g),
        _ => None,
    }
}

const DNF_LIMIT: usize = 256;

/// Distributes sequencing over joins everywhere, giving a join of
/// sequences, unless the result would exceed [`DNF_LIMIT`] nodes.
fn dnf(nf: &Nf) -> Option<Vec<Vec<Nf>>> {
    let out = match nf {
        Nf::Var(_) | Nf::G(_) => vec![vec![nf.clone()]],
        Nf::Star(a) => vec![vec![Nf::Star(Box::new(Nf::Join(dnf(a)?.into_iter().map(Nf::Seq).collect())))]],
        Nf::Join(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(dnf(x)?);
            }
            out
        }
        Nf::Seq(xs) => {
            let mut acc: Vec<Vec<Nf>> = vec![Vec::new()];
            for x in xs {
                let alts = dnf(x)?;
                let mut next = Vec::new();
                for prefix in &acc {
                    for alt in &alts {
                        next.push(prefix.iter().chain(alt).cloned().collect());
                    }
                }
                acc = next;
                if acc.iter().map(Vec::len).sum::<usize>() > DNF_LIMIT {
                    return None;
                }
            }
            acc
        }
    };
    (out.iter().map(Vec::len).sum::<usize>() <= DNF_LIMIT).then_some(out)
}

/// Judgmental equivalence, decided by comparing canonical forms and, failing
/// that, their sum-of-products forms. Complete for closed effects whose
/// operations are all defined; sound but incomplete for open ones.
pub fn equiv(a: &EffectExpr, b: &EffectExpr, q: &Domain) -> bool {
    let c = Canon { q, strict: false };
    let (na, nb) = (c.run(Nf::from_expr(a, q)).unwrap(), c.run(Nf::from_expr(b, q)).unwrap());
    if na == nb {
        return true;
    }
    let flat = |n: &Nf| -> Option<Nf> {
        let sums = dnf(n)?;
        c.run(Nf::Join(sums.into_iter().map(Nf::Seq).collect())).ok()
    };
    match (flat(&na), flat(&nb)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

/// `a ⊑ b` as `a ⊔ b ≡ b`.
pub fn subeffect(a: &EffectExpr, b: &EffectExpr, q: &Domain) -> bool {
    equiv(&EffectExpr::join(a.clone(), b.clone()), b, q)
}

/// Outcome of the NonTrivial search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonTrivial {
    pub verdict: Result<(), Undefined>,
    /// Distinct forms visited.
    pub explored: usize,
    /// Whether the visit cap cut the search short.
    pub capped: bool,
}

pub const NONTRIVIAL_CAP: usize = 2000;

/// Searches the effects reachable by associativity, commutativity,
/// distributivity (both directions, size-bounded) and contraction of defined
/// ground operations for an undefined operation on ground operands.
pub fn nontrivial_search(e: &EffectExpr, q: &Domain) -> NonTrivial {
    let c = Canon { q, strict: true };
    let start = match c.run(Nf::from_expr(e, q)) {
        Ok(n) => n,
        Err(u) => return NonTrivial { verdict: Err(u), explored: 1, capped: false },
    };
    let limit = 2 * start.size() + 8;
    let mut seen: BTreeSet<Nf> = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut capped = false;
    while let Some(n) = queue.pop_front() {
        for m in moves(&n) {
            if m.size() > limit {
                continue;
            }
            let m = match c.run(m) {
                Ok(m) => m,
                Err(u) => return NonTrivial { verdict: Err(u), explored: seen.len(), capped: false },
            };
            if seen.contains(&m) {
                continue;
            }
            if seen.len() >= NONTRIVIAL_CAP {
                capped = true;
                continue;
            }
            seen.insert(m.clone());
            queue.push_back(m);
        }
    }
    NonTrivial { verdict: Ok(()), explored: seen.len(), capped }
}

pub fn nontrivial(e: &EffectExpr, q: &Domain) -> bool {
    nontrivial_search(e, q).verdict.is_ok()
}

/// One structural rewrite anywhere in the tree.
fn moves(n: &Nf) -> Vec<Nf> {
    let mut out = Vec::new();
    match n {
        Nf::Var(_) | Nf::G(_) => {}
        Nf::Star(a) => out.extend(moves(a).into_iter().map(|m| Nf::Star(Box::new(m)))),
        Nf::Seq(xs) => {
            for (i, x) in xs.iter().enumerate() {
                if let Nf::Join(alts) = x {
                    let branches = alts
                        .iter()
                        .map(|a| Nf::Seq(xs[..i].iter().cloned().chain([a.clone()]).chain(xs[i + 1..].iter().cloned()).collect()))
                        .collect();
                    out.push(Nf::Join(branches));
                }
                for m in moves(x) {
                    let mut ys = xs.clone();
                    ys[i] = m;
                    out.push(Nf::Seq(ys));
                }
            }
        }
        Nf::Join(xs) => {
            for i in 0..xs.len() {
                for j in i + 1..xs.len() {
                    if let Some(f) = factor(&xs[i], &xs[j]) {
                        let mut ys: Vec<Nf> = xs.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, x)| x.clone()).collect();
                        ys.push(f);
                        out.push(if ys.len() == 1 { ys.pop().unwrap() } else { Nf::Join(ys) });
                    }
                }
                for m in moves(&xs[i]) {
                    let mut ys = xs.clone();
                    ys[i] = m;
                    out.push(Nf::Join(ys));
                }
            }
        }
    }
    out
}

/// `p;a ⊔ p;b ⇒ p;(a ⊔ b)` and `a;s ⊔ b;s ⇒ (a ⊔ b);s`.
fn factor(x: &Nf, y: &Nf) -> Option<Nf> {
    let (Nf::Seq(a), Nf::Seq(b)) = (x, y) else { return None };
    let rest = |v: &[Nf]| if v.len() == 1 { v[0].clone() } else { Nf::Seq(v.to_vec()) };
    if a[0] == b[0] {
        return Some(Nf::Seq(vec![a[0].clone(), Nf::Join(vec![rest(&a[1..]), rest(&b[1..])])]));
    }
    if a.last() == b.last() {
        let (la, lb) = (a.len() - 1, b.len() - 1);
        return Some(Nf::Seq(vec![Nf::Join(vec![rest(&a[..la]), rest(&b[..lb])]), a[la].clone()]));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use eqkit_core::instances::atomicity::Atomicity::*;
    use eqkit_core::instances::crit::Crit;
    use eqkit_core::instances::lock::LockEffect;

    use crate::syntax::Term;

    fn atom(a: eqkit_core::instances::atomicity::Atomicity) -> EffectExpr {
        EffectExpr::Ground(Ground::Atom(a))
    }

    fn crit(c: Crit) -> EffectExpr {
        EffectExpr::Ground(Ground::Crit(c))
    }

    #[test]
    fn unit_left_drops() {
        let q = Domain::atomicity();
        assert_eq!(normalize(&EffectExpr::seq(EffectExpr::Unit, atom(A)), &q), atom(A));
    }

    #[test]
    fn r_then_l_collapses_to_a() {
        let q = Domain::atomicity();
        assert_eq!(normalize(&EffectExpr::seq(atom(R), atom(L)), &q), atom(A));
    }

    #[test]
    fn join_idempotent_on_variables() {
        let q = Domain::atomicity();
        let a = EffectExpr::var("a");
        assert_eq!(normalize(&EffectExpr::join(a.clone(), a.clone()), &q), a);
    }

    #[test]
    fn normalize_is_idempotent_here() {
        let q = Domain::atomicity();
        let e = EffectExpr::seq(EffectExpr::join(EffectExpr::var("b"), atom(R)), EffectExpr::seq(EffectExpr::Unit, EffectExpr::var("a")));
        let once = normalize(&e, &q);
        assert_eq!(normalize(&once, &q), once);
    }

    #[test]
    fn open_seq_does_not_commute() {
        let q = Domain::atomicity();
        let (a, b) = (EffectExpr::var("a"), EffectExpr::var("b"));
        assert!(!equiv(&EffectExpr::seq(a.clone(), b.clone()), &EffectExpr::seq(b, a), &q));
    }

    #[test]
    fn closed_star_of_r_then_b() {
        let q = Domain::atomicity();
        assert!(equiv(&EffectExpr::star(EffectExpr::seq(atom(R), atom(B))), &atom(R), &q));
    }

    #[test]
    fn unit_padding_is_equivalent() {
        let q = Domain::atomicity();
        let g = EffectExpr::var("f");
        assert!(equiv(&g, &EffectExpr::seq_all([EffectExpr::Unit, EffectExpr::Unit, g.clone()]), &q));
    }

    #[test]
    fn subeffect_examples() {
        let q = Domain::atomicity();
        assert!(subeffect(&atom(B), &atom(A), &q));
        assert!(!subeffect(&atom(A), &atom(B), &q));
        let a = EffectExpr::var("a");
        assert!(subeffect(&a, &EffectExpr::join(a.clone(), atom(A)), &q));
    }

    #[test]
    fn crit_locking_twice_is_trivially_invalid() {
        let q = Domain::crit();
        assert!(!nontrivial(&EffectExpr::seq(crit(Crit::Locking), crit(Crit::Locking)), &q));
        assert!(!nontrivial(&EffectExpr::star(crit(Crit::Locking)), &q));
        assert!(nontrivial(&EffectExpr::join(EffectExpr::var("a"), crit(Crit::Locking)), &q));
    }

    #[test]
    fn distribution_exposes_undefined_pairs() {
        let q = Domain::crit();
        let e = EffectExpr::seq(crit(Crit::Locking), EffectExpr::join(EffectExpr::var("a"), crit(Crit::Locking)));
        assert!(!nontrivial(&e, &q));
    }

    #[test]
    fn factoring_exposes_undefined_joins() {
        let q = Domain::crit();
        let a = EffectExpr::var("a");
        let e = EffectExpr::join(EffectExpr::seq(a.clone(), crit(Crit::Critical)), EffectExpr::seq(a, crit(Crit::Entrant)));
        assert!(!nontrivial(&e, &q));
    }

    #[test]
    fn lock_join_with_variable_is_possibly_valid() {
        let q = Domain::locks(&[]);
        let acq = EffectExpr::Ground(Ground::Locks(LockEffect::acquire(Term::prim("l"))));
        assert!(nontrivial(&EffectExpr::join(EffectExpr::var("a"), acq), &q));
    }

    #[test]
    fn star_of_a_is_top() {
        let q = Domain::atomicity();
        assert!(nontrivial(&EffectExpr::star(atom(A)), &q));
        assert_eq!(normalize(&EffectExpr::star(atom(A)), &q), atom(Top));
    }

    #[test]
    fn star_absorbs_operand_and_unit() {
        let q = Domain::atomicity();
        let a = EffectExpr::var("a");
        let s = EffectExpr::star(a.clone());
        assert!(equiv(&EffectExpr::join(a.clone(), s.clone()), &s, &q));
        assert!(equiv(&EffectExpr::join(EffectExpr::Unit, s.clone()), &s, &q));
        assert!(equiv(&EffectExpr::join(EffectExpr::seq(s.clone(), s.clone()), s.clone()), &s, &q));
        assert!(equiv(&EffectExpr::star(s.clone()), &s, &q));
    }
}
