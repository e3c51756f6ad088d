//! Seeded program and effect generators for the property suites.

use rand::Rng as _;

use eqkit_core::quantale::Rng;
use eqkit_core::Quantale;

use crate::domain::Domain;
use crate::syntax::{EffectExpr, Term, Type};

fn tyapp_app(p: &str, l: &Term, args: Vec<Term>) -> Term {
    Term::apps(Term::tyapp(Term::app(Term::prim(p), l.clone()), Type::Bool), args)
}

fn read(l: &Term, r: &Term) -> Term {
    tyapp_app("read", l, vec![r.clone()])
}

fn write(l: &Term, r: &Term, v: bool) -> Term {
    tyapp_app("write", l, vec![r.clone(), Term::Bool(v)])
}

fn critical(l: &Term, body: Term) -> Term {
    Term::seq_all(vec![Term::app(Term::prim("acquire"), l.clone()), body, Term::app(Term::prim("release"), l.clone())])
}

/// `acquire l; let y = read l r in (release l; y)`.
fn atomic_read(l: &Term, r: &Term) -> Term {
    Term::seq(
        Term::app(Term::prim("acquire"), l.clone()),
        Term::let_("y", read(l, r), Term::seq(Term::app(Term::prim("release"), l.clone()), Term::var("y"))),
    )
}

struct LockGen<'a> {
    rng: &'a mut Rng,
    /// `(lock, guarded reference)` pairs in scope.
    cells: Vec<(Term, Term)>,
}

impl LockGen<'_> {
    fn pick(&mut self) -> (Term, Term) {
        let i = self.rng.gen_range(0..self.cells.len());
        self.cells[i].clone()
    }

    /// Work done while `held` (an index into `cells`) is held.
    fn op(&mut self, held: &[usize], depth: usize) -> Term {
        let i = held[self.rng.gen_range(0..held.len())];
        let (l, r) = self.cells[i].clone();
        let others: Vec<usize> = (0..self.cells.len()).filter(|j| !held.contains(j)).collect();
        match self.rng.gen_range(0..6) {
            0 | 1 => read(&l, &r),
            2 => write(&l, &r, self.rng.gen()),
            3 if depth > 0 => {
                let (a, b) = (self.op(held, depth - 1), self.op(held, depth - 1));
                Term::if_(read(&l, &r), Term::seq(a, Term::Unit), Term::seq(b, Term::Unit))
            }
            4 => Term::while_(read(&l, &r), write(&l, &r, false)),
            5 if depth > 0 && !others.is_empty() => {
                let j = others[self.rng.gen_range(0..others.len())];
                let mut inner = held.to_vec();
                inner.push(j);
                let body = self.op(&inner, depth - 1);
                critical(&self.cells[j].0.clone(), body)
            }
            _ => read(&l, &r),
        }
    }

    fn ops(&mut self, held: &[usize], depth: usize) -> Term {
        let n = self.rng.gen_range(1..=3);
        Term::seq_all((0..n).map(|_| self.op(held, depth)).collect())
    }

    /// A statement that leaves every lock as it found it.
    fn stmt(&mut self, depth: usize) -> Term {
        let (l, r) = self.pick();
        let i = self.cells.iter().position(|c| c.0 == l).unwrap();
        match self.rng.gen_range(0..10) {
            0..=3 => critical(&l, self.ops(&[i], depth)),
            4 if depth > 0 => Term::if_(atomic_read(&l, &r), self.stmt(depth - 1), self.stmt(depth - 1)),
            5 => Term::while_(atomic_read(&l, &r), critical(&l, write(&l, &r, false))),
            6 if depth > 0 => Term::while_(Term::Bool(false), self.stmt(depth - 1)),
            7 => Term::seq(atomic_read(&l, &r), Term::Unit),
            8 if self.rng.gen_ratio(1, 6) => Term::while_(Term::Bool(true), critical(&l, read(&l, &r))),
            _ => Term::Unit,
        }
    }
}

/// A closed program over `new_lock`, `alloc`, `acquire`, `release`, `read`
/// and `write` whose lock usage is balanced.
pub fn lockatom_program(rng: &mut Rng) -> Term {
    let n = rng.gen_range(1..=2);
    let cells: Vec<(Term, Term)> = (0..n).map(|i| (Term::var(&format!("lk{i}")), Term::var(&format!("rf{i}")))).collect();
    let mut g = LockGen { rng, cells: cells.clone() };
    let k = g.rng.gen_range(1..=4);
    let body = Term::seq_all((0..k).map(|_| g.stmt(2)).collect());
    cells.iter().rev().fold(body, |acc, (l, r)| {
        let Term::Var(lx) = l else { unreachable!() };
        let Term::Var(rx) = r else { unreachable!() };
        let init = g.rng.gen();
        Term::let_(
            lx,
            Term::app(Term::prim("new_lock"), Term::Unit),
            Term::let_(rx, tyapp_app("alloc", l, vec![Term::Bool(init)]), acc),
        )
    })
}

/// A terminating program over the history primitives.
pub fn history_program(rng: &mut Rng, events: &[&str], depth: usize) -> Term {
    let ev = |c: &str| Term::app(Term::prim("ev"), Term::prim(c));
    let pick = |rng: &mut Rng| events[rng.gen_range(0..events.len())];
    match if depth == 0 { 0 } else { rng.gen_range(0..6) } {
        0 | 1 => ev(pick(rng)),
        2 => Term::if_(Term::Bool(rng.gen()), history_program(rng, events, depth - 1), history_program(rng, events, depth - 1)),
        3 => Term::while_(Term::Bool(false), history_program(rng, events, depth - 1)),
        4 => {
            let f = Term::lam("u", Type::Unit, history_program(rng, events, depth - 1));
            let call = Term::app(Term::var("f"), Term::Unit);
            Term::let_("f", f, Term::seq(call.clone(), call))
        }
        _ => Term::seq(history_program(rng, events, depth - 1), history_program(rng, events, depth - 1)),
    }
}

/// A history program that may mention the free variable `x : event`.
pub fn history_open_program(rng: &mut Rng, events: &[&str], x: &str, depth: usize) -> Term {
    let arg = |rng: &mut Rng| {
        if rng.gen_bool(0.5) {
            Term::var(x)
        } else {
            Term::prim(events[rng.gen_range(0..events.len())])
        }
    };
    match if depth == 0 { 0 } else { rng.gen_range(0..5) } {
        0 | 1 => Term::app(Term::prim("ev"), arg(rng)),
        2 => Term::if_(Term::Bool(rng.gen()), history_open_program(rng, events, x, depth - 1), history_open_program(rng, events, x, depth - 1)),
        3 => {
            let f = Term::lam("u", Type::con("event"), Term::seq(Term::app(Term::prim("ev"), Term::var("u")), history_open_program(rng, events, x, depth - 1)));
            Term::app(f, arg(rng))
        }
        _ => Term::seq(history_open_program(rng, events, x, depth - 1), history_open_program(rng, events, x, depth - 1)),
    }
}

/// A random effect of depth at most `depth` over the domain's interesting
/// elements and the given variables.
pub fn random_effect(q: &Domain, vars: &[&str], depth: usize, rng: &mut Rng) -> EffectExpr {
    let grounds = q.interesting();
    let leaf = |rng: &mut Rng| match rng.gen_range(0..4) {
        0 if !vars.is_empty() => EffectExpr::var(vars[rng.gen_range(0..vars.len())]),
        1 => EffectExpr::Unit,
        _ => EffectExpr::Ground(grounds[rng.gen_range(0..grounds.len())].clone()),
    };
    if depth <= 1 {
        return leaf(rng);
    }
    match rng.gen_range(0..6) {
        0 => leaf(rng),
        1 | 2 => EffectExpr::seq(random_effect(q, vars, depth - 1, rng), random_effect(q, vars, depth - 1, rng)),
        3 | 4 => EffectExpr::join(random_effect(q, vars, depth - 1, rng), random_effect(q, vars, depth - 1, rng)),
        _ => EffectExpr::star(random_effect(q, vars, depth - 1, rng)),
    }
}

/// λ_trace terms used to check the embedding.
pub const LAMBDA_TRACE_CORPUS: &[&str] = &[
    "(ev a)",
    "unit",
    "(if true (ev a) (ev b))",
    "((lam (x bool) (if x (ev a) (ev b))) false)",
    "((lam (x unit) (ev b)) (ev a))",
    "(let (f (lam (u unit) (ev a))) ((lam (z unit) (f unit)) (f unit)))",
    "(let (f (lam (u unit) (if false (ev a) (ev b)))) ((lam (z unit) (ev c)) (f unit)))",
    "(let (u unit) (ev b))",
    "((lam (g (-> unit [ev(a) | ev(b)] unit)) (g unit)) (lam (u unit) (if true (ev a) (ev b))))",
    "(lam (g (-> unit [ev(a) | ev(b)] unit)) ((lam (z unit) (g unit)) (g unit)))",
    "(let (twice (lam (f (-> unit [ev(c)] unit)) ((lam (z unit) (f unit)) (f unit)))) (twice (lam (u unit) (ev c))))",
    "((lam (k bool) (if k (ev a) ((lam (z unit) (ev c)) (ev b)))) true)",
    "(let (x (lam (y unit) (ev a))) ((lam (z unit) (x unit)) (x unit)))",
];

#[cfg(test)]
mod tests {
    use super::*;
    use eqkit_core::quantale::rng;

    #[test]
    fn generators_are_deterministic() {
        let a = lockatom_program(&mut rng(3));
        let b = lockatom_program(&mut rng(3));
        assert_eq!(a, b);
        assert!(a.free().is_empty());
        let h = history_program(&mut rng(5), &["a", "b"], 4);
        assert_eq!(h, history_program(&mut rng(5), &["a", "b"], 4));
    }

    #[test]
    fn random_effects_respect_depth() {
        let q = Domain::crit();
        let mut r = rng(0);
        for _ in 0..200 {
            assert!(random_effect(&q, &["a"], 8, &mut r).depth() <= 8);
        }
    }
}
