//! Kinds, types, terms and syntactic effects of the core calculus, with free
//! variables and capture-avoiding substitution.

use std::collections::BTreeSet;
use std::fmt;

use eqkit_core::indexed::{map_effect, Reindex};
use eqkit_core::instances::atomicity::Atomicity;
use eqkit_core::instances::crit::Crit;
use eqkit_core::instances::lock::LockEffect;
use eqkit_core::instances::regex::RegexEffect;
use eqkit_core::automata::Regex;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Star,
    Effect,
    Arrow(Box<Kind>, Box<Kind>),
}

impl Kind {
    pub fn arrow(a: Kind, b: Kind) -> Kind {
        Kind::Arrow(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Star => write!(f, "*"),
            Kind::Effect => write!(f, "E"),
            Kind::Arrow(a, b) => match **a {
                Kind::Arrow(..) => write!(f, "({a}) => {b}"),
                _ => write!(f, "{a} => {b}"),
            },
        }
    }
}

/// A concrete element of one of the supported effect quantales, possibly
/// mentioning program values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ground {
    Atom(Atomicity),
    Crit(Crit),
    Locks(LockEffect<Term>),
    Trace(RegexEffect<Term>),
    Pair(Box<Ground>, Box<Ground>),
}

impl Ground {
    pub fn pair(a: Ground, b: Ground) -> Ground {
        Ground::Pair(Box::new(a), Box::new(b))
    }

    /// The index values mentioned by this element.
    pub fn values(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        self.collect_values(&mut out);
        out
    }

    fn collect_values(&self, out: &mut BTreeSet<Term>) {
        match self {
            Ground::Atom(_) | Ground::Crit(_) => {}
            Ground::Locks(l) => {
                out.extend(l.pre.keys().cloned());
                out.extend(l.post.keys().cloned());
            }
            Ground::Trace(r) => out.extend(r.dfa().alphabet()),
            Ground::Pair(a, b) => {
                a.collect_values(out);
                b.collect_values(out);
            }
        }
    }

    /// Parseable constructor syntax.
    pub fn surface(&self) -> String {
        match self {
            Ground::Atom(a) => a.to_string(),
            Ground::Crit(c) => c.to_string(),
            Ground::Locks(l) => {
                let mut args: Vec<String> = Vec::new();
                for (k, n) in l.pre.iter() {
                    args.extend((0..n).map(|_| k.to_string()));
                }
                for (k, n) in l.post.iter() {
                    args.extend((0..n).map(|_| k.to_string()));
                }
                format!("Locking{}-{}({})", l.pre.len(), l.post.len(), args.join(","))
            }
            Ground::Trace(r) => regex_surface(r.regex()),
            Ground::Pair(a, b) => format!("{} & {}", a.surface(), b.surface()),
        }
    }
}

fn regex_surface(r: &Regex<Term>) -> String {
    fn go(r: &Regex<Term>, prec: u8) -> String {
        let (s, p) = match r {
            Regex::Empty => ("nil".to_string(), 3),
            Regex::Eps => ("I".to_string(), 3),
            Regex::Sym(t) => (format!("ev({t})"), 3),
            Regex::Star(a) => (format!("{}*", go(a, 3)), 3),
            Regex::Cat(a, b) => (format!("{} ; {}", go(a, 1), go(b, 2)), 1),
            Regex::Alt(a, b) => (format!("{} | {}", go(a, 0), go(b, 1)), 0),
        };
        if p < prec {
            format!("({s})")
        } else {
            s
        }
    }
    go(r, 0)
}

impl Reindex<Term> for Ground {
    fn reindex(&self, f: &dyn Fn(&Term) -> Term) -> Self {
        match self {
            Ground::Atom(_) | Ground::Crit(_) => self.clone(),
            Ground::Locks(l) => Ground::Locks(map_effect(f, l)),
            Ground::Trace(r) => Ground::Trace(map_effect(f, r)),
            Ground::Pair(a, b) => Ground::pair(a.reindex(f), b.reindex(f)),
        }
    }
}

impl fmt::Display for Ground {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ground::Atom(a) => write!(f, "{a}"),
            Ground::Crit(c) => write!(f, "{c}"),
            Ground::Locks(l) => write!(f, "{l}"),
            Ground::Trace(r) => write!(f, "{{{r}}}"),
            Ground::Pair(a, b) => write!(f, "{a}⊗{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EffectExpr {
    Var(String),
    Unit,
    Seq(Box<EffectExpr>, Box<EffectExpr>),
    Join(Box<EffectExpr>, Box<EffectExpr>),
    Star(Box<EffectExpr>),
    Ground(Ground),
}

impl EffectExpr {
    pub fn var(a: &str) -> Self {
        EffectExpr::Var(a.to_string())
    }

    pub fn seq(a: EffectExpr, b: EffectExpr) -> Self {
        EffectExpr::Seq(Box::new(a), Box::new(b))
    }

    pub fn join(a: EffectExpr, b: EffectExpr) -> Self {
        EffectExpr::Join(Box::new(a), Box::new(b))
    }

    pub fn star(a: EffectExpr) -> Self {
        EffectExpr::Star(Box::new(a))
    }

    pub fn seq_all(parts: impl IntoIterator<Item = EffectExpr>) -> Self {
        let mut it = parts.into_iter();
        let Some(first) = it.next() else { return EffectExpr::Unit };
        it.fold(first, EffectExpr::seq)
    }

    pub fn depth(&self) -> usize {
        match self {
            EffectExpr::Var(_) | EffectExpr::Unit | EffectExpr::Ground(_) => 1,
            EffectExpr::Seq(a, b) | EffectExpr::Join(a, b) => 1 + a.depth().max(b.depth()),
            EffectExpr::Star(a) => 1 + a.depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            EffectExpr::Var(_) | EffectExpr::Unit | EffectExpr::Ground(_) => 1,
            EffectExpr::Seq(a, b) | EffectExpr::Join(a, b) => 1 + a.size() + b.size(),
            EffectExpr::Star(a) => 1 + a.size(),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free().is_empty()
    }

    pub fn free(&self) -> Free {
        let mut fv = Free::default();
        self.collect_free(&mut fv);
        fv
    }

    fn collect_free(&self, fv: &mut Free) {
        match self {
            EffectExpr::Var(a) => {
                fv.types.insert(a.clone());
            }
            EffectExpr::Unit => {}
            EffectExpr::Seq(a, b) | EffectExpr::Join(a, b) => {
                a.collect_free(fv);
                b.collect_free(fv);
            }
            EffectExpr::Star(a) => a.collect_free(fv),
            EffectExpr::Ground(g) => {
                for v in g.values() {
                    v.collect_free(fv);
                }
            }
        }
    }

    fn map_grounds(&self, f: &dyn Fn(&Ground) -> Ground) -> EffectExpr {
        match self {
            EffectExpr::Var(_) | EffectExpr::Unit => self.clone(),
            EffectExpr::Seq(a, b) => EffectExpr::seq(a.map_grounds(f), b.map_grounds(f)),
            EffectExpr::Join(a, b) => EffectExpr::join(a.map_grounds(f), b.map_grounds(f)),
            EffectExpr::Star(a) => EffectExpr::star(a.map_grounds(f)),
            EffectExpr::Ground(g) => EffectExpr::Ground(f(g)),
        }
    }

    /// `self[v/x]`, substituting into constructor arguments.
    pub fn subst_value(&self, x: &str, v: &Term) -> EffectExpr {
        if !self.free().terms.contains(x) {
            return self.clone();
        }
        self.map_grounds(&|g| map_effect(&|t: &Term| t.subst(x, v), g))
    }

    /// `self[τ/α]`. An effect variable `α` becomes the effect denoted by `τ`.
    pub fn subst_type(&self, a: &str, t: &Type) -> EffectExpr {
        match self {
            EffectExpr::Var(b) if b == a => t.as_effect().unwrap_or_else(|| self.clone()),
            EffectExpr::Var(_) | EffectExpr::Unit => self.clone(),
            EffectExpr::Seq(l, r) => EffectExpr::seq(l.subst_type(a, t), r.subst_type(a, t)),
            EffectExpr::Join(l, r) => EffectExpr::join(l.subst_type(a, t), r.subst_type(a, t)),
            EffectExpr::Star(l) => EffectExpr::star(l.subst_type(a, t)),
            EffectExpr::Ground(g) => {
                let g2 = map_effect(&|v: &Term| v.subst_ty(a, t), g);
                EffectExpr::Ground(g2)
            }
        }
    }

    fn rename_term(&self, from: &str, to: &str) -> EffectExpr {
        self.subst_value(from, &Term::Var(to.to_string()))
    }

    fn rename_type(&self, from: &str, to: &str) -> EffectExpr {
        self.subst_type(from, &Type::Var(to.to_string()))
    }

    /// Parseable surface syntax.
    pub fn surface(&self) -> String {
        self.render(true)
    }

    fn render(&self, surface: bool) -> String {
        fn go(e: &EffectExpr, prec: u8, surface: bool) -> String {
            let (s, p) = match e {
                EffectExpr::Var(a) => (format!("'{a}"), 3),
                EffectExpr::Unit => ("I".to_string(), 3),
                EffectExpr::Ground(g) => {
                    if surface {
                        let s = g.surface();
                        let atomic = !s.contains([' ', ';', '|', '*']);
                        (s, if atomic { 3 } else { 0 })
                    } else {
                        (g.to_string(), 3)
                    }
                }
                EffectExpr::Star(a) => (format!("{}*", go(a, 3, surface)), 3),
                EffectExpr::Seq(a, b) => (format!("{} ; {}", go(a, 1, surface), go(b, 2, surface)), 1),
                EffectExpr::Join(a, b) => (format!("{} | {}", go(a, 0, surface), go(b, 1, surface)), 0),
            };
            if p < prec {
                format!("({s})")
            } else {
                s
            }
        }
        go(self, 0, surface)
    }
}

impl fmt::Display for EffectExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

/// Free term variables and free type (including effect) variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Free {
    pub terms: BTreeSet<String>,
    pub types: BTreeSet<String>,
}

impl Free {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.types.is_empty()
    }

    pub fn all(&self) -> BTreeSet<String> {
        self.terms.union(&self.types).cloned().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Con(String),
    App(Box<Type>, Box<Type>),
    Eff(EffectExpr),
    Pi(String, Box<Type>, EffectExpr, Box<Type>),
    Var(String),
    Bool,
    Unit,
    Forall(String, Kind, EffectExpr, Box<Type>),
    Sing(Box<Term>),
}

impl Type {
    pub fn con(name: &str) -> Type {
        Type::Con(name.to_string())
    }

    pub fn app(a: Type, b: Type) -> Type {
        Type::App(Box::new(a), Box::new(b))
    }

    pub fn pi(x: &str, dom: Type, eff: EffectExpr, cod: Type) -> Type {
        Type::Pi(x.to_string(), Box::new(dom), eff, Box::new(cod))
    }

    pub fn forall(a: &str, k: Kind, eff: EffectExpr, body: Type) -> Type {
        Type::Forall(a.to_string(), k, eff, Box::new(body))
    }

    pub fn sing(v: Term) -> Type {
        Type::Sing(Box::new(v))
    }

    /// The effect denoted by a type of kind ℰ.
    pub fn as_effect(&self) -> Option<EffectExpr> {
        match self {
            Type::Eff(e) => Some(e.clone()),
            Type::Var(a) => Some(EffectExpr::Var(a.clone())),
            _ => None,
        }
    }

    pub fn free(&self) -> Free {
        let mut fv = Free::default();
        self.collect_free(&mut fv);
        fv
    }

    fn collect_free(&self, fv: &mut Free) {
        match self {
            Type::Con(_) | Type::Bool | Type::Unit => {}
            Type::App(a, b) => {
                a.collect_free(fv);
                b.collect_free(fv);
            }
            Type::Eff(e) => e.collect_free(fv),
            Type::Pi(x, dom, eff, cod) => {
                dom.collect_free(fv);
                let mut inner = Free::default();
                eff.collect_free(&mut inner);
                cod.collect_free(&mut inner);
                inner.terms.remove(x);
                fv.terms.extend(inner.terms);
                fv.types.extend(inner.types);
            }
            Type::Var(a) => {
                fv.types.insert(a.clone());
            }
            Type::Forall(a, _, eff, body) => {
                let mut inner = Free::default();
                eff.collect_free(&mut inner);
                body.collect_free(&mut inner);
                inner.types.remove(a);
                fv.terms.extend(inner.terms);
                fv.types.extend(inner.types);
            }
            Type::Sing(v) => v.collect_free(fv),
        }
    }

    /// `self[v/x]`.
    pub fn subst(&self, x: &str, v: &Term) -> Type {
        match self {
            Type::Con(_) | Type::Bool | Type::Unit | Type::Var(_) => self.clone(),
            Type::App(a, b) => Type::app(a.subst(x, v), b.subst(x, v)),
            Type::Eff(e) => Type::Eff(e.subst_value(x, v)),
            Type::Pi(y, dom, eff, cod) => {
                let dom = dom.subst(x, v);
                if y == x {
                    return Type::Pi(y.clone(), Box::new(dom), eff.clone(), cod.clone());
                }
                let (y, eff, cod) = avoid_term_capture(y, eff, cod, v);
                Type::Pi(y, Box::new(dom), eff.subst_value(x, v), Box::new(cod.subst(x, v)))
            }
            Type::Forall(a, k, eff, body) => {
                let (a, eff, body) = avoid_type_capture(a, eff, body, &v.free());
                Type::Forall(a, k.clone(), eff.subst_value(x, v), Box::new(body.subst(x, v)))
            }
            Type::Sing(t) => Type::sing(t.subst(x, v)),
        }
    }

    /// `self[τ/α]`.
    pub fn subst_ty(&self, a: &str, t: &Type) -> Type {
        match self {
            Type::Var(b) if b == a => t.clone(),
            Type::Con(_) | Type::Bool | Type::Unit | Type::Var(_) => self.clone(),
            Type::App(l, r) => Type::app(l.subst_ty(a, t), r.subst_ty(a, t)),
            Type::Eff(e) => Type::Eff(e.subst_type(a, t)),
            Type::Pi(x, dom, eff, cod) => {
                let dom = dom.subst_ty(a, t);
                let fv = t.free();
                let (x, eff, cod) = if fv.terms.contains(x) {
                    let avoid: BTreeSet<String> = fv.all().into_iter().chain(eff.free().all()).chain(cod.free().all()).collect();
                    let y = fresh(x, &avoid);
                    (y.clone(), eff.rename_term(x, &y), cod.subst(x, &Term::Var(y)))
                } else {
                    (x.clone(), eff.clone(), (**cod).clone())
                };
                Type::Pi(x, Box::new(dom), eff.subst_type(a, t), Box::new(cod.subst_ty(a, t)))
            }
            Type::Forall(b, k, eff, body) => {
                if b == a {
                    return self.clone();
                }
                let (b, eff, body) = avoid_type_capture(b, eff, body, &t.free());
                Type::Forall(b, k.clone(), eff.subst_type(a, t), Box::new(body.subst_ty(a, t)))
            }
            Type::Sing(v) => Type::sing(v.subst_ty(a, t)),
        }
    }

    /// Parseable s-expression syntax.
    pub fn surface(&self) -> String {
        match self {
            Type::Con(c) => c.clone(),
            Type::App(..) => {
                let mut args = Vec::new();
                let mut head = self;
                while let Type::App(f, a) = head {
                    args.push(a.surface());
                    head = f;
                }
                args.reverse();
                format!("({} {})", head.surface(), args.join(" "))
            }
            Type::Eff(e) => format!("[{}]", e.surface()),
            Type::Pi(x, dom, eff, cod) => format!("(pi ({x} {}) [{}] {})", dom.surface(), eff.surface(), cod.surface()),
            Type::Var(a) => a.clone(),
            Type::Bool => "bool".into(),
            Type::Unit => "unit".into(),
            Type::Forall(a, k, eff, body) => format!("(all ({a} {}) [{}] {})", kind_surface(k), eff.surface(), body.surface()),
            Type::Sing(v) => format!("(S {v})"),
        }
    }
}

fn kind_surface(k: &Kind) -> String {
    match k {
        Kind::Star => "*".into(),
        Kind::Effect => "E".into(),
        Kind::Arrow(a, b) => format!("(=> {} {})", kind_surface(a), kind_surface(b)),
    }
}

fn avoid_term_capture(y: &str, eff: &EffectExpr, cod: &Type, v: &Term) -> (String, EffectExpr, Type) {
    let fv = v.free();
    if !fv.terms.contains(y) {
        return (y.to_string(), eff.clone(), cod.clone());
    }
    let avoid: BTreeSet<String> = fv.all().into_iter().chain(eff.free().all()).chain(cod.free().all()).collect();
    let z = fresh(y, &avoid);
    (z.clone(), eff.rename_term(y, &z), cod.subst(y, &Term::Var(z)))
}

fn avoid_type_capture(a: &str, eff: &EffectExpr, body: &Type, fv: &Free) -> (String, EffectExpr, Type) {
    if !fv.types.contains(a) {
        return (a.to_string(), eff.clone(), body.clone());
    }
    let avoid: BTreeSet<String> = fv.all().into_iter().chain(eff.free().all()).chain(body.free().all()).collect();
    let b = fresh(a, &avoid);
    (b.clone(), eff.rename_type(a, &b), body.subst_ty(a, &Type::Var(b)))
}

/// A name based on `base` that is not in `avoid`.
pub fn fresh(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1..).map(|i| format!("{stem}{i}")).find(|n| !avoid.contains(n)).unwrap()
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Con(c) => write!(f, "{c}"),
            Type::App(a, b) => match **b {
                Type::App(..) | Type::Pi(..) | Type::Forall(..) => write!(f, "{a} ({b})"),
                _ => write!(f, "{a} {b}"),
            },
            Type::Eff(e) => write!(f, "[{e}]"),
            Type::Pi(x, dom, eff, cod) => {
                let dom_s = match **dom {
                    Type::Pi(..) | Type::Forall(..) => format!("({dom})"),
                    _ => dom.to_string(),
                };
                if cod.free().terms.contains(x) || eff.free().terms.contains(x) {
                    write!(f, "Π{x}:{dom_s} →[{eff}] {cod}")
                } else {
                    write!(f, "{dom_s} →[{eff}] {cod}")
                }
            }
            Type::Var(a) => write!(f, "{a}"),
            Type::Bool => write!(f, "bool"),
            Type::Unit => write!(f, "unit"),
            Type::Forall(a, k, eff, body) => write!(f, "∀{a}::{k} →[{eff}] {body}"),
            Type::Sing(v) => write!(f, "S({v})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Prim(String),
    Var(String),
    /// A missing annotation is only allowed on a lambda in function position,
    /// as produced by `seq` and `let` sugar.
    Lam(String, Option<Box<Type>>, Box<Term>),
    App(Box<Term>, Box<Term>),
    Bool(bool),
    If(Box<Term>, Box<Term>, Box<Term>),
    While(Box<Term>, Box<Term>),
    TyLam(String, Kind, Box<Term>),
    TyApp(Box<Term>, Box<Type>),
    Unit,
}

impl Term {
    pub fn prim(p: &str) -> Term {
        Term::Prim(p.to_string())
    }

    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    pub fn lam(x: &str, t: Type, body: Term) -> Term {
        Term::Lam(x.to_string(), Some(Box::new(t)), Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn tylam(a: &str, k: Kind, body: Term) -> Term {
        Term::TyLam(a.to_string(), k, Box::new(body))
    }

    pub fn tyapp(e: Term, t: Type) -> Term {
        Term::TyApp(Box::new(e), Box::new(t))
    }

    pub fn if_(c: Term, t: Term, e: Term) -> Term {
        Term::If(Box::new(c), Box::new(t), Box::new(e))
    }

    pub fn while_(c: Term, b: Term) -> Term {
        Term::While(Box::new(c), Box::new(b))
    }

    /// `a; b` as `(λ_. b) a`.
    pub fn seq(a: Term, b: Term) -> Term {
        let avoid = b.free().all();
        let x = if avoid.contains("_") { fresh("_", &avoid) } else { "_".to_string() };
        Term::app(Term::Lam(x, None, Box::new(b)), a)
    }

    pub fn seq_all(parts: Vec<Term>) -> Term {
        let mut it = parts.into_iter().rev();
        let Some(last) = it.next() else { return Term::Unit };
        it.fold(last, |acc, t| Term::seq(t, acc))
    }

    /// `let x = a in b` as `(λx. b) a`.
    pub fn let_(x: &str, a: Term, b: Term) -> Term {
        Term::app(Term::Lam(x.to_string(), None, Box::new(b)), a)
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Term::Prim(_) | Term::Var(_) | Term::Lam(..) | Term::TyLam(..) | Term::Bool(_) | Term::Unit)
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Prim(_) | Term::Var(_) | Term::Bool(_) | Term::Unit => 1,
            Term::Lam(_, _, b) | Term::TyLam(_, _, b) | Term::TyApp(b, _) => 1 + b.size(),
            Term::App(a, b) | Term::While(a, b) => 1 + a.size() + b.size(),
            Term::If(a, b, c) => 1 + a.size() + b.size() + c.size(),
        }
    }

    pub fn free(&self) -> Free {
        let mut fv = Free::default();
        self.collect_free(&mut fv);
        fv
    }

    fn collect_free(&self, fv: &mut Free) {
        match self {
            Term::Prim(_) | Term::Bool(_) | Term::Unit => {}
            Term::Var(x) => {
                fv.terms.insert(x.clone());
            }
            Term::Lam(x, t, b) => {
                if let Some(t) = t {
                    t.collect_free(fv);
                }
                let mut inner = b.free();
                inner.terms.remove(x);
                fv.terms.extend(inner.terms);
                fv.types.extend(inner.types);
            }
            Term::App(a, b) | Term::While(a, b) => {
                a.collect_free(fv);
                b.collect_free(fv);
            }
            Term::If(a, b, c) => {
                a.collect_free(fv);
                b.collect_free(fv);
                c.collect_free(fv);
            }
            Term::TyLam(a, _, b) => {
                let mut inner = b.free();
                inner.types.remove(a);
                fv.terms.extend(inner.terms);
                fv.types.extend(inner.types);
            }
            Term::TyApp(e, t) => {
                e.collect_free(fv);
                t.collect_free(fv);
            }
        }
    }

    /// `self[v/x]`, capture-avoiding.
    pub fn subst(&self, x: &str, v: &Term) -> Term {
        match self {
            Term::Var(y) if y == x => v.clone(),
            Term::Prim(_) | Term::Var(_) | Term::Bool(_) | Term::Unit => self.clone(),
            Term::Lam(y, t, b) => {
                let t = t.as_ref().map(|t| Box::new(t.subst(x, v)));
                if y == x {
                    return Term::Lam(y.clone(), t, b.clone());
                }
                let fv = v.free();
                if fv.terms.contains(y) && b.free().terms.contains(x) {
                    let avoid: BTreeSet<String> = fv.all().into_iter().chain(b.free().all()).chain([x.to_string()]).collect();
                    let z = fresh(y, &avoid);
                    let b = b.subst(y, &Term::Var(z.clone()));
                    return Term::Lam(z, t, Box::new(b.subst(x, v)));
                }
                Term::Lam(y.clone(), t, Box::new(b.subst(x, v)))
            }
            Term::App(a, b) => Term::app(a.subst(x, v), b.subst(x, v)),
            Term::If(a, b, c) => Term::if_(a.subst(x, v), b.subst(x, v), c.subst(x, v)),
            Term::While(a, b) => Term::while_(a.subst(x, v), b.subst(x, v)),
            Term::TyLam(a, k, b) => {
                let fv = v.free();
                if fv.types.contains(a) {
                    let avoid: BTreeSet<String> = fv.all().into_iter().chain(b.free().all()).collect();
                    let c = fresh(a, &avoid);
                    let b = b.subst_ty(a, &Type::Var(c.clone()));
                    return Term::TyLam(c, k.clone(), Box::new(b.subst(x, v)));
                }
                Term::TyLam(a.clone(), k.clone(), Box::new(b.subst(x, v)))
            }
            Term::TyApp(e, t) => Term::tyapp(e.subst(x, v), t.subst(x, v)),
        }
    }

    /// `self[τ/α]`, capture-avoiding.
    pub fn subst_ty(&self, a: &str, t: &Type) -> Term {
        match self {
            Term::Prim(_) | Term::Var(_) | Term::Bool(_) | Term::Unit => self.clone(),
            Term::Lam(y, ty, b) => {
                let ty = ty.as_ref().map(|ty| Box::new(ty.subst_ty(a, t)));
                let fv = t.free();
                if fv.terms.contains(y) {
                    let avoid: BTreeSet<String> = fv.all().into_iter().chain(b.free().all()).collect();
                    let z = fresh(y, &avoid);
                    let b = b.subst(y, &Term::Var(z.clone()));
                    return Term::Lam(z, ty, Box::new(b.subst_ty(a, t)));
                }
                Term::Lam(y.clone(), ty, Box::new(b.subst_ty(a, t)))
            }
            Term::App(l, r) => Term::app(l.subst_ty(a, t), r.subst_ty(a, t)),
            Term::If(c, l, r) => Term::if_(c.subst_ty(a, t), l.subst_ty(a, t), r.subst_ty(a, t)),
            Term::While(c, b) => Term::while_(c.subst_ty(a, t), b.subst_ty(a, t)),
            Term::TyLam(b, k, body) => {
                if b == a {
                    return self.clone();
                }
                let fv = t.free();
                if fv.types.contains(b) {
                    let avoid: BTreeSet<String> = fv.all().into_iter().chain(body.free().all()).collect();
                    let c = fresh(b, &avoid);
                    let body = body.subst_ty(b, &Type::Var(c.clone()));
                    return Term::TyLam(c, k.clone(), Box::new(body.subst_ty(a, t)));
                }
                Term::TyLam(b.clone(), k.clone(), Box::new(body.subst_ty(a, t)))
            }
            Term::TyApp(e, ty) => Term::tyapp(e.subst_ty(a, t), ty.subst_ty(a, t)),
        }
    }

    /// The head primitive and arguments of an application spine `p v̄`.
    pub fn spine(&self) -> Option<(&str, Vec<Arg<'_>>)> {
        let mut args = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::App(f, a) => {
                    args.push(Arg::Val(a));
                    cur = f;
                }
                Term::TyApp(f, t) => {
                    args.push(Arg::Ty(t));
                    cur = f;
                }
                Term::Prim(p) => {
                    args.reverse();
                    return Some((p, args));
                }
                _ => return None,
            }
        }
    }
}

/// An argument in a primitive application spine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Arg<'a> {
    Val(&'a Term),
    Ty(&'a Type),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Prim(p) => write!(f, "{p}"),
            Term::Var(x) => write!(f, "{x}"),
            Term::Lam(x, Some(t), b) => write!(f, "(lam ({x} {}) {b})", t.surface()),
            Term::Lam(x, None, b) => write!(f, "(lam {x} {b})"),
            Term::App(a, b) => write!(f, "(app {a} {b})"),
            Term::Bool(b) => write!(f, "{b}"),
            Term::If(c, a, b) => write!(f, "(if {c} {a} {b})"),
            Term::While(c, b) => write!(f, "(while {c} {b})"),
            Term::TyLam(a, k, b) => write!(f, "(tylam ({a} {}) {b})", kind_surface(k)),
            Term::TyApp(e, t) => write!(f, "(tyapp {e} {})", t.surface()),
            Term::Unit => write!(f, "unit"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_avoids_capture() {
        let body = Term::lam("y", Type::Bool, Term::app(Term::var("x"), Term::var("y")));
        let out = body.subst("x", &Term::var("y"));
        let Term::Lam(z, _, b) = &out else { panic!() };
        assert_ne!(z, "y");
        assert_eq!(**b, Term::app(Term::var("y"), Term::var(z)));
    }

    #[test]
    fn shadowed_binder_blocks_substitution() {
        let t = Term::lam("x", Type::Bool, Term::var("x"));
        assert_eq!(t.subst("x", &Term::Bool(true)), t);
    }

    #[test]
    fn pi_binds_in_effect_and_result() {
        let eff = EffectExpr::Ground(Ground::Locks(LockEffect::acquire(Term::var("x"))));
        let t = Type::pi("x", Type::con("lock"), eff, Type::sing(Term::var("x")));
        assert!(t.free().is_empty());
        let u = Type::pi("y", Type::con("lock"), EffectExpr::Unit, Type::sing(Term::var("x")));
        assert_eq!(u.free().terms, BTreeSet::from(["x".to_string()]));
        let v = u.subst("x", &Term::var("y"));
        let Type::Pi(z, _, _, cod) = &v else { panic!() };
        assert_ne!(z, "y");
        assert_eq!(**cod, Type::sing(Term::var("y")));
    }

    #[test]
    fn effect_subst_on_constructor_args() {
        let e = EffectExpr::Ground(Ground::Locks(LockEffect::release(Term::var("x"))));
        let out = e.subst_value("x", &Term::prim("l"));
        assert_eq!(out, EffectExpr::Ground(Ground::Locks(LockEffect::release(Term::prim("l")))));
        assert_eq!(out.surface(), "Locking1-0(l)");
    }

    #[test]
    fn star_unchanged_by_unrelated_type_subst() {
        let e = EffectExpr::star(EffectExpr::var("a"));
        assert_eq!(e.subst_type("b", &Type::Bool), e);
        assert_eq!(e.subst_type("a", &Type::Eff(EffectExpr::Unit)), EffectExpr::star(EffectExpr::Unit));
    }

    #[test]
    fn forall_capture_renamed() {
        let t = Type::forall("b", Kind::Effect, EffectExpr::seq(EffectExpr::var("a"), EffectExpr::var("b")), Type::Unit);
        let out = t.subst_ty("a", &Type::Var("b".into()));
        let Type::Forall(c, _, eff, _) = &out else { panic!() };
        assert_ne!(c, "b");
        assert_eq!(*eff, EffectExpr::seq(EffectExpr::var("b"), EffectExpr::var(c)));
    }
}
