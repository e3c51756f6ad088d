//! Kinding and the algorithmic typing judgment `Γ;Σ ⊢ e : τ | γ`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use eqkit_core::{Counterexample, LawReport, LawResult, Mismatch, Quantale};
use thiserror::Error;

use crate::domain::Domain;
use crate::effect::{equiv, normalize, nontrivial_search};
use crate::syntax::{fresh, Arg, EffectExpr, Kind, Term, Type};

/// The type and arity of one primitive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimSig {
    pub ty: Type,
    pub arity: usize,
}

/// Σ: primitive types, ordered by extension.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateEnv {
    pub prims: BTreeMap<String, PrimSig>,
}

impl StateEnv {
    pub fn get(&self, p: &str) -> Option<&PrimSig> {
        self.prims.get(p)
    }

    pub fn insert(&mut self, p: &str, ty: Type, arity: usize) {
        self.prims.insert(p.to_string(), PrimSig { ty, arity });
    }

    pub fn contains(&self, p: &str) -> bool {
        self.prims.contains_key(p)
    }

    /// `self ≤ other`: every entry of `self` is present, unchanged, in `other`.
    pub fn le(&self, other: &StateEnv) -> bool {
        self.prims.iter().all(|(p, s)| other.prims.get(p) == Some(s))
    }
}

/// The static half of an instantiation: effects, type constructors and δ.
#[derive(Clone, Debug)]
pub struct Signature {
    pub domain: Domain,
    pub kinds: BTreeMap<String, Kind>,
    pub delta: StateEnv,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Term(String, Type),
    Type(String, Kind),
}

/// Γ, innermost binding last.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Ctx {
    pub entries: Vec<Entry>,
}

impl Ctx {
    pub fn with_term(&self, x: &str, t: Type) -> Ctx {
        let mut c = self.clone();
        c.entries.push(Entry::Term(x.to_string(), t));
        c
    }

    pub fn with_type(&self, a: &str, k: Kind) -> Ctx {
        let mut c = self.clone();
        c.entries.push(Entry::Type(a.to_string(), k));
        c
    }

    pub fn term(&self, x: &str) -> Option<&Type> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::Term(y, t) if y == x => Some(t),
            _ => None,
        })
    }

    pub fn type_var(&self, a: &str) -> Option<&Kind> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::Type(b, k) if b == a => Some(k),
            _ => None,
        })
    }

    /// Every name bound or mentioned in Γ.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in &self.entries {
            match e {
                Entry::Term(x, t) => {
                    out.insert(x.clone());
                    out.extend(t.free().all());
                }
                Entry::Type(a, _) => {
                    out.insert(a.clone());
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Typing {
    pub ty: Type,
    pub eff: EffectExpr,
    /// Rule names in the order their conclusions were reached.
    pub rules: Vec<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeErrorKind {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown primitive `{0}`")]
    UnknownPrim(String),
    #[error("unbound type variable `{0}`")]
    UnboundType(String),
    #[error("unknown type constructor `{0}`")]
    UnknownTyCon(String),
    #[error("expected {expected}, found {found}")]
    Mismatch { expected: String, found: String },
    #[error("not a function: {0}")]
    NotAFunction(String),
    #[error("not a polymorphic type: {0}")]
    NotPolymorphic(String),
    #[error("argument for `{0}` is not a value but `{0}` occurs in the result type or effect")]
    DependentNonValue(String),
    #[error("trivially invalid effect {effect}: {reason}")]
    TriviallyInvalid { effect: String, reason: String },
    #[error("ill-kinded: {0}")]
    IllKinded(String),
    #[error("primitive `{prim}` of arity {arity} applied to {given} arguments")]
    PartialPrimitive { prim: String, arity: usize, given: usize },
    #[error("lambda for `{0}` needs a type annotation outside function position")]
    MissingAnnotation(String),
    #[error("constructor argument `{0}` is not a value")]
    NonValueIndex(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    /// Rules being applied when the error arose, outermost first.
    pub trace: Vec<&'static str>,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if !self.trace.is_empty() {
            write!(f, " [in {}]", self.trace.join(" > "))?;
        }
        Ok(())
    }
}

impl TypeError {
    pub fn is_trivially_invalid(&self) -> bool {
        matches!(self.kind, TypeErrorKind::TriviallyInvalid { .. })
    }
}

struct Checker<'a> {
    sig: &'a Signature,
    sigma: &'a StateEnv,
    stack: Vec<&'static str>,
    rules: Vec<&'static str>,
}

type Res<T> = Result<T, TypeError>;

impl Checker<'_> {
    fn fail<T>(&self, kind: TypeErrorKind) -> Res<T> {
        Err(TypeError { kind, trace: self.stack.clone() })
    }

    fn q(&self) -> &Domain {
        &self.sig.domain
    }

    fn enter(&mut self, rule: &'static str) {
        self.stack.push(rule);
    }

    fn leave(&mut self, rule: &'static str) {
        self.stack.pop();
        self.rules.push(rule);
    }

    /// Normalizes a composite effect after checking it is not trivially invalid.
    fn compose(&self, e: EffectExpr) -> Res<EffectExpr> {
        if let Err(u) = nontrivial_search(&e, self.q()).verdict {
            return self.fail(TypeErrorKind::TriviallyInvalid { effect: e.to_string(), reason: u.0 });
        }
        Ok(normalize(&e, self.q()))
    }

    fn unit(&self) -> EffectExpr {
        normalize(&EffectExpr::Unit, self.q())
    }

    fn infer(&mut self, ctx: &Ctx, e: &Term) -> Res<(Type, EffectExpr)> {
        match e {
            Term::Prim(p) => {
                self.enter("T-Prim");
                let Some(s) = self.sigma.get(p) else { return self.fail(TypeErrorKind::UnknownPrim(p.clone())) };
                let ty = s.ty.clone();
                self.leave("T-Prim");
                Ok((ty, self.unit()))
            }
            Term::Var(x) => {
                self.enter("T-Var");
                let Some(t) = ctx.term(x) else { return self.fail(TypeErrorKind::Unbound(x.clone())) };
                let t = t.clone();
                self.leave("T-Var");
                Ok((t, self.unit()))
            }
            Term::Bool(_) => {
                self.rules.push("T-Bool");
                Ok((Type::Bool, self.unit()))
            }
            Term::Unit => {
                self.rules.push("T-Unit");
                Ok((Type::Unit, self.unit()))
            }
            Term::Lam(x, None, _) => {
                self.enter("T-Lam");
                self.fail(TypeErrorKind::MissingAnnotation(x.clone()))
            }
            Term::Lam(x, Some(dom), body) => {
                self.enter("T-Lam");
                self.expect_kind(ctx, dom, &Kind::Star)?;
                let (x, body) = self.rename_term_binder(ctx, x, body);
                let (cod, eff) = self.infer(&ctx.with_term(&x, (**dom).clone()), &body)?;
                self.leave("T-Lam");
                Ok((Type::Pi(x, dom.clone(), eff, Box::new(cod)), self.unit()))
            }
            Term::App(f, a) => {
                self.enter("T-App");
                let out = if let Term::Lam(x, None, body) = &**f {
                    self.let_app(ctx, x, body, a)?
                } else {
                    let (tf, ef) = self.infer(ctx, f)?;
                    let (ta, ea) = self.infer(ctx, a)?;
                    let Type::Pi(x, dom, lat, cod) = tf else {
                        return self.fail(TypeErrorKind::NotAFunction(tf.to_string()));
                    };
                    if !type_equiv(&dom, &ta, self.q()) {
                        return self.fail(TypeErrorKind::Mismatch { expected: dom.to_string(), found: ta.to_string() });
                    }
                    let (lat, cod) = self.instantiate(&x, a, &lat, &cod)?;
                    (cod, self.compose(EffectExpr::seq_all([ef, ea, lat]))?)
                };
                self.leave("T-App");
                Ok(out)
            }
            Term::If(c, t, f) => {
                self.enter("T-If");
                let (tc, ec) = self.infer(ctx, c)?;
                if tc != Type::Bool {
                    return self.fail(TypeErrorKind::Mismatch { expected: "bool".into(), found: tc.to_string() });
                }
                let (t1, e1) = self.infer(ctx, t)?;
                let (t2, e2) = self.infer(ctx, f)?;
                if !type_equiv(&t1, &t2, self.q()) {
                    return self.fail(TypeErrorKind::Mismatch { expected: t1.to_string(), found: t2.to_string() });
                }
                let eff = self.compose(EffectExpr::seq(ec, EffectExpr::join(e1, e2)))?;
                self.leave("T-If");
                Ok((t1, eff))
            }
            Term::While(c, b) => {
                self.enter("T-While");
                let (tc, ec) = self.infer(ctx, c)?;
                if tc != Type::Bool {
                    return self.fail(TypeErrorKind::Mismatch { expected: "bool".into(), found: tc.to_string() });
                }
                let (_, eb) = self.infer(ctx, b)?;
                let eff = self.compose(EffectExpr::seq(ec.clone(), EffectExpr::star(EffectExpr::seq(eb, ec))))?;
                self.leave("T-While");
                Ok((Type::Unit, eff))
            }
            Term::TyLam(a, k, body) => {
                self.enter("T-TyAbs");
                let (a, body) = self.rename_type_binder(ctx, a, body);
                let (t, eff) = self.infer(&ctx.with_type(&a, k.clone()), &body)?;
                self.leave("T-TyAbs");
                Ok((Type::Forall(a, k.clone(), eff, Box::new(t)), self.unit()))
            }
            Term::TyApp(f, arg) => {
                self.enter("T-TyApp");
                let (tf, ef) = self.infer(ctx, f)?;
                let Type::Forall(a, k, lat, body) = tf else {
                    return self.fail(TypeErrorKind::NotPolymorphic(tf.to_string()));
                };
                self.expect_kind(ctx, arg, &k)?;
                let body = body.subst_ty(&a, arg);
                self.expect_kind(ctx, &body, &Kind::Star)?;
                let eff = self.compose(EffectExpr::seq(ef, lat.subst_type(&a, arg)))?;
                self.leave("T-TyApp");
                Ok((body, eff))
            }
        }
    }

    /// `(λx. body) a` with no annotation: the argument's type stands in for it.
    fn let_app(&mut self, ctx: &Ctx, x: &str, body: &Term, a: &Term) -> Res<(Type, EffectExpr)> {
        let (ta, ea) = self.infer(ctx, a)?;
        self.enter("T-Lam");
        let (x, body) = self.rename_term_binder(ctx, x, body);
        let (tb, eb) = self.infer(&ctx.with_term(&x, ta), &body)?;
        self.leave("T-Lam");
        let (eb, tb) = self.instantiate(&x, a, &eb, &tb)?;
        Ok((tb, self.compose(EffectExpr::seq(ea, eb))?))
    }

    /// `γ[a/x]` and `τ[a/x]`, subject to the value-or-nonoccurrence condition.
    fn instantiate(&self, x: &str, a: &Term, lat: &EffectExpr, cod: &Type) -> Res<(EffectExpr, Type)> {
        if a.is_value() {
            return Ok((lat.subst_value(x, a), cod.subst(x, a)));
        }
        let lat = normalize(lat, self.q());
        if lat.free().terms.contains(x) || cod.free().terms.contains(x) {
            return self.fail(TypeErrorKind::DependentNonValue(x.to_string()));
        }
        Ok((lat, cod.clone()))
    }

    fn rename_term_binder(&self, ctx: &Ctx, x: &str, body: &Term) -> (String, Term) {
        if ctx.term(x).is_none() && !ctx.names().contains(x) {
            return (x.to_string(), body.clone());
        }
        let avoid: BTreeSet<String> = ctx.names().into_iter().chain(body.free().all()).chain([x.to_string()]).collect();
        let z = fresh(x, &avoid);
        (z.clone(), body.subst(x, &Term::Var(z)))
    }

    fn rename_type_binder(&self, ctx: &Ctx, a: &str, body: &Term) -> (String, Term) {
        if ctx.type_var(a).is_none() && !ctx.names().contains(a) {
            return (a.to_string(), body.clone());
        }
        let avoid: BTreeSet<String> = ctx.names().into_iter().chain(body.free().all()).chain([a.to_string()]).collect();
        let b = fresh(a, &avoid);
        (b.clone(), body.subst_ty(a, &Type::Var(b)))
    }

    fn expect_kind(&mut self, ctx: &Ctx, t: &Type, k: &Kind) -> Res<()> {
        let got = self.kind_of(ctx, t)?;
        if &got != k {
            return self.fail(TypeErrorKind::IllKinded(format!("{t} has kind {got}, expected {k}")));
        }
        Ok(())
    }

    fn kind_of(&mut self, ctx: &Ctx, t: &Type) -> Res<Kind> {
        match t {
            Type::Bool | Type::Unit => Ok(Kind::Star),
            Type::Con(c) => match self.sig.kinds.get(c) {
                Some(k) => Ok(k.clone()),
                None => self.fail(TypeErrorKind::UnknownTyCon(c.clone())),
            },
            Type::Var(a) => match ctx.type_var(a) {
                Some(k) => Ok(k.clone()),
                None => self.fail(TypeErrorKind::UnboundType(a.clone())),
            },
            Type::App(f, a) => {
                let kf = self.kind_of(ctx, f)?;
                let Kind::Arrow(from, to) = kf else {
                    return self.fail(TypeErrorKind::IllKinded(format!("{f} has kind {kf} and cannot be applied")));
                };
                self.expect_kind(ctx, a, &from)?;
                Ok(*to)
            }
            Type::Eff(e) => {
                self.kind_effect(ctx, e)?;
                Ok(Kind::Effect)
            }
            Type::Pi(x, dom, eff, cod) => {
                self.expect_kind(ctx, dom, &Kind::Star)?;
                let inner = ctx.with_term(x, (**dom).clone());
                self.kind_effect(&inner, eff)?;
                self.expect_kind(&inner, cod, &Kind::Star)?;
                Ok(Kind::Star)
            }
            Type::Forall(a, k, eff, body) => {
                let inner = ctx.with_type(a, k.clone());
                self.kind_effect(&inner, eff)?;
                self.expect_kind(&inner, body, &Kind::Star)?;
                Ok(Kind::Star)
            }
            Type::Sing(v) => {
                self.index_value(ctx, v)?;
                Ok(Kind::Star)
            }
        }
    }

    fn kind_effect(&mut self, ctx: &Ctx, e: &EffectExpr) -> Res<()> {
        match e {
            EffectExpr::Unit => Ok(()),
            EffectExpr::Var(a) => match ctx.type_var(a) {
                Some(Kind::Effect) => Ok(()),
                Some(k) => self.fail(TypeErrorKind::IllKinded(format!("'{a} has kind {k}, expected E"))),
                None => self.fail(TypeErrorKind::UnboundType(a.clone())),
            },
            EffectExpr::Seq(a, b) | EffectExpr::Join(a, b) => {
                self.kind_effect(ctx, a)?;
                self.kind_effect(ctx, b)
            }
            EffectExpr::Star(a) => self.kind_effect(ctx, a),
            EffectExpr::Ground(g) => {
                for v in g.values() {
                    self.index_value(ctx, &v)?;
                }
                Ok(())
            }
        }
    }

    /// A value typeable with effect I, as K-Concrete and K-Sing require.
    fn index_value(&mut self, ctx: &Ctx, v: &Term) -> Res<()> {
        if !v.is_value() {
            return self.fail(TypeErrorKind::NonValueIndex(v.to_string()));
        }
        let rules = self.rules.len();
        let (_, eff) = self.infer(ctx, v)?;
        self.rules.truncate(rules);
        debug_assert!(equiv(&eff, &EffectExpr::Unit, self.q()));
        Ok(())
    }
}

/// Rejects primitives of positive arity outside an application spine of
/// exactly that arity.
pub fn check_saturation(sigma: &StateEnv, e: &Term) -> Result<(), TypeError> {
    if let Some((p, args)) = e.spine() {
        let arity = sigma.get(p).map(|s| s.arity).unwrap_or(0);
        if arity > 0 && args.len() != arity {
            return Err(TypeError {
                kind: TypeErrorKind::PartialPrimitive { prim: p.to_string(), arity, given: args.len() },
                trace: vec!["T-Prim"],
            });
        }
        for a in args {
            if let Arg::Val(v) = a {
                check_saturation(sigma, v)?;
            }
        }
        return Ok(());
    }
    match e {
        Term::Prim(_) | Term::Var(_) | Term::Bool(_) | Term::Unit => Ok(()),
        Term::Lam(_, _, b) | Term::TyLam(_, _, b) | Term::TyApp(b, _) => check_saturation(sigma, b),
        Term::App(a, b) | Term::While(a, b) => {
            check_saturation(sigma, a)?;
            check_saturation(sigma, b)
        }
        Term::If(a, b, c) => {
            check_saturation(sigma, a)?;
            check_saturation(sigma, b)?;
            check_saturation(sigma, c)
        }
    }
}

/// `Γ;Σ ⊢ e : τ | γ` with the least effect, or the first rule that fails.
pub fn infer(sig: &Signature, ctx: &Ctx, sigma: &StateEnv, e: &Term) -> Result<Typing, TypeError> {
    check_saturation(sigma, e)?;
    let mut c = Checker { sig, sigma, stack: Vec::new(), rules: Vec::new() };
    let (ty, eff) = c.infer(ctx, e)?;
    Ok(Typing { ty, eff, rules: c.rules })
}

/// Typing of a closed program under δ.
pub fn infer_closed(sig: &Signature, e: &Term) -> Result<Typing, TypeError> {
    infer(sig, &Ctx::default(), &sig.delta, e)
}

pub fn kind_of(sig: &Signature, ctx: &Ctx, sigma: &StateEnv, t: &Type) -> Result<Kind, TypeError> {
    Checker { sig, sigma, stack: Vec::new(), rules: Vec::new() }.kind_of(ctx, t)
}

/// Succeeds iff the effect has kind ℰ.
pub fn kind_effect(sig: &Signature, ctx: &Ctx, sigma: &StateEnv, e: &EffectExpr) -> Result<(), TypeError> {
    Checker { sig, sigma, stack: Vec::new(), rules: Vec::new() }.kind_effect(ctx, e)
}

/// Structural equality up to renaming of bound variables and equivalence of
/// embedded effects.
pub fn type_equiv(a: &Type, b: &Type, q: &Domain) -> bool {
    match (a, b) {
        (Type::Bool, Type::Bool) | (Type::Unit, Type::Unit) => true,
        (Type::Con(x), Type::Con(y)) => x == y,
        (Type::Var(x), Type::Var(y)) => x == y,
        (Type::Var(x), Type::Eff(e)) | (Type::Eff(e), Type::Var(x)) => equiv(&EffectExpr::Var(x.clone()), e, q),
        (Type::Eff(x), Type::Eff(y)) => equiv(x, y, q),
        (Type::App(f1, a1), Type::App(f2, a2)) => type_equiv(f1, f2, q) && type_equiv(a1, a2, q),
        (Type::Sing(v1), Type::Sing(v2)) => v1 == v2,
        (Type::Pi(x1, d1, e1, c1), Type::Pi(x2, d2, e2, c2)) => {
            if !type_equiv(d1, d2, q) {
                return false;
            }
            let avoid: BTreeSet<String> =
                [a.free().all(), b.free().all(), [x1.clone(), x2.clone()].into()].into_iter().flatten().collect();
            let z = Term::Var(fresh(x1, &avoid));
            equiv(&e1.subst_value(x1, &z), &e2.subst_value(x2, &z), q) && type_equiv(&c1.subst(x1, &z), &c2.subst(x2, &z), q)
        }
        (Type::Forall(a1, k1, e1, t1), Type::Forall(a2, k2, e2, t2)) => {
            if k1 != k2 {
                return false;
            }
            let avoid: BTreeSet<String> =
                [a.free().all(), b.free().all(), [a1.clone(), a2.clone()].into()].into_iter().flatten().collect();
            let z = Type::Var(fresh(a1, &avoid));
            equiv(&e1.subst_type(a1, &z), &e2.subst_type(a2, &z), q) && type_equiv(&t1.subst_ty(a1, &z), &t2.subst_ty(a2, &z), q)
        }
        _ => false,
    }
}

/// The binders, latent effects and final result of an arity-`n` type.
fn peel(t: &Type, n: usize) -> Option<(Vec<EffectExpr>, Type)> {
    let mut effs = Vec::new();
    let mut cur = t;
    for _ in 0..n {
        match cur {
            Type::Pi(_, _, e, c) => {
                effs.push(e.clone());
                cur = c;
            }
            Type::Forall(_, _, e, b) => {
                effs.push(e.clone());
                cur = b;
            }
            _ => return None,
        }
    }
    Some((effs, cur.clone()))
}

/// The latent effect and result type a saturated application of `p` incurs,
/// with the arguments substituted in.
pub fn last_effect(sigma: &StateEnv, p: &str, args: &[Arg<'_>]) -> Option<(EffectExpr, Type)> {
    let s = sigma.get(p)?;
    let mut cur = s.ty.clone();
    let mut last = EffectExpr::Unit;
    for a in args {
        (last, cur) = match (cur, a) {
            (Type::Pi(x, _, e, c), Arg::Val(v)) => (e.subst_value(&x, v), c.subst(&x, v)),
            (Type::Forall(b, _, e, body), Arg::Ty(t)) => (e.subst_type(&b, t), body.subst_ty(&b, t)),
            _ => return None,
        };
    }
    Some((last, cur))
}

/// Validates δ: arity shape, unit latent effects before the last argument,
/// well-kindedness in the empty context, and no closed base or functional
/// types for constants.
pub fn check_primitive_table(sig: &Signature) -> LawReport<String> {
    let q = &sig.domain;
    let mut shape = LawResult::new("arity matches type shape");
    let mut prefix = LawResult::new("latent effects before the last argument are I");
    let mut kinded = LawResult::new("well-kinded in the empty context");
    let mut base = LawResult::new("not a closed base type");
    let mut constant = LawResult::new("constants are not functions");
    let bad = |law: &'static str, p: &str, obs: String, exp: &str| Counterexample {
        law,
        witnesses: vec![p.to_string()],
        mismatch: Mismatch::new(obs, exp),
    };
    for (p, s) in &sig.delta.prims {
        shape.checked += 1;
        match peel(&s.ty, s.arity) {
            None => shape.record(bad(shape.name, p, s.ty.to_string(), &format!("{} binders", s.arity))),
            Some((effs, _)) => {
                prefix.checked += 1;
                let n = effs.len().saturating_sub(1);
                if let Some(e) = effs[..n].iter().find(|e| !equiv(e, &EffectExpr::Unit, q)) {
                    prefix.record(bad(prefix.name, p, e.to_string(), "I"));
                }
            }
        }
        kinded.checked += 1;
        match kind_of(sig, &Ctx::default(), &sig.delta, &s.ty) {
            Ok(Kind::Star) => {}
            Ok(k) => kinded.record(bad(kinded.name, p, k.to_string(), "*")),
            Err(e) => kinded.record(bad(kinded.name, p, e.to_string(), "*")),
        }
        base.checked += 1;
        if matches!(s.ty, Type::Bool | Type::Unit) {
            base.record(bad(base.name, p, s.ty.to_string(), "a non-base type"));
        }
        if s.arity == 0 {
            constant.checked += 1;
            if matches!(s.ty, Type::Pi(..) | Type::Forall(..)) {
                constant.record(bad(constant.name, p, s.ty.to_string(), "a non-function type"));
            }
        }
    }
    let mut report = LawReport::new(format!("δ over {}", q.name()));
    report.laws = vec![shape, prefix, kinded, base, constant];
    report
}
