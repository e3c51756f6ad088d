//! A first-order-events fragment of λ_trace: its own type-and-history
//! checker, and the translation into the core calculus over histories.

use std::collections::BTreeSet;
use std::fmt;

use eqkit_core::instances::regex::RegexEffect;
use thiserror::Error;

use crate::domain::Domain;
use crate::effect::ground_of;
use crate::parse::{read_sexps, ParseError, Parser, Sexp};
use crate::syntax::{EffectExpr, Ground, Term, Type};

/// A history effect: a regular language of event traces.
pub type H = RegexEffect<Term>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LtType {
    Unit,
    Bool,
    Event,
    Arrow(Box<LtType>, H, Box<LtType>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LtTerm {
    Var(String),
    Const(String),
    Unit,
    Bool(bool),
    Ev(Box<LtTerm>),
    If(Box<LtTerm>, Box<LtTerm>, Box<LtTerm>),
    App(Box<LtTerm>, Box<LtTerm>),
    Lam(String, LtType, Box<LtTerm>),
    Let(String, Box<LtTerm>, Box<LtTerm>),
}

impl LtTerm {
    pub fn is_value(&self) -> bool {
        matches!(self, LtTerm::Var(_) | LtTerm::Const(_) | LtTerm::Unit | LtTerm::Bool(_) | LtTerm::Lam(..))
    }
}

impl fmt::Display for LtType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtType::Unit => write!(f, "unit"),
            LtType::Bool => write!(f, "bool"),
            LtType::Event => write!(f, "event"),
            LtType::Arrow(a, h, b) => write!(f, "({a} -[{}]-> {b})", Ground::Trace(h.clone())),
        }
    }
}

impl fmt::Display for LtTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtTerm::Var(x) | LtTerm::Const(x) => write!(f, "{x}"),
            LtTerm::Unit => write!(f, "unit"),
            LtTerm::Bool(b) => write!(f, "{b}"),
            LtTerm::Ev(c) => write!(f, "(ev {c})"),
            LtTerm::If(c, a, b) => write!(f, "(if {c} {a} {b})"),
            LtTerm::App(a, b) => write!(f, "({a} {b})"),
            LtTerm::Lam(x, t, b) => write!(f, "(lam ({x} {t}) {b})"),
            LtTerm::Let(x, v, b) => write!(f, "(let ({x} {v}) {b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LtError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("outside the supported fragment: {0}")]
    OutsideFragment(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("expected {expected}, found {found}")]
    Mismatch { expected: String, found: String },
    #[error("not a function: {0}")]
    NotAFunction(String),
}

/// A parsed λ_trace program and the event constants it uses.
#[derive(Clone, Debug)]
pub struct LtProgram {
    pub term: LtTerm,
    pub events: Vec<String>,
}

/// Parses λ_trace surface syntax. Without an explicit alphabet, the events
/// are the unbound names passed to `ev`.
pub fn parse(src: &str, alphabet: Option<&[&str]>) -> Result<LtProgram, LtError> {
    let items = read_sexps(src)?;
    let [item] = items.as_slice() else {
        return Err(ParseError { pos: 0, msg: format!("expected one term, found {}", items.len()) }.into());
    };
    let events: BTreeSet<String> = match alphabet {
        Some(a) => a.iter().map(|s| s.to_string()).collect(),
        None => {
            let mut out = BTreeSet::new();
            collect_events(item, &mut Vec::new(), &mut out);
            out
        }
    };
    let events: Vec<String> = events.into_iter().collect();
    let refs: Vec<&str> = events.iter().map(String::as_str).collect();
    let domain = Domain::trace(&refs, false);
    let p = LtParser { domain: &domain, events: &events };
    let term = p.term(item, &mut Vec::new())?;
    Ok(LtProgram { term, events })
}

fn collect_events(s: &Sexp, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let Sexp::List(items, _) = s else { return };
    match items.as_slice() {
        [Sexp::Atom(h, _), Sexp::Atom(c, _)] if h == "ev" && !bound.contains(c) => {
            out.insert(c.clone());
        }
        [Sexp::Atom(h, _), Sexp::List(b, _), body] if h == "lam" || h == "let" => {
            if let Some(v) = b.get(1).filter(|_| h == "let") {
                collect_events(v, bound, out);
            }
            let name = match b.first() {
                Some(Sexp::Atom(x, _)) => Some(x.clone()),
                _ => None,
            };
            bound.extend(name.clone());
            collect_events(body, bound, out);
            if name.is_some() {
                bound.pop();
            }
        }
        _ => items.iter().for_each(|i| collect_events(i, bound, out)),
    }
}

struct LtParser<'a> {
    domain: &'a Domain,
    events: &'a [String],
}

fn perr<T>(pos: usize, msg: impl Into<String>) -> Result<T, LtError> {
    Err(ParseError { pos, msg: msg.into() }.into())
}

impl LtParser<'_> {
    fn term(&self, s: &Sexp, bound: &mut Vec<String>) -> Result<LtTerm, LtError> {
        match s {
            Sexp::Atom(a, _) => Ok(match a.as_str() {
                "unit" => LtTerm::Unit,
                "true" => LtTerm::Bool(true),
                "false" => LtTerm::Bool(false),
                _ if !bound.contains(a) && self.events.contains(a) => LtTerm::Const(a.clone()),
                _ => LtTerm::Var(a.clone()),
            }),
            Sexp::Bracket(_, p) => perr(*p, "a history effect is not a term"),
            Sexp::List(items, p) => {
                let head = match items.first() {
                    Some(Sexp::Atom(h, _)) => h.as_str(),
                    Some(_) => "",
                    None => return Ok(LtTerm::Unit),
                };
                match (head, &items[1..]) {
                    ("mu" | "fix" | "forall" | "all", _) => Err(LtError::OutsideFragment(format!("`{head}`"))),
                    ("ev", [c]) => Ok(LtTerm::Ev(Box::new(self.term(c, bound)?))),
                    ("if", [c, a, b]) => Ok(LtTerm::If(
                        Box::new(self.term(c, bound)?),
                        Box::new(self.term(a, bound)?),
                        Box::new(self.term(b, bound)?),
                    )),
                    ("lam", [Sexp::List(b, bp), body]) => {
                        let [Sexp::Atom(x, _), t] = b.as_slice() else { return perr(*bp, "binder must be (x T)") };
                        let t = self.ty(t)?;
                        bound.push(x.clone());
                        let body = self.term(body, bound);
                        bound.pop();
                        Ok(LtTerm::Lam(x.clone(), t, Box::new(body?)))
                    }
                    ("let", [Sexp::List(b, bp), body]) => {
                        let [Sexp::Atom(x, _), v] = b.as_slice() else { return perr(*bp, "let binder must be (x v)") };
                        let v = self.term(v, bound)?;
                        bound.push(x.clone());
                        let body = self.term(body, bound);
                        bound.pop();
                        Ok(LtTerm::Let(x.clone(), Box::new(v), Box::new(body?)))
                    }
                    ("app", [f, a]) => Ok(LtTerm::App(Box::new(self.term(f, bound)?), Box::new(self.term(a, bound)?))),
                    ("ev" | "if" | "lam" | "let" | "app", _) => perr(*p, format!("malformed `{head}`")),
                    (_, [a]) => Ok(LtTerm::App(Box::new(self.term(&items[0], bound)?), Box::new(self.term(a, bound)?))),
                    _ => perr(*p, "application takes one argument"),
                }
            }
        }
    }

    fn ty(&self, s: &Sexp) -> Result<LtType, LtError> {
        match s {
            Sexp::Atom(a, p) => match a.as_str() {
                "unit" => Ok(LtType::Unit),
                "bool" => Ok(LtType::Bool),
                "event" => Ok(LtType::Event),
                _ => perr(*p, format!("unknown type `{a}`")),
            },
            Sexp::List(items, p) => match items.as_slice() {
                [Sexp::Atom(arrow, _), a, h, b] if arrow == "->" => Ok(LtType::Arrow(Box::new(self.ty(a)?), self.history(h)?, Box::new(self.ty(b)?))),
                _ => perr(*p, "type must be unit, bool, event or (-> T [H] T)"),
            },
            Sexp::Bracket(_, p) => perr(*p, "type expected"),
        }
    }

    fn history(&self, s: &Sexp) -> Result<H, LtError> {
        let (text, pos) = match s {
            Sexp::Bracket(t, p) | Sexp::Atom(t, p) => (t, *p),
            Sexp::List(_, p) => return perr(*p, "history effect expected in [...]"),
        };
        let kinds = Default::default();
        let e = Parser::new(self.domain, &kinds).effect(text).map_err(|e| ParseError { pos: pos + e.pos, msg: e.msg })?;
        let e = names_as_events(&e);
        match ground_of(&e, self.domain) {
            Some(Ground::Trace(h)) => Ok(h),
            _ => perr(pos, "history effect must be closed"),
        }
    }
}

/// Reads constructor arguments written as names as event constants.
fn names_as_events(e: &EffectExpr) -> EffectExpr {
    e.free().terms.iter().fold(e.clone(), |e, x| e.subst_value(x, &Term::prim(x)))
}

fn lt_eq(a: &LtType, b: &LtType) -> bool {
    a == b
}

/// The λ_trace judgment `Γ,H ⊢ e : τ`, with the least `H` that Weaken allows.
pub fn check(ctx: &[(String, LtType)], e: &LtTerm) -> Result<(LtType, H), LtError> {
    let eps = H::eps;
    match e {
        LtTerm::Var(x) => match ctx.iter().rev().find(|(y, _)| y == x) {
            Some((_, t)) => Ok((t.clone(), eps())),
            None => Err(LtError::Unbound(x.clone())),
        },
        LtTerm::Const(_) => Ok((LtType::Event, eps())),
        LtTerm::Unit => Ok((LtType::Unit, eps())),
        LtTerm::Bool(_) => Ok((LtType::Bool, eps())),
        LtTerm::Ev(c) => match &**c {
            LtTerm::Const(c) => Ok((LtType::Unit, H::sym(Term::prim(c)))),
            other => Err(LtError::OutsideFragment(format!("ev applied to {other}"))),
        },
        LtTerm::If(c, a, b) => {
            let (tc, h1) = check(ctx, c)?;
            if tc != LtType::Bool {
                return Err(LtError::Mismatch { expected: "bool".into(), found: tc.to_string() });
            }
            let (ta, ha) = check(ctx, a)?;
            let (tb, hb) = check(ctx, b)?;
            if !lt_eq(&ta, &tb) {
                return Err(LtError::Mismatch { expected: ta.to_string(), found: tb.to_string() });
            }
            Ok((ta, h1.seq(&ha.join(&hb))))
        }
        LtTerm::App(f, a) => {
            let (tf, h1) = check(ctx, f)?;
            let (ta, h2) = check(ctx, a)?;
            let LtType::Arrow(dom, h3, cod) = tf else { return Err(LtError::NotAFunction(tf.to_string())) };
            if !lt_eq(&dom, &ta) {
                return Err(LtError::Mismatch { expected: dom.to_string(), found: ta.to_string() });
            }
            Ok((*cod, h1.seq(&h2).seq(&h3)))
        }
        LtTerm::Lam(x, t, body) => {
            let mut inner = ctx.to_vec();
            inner.push((x.clone(), t.clone()));
            let (tb, h) = check(&inner, body)?;
            Ok((LtType::Arrow(Box::new(t.clone()), h, Box::new(tb)), eps()))
        }
        LtTerm::Let(x, v, body) => {
            if !v.is_value() {
                return Err(LtError::OutsideFragment(format!("let binds the non-value {v}")));
            }
            let (tv, _) = check(ctx, v)?;
            let mut inner = ctx.to_vec();
            inner.push((x.clone(), tv));
            check(&inner, body)
        }
    }
}

pub fn translate_type(t: &LtType) -> Type {
    match t {
        LtType::Unit => Type::Unit,
        LtType::Bool => Type::Bool,
        LtType::Event => Type::con("event"),
        LtType::Arrow(a, h, b) => Type::pi("_", translate_type(a), EffectExpr::Ground(Ground::Trace(h.clone())), translate_type(b)),
    }
}

/// `⦅e⦆`.
pub fn translate(e: &LtTerm) -> Result<Term, LtError> {
    Ok(match e {
        LtTerm::Var(x) => Term::var(x),
        LtTerm::Const(c) => Term::prim(c),
        LtTerm::Unit => Term::Unit,
        LtTerm::Bool(b) => Term::Bool(*b),
        LtTerm::Ev(c) => match &**c {
            LtTerm::Const(c) => Term::app(Term::prim("ev"), Term::prim(c)),
            other => return Err(LtError::OutsideFragment(format!("ev applied to {other}"))),
        },
        LtTerm::If(c, a, b) => Term::if_(translate(c)?, translate(a)?, translate(b)?),
        LtTerm::App(f, a) => Term::app(translate(f)?, translate(a)?),
        LtTerm::Lam(x, t, b) => Term::lam(x, translate_type(t), translate(b)?),
        LtTerm::Let(x, v, b) => {
            if !v.is_value() {
                return Err(LtError::OutsideFragment(format!("let binds the non-value {v}")));
            }
            Term::let_(x, translate(v)?, translate(b)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::infer_closed;
    use crate::runtime::Instantiation;
    use crate::systems::History;

    #[test]
    fn basic_clauses() {
        assert_eq!(translate(&LtTerm::Var("x".into())).unwrap(), Term::var("x"));
        let p = parse("(ev c)", None).unwrap();
        assert_eq!(p.events, vec!["c"]);
        assert_eq!(translate(&p.term).unwrap(), Term::app(Term::prim("ev"), Term::prim("c")));
    }

    #[test]
    fn let_bound_function_called_twice() {
        let p = parse("(let (x (lam (y unit) (ev a))) ((lam (z unit) (x unit)) (x unit)))", None).unwrap();
        let (_, h) = check(&[], &p.term).unwrap();
        let aa = H::word(&[Term::prim("a"), Term::prim("a")]);
        assert_eq!(h, aa);
        let inst = History::new(&["a"]);
        let t = infer_closed(inst.signature(), &translate(&p.term).unwrap()).unwrap();
        assert_eq!(t.eff, EffectExpr::Ground(Ground::Trace(aa)));
    }

    #[test]
    fn annotated_arrow() {
        let p = parse("(lam (f (-> unit [ev(a) ; ev(b)] unit)) (f unit))", None).unwrap();
        assert_eq!(p.events, Vec::<String>::new());
        let p = parse("(lam (f (-> unit [ev(a) ; ev(b)] unit)) (f unit))", Some(&["a", "b"])).unwrap();
        let (t, h) = check(&[], &p.term).unwrap();
        assert_eq!(h, H::eps());
        let LtType::Arrow(_, lat, _) = t else { panic!() };
        assert_eq!(lat, H::word(&[Term::prim("a"), Term::prim("b")]));
    }

    #[test]
    fn outside_fragment() {
        assert!(matches!(parse("(mu f unit)", None), Err(LtError::OutsideFragment(_))));
        let p = parse("(lam (x event) (ev x))", None).unwrap();
        assert!(matches!(translate(&p.term), Err(LtError::OutsideFragment(_))));
    }
}
