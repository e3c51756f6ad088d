//! S-expression syntax for terms, types and kinds, and the infix effect
//! syntax used inside `[...]`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::domain::Domain;
use crate::syntax::{EffectExpr, Kind, Term, Type};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, msg: msg.into() })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
    /// Raw text between square brackets.
    Bracket(String, usize),
}

impl Sexp {
    fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) | Sexp::Bracket(_, p) => *p,
        }
    }
}

pub fn read_sexps(src: &str) -> Result<Vec<Sexp>, ParseError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let mut stack: Vec<(Vec<Sexp>, usize)> = vec![(Vec::new(), 0)];
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            ';' if chars.get(i + 1).map(|x| x.1) == Some(';') => {
                while i < chars.len() && chars[i].1 != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_whitespace() => {}
            '(' => stack.push((Vec::new(), pos)),
            ')' => {
                if stack.len() == 1 {
                    return err(pos, "unbalanced `)`");
                }
                let (items, start) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.push(Sexp::List(items, start));
            }
            '[' => {
                let mut depth = 1;
                let mut j = i + 1;
                while j < chars.len() {
                    match chars[j].1 {
                        '[' => depth += 1,
                        ']' => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                    j += 1;
                }
                if j >= chars.len() {
                    return err(pos, "unclosed `[`");
                }
                let text: String = chars[i + 1..j].iter().map(|x| x.1).collect();
                stack.last_mut().unwrap().0.push(Sexp::Bracket(text, pos + 1));
                i = j;
            }
            ']' => return err(pos, "unbalanced `]`"),
            _ => {
                let mut j = i;
                while j < chars.len() && !chars[j].1.is_whitespace() && !"()[]".contains(chars[j].1) {
                    j += 1;
                }
                let text: String = chars[i..j].iter().map(|x| x.1).collect();
                stack.last_mut().unwrap().0.push(Sexp::Atom(text, pos));
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if stack.len() != 1 {
        return err(stack.last().unwrap().1, "unclosed `(`");
    }
    Ok(stack.pop().unwrap().0)
}

/// Parses programs for one effect domain with a fixed set of type
/// constructors and primitives.
pub struct Parser<'a> {
    pub domain: &'a Domain,
    pub kinds: &'a BTreeMap<String, Kind>,
}

const KEYWORDS: &[&str] = &["lam", "app", "tylam", "tyapp", "if", "while", "seq", "let"];

impl<'a> Parser<'a> {
    pub fn new(domain: &'a Domain, kinds: &'a BTreeMap<String, Kind>) -> Self {
        Parser { domain, kinds }
    }

    /// Parses one term and turns free identifiers that name primitives into
    /// primitive references.
    pub fn program(&self, src: &str, is_prim: &dyn Fn(&str) -> bool) -> Result<Term, ParseError> {
        let items = read_sexps(src)?;
        let [item] = items.as_slice() else {
            return err(0, format!("expected one term, found {}", items.len()));
        };
        let t = self.term(item)?;
        Ok(resolve(&t, is_prim))
    }

    pub fn term(&self, s: &Sexp) -> Result<Term, ParseError> {
        match s {
            Sexp::Atom(a, p) => match a.as_str() {
                "true" => Ok(Term::Bool(true)),
                "false" => Ok(Term::Bool(false)),
                "unit" | "()" => Ok(Term::Unit),
                _ if KEYWORDS.contains(&a.as_str()) => err(*p, format!("keyword `{a}` used as a name")),
                _ => Ok(Term::Var(ident(a, *p)?)),
            },
            Sexp::Bracket(_, p) => err(*p, "an effect is not a term"),
            Sexp::List(items, p) => {
                let Some(head) = items.first() else { return Ok(Term::Unit) };
                let kw = if let Sexp::Atom(a, _) = head { a.as_str() } else { "" };
                let args = &items[1..];
                match kw {
                    "lam" => {
                        let [binder, body] = args else { return err(*p, "lam takes a binder and a body") };
                        if let Sexp::Atom(x, xp) = binder {
                            return Ok(Term::Lam(ident(x, *xp)?, None, Box::new(self.term(body)?)));
                        }
                        let (x, t) = self.binder(binder)?;
                        Ok(Term::lam(&x, self.ty(t)?, self.term(body)?))
                    }
                    "app" => {
                        if args.len() < 2 {
                            return err(*p, "app takes a function and at least one argument");
                        }
                        let f = self.term(&args[0])?;
                        args[1..].iter().try_fold(f, |f, a| Ok(Term::app(f, self.term(a)?)))
                    }
                    "tylam" => {
                        let [binder, body] = args else { return err(*p, "tylam takes a binder and a body") };
                        let (a, k) = self.binder(binder)?;
                        Ok(Term::tylam(&a, self.kind(k)?, self.term(body)?))
                    }
                    "tyapp" => {
                        if args.len() < 2 {
                            return err(*p, "tyapp takes a term and at least one type");
                        }
                        let e = self.term(&args[0])?;
                        args[1..].iter().try_fold(e, |e, t| Ok(Term::tyapp(e, self.ty(t)?)))
                    }
                    "if" => {
                        let [c, a, b] = args else { return err(*p, "if takes three terms") };
                        Ok(Term::if_(self.term(c)?, self.term(a)?, self.term(b)?))
                    }
                    "while" => {
                        let [c, b] = args else { return err(*p, "while takes two terms") };
                        Ok(Term::while_(self.term(c)?, self.term(b)?))
                    }
                    "seq" => {
                        if args.is_empty() {
                            return err(*p, "seq needs at least one term");
                        }
                        Ok(Term::seq_all(args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?))
                    }
                    "let" => {
                        let [Sexp::List(b, bp), body] = args else { return err(*p, "let takes (x e) and a body") };
                        let [Sexp::Atom(x, xp), e] = b.as_slice() else { return err(*bp, "let binder must be (x e)") };
                        Ok(Term::let_(&ident(x, *xp)?, self.term(e)?, self.term(body)?))
                    }
                    _ => {
                        if items.len() < 2 {
                            return self.term(head);
                        }
                        let f = self.term(head)?;
                        args.iter().try_fold(f, |f, a| Ok(Term::app(f, self.term(a)?)))
                    }
                }
            }
        }
    }

    fn binder<'s>(&self, s: &'s Sexp) -> Result<(String, &'s Sexp), ParseError> {
        match s {
            Sexp::List(items, p) => match items.as_slice() {
                [Sexp::Atom(x, xp), t] => Ok((ident(x, *xp)?, t)),
                _ => err(*p, "binder must be (name annotation)"),
            },
            _ => err(s.pos(), "binder must be (name annotation)"),
        }
    }

    pub fn kind(&self, s: &Sexp) -> Result<Kind, ParseError> {
        match s {
            Sexp::Atom(a, p) => match a.as_str() {
                "*" | "⋆" | "type" => Ok(Kind::Star),
                "E" | "ℰ" | "eff" => Ok(Kind::Effect),
                _ => err(*p, format!("unknown kind `{a}`")),
            },
            Sexp::List(items, p) => match items.as_slice() {
                [Sexp::Atom(arrow, _), a, b] if arrow == "=>" => Ok(Kind::arrow(self.kind(a)?, self.kind(b)?)),
                _ => err(*p, "kind must be *, E or (=> K K)"),
            },
            Sexp::Bracket(_, p) => err(*p, "kind expected"),
        }
    }

    pub fn ty(&self, s: &Sexp) -> Result<Type, ParseError> {
        match s {
            Sexp::Atom(a, p) => match a.as_str() {
                "bool" => Ok(Type::Bool),
                "unit" => Ok(Type::Unit),
                _ if self.kinds.contains_key(a) => Ok(Type::Con(a.clone())),
                _ if a.starts_with('\'') => Ok(Type::Var(ident(&a[1..], *p)?)),
                _ => Ok(Type::Var(ident(a, *p)?)),
            },
            Sexp::Bracket(text, p) => Ok(Type::Eff(self.effect_at(text, *p)?)),
            Sexp::List(items, p) => {
                let Some(Sexp::Atom(head, _)) = items.first() else { return err(*p, "type expected") };
                let args = &items[1..];
                match head.as_str() {
                    "pi" => {
                        let [binder, eff, cod] = args else { return err(*p, "pi takes (x T), an effect and a type") };
                        let (x, dom) = self.binder(binder)?;
                        Ok(Type::pi(&x, self.ty(dom)?, self.effect_sexp(eff)?, self.ty(cod)?))
                    }
                    "->" => {
                        let [dom, eff, cod] = args else { return err(*p, "-> takes a type, an effect and a type") };
                        Ok(Type::pi("_", self.ty(dom)?, self.effect_sexp(eff)?, self.ty(cod)?))
                    }
                    "all" => {
                        let [binder, eff, body] = args else { return err(*p, "all takes (a K), an effect and a type") };
                        let (a, k) = self.binder(binder)?;
                        Ok(Type::forall(&a, self.kind(k)?, self.effect_sexp(eff)?, self.ty(body)?))
                    }
                    "S" => {
                        let [v] = args else { return err(*p, "S takes one value") };
                        Ok(Type::sing(self.term(v)?))
                    }
                    _ => {
                        let f = self.ty(&items[0])?;
                        args.iter().try_fold(f, |f, a| Ok(Type::app(f, self.ty(a)?)))
                    }
                }
            }
        }
    }

    fn effect_sexp(&self, s: &Sexp) -> Result<EffectExpr, ParseError> {
        match s {
            Sexp::Bracket(text, p) | Sexp::Atom(text, p) => self.effect_at(text, *p),
            Sexp::List(_, p) => err(*p, "effect expected; write it in [...]"),
        }
    }

    /// Parses the infix effect syntax.
    pub fn effect(&self, src: &str) -> Result<EffectExpr, ParseError> {
        self.effect_at(src, 0)
    }

    fn effect_at(&self, src: &str, base: usize) -> Result<EffectExpr, ParseError> {
        let mut p = EffParser { src, chars: src.char_indices().collect(), i: 0, base, outer: self };
        let e = p.join()?;
        p.skip_ws();
        if p.i < p.chars.len() {
            return err(p.pos(), format!("unexpected `{}` in effect", p.chars[p.i].1));
        }
        Ok(e)
    }
}

fn ident(a: &str, p: usize) -> Result<String, ParseError> {
    let ok = !a.is_empty() && a.chars().all(|c| c.is_alphanumeric() || "_-'.".contains(c)) && !a.starts_with(|c: char| c.is_ascii_digit());
    if ok {
        Ok(a.to_string())
    } else {
        err(p, format!("bad identifier `{a}`"))
    }
}

struct EffParser<'s, 'p> {
    src: &'s str,
    chars: Vec<(usize, char)>,
    i: usize,
    base: usize,
    outer: &'p Parser<'p>,
}

impl EffParser<'_, '_> {
    fn pos(&self) -> usize {
        self.base + self.chars.get(self.i).map(|c| c.0).unwrap_or(self.src.len())
    }

    fn skip_ws(&mut self) {
        while self.i < self.chars.len() && self.chars[self.i].1.is_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.i).map(|c| c.1)
    }

    fn join(&mut self) -> Result<EffectExpr, ParseError> {
        let mut e = self.seq()?;
        while matches!(self.peek(), Some('|' | '⊔')) {
            self.i += 1;
            e = EffectExpr::join(e, self.seq()?);
        }
        Ok(e)
    }

    fn seq(&mut self) -> Result<EffectExpr, ParseError> {
        let mut e = self.postfix()?;
        while matches!(self.peek(), Some(';' | '▷')) {
            self.i += 1;
            e = EffectExpr::seq(e, self.postfix()?);
        }
        Ok(e)
    }

    fn postfix(&mut self) -> Result<EffectExpr, ParseError> {
        let mut e = self.pair()?;
        while self.peek() == Some('*') {
            self.i += 1;
            e = EffectExpr::star(e);
        }
        Ok(e)
    }

    fn pair(&mut self) -> Result<EffectExpr, ParseError> {
        self.skip_ws();
        let start = self.pos();
        let first = self.atom()?;
        if !matches!(self.peek(), Some('&' | '⊗')) {
            return Ok(first);
        }
        let mut parts = vec![first];
        while matches!(self.peek(), Some('&' | '⊗')) {
            self.i += 1;
            parts.push(self.atom()?);
        }
        let grounds: Option<Vec<_>> = parts
            .into_iter()
            .map(|p| match p {
                EffectExpr::Ground(g) => Some(g),
                _ => None,
            })
            .collect();
        let Some(grounds) = grounds else { return err(start, "`&` joins constructor literals only") };
        match self.outer.domain.pair_literal(grounds) {
            Ok(g) => Ok(EffectExpr::Ground(g)),
            Err(m) => err(start, m),
        }
    }

    fn word(&mut self) -> String {
        let start = self.i;
        while self.i < self.chars.len() && (self.chars[self.i].1.is_alphanumeric() || "_-.".contains(self.chars[self.i].1)) {
            self.i += 1;
        }
        self.chars[start..self.i].iter().map(|c| c.1).collect()
    }

    fn atom(&mut self) -> Result<EffectExpr, ParseError> {
        self.skip_ws();
        let pos = self.pos();
        match self.peek() {
            Some('(') => {
                self.i += 1;
                let e = self.join()?;
                if self.peek() != Some(')') {
                    return err(self.pos(), "expected `)`");
                }
                self.i += 1;
                Ok(e)
            }
            Some('\'') => {
                self.i += 1;
                let w = self.word();
                if w.is_empty() {
                    return err(pos, "effect variable needs a name");
                }
                Ok(EffectExpr::Var(w))
            }
            Some('ε') => {
                self.i += 1;
                Ok(EffectExpr::Unit)
            }
            Some(c) if c.is_alphabetic() || c == '⊤' => {
                let name = if c == '⊤' {
                    self.i += 1;
                    "TOP".to_string()
                } else {
                    self.word()
                };
                let args = if self.chars.get(self.i).map(|c| c.1) == Some('(') { self.args()? } else { Vec::new() };
                if name == "I" && args.is_empty() {
                    return Ok(EffectExpr::Unit);
                }
                match self.outer.domain.construct(&name, &args) {
                    Ok(Some(g)) => Ok(EffectExpr::Ground(g)),
                    Ok(None) => err(pos, format!("unknown effect constructor `{name}` for {}", self.outer.domain)),
                    Err(m) => err(pos, m),
                }
            }
            Some(c) => err(pos, format!("unexpected `{c}` in effect")),
            None => err(pos, "effect expected"),
        }
    }

    /// Constructor arguments: comma-separated values in term syntax.
    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        let open = self.i;
        let mut depth = 0;
        let mut j = self.i;
        let mut cuts = vec![open + 1];
        while j < self.chars.len() {
            match self.chars[j].1 {
                '(' | '[' => depth += 1,
                ')' | ']' => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                ',' if depth == 1 => cuts.push(j + 1),
                _ => {}
            }
            j += 1;
        }
        if j >= self.chars.len() {
            return err(self.pos(), "unclosed constructor arguments");
        }
        cuts.push(j + 1);
        self.i = j + 1;
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let (from, to) = (w[0], w[1] - 1);
            let text: String = self.chars[from..to].iter().map(|c| c.1).collect();
            if text.trim().is_empty() {
                if cuts.len() == 2 {
                    break;
                }
                return err(self.base + self.chars[from].0, "empty constructor argument");
            }
            let at = self.base + self.chars[from].0;
            let items = read_sexps(&text).map_err(|e| ParseError { pos: at + e.pos, msg: e.msg })?;
            let [item] = items.as_slice() else { return err(at, "constructor argument must be one value") };
            out.push(self.outer.term(item).map_err(|e| ParseError { pos: at + e.pos, msg: e.msg })?);
        }
        Ok(out)
    }
}

/// Replaces free occurrences of primitive names by primitive references.
pub fn resolve(t: &Term, is_prim: &dyn Fn(&str) -> bool) -> Term {
    let free = t.free().terms;
    free.iter().filter(|x| is_prim(x)).fold(t.clone(), |t, x| t.subst(x, &Term::Prim(x.clone())))
}
