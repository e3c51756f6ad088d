//! Regular expressions and canonical minimal DFAs.
//!
//! Every automaton handed out by this module is minimal, has its dead states
//! removed, and numbers states in breadth-first order over sorted symbols, so
//! two expressions denote the same language iff their DFAs are equal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Regex<S> {
    Empty,
    Eps,
    Sym(S),
    Cat(Box<Regex<S>>, Box<Regex<S>>),
    Alt(Box<Regex<S>>, Box<Regex<S>>),
    Star(Box<Regex<S>>),
}

impl<S: Clone + PartialEq> Regex<S> {
    pub fn sym(s: S) -> Self {
        Regex::Sym(s)
    }

    pub fn cat(a: Self, b: Self) -> Self {
        match (a, b) {
            (Regex::Empty, _) | (_, Regex::Empty) => Regex::Empty,
            (Regex::Eps, x) | (x, Regex::Eps) => x,
            (a, b) => Regex::Cat(Box::new(a), Box::new(b)),
        }
    }

    pub fn alt(a: Self, b: Self) -> Self {
        match (a, b) {
            (Regex::Empty, x) | (x, Regex::Empty) => x,
            (a, b) if a == b => a,
            (a, b) => Regex::Alt(Box::new(a), Box::new(b)),
        }
    }

    pub fn star(a: Self) -> Self {
        match a {
            Regex::Empty | Regex::Eps => Regex::Eps,
            s @ Regex::Star(_) => s,
            a => Regex::Star(Box::new(a)),
        }
    }

    pub fn map<T: Clone + PartialEq>(&self, f: &dyn Fn(&S) -> T) -> Regex<T> {
        match self {
            Regex::Empty => Regex::Empty,
            Regex::Eps => Regex::Eps,
            Regex::Sym(s) => Regex::Sym(f(s)),
            Regex::Cat(a, b) => Regex::cat(a.map(f), b.map(f)),
            Regex::Alt(a, b) => Regex::alt(a.map(f), b.map(f)),
            Regex::Star(a) => Regex::star(a.map(f)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Regex::Empty | Regex::Eps | Regex::Sym(_) => 1,
            Regex::Cat(a, b) | Regex::Alt(a, b) => 1 + a.size() + b.size(),
            Regex::Star(a) => 1 + a.size(),
        }
    }
}

impl<S: fmt::Display> Regex<S> {
    fn prec(&self) -> u8 {
        match self {
            Regex::Alt(..) => 0,
            Regex::Cat(..) => 1,
            _ => 2,
        }
    }

    fn wrap(&self, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.prec() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl<S: fmt::Display> fmt::Display for Regex<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regex::Empty => write!(f, "∅"),
            Regex::Eps => write!(f, "ε"),
            Regex::Sym(s) => write!(f, "{s}"),
            Regex::Alt(a, b) => {
                a.wrap(0, f)?;
                write!(f, "|")?;
                b.wrap(0, f)
            }
            Regex::Cat(a, b) => {
                a.wrap(1, f)?;
                if !(short(a) && short(b)) {
                    write!(f, "·")?;
                }
                b.wrap(1, f)
            }
            Regex::Star(a) => {
                a.wrap(2, f)?;
                write!(f, "*")
            }
        }
    }
}

/// Whether juxtaposition is unambiguous next to this operand.
fn short<S: fmt::Display>(r: &Regex<S>) -> bool {
    match r {
        Regex::Sym(s) => s.to_string().chars().count() == 1,
        Regex::Cat(a, b) => short(a) && short(b),
        Regex::Star(a) => short(a),
        _ => true,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegexParseError(pub String);

impl fmt::Display for RegexParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "regex: {}", self.0)
    }
}

impl std::error::Error for RegexParseError {}

/// Parses single-character symbols with `|`, postfix `*`, grouping, `ε`
/// (also `()`), and `∅`. Whitespace and `·` are ignored.
pub fn parse_regex(src: &str) -> Result<Regex<String>, RegexParseError> {
    let toks: Vec<char> = src.chars().filter(|c| !c.is_whitespace() && *c != '·').collect();
    let mut p = RegexParser { toks, pos: 0 };
    let r = p.alt()?;
    if p.pos != p.toks.len() {
        return Err(RegexParseError(format!("unexpected `{}`", p.toks[p.pos])));
    }
    Ok(r)
}

struct RegexParser {
    toks: Vec<char>,
    pos: usize,
}

impl RegexParser {
    fn peek(&self) -> Option<char> {
        self.toks.get(self.pos).copied()
    }

    fn alt(&mut self) -> Result<Regex<String>, RegexParseError> {
        let mut r = self.cat()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            let rhs = self.cat()?;
            r = Regex::Alt(Box::new(r), Box::new(rhs));
        }
        Ok(r)
    }

    fn cat(&mut self) -> Result<Regex<String>, RegexParseError> {
        let mut r = Regex::Eps;
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let atom = self.postfix()?;
            r = Regex::cat(r, atom);
        }
        Ok(r)
    }

    fn postfix(&mut self) -> Result<Regex<String>, RegexParseError> {
        let mut r = self.atom()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            r = Regex::Star(Box::new(r));
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<Regex<String>, RegexParseError> {
        let c = self.peek().ok_or_else(|| RegexParseError("unexpected end".into()))?;
        self.pos += 1;
        match c {
            '(' => {
                let r = self.alt()?;
                if self.peek() != Some(')') {
                    return Err(RegexParseError("missing `)`".into()));
                }
                self.pos += 1;
                Ok(r)
            }
            'ε' => Ok(Regex::Eps),
            '∅' => Ok(Regex::Empty),
            c if c.is_alphanumeric() || c == '_' => Ok(Regex::Sym(c.to_string())),
            c => Err(RegexParseError(format!("unexpected `{c}`"))),
        }
    }
}

/// Nondeterministic automaton with ε-moves (`None` labels).
#[derive(Clone, Debug)]
pub struct Nfa<S> {
    pub trans: Vec<Vec<(Option<S>, usize)>>,
    pub start: usize,
    pub accept: BTreeSet<usize>,
}

impl<S: Clone + Ord> Nfa<S> {
    fn edge(&mut self, from: usize, label: Option<S>, to: usize) {
        self.trans[from].push((label, to));
    }

    /// Copies `other` into `self`, returning the offset of its states.
    fn absorb(&mut self, other: &Nfa<S>) -> usize {
        let off = self.trans.len();
        for row in &other.trans {
            self.trans.push(row.iter().map(|(l, t)| (l.clone(), t + off)).collect());
        }
        off
    }

    pub fn empty() -> Self {
        Nfa { trans: vec![Vec::new()], start: 0, accept: BTreeSet::new() }
    }

    pub fn eps() -> Self {
        Nfa { trans: vec![Vec::new()], start: 0, accept: BTreeSet::from([0]) }
    }

    pub fn sym(s: S) -> Self {
        Nfa { trans: vec![vec![(Some(s), 1)], Vec::new()], start: 0, accept: BTreeSet::from([1]) }
    }

    pub fn concat(a: &Nfa<S>, b: &Nfa<S>) -> Self {
        let mut n = a.clone();
        let off = n.absorb(b);
        for &f in &a.accept {
            n.edge(f, None, b.start + off);
        }
        n.accept = b.accept.iter().map(|f| f + off).collect();
        n
    }

    pub fn union(a: &Nfa<S>, b: &Nfa<S>) -> Self {
        let mut n = Nfa { trans: vec![Vec::new()], start: 0, accept: BTreeSet::new() };
        let oa = n.absorb(a);
        let ob = n.absorb(b);
        n.edge(0, None, a.start + oa);
        n.edge(0, None, b.start + ob);
        n.accept = a.accept.iter().map(|f| f + oa).chain(b.accept.iter().map(|f| f + ob)).collect();
        n
    }

    pub fn star(a: &Nfa<S>) -> Self {
        let mut n = Nfa { trans: vec![Vec::new()], start: 0, accept: BTreeSet::from([0]) };
        let off = n.absorb(a);
        n.edge(0, None, a.start + off);
        for &f in &a.accept {
            let f = f + off;
            n.edge(f, None, 0);
        }
        n
    }

    pub fn from_regex(r: &Regex<S>) -> Self {
        match r {
            Regex::Empty => Nfa::empty(),
            Regex::Eps => Nfa::eps(),
            Regex::Sym(s) => Nfa::sym(s.clone()),
            Regex::Cat(a, b) => Nfa::concat(&Nfa::from_regex(a), &Nfa::from_regex(b)),
            Regex::Alt(a, b) => Nfa::union(&Nfa::from_regex(a), &Nfa::from_regex(b)),
            Regex::Star(a) => Nfa::star(&Nfa::from_regex(a)),
        }
    }

    pub fn from_dfa(d: &Dfa<S>) -> Self {
        Nfa {
            trans: d.trans.iter().map(|row| row.iter().map(|(s, t)| (Some(s.clone()), *t)).collect()).collect(),
            start: 0,
            accept: d.accepting.iter().enumerate().filter(|(_, a)| **a).map(|(i, _)| i).collect(),
        }
    }

    pub fn relabel<T: Clone + Ord>(&self, f: &dyn Fn(&S) -> T) -> Nfa<T> {
        Nfa {
            trans: self.trans.iter().map(|row| row.iter().map(|(l, t)| (l.as_ref().map(f), *t)).collect()).collect(),
            start: self.start,
            accept: self.accept.clone(),
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for (l, t) in &self.trans[s] {
                if l.is_none() && set.insert(*t) {
                    stack.push(*t);
                }
            }
        }
    }

    /// Subset construction followed by minimization.
    pub fn to_dfa(&self) -> Dfa<S> {
        let mut init = BTreeSet::from([self.start]);
        self.closure(&mut init);
        let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::from([(init.clone(), 0)]);
        let mut sets = vec![init];
        let mut trans: Vec<BTreeMap<S, usize>> = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let mut moves: BTreeMap<S, BTreeSet<usize>> = BTreeMap::new();
            for &s in &sets[i] {
                for (l, t) in &self.trans[s] {
                    if let Some(l) = l {
                        moves.entry(l.clone()).or_default().insert(*t);
                    }
                }
            }
            let mut row = BTreeMap::new();
            for (l, mut tgt) in moves {
                self.closure(&mut tgt);
                let next = ids.len();
                let id = *ids.entry(tgt.clone()).or_insert_with(|| {
                    sets.push(tgt);
                    next
                });
                row.insert(l, id);
            }
            trans.push(row);
            i += 1;
        }
        let accepting = sets.iter().map(|s| s.iter().any(|q| self.accept.contains(q))).collect();
        Dfa { accepting, trans }.minimize()
    }
}

/// A partial deterministic automaton whose start state is 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dfa<S> {
    accepting: Vec<bool>,
    trans: Vec<BTreeMap<S, usize>>,
}

impl<S: Clone + Ord> Dfa<S> {
    pub fn from_regex(r: &Regex<S>) -> Self {
        Nfa::from_regex(r).to_dfa()
    }

    pub fn states(&self) -> usize {
        self.trans.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.accepting.iter().any(|a| *a)
    }

    pub fn accepts_empty(&self) -> bool {
        self.accepting[0]
    }

    pub fn accepts<'a>(&self, word: impl IntoIterator<Item = &'a S>) -> bool
    where
        S: 'a,
    {
        let mut q = 0;
        for s in word {
            match self.trans[q].get(s) {
                Some(t) => q = *t,
                None => return false,
            }
        }
        self.accepting[q]
    }

    pub fn alphabet(&self) -> BTreeSet<S> {
        self.trans.iter().flat_map(|row| row.keys().cloned()).collect()
    }

    /// Moore partition refinement, dead-state removal and BFS renumbering.
    fn minimize(&self) -> Dfa<S> {
        let n = self.trans.len();
        let alphabet: Vec<S> = self.alphabet().into_iter().collect();
        let dead = n;
        let step = |q: usize, s: &S| if q == dead { dead } else { self.trans[q].get(s).copied().unwrap_or(dead) };
        let mut class: Vec<usize> = (0..=n).map(|q| usize::from(q < n && self.accepting[q])).collect();
        loop {
            let mut sigs: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
            let mut next = vec![0; n + 1];
            for q in 0..=n {
                let sig = (class[q], alphabet.iter().map(|s| class[step(q, s)]).collect::<Vec<_>>());
                let k = sigs.len();
                next[q] = *sigs.entry(sig).or_insert(k);
            }
            let stable = sigs.len() == class.iter().collect::<BTreeSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        let dead_class = class[dead];
        let mut ids: BTreeMap<usize, usize> = BTreeMap::from([(class[0], 0)]);
        let mut queue = VecDeque::from([0usize]);
        let mut accepting = Vec::new();
        let mut trans = Vec::new();
        while let Some(q) = queue.pop_front() {
            accepting.push(q < n && self.accepting[q]);
            let mut row = BTreeMap::new();
            for s in &alphabet {
                let t = step(q, s);
                if class[t] == dead_class {
                    continue;
                }
                let next = ids.len();
                let id = *ids.entry(class[t]).or_insert_with(|| {
                    queue.push_back(t);
                    next
                });
                row.insert(s.clone(), id);
            }
            trans.push(row);
        }
        Dfa { accepting, trans }
    }

    /// Hopcroft–Karp style bisimulation check with union-find, independent of
    /// canonical numbering.
    pub fn bisimilar(&self, other: &Dfa<S>) -> bool {
        let n = self.states();
        let total = n + other.states() + 1;
        let dead = total - 1;
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        let acc = |q: usize| {
            if q == dead {
                false
            } else if q < n {
                self.accepting[q]
            } else {
                other.accepting[q - n]
            }
        };
        let step = |q: usize, s: &S| {
            if q == dead {
                dead
            } else if q < n {
                self.trans[q].get(s).copied().unwrap_or(dead)
            } else {
                other.trans[q - n].get(s).map(|t| t + n).unwrap_or(dead)
            }
        };
        let alphabet: Vec<S> = self.alphabet().union(&other.alphabet()).cloned().collect();
        let mut todo = vec![(0usize, n)];
        let (a0, b0) = (find(&mut parent, 0), find(&mut parent, n));
        parent[a0] = b0;
        while let Some((p, q)) = todo.pop() {
            if acc(p) != acc(q) {
                return false;
            }
            for s in &alphabet {
                let (p2, q2) = (step(p, s), step(q, s));
                let (r1, r2) = (find(&mut parent, p2), find(&mut parent, q2));
                if r1 != r2 {
                    parent[r1] = r2;
                    todo.push((p2, q2));
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dfa(s: &str) -> Dfa<String> {
        Dfa::from_regex(&parse_regex(s).unwrap())
    }

    fn w(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    #[test]
    fn canonical_forms_coincide() {
        assert_eq!(dfa("(a|b)*"), dfa("(a*b*)*"));
        assert_eq!(dfa("a|a"), dfa("a"));
        assert_ne!(dfa("a*"), dfa("a*a"));
    }

    #[test]
    fn empty_language_has_one_state() {
        assert_eq!(dfa("∅").states(), 1);
        assert_eq!(dfa("a∅"), dfa("∅"));
        assert!(dfa("∅").is_empty());
    }

    #[test]
    fn membership() {
        let d = dfa("(a|b)*c");
        assert!(d.accepts(&w("abbac")));
        assert!(!d.accepts(&w("abca")));
        assert!(dfa("ε").accepts(&w("")));
    }

    #[test]
    fn bisimulation_agrees_with_canonical_equality() {
        let rs = ["a*", "(a|b)*", "(a*b*)*", "ab|ba", "a(b|ε)", "ab|a", "∅", "ε", "(ab)*a", "a(ba)*"];
        for x in rs {
            for y in rs {
                assert_eq!(dfa(x).bisimilar(&dfa(y)), dfa(x) == dfa(y), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn display_precedence() {
        let r = parse_regex("(a|b)*c").unwrap();
        assert_eq!(r.to_string(), "(a|b)*c");
        let long = Regex::cat(Regex::sym("ev".to_string()), Regex::sym("x".to_string()));
        assert_eq!(long.to_string(), "ev·x");
    }

    #[test]
    fn parse_errors() {
        assert!(parse_regex("(a").is_err());
        assert!(parse_regex("a)").is_err());
        assert!(parse_regex("a+").is_err());
    }
}
