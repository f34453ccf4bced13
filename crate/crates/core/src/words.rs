//! Reduced words of `G * F(x0, x1, ...)` and their evaluation on finite
//! partial injections.
//!
//! Letters are stored left to right; `letter_at(i)` counts from the right, so
//! `letter_at(0)` is the first letter applied.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::partial::PartialInjection;
use crate::perm::{Evaluable, FnSpec};
use crate::window::Window;

const UNDEF: u32 = u32::MAX;

/// Named generators of the ambient group, tabulated on the window.
#[derive(Clone)]
pub struct GroupContext {
    window: Window,
    names: Vec<String>,
    specs: Vec<FnSpec>,
    tables: Arc<GenTables>,
}

#[derive(Default)]
struct GenTables {
    w: usize,
    fwd: Vec<Box<[u32]>>,
    bwd: Vec<Box<[u32]>>,
}

impl GenTables {
    /// Table of a freely reduced generator word on the window.
    fn evaluate(&self, word: &[(usize, i32)]) -> (Arc<[u32]>, Arc<[u32]>) {
        let mut fwd: Vec<u32> = (0..self.w as u32).collect();
        for &(g, e) in word.iter().rev() {
            let t = if e > 0 { &self.fwd[g] } else { &self.bwd[g] };
            for _ in 0..e.unsigned_abs() {
                for v in fwd.iter_mut() {
                    if *v != UNDEF {
                        *v = t[*v as usize];
                    }
                }
            }
        }
        let mut bwd = vec![UNDEF; self.w];
        for (n, &m) in fwd.iter().enumerate() {
            if m != UNDEF {
                bwd[m as usize] = n as u32;
            }
        }
        (fwd.into(), bwd.into())
    }
}

impl fmt::Debug for GroupContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupContext").field("window", &self.window).field("generators", &self.names).finish()
    }
}

fn is_var_name(s: &str) -> bool {
    s.strip_prefix('x').is_some_and(|rest| rest.chars().all(|c| c.is_ascii_digit()))
}

impl GroupContext {
    pub fn new(generators: Vec<(String, FnSpec)>, window: Window) -> Result<Self> {
        if window.w >= UNDEF as u64 {
            return Err(Error::Invalid("window too large for tabulation".into()));
        }
        let mut ctx = GroupContext { window, names: vec![], specs: vec![], tables: Arc::default() };
        let mut tables = GenTables { w: window.w as usize, fwd: vec![], bwd: vec![] };
        for (name, spec) in generators {
            if name.is_empty() || is_var_name(&name) || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::Invalid(format!("bad generator name {name:?}")));
            }
            if ctx.names.contains(&name) {
                return Err(Error::Invalid(format!("duplicate generator {name}")));
            }
            if !spec.is_injective_on(&window) {
                return Err(Error::Invalid(format!("generator {name} is not injective on the window")));
            }
            let w = window.w;
            let tab = |f: &dyn Fn(u64) -> Option<u64>| -> Box<[u32]> {
                (0..w).map(|n| f(n).filter(|&m| m < w).map_or(UNDEF, |m| m as u32)).collect()
            };
            tables.fwd.push(tab(&|n| spec.apply(n)));
            tables.bwd.push(tab(&|n| spec.apply_inverse(n)));
            ctx.names.push(name);
            ctx.specs.push(spec);
        }
        ctx.tables = Arc::new(tables);
        Ok(ctx)
    }

    pub fn trivial(window: Window) -> Self {
        GroupContext::new(vec![], window).expect("empty context")
    }

    /// The context `<h>` generated by the base permutation, named `h`.
    pub fn with_base_h(window: Window) -> Self {
        GroupContext::new(vec![("h".into(), FnSpec::BaseH)], window).expect("base_h is a permutation")
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn specs(&self) -> &[FnSpec] {
        &self.specs
    }

    pub fn generator(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn identity(&self) -> GroupElem {
        self.element(&[])
    }

    /// The element `gen^exp`.
    pub fn gen_power(&self, gen: usize, exp: i32) -> GroupElem {
        self.element(&[(gen, exp)])
    }

    /// Evaluates a generator word (left factor applied last).
    pub fn element(&self, word: &[(usize, i32)]) -> GroupElem {
        let word = free_reduce(word);
        let (fwd, bwd) = self.tables.evaluate(&word);
        GroupElem { word, fwd, bwd, tables: self.tables.clone() }
    }
}

fn free_reduce(word: &[(usize, i32)]) -> Vec<(usize, i32)> {
    let mut out: Vec<(usize, i32)> = Vec::new();
    for &(g, e) in word {
        if e == 0 {
            continue;
        }
        match out.last_mut() {
            Some((h, f)) if *h == g => {
                *f += e;
                if *f == 0 {
                    out.pop();
                }
            }
            _ => out.push((g, e)),
        }
    }
    out
}

/// An element of the ambient group: a generator word plus its table on the
/// window. Equality is equality on the window, which is a heuristic for
/// rule-based generators.
#[derive(Clone)]
pub struct GroupElem {
    word: Vec<(usize, i32)>,
    fwd: Arc<[u32]>,
    bwd: Arc<[u32]>,
    tables: Arc<GenTables>,
}

impl fmt::Debug for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElem({:?})", self.word)
    }
}

impl PartialEq for GroupElem {
    fn eq(&self, other: &Self) -> bool {
        self.fwd == other.fwd
    }
}

impl GroupElem {
    pub fn word(&self) -> &[(usize, i32)] {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.fwd.iter().enumerate().all(|(n, &m)| m == n as u32)
    }

    pub fn inverse(&self) -> GroupElem {
        let word = self.word.iter().rev().map(|&(g, e)| (g, -e)).collect();
        GroupElem { word, fwd: self.bwd.clone(), bwd: self.fwd.clone(), tables: self.tables.clone() }
    }

    /// `self * other`: apply `other` first. The table is recomputed from the
    /// reduced generator word, so cancelling factors never lose boundary points.
    pub fn then_after(&self, other: &GroupElem) -> GroupElem {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        let word = free_reduce(&word);
        let (fwd, bwd) = self.tables.evaluate(&word);
        GroupElem { word, fwd, bwd, tables: self.tables.clone() }
    }

    pub fn display(&self, ctx: &GroupContext) -> String {
        if self.word.is_empty() {
            return "1".into();
        }
        let parts: Vec<String> = self
            .word
            .iter()
            .map(|&(g, e)| if e == 1 { ctx.names[g].clone() } else { format!("{}^{}", ctx.names[g], e) })
            .collect();
        if parts.len() == 1 { parts[0].clone() } else { format!("({})", parts.join(" ")) }
    }
}

impl Evaluable for GroupElem {
    fn apply(&self, n: u64) -> Option<u64> {
        let v = *self.fwd.get(usize::try_from(n).ok()?)?;
        (v != UNDEF).then_some(v as u64)
    }
    fn apply_inverse(&self, m: u64) -> Option<u64> {
        let v = *self.bwd.get(usize::try_from(m).ok()?)?;
        (v != UNDEF).then_some(v as u64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Letter {
    Group(GroupElem),
    Var { var: usize, inv: bool },
}

impl Letter {
    pub fn x(var: usize) -> Letter {
        Letter::Var { var, inv: false }
    }

    pub fn x_inv(var: usize) -> Letter {
        Letter::Var { var, inv: true }
    }

    pub fn inverse(&self) -> Letter {
        match self {
            Letter::Group(g) => Letter::Group(g.inverse()),
            Letter::Var { var, inv } => Letter::Var { var: *var, inv: !inv },
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Letter::Var { .. })
    }

    pub fn apply<A: Assignment + ?Sized>(&self, assign: &A, n: u64) -> Option<u64> {
        match self {
            Letter::Group(g) => g.apply(n),
            Letter::Var { var, inv: false } => assign.forward(*var, n),
            Letter::Var { var, inv: true } => assign.backward(*var, n),
        }
    }

    pub fn apply_inverse<A: Assignment + ?Sized>(&self, assign: &A, n: u64) -> Option<u64> {
        match self {
            Letter::Group(g) => g.apply_inverse(n),
            Letter::Var { var, inv: false } => assign.backward(*var, n),
            Letter::Var { var, inv: true } => assign.forward(*var, n),
        }
    }
}

/// Values substituted for the variables.
pub trait Assignment {
    fn arity(&self) -> usize;
    fn forward(&self, var: usize, n: u64) -> Option<u64>;
    fn backward(&self, var: usize, m: u64) -> Option<u64>;
}

impl Assignment for [PartialInjection] {
    fn arity(&self) -> usize {
        self.len()
    }
    fn forward(&self, var: usize, n: u64) -> Option<u64> {
        self.get(var)?.get(n)
    }
    fn backward(&self, var: usize, m: u64) -> Option<u64> {
        self.get(var)?.get_inv(m)
    }
}

impl Assignment for Vec<PartialInjection> {
    fn arity(&self) -> usize {
        self.len()
    }
    fn forward(&self, var: usize, n: u64) -> Option<u64> {
        self.as_slice().forward(var, n)
    }
    fn backward(&self, var: usize, m: u64) -> Option<u64> {
        self.as_slice().backward(var, m)
    }
}

/// A base assignment with one extra pair `(a, b)` on `var`, without copying.
pub struct WithPair<'a, A: ?Sized> {
    pub base: &'a A,
    pub var: usize,
    pub a: u64,
    pub b: u64,
}

impl<A: Assignment + ?Sized> Assignment for WithPair<'_, A> {
    fn arity(&self) -> usize {
        self.base.arity()
    }
    fn forward(&self, var: usize, n: u64) -> Option<u64> {
        if var == self.var && n == self.a {
            Some(self.b)
        } else {
            self.base.forward(var, n)
        }
    }
    fn backward(&self, var: usize, m: u64) -> Option<u64> {
        if var == self.var && m == self.b {
            Some(self.a)
        } else {
            self.base.backward(var, m)
        }
    }
}

/// A reduced word.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

/// Free cancellation, merging of adjacent group letters and removal of
/// group letters that are the identity on the window.
pub fn reduce(seq: Vec<Letter>) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(seq.len());
    for l in seq {
        match (out.last(), &l) {
            (Some(Letter::Group(top)), Letter::Group(g)) => {
                let merged = top.then_after(g);
                out.pop();
                if !merged.is_identity() {
                    out.push(Letter::Group(merged));
                }
            }
            (_, Letter::Group(g)) if g.is_identity() => {}
            (Some(Letter::Var { var: v, inv: i }), Letter::Var { var, inv }) if v == var && i != inv => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    Word { letters: out }
}

impl Word {
    pub fn empty() -> Word {
        Word::default()
    }

    pub fn x(var: usize) -> Word {
        Word { letters: vec![Letter::x(var)] }
    }

    /// Letters left to right.
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of group letters plus the sum of the absolute exponents.
    pub fn length(&self) -> usize {
        self.letters.len()
    }

    /// Number of variable letters.
    pub fn var_count(&self) -> usize {
        self.letters.iter().filter(|l| l.is_var()).count()
    }

    pub fn has_var(&self) -> bool {
        self.letters.iter().any(Letter::is_var)
    }

    /// One more than the largest variable index used.
    pub fn arity(&self) -> usize {
        self.letters
            .iter()
            .filter_map(|l| match l {
                Letter::Var { var, .. } => Some(var + 1),
                Letter::Group(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// `w_(i)`, counted from the right.
    pub fn letter_at(&self, i: usize) -> Result<&Letter> {
        let len = self.len();
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
        Ok(&self.letters[len - 1 - i])
    }

    /// `w|i = w_(i-1) ... w_(0)`.
    pub fn initial_segment(&self, i: usize) -> Result<Word> {
        let len = self.len();
        if i > len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
        Ok(Word { letters: self.letters[len - i..].to_vec() })
    }

    /// Contiguous factor `letters[lo..hi]` (left-to-right indices).
    pub fn factor(&self, lo: usize, hi: usize) -> Word {
        Word { letters: self.letters[lo..hi].to_vec() }
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(Letter::inverse).collect() }
    }

    /// `self * other`, reduced.
    pub fn concat(&self, other: &Word) -> Word {
        reduce(self.letters.iter().chain(other.letters.iter()).cloned().collect())
    }

    /// All distinct non-empty contiguous factors, shortest first.
    pub fn subwords(&self) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        let n = self.len();
        for len in 1..=n {
            for lo in 0..=n - len {
                let f = self.factor(lo, lo + len);
                if !out.contains(&f) {
                    out.push(f);
                }
            }
        }
        out
    }

    pub fn display(&self, ctx: &GroupContext) -> String {
        if self.is_empty() {
            return "1".into();
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.letters.len() {
            match &self.letters[i] {
                Letter::Group(g) => {
                    parts.push(g.display(ctx));
                    i += 1;
                }
                Letter::Var { var, inv } => {
                    let mut j = i;
                    while j < self.letters.len() && self.letters[j] == self.letters[i] {
                        j += 1;
                    }
                    let k = (j - i) as i64 * if *inv { -1 } else { 1 };
                    let name = if *var == 0 { "x".to_string() } else { format!("x{var}") };
                    parts.push(if k == 1 { name } else { format!("{name}^{k}") });
                    i = j;
                }
            }
        }
        parts.join(" ")
    }

    pub fn parse(text: &str, ctx: &GroupContext) -> Result<Word> {
        let toks = tokenize(text)?;
        let mut p = Parser { toks, pos: 0, ctx };
        let seq = p.sequence()?;
        if p.pos != p.toks.len() {
            return Err(Error::Parse(format!("unexpected {:?} in {text:?}", p.toks[p.pos])));
        }
        Ok(reduce(seq))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Int(i64),
    Caret,
    Open(char),
    Close(char),
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let cs: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() || c == '*' || c == '.' {
            i += 1;
        } else if c.is_alphabetic() || c == '_' {
            let s = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Name(cs[s..i].iter().collect()));
        } else if c.is_ascii_digit() || (c == '-' && cs.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let s = i;
            i += 1;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = cs[s..i].iter().collect();
            out.push(Tok::Int(t.parse().map_err(|_| Error::Parse(format!("bad integer {t}")))?));
        } else {
            out.push(match c {
                '^' => Tok::Caret,
                '(' | '[' => Tok::Open(c),
                ')' | ']' => Tok::Close(c),
                ',' => Tok::Comma,
                _ => return Err(Error::Parse(format!("unexpected character {c:?}"))),
            });
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    ctx: &'a GroupContext,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn sequence(&mut self) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        while let Some(t) = self.peek() {
            if matches!(t, Tok::Close(_) | Tok::Comma) {
                break;
            }
            out.extend(self.item()?);
        }
        Ok(out)
    }

    fn item(&mut self) -> Result<Vec<Letter>> {
        let tok = self.toks[self.pos].clone();
        self.pos += 1;
        let base: Vec<Letter> = match tok {
            Tok::Name(name) => {
                if is_var_name(&name) {
                    let var = if name.len() == 1 { 0 } else { name[1..].parse().map_err(|_| Error::Parse(name.clone()))? };
                    vec![Letter::x(var)]
                } else if name == "e" && self.ctx.generator("e").is_none() {
                    vec![]
                } else {
                    let g = self.ctx.generator(&name).ok_or_else(|| Error::Parse(format!("unknown generator {name}")))?;
                    vec![Letter::Group(self.ctx.gen_power(g, 1))]
                }
            }
            Tok::Int(1) => vec![],
            Tok::Open('(') => {
                let s = self.sequence()?;
                self.expect(Tok::Close(')'))?;
                s
            }
            Tok::Open('[') => {
                let a = self.sequence()?;
                self.expect(Tok::Comma)?;
                let b = self.sequence()?;
                self.expect(Tok::Close(']'))?;
                // [a,b] = a^-1 b^-1 a b
                let mut s = inverse_seq(&a);
                s.extend(inverse_seq(&b));
                s.extend(a);
                s.extend(b);
                s
            }
            t => return Err(Error::Parse(format!("unexpected {t:?}"))),
        };
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let k = match self.toks.get(self.pos) {
                Some(Tok::Int(k)) => *k,
                other => return Err(Error::Parse(format!("expected exponent, found {other:?}"))),
            };
            self.pos += 1;
            let unit = if k < 0 { inverse_seq(&base) } else { base };
            let mut out = Vec::new();
            for _ in 0..k.unsigned_abs() {
                out.extend(unit.iter().cloned());
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {t:?}, found {:?}", self.peek())))
        }
    }
}

fn inverse_seq(s: &[Letter]) -> Vec<Letter> {
    s.iter().rev().map(Letter::inverse).collect()
}

/// One consumed assignment pair; `inverse` marks an `x^-1` step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct UsedPair {
    pub var: usize,
    pub pair: (u64, u64),
    pub inverse: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub points: Vec<u64>,
    pub used: Vec<UsedPair>,
}

pub fn check_arity<A: Assignment + ?Sized>(w: &Word, assign: &A) -> Result<()> {
    let needed = w.arity();
    if needed > assign.arity() {
        return Err(Error::ArityMismatch { needed, given: assign.arity() });
    }
    Ok(())
}

/// The longest computable prefix of `n, w_(0)(n), w_(1)(w_(0)(n)), ...`.
pub fn evaluation_path<A: Assignment + ?Sized>(w: &Word, assign: &A, n: u64) -> Path {
    let mut points = vec![n];
    let mut used = Vec::new();
    let mut cur = n;
    for l in w.letters.iter().rev() {
        let Some(next) = l.apply(assign, cur) else { break };
        if let Letter::Var { var, inv } = l {
            let pair = if *inv { (next, cur) } else { (cur, next) };
            used.push(UsedPair { var: *var, pair, inverse: *inv });
        }
        points.push(next);
        cur = next;
    }
    Path { points, used }
}

pub fn evaluate<A: Assignment + ?Sized>(w: &Word, assign: &A, n: u64) -> Option<u64> {
    w.letters.iter().rev().try_fold(n, |cur, l| l.apply(assign, cur))
}

/// `w^{-1}(n)`, applying inverted letters from the left end.
pub fn evaluate_inverse<A: Assignment + ?Sized>(w: &Word, assign: &A, n: u64) -> Option<u64> {
    w.letters.iter().try_fold(n, |cur, l| l.apply_inverse(assign, cur))
}

/// `{n < W : w(assign)(n) = n}`.
pub fn word_fixed_points<A: Assignment + ?Sized>(w: &Word, assign: &A, window: &Window) -> Vec<u64> {
    window.points().filter(|&n| evaluate(w, assign, n) == Some(n)).collect()
}

/// Every split `w = u^-1 z u` without cancellation, starting with `(1, w)`.
pub fn conjugate_decompositions(w: &Word) -> Vec<(Word, Word)> {
    let mut out = vec![(Word::empty(), w.clone())];
    let n = w.len();
    let mut k = 1;
    while 2 * k < n && w.letters[k - 1] == w.letters[n - k].inverse() {
        out.push((w.factor(n - k, n), w.factor(k, n - k)));
        k += 1;
    }
    out
}

pub fn shortest_conjugate_subword(w: &Word) -> Word {
    conjugate_decompositions(w).pop().map(|(_, z)| z).unwrap_or_default()
}
