//! Cofinitary actions of presented groups: normal forms, relation closure,
//! `(G,H)`-good extensions and the dense-set driven embedding builder.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{active_closure, is_good_pair, CheckedWord};
use crate::partial::PartialInjection;
use crate::trace::{ScheduledWord, Trace};
use crate::window::Window;
use crate::words::{evaluate, GroupContext, GroupElem, Letter, Word};

/// Element of the presented group as `(generator, exponent)` pairs: the full
/// exponent vector for abelian groups, reduced syllables for free products.
pub type Elem = Vec<(usize, i64)>;

/// Built-in confluent normal forms. Order 0 means infinite cyclic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "orders", rename_all = "kebab-case")]
pub enum NormalForm {
    Abelian(Vec<u64>),
    FreeProduct(Vec<u64>),
}

fn reduce_exp(e: i64, order: u64) -> i64 {
    if order == 0 {
        e
    } else {
        e.rem_euclid(order as i64)
    }
}

impl NormalForm {
    pub fn orders(&self) -> &[u64] {
        match self {
            NormalForm::Abelian(o) | NormalForm::FreeProduct(o) => o,
        }
    }

    pub fn identity(&self) -> Elem {
        match self {
            NormalForm::Abelian(o) => (0..o.len()).map(|i| (i, 0)).collect(),
            NormalForm::FreeProduct(_) => Vec::new(),
        }
    }

    pub fn is_identity(&self, e: &Elem) -> bool {
        e.iter().all(|&(_, x)| x == 0)
    }

    pub fn letter(&self, var: usize, inv: bool) -> Elem {
        let e = if inv { -1 } else { 1 };
        self.mul(&self.identity(), &vec![(var, e)])
    }

    /// `a` then `b` left to right, i.e. the word `ab`.
    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        let orders = self.orders();
        match self {
            NormalForm::Abelian(_) => {
                let mut out = self.identity();
                for &(g, e) in a.iter().chain(b) {
                    out[g].1 = reduce_exp(out[g].1 + e, orders[g]);
                }
                out
            }
            NormalForm::FreeProduct(_) => {
                let mut out: Elem = a.clone();
                for &(g, e) in b {
                    match out.last_mut() {
                        Some(last) if last.0 == g => {
                            last.1 = reduce_exp(last.1 + e, orders[g]);
                            if last.1 == 0 {
                                out.pop();
                            }
                        }
                        _ => {
                            let e = reduce_exp(e, orders[g]);
                            if e != 0 {
                                out.push((g, e));
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// Normal form of a word in the variables only.
    pub fn of_word(&self, w: &Word) -> Result<Elem> {
        let mut out = self.identity();
        for l in w.letters() {
            match l {
                Letter::Var { var, inv } if *var < self.orders().len() => out = self.mul(&out, &self.letter(*var, *inv)),
                Letter::Var { var, .. } => {
                    return Err(Error::ArityMismatch { needed: var + 1, given: self.orders().len() })
                }
                Letter::Group(_) => return Err(Error::Invalid("group letter in a relator".into())),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    pub generators: usize,
    pub relators: Vec<Word>,
    pub normal_form: Option<NormalForm>,
}

#[derive(Deserialize)]
struct RawPresentation {
    generators: usize,
    #[serde(default)]
    relators: Vec<String>,
    normal_form: Option<String>,
    orders: Option<Vec<u64>>,
}

fn var_word(letters: Vec<Letter>) -> Word {
    crate::words::reduce(letters)
}

impl Presentation {
    /// Checks that the normal form kills every relator.
    pub fn new(generators: usize, relators: Vec<Word>, normal_form: Option<NormalForm>) -> Result<Self> {
        if let Some(nf) = &normal_form {
            if nf.orders().len() != generators {
                return Err(Error::Invalid("normal form and generator count disagree".into()));
            }
            for r in &relators {
                if !nf.is_identity(&nf.of_word(r)?) {
                    return Err(Error::Invalid(format!("normal form does not kill relator {r:?}")));
                }
            }
        }
        Ok(Presentation { generators, relators, normal_form })
    }

    pub fn free(n: usize) -> Self {
        Presentation { generators: n, relators: vec![], normal_form: Some(NormalForm::FreeProduct(vec![0; n])) }
    }

    fn power(i: usize, o: u64) -> Word {
        var_word(vec![Letter::x(i); o as usize])
    }

    /// Direct product of cyclic groups.
    pub fn abelian(orders: &[u64]) -> Self {
        let n = orders.len();
        let mut relators: Vec<Word> = orders.iter().enumerate().filter(|(_, &o)| o > 0).map(|(i, &o)| Self::power(i, o)).collect();
        for i in 0..n {
            for j in i + 1..n {
                relators.push(var_word(vec![Letter::x_inv(i), Letter::x_inv(j), Letter::x(i), Letter::x(j)]));
            }
        }
        Presentation { generators: n, relators, normal_form: Some(NormalForm::Abelian(orders.to_vec())) }
    }

    /// Free product of cyclic groups.
    pub fn free_product(orders: &[u64]) -> Self {
        let relators = orders.iter().enumerate().filter(|(_, &o)| o > 0).map(|(i, &o)| Self::power(i, o)).collect();
        Presentation { generators: orders.len(), relators, normal_form: Some(NormalForm::FreeProduct(orders.to_vec())) }
    }

    /// `{"generators":n,"relators":["x0^2","[x0,x1]"],"normal_form":"abelian-order-2"}`.
    /// Normal forms: `free`, `abelian`, `free-product` (orders from an
    /// `orders` field) and `abelian-order-K`, `free-product-order-K`.
    pub fn parse_json(text: &str) -> Result<Self> {
        let raw: RawPresentation = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let ctx = GroupContext::trivial(Window::new(2, 0)?);
        let relators = raw.relators.iter().map(|r| Word::parse(r, &ctx)).collect::<Result<Vec<_>>>()?;
        let n = raw.generators;
        let orders = |o: Option<Vec<u64>>| o.ok_or_else(|| Error::Parse("missing orders".into()));
        let nf = match raw.normal_form.as_deref() {
            None => None,
            Some("free") => Some(NormalForm::FreeProduct(vec![0; n])),
            Some("abelian") => Some(NormalForm::Abelian(orders(raw.orders)?)),
            Some("free-product") => Some(NormalForm::FreeProduct(orders(raw.orders)?)),
            Some(s) => {
                let (kind, k) = s.rsplit_once("-order-").ok_or_else(|| Error::Parse(format!("unknown normal form {s}")))?;
                let k: u64 = k.parse().map_err(|_| Error::Parse(format!("bad order in {s}")))?;
                match kind {
                    "abelian" => Some(NormalForm::Abelian(vec![k; n])),
                    "free-product" => Some(NormalForm::FreeProduct(vec![k; n])),
                    _ => return Err(Error::Parse(format!("unknown normal form {s}"))),
                }
            }
        };
        Self::new(n, relators, nf)
    }

    pub fn nf(&self) -> Result<&NormalForm> {
        self.normal_form.as_ref().ok_or_else(|| Error::UnsupportedPresentation("no normal form".into()))
    }

    pub fn max_relator_len(&self) -> usize {
        self.relators.iter().map(Word::length).max().unwrap_or(1)
    }

    /// Does the word (in the variables only) represent the identity?
    pub fn is_trivial(&self, w: &Word) -> Result<bool> {
        let nf = self.nf()?;
        Ok(nf.is_identity(&nf.of_word(w)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Syllable {
    G(GroupElem),
    H(Elem),
}

/// Normal form in the free product of the window group and `H`: group
/// letters compared on the window, variable blocks by the normal form.
fn mixed_nf(w: &[Letter], nf: &NormalForm) -> Vec<Syllable> {
    let mut out: Vec<Syllable> = Vec::new();
    for l in w {
        match l {
            Letter::Group(g) => match out.last_mut() {
                Some(Syllable::G(top)) => {
                    let prod = top.then_after(g);
                    if prod.is_identity() {
                        out.pop();
                    } else {
                        *top = prod;
                    }
                }
                _ => out.push(Syllable::G(g.clone())),
            },
            Letter::Var { var, inv } => {
                let e = nf.letter(*var, *inv);
                match out.last_mut() {
                    Some(Syllable::H(top)) => {
                        let prod = nf.mul(top, &e);
                        if nf.is_identity(&prod) {
                            out.pop();
                            // neighbouring group blocks now touch
                            if let [.., Syllable::G(_), Syllable::G(_)] = out.as_slice() {
                                let Some(Syllable::G(b)) = out.pop() else { unreachable!() };
                                let Some(Syllable::G(a)) = out.pop() else { unreachable!() };
                                let prod = a.then_after(&b);
                                if !prod.is_identity() {
                                    out.push(Syllable::G(prod));
                                }
                            }
                        } else {
                            *top = prod;
                        }
                    }
                    _ => out.push(Syllable::H(e)),
                }
            }
        }
    }
    out
}

fn inverse_letters(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(Letter::inverse).collect()
}

/// Applies the word `w` (letters left to right, rightmost first) to `n`.
fn eval_letters<A: crate::words::Assignment + ?Sized>(w: &[Letter], assign: &A, n: u64) -> Option<u64> {
    w.iter().rev().try_fold(n, |c, l| l.apply(assign, c))
}

/// Per start point, every `(end, element)` reachable along defined paths
/// of `p`. Fails if the search does not saturate within `depth` layers.
fn reach(p: &[PartialInjection], nf: &NormalForm, start: u64, depth: usize) -> Result<HashSet<(u64, Elem)>> {
    let id = nf.identity();
    let mut seen: HashSet<(u64, Elem)> = HashSet::from([(start, id.clone())]);
    let mut frontier = vec![(start, id)];
    let letters: Vec<(usize, bool, Elem)> =
        (0..p.len()).flat_map(|j| [false, true].map(|inv| (j, inv, nf.letter(j, inv)))).collect();
    for _ in 0..depth {
        let mut next = Vec::new();
        for (c, e) in &frontier {
            for (j, inv, le) in &letters {
                let d = if *inv { p[*j].get_inv(*c) } else { p[*j].get(*c) };
                if let Some(d) = d {
                    let state = (d, nf.mul(le, e));
                    if seen.insert(state.clone()) {
                        next.push(state);
                    }
                }
            }
        }
        if next.is_empty() {
            return Ok(seen);
        }
        frontier = next;
    }
    Err(Error::ClosureBoundExceeded(depth))
}

fn support(p: &[PartialInjection]) -> BTreeSet<u64> {
    p.iter().flat_map(|m| m.dom().chain(m.ran()).collect::<Vec<_>>()).collect()
}

/// Default layer cap for the closure search.
pub fn default_depth(p: &[PartialInjection], pres: &Presentation) -> usize {
    2 * pres.max_relator_len() * (support(p).len() + 1)
}

/// `(a, b)` joins `q_i` when some `w'` equal to `x_i^-1` in the group sends
/// `b` to `a` under `p`; only for components that are non-empty or in `only`.
pub fn apply_relations(
    p: &[PartialInjection],
    pres: &Presentation,
    only: &BTreeSet<usize>,
    window: &Window,
    depth: Option<usize>,
) -> Result<Vec<PartialInjection>> {
    let nf = pres.nf()?;
    let depth = depth.unwrap_or_else(|| default_depth(p, pres));
    let pts = support(p);
    if pts.iter().any(|&x| !window.contains(x)) {
        return Err(Error::window("condition leaves the window"));
    }
    let targets: Vec<Elem> = (0..p.len()).map(|i| nf.letter(i, true)).collect();
    let mut q = p.to_vec();
    for &b in &pts {
        for (a, e) in reach(p, nf, b, depth)? {
            for i in 0..p.len() {
                if (p[i].is_empty() && !only.contains(&i)) || e != targets[i] {
                    continue;
                }
                match q[i].get(a) {
                    Some(c) if c == b => {}
                    _ => q[i].insert(a, b).map_err(|e| e.in_context("condition is not in the poset"))?,
                }
            }
        }
    }
    Ok(q)
}

/// Every word trivial in the group is the identity where defined.
pub fn in_poset(p: &[PartialInjection], pres: &Presentation, depth: Option<usize>) -> Result<bool> {
    let nf = pres.nf()?;
    let depth = depth.unwrap_or_else(|| default_depth(p, pres));
    for b in support(p) {
        if reach(p, nf, b, depth)?.iter().any(|(a, e)| *a != b && nf.is_identity(e)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelatorCheck {
    pub relator: String,
    pub defined: Vec<u64>,
    pub violations: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationReport {
    pub relators: Vec<RelatorCheck>,
}

impl RelationReport {
    pub fn pass(&self) -> bool {
        self.relators.iter().all(|r| r.violations.is_empty())
    }
}

pub fn check_relations(p: &[PartialInjection], pres: &Presentation, window: &Window) -> RelationReport {
    let ctx = GroupContext::trivial(*window);
    let relators = pres
        .relators
        .iter()
        .map(|r| {
            let mut c = RelatorCheck { relator: r.display(&ctx), defined: vec![], violations: vec![] };
            for n in window.points() {
                if let Some(m) = evaluate(r, p, n) {
                    c.defined.push(n);
                    if m != n {
                        c.violations.push(n);
                    }
                }
            }
            c
        })
        .collect();
    RelationReport { relators }
}

/// Every new fixed point `l` of a subword `w` under `q` splits as
/// `w = u1^-1 z u2` with `u1 = u2` and `z` fixing `m = u2(q)(l)` up to
/// group equality. Substitutes for `z` are searched among the words that
/// become `z` after replacing letters by relator consequences, i.e. `z` is
/// evaluated under the relation closure of `p`.
pub fn is_gh_good_extension(
    p: &[PartialInjection],
    q: &[PartialInjection],
    pres: &Presentation,
    words: &[Word],
    window: &Window,
) -> Result<bool> {
    let nf = pres.nf()?;
    if p.len() != q.len() || p.iter().zip(q).any(|(a, b)| !a.is_subset_of(b)) {
        return Err(Error::Invalid("not an extension".into()));
    }
    let all: BTreeSet<usize> = (0..p.len()).collect();
    let closed = apply_relations(p, pres, &all, window, None)?;
    let mut checked: HashSet<String> = HashSet::new();
    for w in words {
        for s in w.subwords() {
            if !s.has_var() || !checked.insert(format!("{s:?}")) {
                continue;
            }
            for l in window.points() {
                if evaluate(&s, q, l) != Some(l) || evaluate(&s, p, l) == Some(l) {
                    continue;
                }
                if !gh_witnessed(s.letters(), p, &closed, q, nf, l) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn gh_witnessed(
    w: &[Letter],
    p: &[PartialInjection],
    closed: &[PartialInjection],
    q: &[PartialInjection],
    nf: &NormalForm,
    l: u64,
) -> bool {
    let n = w.len();
    for i in 0..=n {
        for j in i..=n {
            let (pre, z, u2) = (&w[..i], &w[i..j], &w[j..]);
            if mixed_nf(&inverse_letters(pre), nf) != mixed_nf(u2, nf) {
                continue;
            }
            let Some(m) = eval_letters(u2, q, l) else { continue };
            if mixed_nf(z, nf).is_empty() || eval_letters(z, p, m) == Some(m) || eval_letters(z, closed, m) == Some(m) {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Domain,
    Range,
}

/// Words equal to `w` in `G * H` obtained by respelling each maximal run of
/// variable letters as a reduced variable word of at most the same length
/// with the same normal form. At most `cap` representatives, `w` first.
pub fn representatives(w: &Word, pres: &Presentation, cap: usize) -> Result<Vec<Word>> {
    let nf = pres.nf()?;
    let value = |seq: &[Letter]| {
        seq.iter().fold(nf.identity(), |acc, l| match l {
            Letter::Var { var, inv } => nf.mul(&acc, &nf.letter(*var, *inv)),
            Letter::Group(_) => acc,
        })
    };
    // runs of variable letters and the group letters between them
    let mut pieces: Vec<Vec<Vec<Letter>>> = Vec::new();
    let mut run: Vec<Letter> = Vec::new();
    let flush = |run: &mut Vec<Letter>, pieces: &mut Vec<Vec<Vec<Letter>>>| {
        if run.is_empty() {
            return;
        }
        let target = value(run);
        let mut spellings = vec![run.clone()];
        let mut layer: Vec<Vec<Letter>> = vec![Vec::new()];
        for _ in 0..run.len() {
            let mut next = Vec::new();
            for seq in &layer {
                for var in 0..pres.generators {
                    for inv in [false, true] {
                        let l = Letter::Var { var, inv };
                        if seq.last() == Some(&l.inverse()) {
                            continue;
                        }
                        let mut s = seq.clone();
                        s.push(l);
                        if value(&s) == target && !spellings.contains(&s) {
                            spellings.push(s.clone());
                        }
                        next.push(s);
                    }
                }
            }
            layer = next;
        }
        if nf.is_identity(&target) {
            spellings.push(Vec::new());
        }
        pieces.push(spellings);
        run.clear();
    };
    for l in w.letters() {
        match l {
            Letter::Var { .. } => run.push(l.clone()),
            Letter::Group(_) => {
                flush(&mut run, &mut pieces);
                pieces.push(vec![vec![l.clone()]]);
            }
        }
    }
    flush(&mut run, &mut pieces);
    let mut combos: Vec<Vec<Letter>> = vec![Vec::new()];
    for options in &pieces {
        let mut next = Vec::new();
        'outer: for c in &combos {
            for o in options {
                if next.len() >= cap {
                    break 'outer;
                }
                let mut s = c.clone();
                s.extend(o.iter().cloned());
                next.push(s);
            }
        }
        combos = next;
    }
    let mut out = vec![w.clone()];
    for c in combos {
        let r = crate::words::reduce(c);
        if r.has_var() && !out.contains(&r) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Outcome of meeting one dense set.
#[derive(Debug, Clone)]
pub struct Meet {
    pub maps: Vec<PartialInjection>,
    /// the fresh pair, if one was needed
    pub added: Option<(u64, u64)>,
}

/// Closes under relations, adds `(k, l)` (or `(l, k)`) for the least good
/// `l` above every mentioned point, then closes again.
pub fn meet_dr(
    p: &[PartialInjection],
    i: usize,
    k: u64,
    side: Side,
    pres: &Presentation,
    words: &[CheckedWord],
    window: &Window,
) -> Result<Meet> {
    if i >= p.len() {
        return Err(Error::IndexOutOfRange { index: i, len: p.len() });
    }
    let only = BTreeSet::from([i]);
    let q = apply_relations(p, pres, &only, window, None)?;
    let met = match side {
        Side::Domain => q[i].in_dom(k),
        Side::Range => q[i].in_ran(k),
    };
    if met {
        return Ok(Meet { maps: q, added: None });
    }
    let top = support(&q).into_iter().chain([k]).max().expect("k is present");
    let l = (top + 1..window.w)
        .find(|&l| {
            let (a, b) = if side == Side::Domain { (k, l) } else { (l, k) };
            words.iter().all(|cw| is_good_pair(&q, i, a, b, cw, window))
        })
        .ok_or_else(|| Error::exhausted(window.w))?;
    let pair = if side == Side::Domain { (k, l) } else { (l, k) };
    let mut r = q;
    r[i].insert(pair.0, pair.1)?;
    let maps = apply_relations(&r, pres, &only, window, None)?;
    Ok(Meet { maps, added: Some(pair) })
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingBuild {
    pub maps: Vec<PartialInjection>,
    pub trace: Trace,
    /// `fp_counts[j][s]`: fixed points of scheduled word `j` on the window
    /// before stage `s` (`s = stages` is the final state)
    pub fp_counts: Vec<Vec<usize>>,
}

/// Respellings checked per scheduled word.
pub const REPRESENTATIVE_CAP: usize = 64;

/// Meets `D_{i,s}` and `R_{i,s}` for every component `i` at stage `s`.
/// Scheduled word `j` enters at stage `j` and is respected from then on,
/// together with its respellings: a fixed point of one spelling reaches the
/// others once relations are applied.
/// The number of components is fixed up front by the presentation.
pub fn build_embedding(pres: &Presentation, ctx: &GroupContext, words: &[Word], stages: usize) -> Result<EmbeddingBuild> {
    let window = ctx.window();
    let n = pres.generators;
    for w in words {
        if w.arity() > n {
            return Err(Error::ArityMismatch { needed: w.arity(), given: n });
        }
    }
    let mut maps = vec![PartialInjection::new(); n];
    let mut trace = Trace { stages, ..Trace::default() };
    trace.schedule =
        words.iter().enumerate().map(|(j, w)| ScheduledWord { id: j, text: w.display(ctx), entry: j }).collect();
    let mut fp_counts = vec![Vec::with_capacity(stages + 1); words.len()];
    let count = |maps: &Vec<PartialInjection>, fp: &mut Vec<Vec<usize>>| {
        for (j, w) in words.iter().enumerate() {
            fp[j].push(window.points().filter(|&l| evaluate(w, maps, l) == Some(l)).count());
        }
    };
    for s in 0..stages {
        count(&maps, &mut fp_counts);
        let mut respelled = Vec::new();
        for w in &words[..words.len().min(s + 1)] {
            respelled.extend(representatives(w, pres, REPRESENTATIVE_CAP)?);
        }
        let active = active_closure(&respelled);
        for i in 0..n {
            for side in [Side::Domain, Side::Range] {
                let meet = meet_dr(&maps, i, s as u64, side, pres, &active, &window)
                    .map_err(|e| e.in_context(format!("stage {s}, component {i}, {side:?}")))?;
                for (v, (old, new)) in maps.iter().zip(&meet.maps).enumerate() {
                    for (a, b) in new.iter().filter(|&(a, _)| !old.in_dom(a)) {
                        let step = match meet.added {
                            Some(pair) if v == i && pair == (a, b) => match side {
                                Side::Domain => "domain",
                                Side::Range => "range",
                            },
                            _ => "relations",
                        };
                        trace.push(s, step, v, (a, b));
                    }
                }
                maps = meet.maps;
            }
        }
    }
    count(&maps, &mut fp_counts);
    Ok(EmbeddingBuild { maps, trace, fp_counts })
}

/// Per component: the map is injective and agrees with its own inverse table.
pub fn components_consistent(maps: &[PartialInjection]) -> bool {
    maps.iter().all(|m| m.is_valid() && m.iter().all(|(a, b)| m.get_inv(b) == Some(a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi(pairs: &[(u64, u64)]) -> PartialInjection {
        PartialInjection::from_pairs(pairs.iter().copied()).unwrap()
    }

    fn win() -> Window {
        Window::new(64, 4).unwrap()
    }

    #[test]
    fn parse_presentation() {
        let p = Presentation::parse_json(r#"{"generators":2,"relators":["x0^2","x1^2","[x0,x1]"],"normal_form":"abelian-order-2"}"#).unwrap();
        assert_eq!(p.relators.len(), 3);
        assert!(p.is_trivial(&Word::parse("x0 x1 x0 x1", &GroupContext::trivial(win())).unwrap()).unwrap());
        let bare = Presentation::parse_json(r#"{"generators":1,"relators":["x0^2"]}"#).unwrap();
        assert!(matches!(apply_relations(&[pi(&[(0, 1)])], &bare, &BTreeSet::new(), &win(), None), Err(Error::UnsupportedPresentation(_))));
        assert!(Presentation::parse_json(r#"{"generators":1,"relators":["x0^3"],"normal_form":"abelian-order-2"}"#).is_err());
    }

    #[test]
    fn relations_examples() {
        let z2 = Presentation::abelian(&[2]);
        let none = BTreeSet::new();
        let q = apply_relations(&[pi(&[(0, 1)])], &z2, &none, &win(), None).unwrap();
        assert_eq!(q, vec![pi(&[(0, 1), (1, 0)])]);
        assert_eq!(apply_relations(&q, &z2, &none, &win(), None).unwrap(), q);
        assert_eq!(apply_relations(&[PartialInjection::new()], &z2, &none, &win(), None).unwrap(), vec![PartialInjection::new()]);
    }

    #[test]
    fn respellings() {
        let ctx = GroupContext::with_base_h(win());
        let v4 = Presentation::abelian(&[2, 2]);
        let w = Word::parse("h x0 x1", &ctx).unwrap();
        let reps: Vec<String> = representatives(&w, &v4, 64).unwrap().iter().map(|r| r.display(&ctx)).collect();
        assert_eq!(reps[0], "h x x1");
        for other in ["h x1 x", "h x x1^-1", "h x^-1 x1^-1"] {
            assert!(reps.contains(&other.to_string()), "{other} missing from {reps:?}");
        }
        let free = Presentation::free(2);
        assert_eq!(representatives(&w, &free, 64).unwrap(), vec![w]);
    }

    #[test]
    fn check_examples() {
        let z2 = Presentation::abelian(&[2]);
        assert!(check_relations(&[pi(&[(0, 1), (1, 0)])], &z2, &win()).pass());
        let bad = check_relations(&[pi(&[(0, 1), (1, 2)])], &z2, &win());
        assert_eq!(bad.relators[0].violations, vec![0]);
        let v4 = Presentation::abelian(&[2, 2]);
        let r = check_relations(&[pi(&[(0, 1), (1, 0)]), pi(&[(5, 6), (6, 5)])], &v4, &win());
        assert!(r.pass());
        assert!(r.relators[2].defined.is_empty());
    }

    #[test]
    fn meet_examples() {
        let z2 = Presentation::abelian(&[2]);
        let ctx = GroupContext::with_base_h(win());
        let words = active_closure(&[Word::parse("x", &ctx).unwrap()]);
        let m = meet_dr(&[PartialInjection::new()], 0, 0, Side::Domain, &z2, &words, &win()).unwrap();
        let (k, l) = m.added.unwrap();
        assert_eq!(k, 0);
        assert_eq!(m.maps, vec![pi(&[(0, l), (l, 0)])]);
        let again = meet_dr(&m.maps, 0, 0, Side::Domain, &z2, &words, &win()).unwrap();
        assert!(again.added.is_none());
        assert_eq!(again.maps, m.maps);

        let v4 = Presentation::abelian(&[2, 2]);
        let start = vec![pi(&[(0, 1), (1, 0)]), PartialInjection::new()];
        let m = meet_dr(&start, 1, 2, Side::Domain, &v4, &[], &win()).unwrap();
        assert!(m.maps[1].in_dom(2));
        assert_eq!(m.maps[0], start[0]);
    }

    #[test]
    fn gh_good_examples() {
        let z2 = Presentation::abelian(&[2]);
        let ctx = GroupContext::with_base_h(win());
        let p = vec![pi(&[(0, 9), (9, 0)])];
        let w = vec![Word::parse("h x", &ctx).unwrap()];
        assert!(is_gh_good_extension(&p, &p, &z2, &w, &win()).unwrap());
        // (3, h^-1(3)) makes 3 a fixed point of h x with no witness
        let l = 3;
        let m = crate::perm::base_h_inv(l);
        let mut q = p.clone();
        q[0].insert(l, m).unwrap();
        assert_eq!(evaluate(&w[0], &q, l), Some(l));
        assert!(!is_gh_good_extension(&p, &q, &z2, &w, &win()).unwrap());
    }

    #[test]
    fn embedding_z2() {
        let ctx = GroupContext::with_base_h(Window::new(256, 8).unwrap());
        let z2 = Presentation::abelian(&[2]);
        let words: Vec<Word> = ["x", "h x", "x h x h^-1"].iter().map(|t| Word::parse(t, &ctx).unwrap()).collect();
        let b = build_embedding(&z2, &ctx, &words, 10).unwrap();
        assert!(check_relations(&b.maps, &z2, &ctx.window()).pass());
        assert!(components_consistent(&b.maps));
        let g = &b.maps[0];
        assert!(g.iter().all(|(a, c)| a != c && g.get(c) == Some(a)));
        for (j, counts) in b.fp_counts.iter().enumerate() {
            assert!(counts[j..].iter().all(|&c| c <= counts[j]), "word {j}: {counts:?}");
        }
        assert_eq!(b.trace.replay(1).unwrap(), b.maps);
    }
}
