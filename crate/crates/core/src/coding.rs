//! Coding a bit sequence into every word image `w(g)` of a new generator,
//! and the two-mode decoder.
//!
//! With parameter `(m, 0)` bit `n` is the second coordinate of `f^n(m)`;
//! with `(m, 1)` it is that of `f (h f)^n (m)`, `h` the base permutation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{is_good_pair, Builder};
use crate::pairing::unpair;
use crate::partial::PartialInjection;
use crate::perm::{base_h, Evaluable, FnSpec};
use crate::trace::Trace;
use crate::words::{conjugate_decompositions, evaluate, evaluate_inverse, GroupContext, GroupElem, Letter, Word};

/// 1 if the word has a proper conjugate subword, else 0.
pub fn gamma(w: &Word) -> u8 {
    u8::from(conjugate_decompositions(w).len() > 1)
}

/// `w(g)` as a function.
pub struct WordImage<'a> {
    pub word: &'a Word,
    pub maps: &'a [PartialInjection],
}

impl Evaluable for WordImage<'_> {
    fn apply(&self, n: u64) -> Option<u64> {
        evaluate(self.word, self.maps, n)
    }
    fn apply_inverse(&self, m: u64) -> Option<u64> {
        evaluate_inverse(self.word, self.maps, m)
    }
}

/// Bit `n` of the code with parameter `(m, mode)`.
pub fn decode_cfg(f: &(impl Evaluable + ?Sized), m: u64, mode: u8, n: usize) -> Result<bool> {
    let step = |x: u64| f.apply(x).ok_or_else(|| Error::MalformedCode(format!("undefined at {x}")));
    let mut x = m;
    match mode {
        0 => {
            for _ in 0..n {
                x = step(x)?;
            }
        }
        1 => {
            for _ in 0..n {
                x = base_h(step(x)?);
            }
            x = step(x)?;
        }
        _ => return Err(Error::MalformedCode(format!("mode {mode}"))),
    }
    match unpair(x).1 {
        0 => Ok(false),
        1 => Ok(true),
        b => Err(Error::MalformedCode(format!("second coordinate {b} of {x} is not a bit"))),
    }
}

pub fn decode_bits(f: &(impl Evaluable + ?Sized), m: u64, mode: u8, count: usize) -> Result<Vec<bool>> {
    (0..count).map(|n| decode_cfg(f, m, mode, n)).collect()
}

/// Where the coding for one word stands.
#[derive(Debug, Clone)]
struct Cursor {
    word: usize,
    start: u64,
    first_value: Option<u64>,
    /// bits written so far
    l: usize,
    gamma: u8,
    /// index (from the right) of the variable letter to apply next
    pos: usize,
    /// the point that letter is applied to; reserved until then
    a: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodedWord {
    pub id: usize,
    pub text: String,
    pub entry: usize,
    /// decoder parameter
    pub m: u64,
    pub gamma: u8,
    pub encoded: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CfgEncoding {
    pub g: PartialInjection,
    pub trace: Trace,
    pub words: Vec<CodedWord>,
    /// points reserved for coding during each stage's plumbing steps
    pub reserved: BTreeMap<usize, Vec<u64>>,
}

fn group_at(w: &Word, i: usize) -> Option<&GroupElem> {
    match w.letter_at(i) {
        Ok(Letter::Group(g)) => Some(g),
        _ => None,
    }
}

fn first_var(w: &Word) -> usize {
    (0..w.len()).find(|&i| matches!(w.letter_at(i), Ok(Letter::Var { .. }))).expect("word has a variable")
}

/// Stage loop: extend domain and range, hit each target, advance every
/// started cursor by one letter, then start coding for the word entering
/// at this stage. Every step except the coding steps avoids the reserved
/// points. Cursors stop once all of `z` is written.
pub fn encode_cfg(ctx: &GroupContext, targets: &[FnSpec], z: &[bool], schedule: &[Word], stages: usize) -> Result<CfgEncoding> {
    let h = ctx.generator("h").ok_or_else(|| Error::Invalid("the group must contain the base permutation h".into()))?;
    if !matches!(ctx.specs()[h], FnSpec::BaseH) {
        return Err(Error::Invalid("generator h must be the base permutation".into()));
    }
    for w in schedule {
        if !w.has_var() || w.arity() > 1 {
            return Err(Error::Invalid(format!("{} is not a word in one variable", w.display(ctx))));
        }
    }
    let window = ctx.window();
    let mut b = Builder::new(ctx, 1, window.w);
    b.record_fixed_points = false;
    let mut cursors: Vec<Cursor> = Vec::new();
    let mut reserved_log = BTreeMap::new();
    for s in 0..stages {
        if let Some(w) = schedule.get(s) {
            b.activate(w, s)?;
        }
        let reserved: std::collections::BTreeSet<u64> = cursors.iter().filter(|c| c.l < z.len()).map(|c| c.a).collect();
        reserved_log.insert(s, reserved.iter().copied().collect());
        b.extend_domain(s, 0, &reserved).map_err(|e| e.in_context("extend domain"))?;
        b.extend_range(s, 0, &reserved).map_err(|e| e.in_context("extend range"))?;
        for f in targets.iter().take(s + 1) {
            b.hit(s, 0, f, &reserved).map_err(|e| e.in_context("hit f"))?;
        }
        for j in 0..cursors.len() {
            if cursors[j].l < z.len() {
                let others: Vec<u64> = cursors.iter().enumerate().filter(|&(i, c)| i != j && c.l < z.len()).map(|(_, c)| c.a).collect();
                advance(&mut b, s, &schedule[cursors[j].word], &mut cursors[j], &others, z)
                    .map_err(|e| e.in_context(format!("coding word {}", cursors[j].word)))?;
            }
        }
        if let Some(w) = schedule.get(s) {
            let mut reserved: Vec<u64> = cursors.iter().filter(|c| c.l < z.len()).map(|c| c.a).collect();
            let pos = first_var(w);
            let tail = ctx_elem_between(w, 0, pos);
            let g = &b.maps[0];
            let forward = matches!(w.letter_at(pos), Ok(Letter::Var { inv: false, .. }));
            let (start, a) = window
                .points()
                .find_map(|m| {
                    let a = eval_group(&tail, m)?;
                    let free = if forward { !g.in_dom(a) } else { !g.in_ran(a) };
                    (free && !reserved.contains(&a)).then_some((m, a))
                })
                .ok_or_else(|| Error::window("extending coding"))?;
            reserved.push(a);
            cursors.push(Cursor { word: s, start, first_value: None, l: 0, gamma: gamma(w), pos, a });
        }
    }
    let words = cursors
        .iter()
        .map(|c| CodedWord {
            id: c.word,
            text: schedule[c.word].display(ctx),
            entry: c.word,
            m: if c.gamma == 0 { c.first_value.unwrap_or(c.start) } else { c.start },
            gamma: c.gamma,
            encoded: c.l,
        })
        .collect();
    let (mut maps, trace) = b.finish(stages);
    Ok(CfgEncoding { g: maps.remove(0), trace, words, reserved: reserved_log })
}

/// The group letters with indices in `lo..hi` (from the right).
fn ctx_elem_between(w: &Word, lo: usize, hi: usize) -> Vec<GroupElem> {
    (lo..hi).filter_map(|i| group_at(w, i).cloned()).collect()
}

fn eval_group(gs: &[GroupElem], n: u64) -> Option<u64> {
    gs.iter().try_fold(n, |x, g| g.apply(x))
}

/// One letter of progress along the coding path of `w`.
fn advance(b: &mut Builder, s: usize, w: &Word, c: &mut Cursor, others: &[u64], z: &[bool]) -> Result<()> {
    let window = b.window();
    let Ok(Letter::Var { inv, .. }) = w.letter_at(c.pos) else {
        return Err(Error::Invalid("cursor is not at a variable".into()));
    };
    let forward = !inv;
    let a = c.a;
    let g = b.maps[0].clone();
    let orient = |x: u64| if forward { (a, x) } else { (x, a) };
    let dir = |i: usize| matches!(w.letter_at(i), Ok(Letter::Var { inv: false, .. }));
    // a pending point only has to be free on the side its next letter uses,
    // counting the pair about to be added
    let fresh = |y: u64, next_forward: bool, added: (u64, u64)| {
        !others.contains(&y) && if next_forward { !g.in_dom(y) && y != added.0 } else { !g.in_ran(y) && y != added.1 }
    };
    let base_ok = |x: u64| {
        let (p, q) = orient(x);
        !others.contains(&x) && g.can_insert(p, q) && b.active().iter().all(|cw| is_good_pair(&b.maps, 0, p, q, cw, &window))
    };
    let next = w.letter_at(c.pos + 1).ok();
    let after = w.letter_at(c.pos + 2).ok();
    match (next, after) {
        (Some(Letter::Var { .. }), _) => {
            let nf = dir(c.pos + 1);
            let x = window.points().find(|&x| fresh(x, nf, orient(x)) && base_ok(x)).ok_or_else(|| Error::exhausted(window.w))?;
            let (p, q) = orient(x);
            b.add(s, "code", 0, p, q)?;
            c.a = x;
            c.pos += 1;
        }
        (Some(Letter::Group(gj)), Some(Letter::Var { .. })) => {
            let gj = gj.clone();
            let x = window
                .points()
                .find(|&x| gj.apply(x).is_some_and(|y| fresh(y, dir(c.pos + 2), orient(x))) && base_ok(x))
                .ok_or_else(|| Error::exhausted(window.w))?;
            let (p, q) = orient(x);
            b.add(s, "code", 0, p, q)?;
            c.a = gj.apply(x).expect("checked");
            c.pos += 2;
        }
        (next, _) => {
            let g0 = match next {
                Some(Letter::Group(g0)) => Some(g0.clone()),
                _ => None,
            };
            let bit = u64::from(z[c.l]);
            let pos0 = first_var(w);
            let tail = ctx_elem_between(w, 0, pos0);
            let gamma = c.gamma;
            let climb = |x: u64| -> Option<(u64, u64, u64)> {
                let v = match &g0 {
                    Some(g0) => g0.apply(x)?,
                    None => x,
                };
                if unpair(v).1 != bit || others.contains(&v) {
                    return None;
                }
                let m = if gamma == 0 { v } else { base_h(v) };
                if !window.contains(m) {
                    return None;
                }
                let na = eval_group(&tail, m)?;
                fresh(na, dir(pos0), orient(x)).then_some((v, m, na))
            };
            let (x, (v, _m, na)) = window
                .points()
                .find_map(|x| if base_ok(x) { climb(x).map(|r| (x, r)) } else { None })
                .ok_or_else(|| Error::exhausted(window.w))?;
            let (p, q) = orient(x);
            b.add(s, "code", 0, p, q)?;
            if let Some(r) = b.trace.records.last_mut() {
                r.note = Some(format!("word {} bit {} = {}", c.word, c.l, bit));
            }
            c.first_value.get_or_insert(v);
            c.l += 1;
            c.a = na;
            c.pos = pos0;
        }
    }
    Ok(())
}

/// Reserved points must not be consumed by plumbing steps: every non-coding
/// record of `trace` avoids the points reserved when it was added. Returns
/// the offending records.
pub fn avoid_violations(trace: &Trace, reserved_at: &BTreeMap<usize, Vec<u64>>) -> Vec<usize> {
    trace
        .records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.step != "code")
        .filter(|(_, r)| reserved_at.get(&r.stage).is_some_and(|v| v.contains(&r.pair.0) || v.contains(&r.pair.1)))
        .map(|(i, _)| i)
        .collect()
}
