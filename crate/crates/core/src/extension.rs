//! Good and very good extensions, the extension-lemma searches and the
//! staged generator builder.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::partial::PartialInjection;
use crate::perm::{Evaluable, FnSpec};
use crate::trace::{ScheduledWord, Trace};
use crate::window::Window;
use crate::words::{
    check_arity, conjugate_decompositions, evaluate, shortest_conjugate_subword, word_fixed_points, Assignment,
    GroupContext, Letter, WithPair, Word,
};

/// Points a search must not use.
pub trait Avoid {
    fn avoids(&self, n: u64) -> bool;
}

impl Avoid for BTreeSet<u64> {
    fn avoids(&self, n: u64) -> bool {
        self.contains(&n)
    }
}

impl Avoid for HashSet<u64> {
    fn avoids(&self, n: u64) -> bool {
        self.contains(&n)
    }
}

impl<F: Fn(u64) -> bool> Avoid for F {
    fn avoids(&self, n: u64) -> bool {
        self(n)
    }
}

/// The empty avoid set.
pub fn nothing(_: u64) -> bool {
    false
}

/// A word together with its conjugate decompositions.
#[derive(Debug, Clone)]
pub struct CheckedWord {
    pub word: Word,
    decomps: Vec<(Word, Word)>,
}

impl CheckedWord {
    pub fn new(word: Word) -> Self {
        let decomps = conjugate_decompositions(&word);
        CheckedWord { word, decomps }
    }

    pub fn decompositions(&self) -> &[(Word, Word)] {
        &self.decomps
    }
}

/// The words together with all their subwords that mention a variable.
pub fn active_closure(words: &[Word]) -> Vec<CheckedWord> {
    let mut seen: Vec<Word> = Vec::new();
    for w in words {
        for s in w.subwords() {
            if s.has_var() && !seen.contains(&s) {
                seen.push(s);
            }
        }
    }
    seen.into_iter().map(CheckedWord::new).collect()
}

fn witnessed<P: Assignment + ?Sized, Q: Assignment + ?Sized>(cw: &CheckedWord, p: &P, q: &Q, l: u64) -> bool {
    cw.decomps
        .iter()
        .any(|(u, z)| evaluate(u, q, l).is_some_and(|k| evaluate(z, p, k) == Some(k)))
}

fn new_fixed_point_ok<P: Assignment + ?Sized, Q: Assignment + ?Sized>(
    cw: &CheckedWord,
    p: &P,
    q: &Q,
    l: u64,
    window: &Window,
) -> bool {
    if !window.contains(l) || evaluate(&cw.word, q, l) != Some(l) || evaluate(&cw.word, p, l).is_some() {
        return true;
    }
    witnessed(cw, p, q, l)
}

/// Start points whose path reaches `point` just before letter `i`.
fn back_from<Q: Assignment + ?Sized>(w: &Word, q: &Q, i: usize, point: u64) -> Option<u64> {
    let letters = w.letters();
    let len = letters.len();
    let mut cur = point;
    for j in (0..i).rev() {
        cur = letters[len - 1 - j].apply_inverse(q, cur)?;
    }
    Some(cur)
}

/// Is `p` plus `(a, b)` on `var` good for this word? Only paths through the
/// new pair can create fixed points, so only those starts are examined.
pub fn is_good_pair<A: Assignment + ?Sized>(
    p: &A,
    var: usize,
    a: u64,
    b: u64,
    cw: &CheckedWord,
    window: &Window,
) -> bool {
    let q = WithPair { base: p, var, a, b };
    let len = cw.word.len();
    for i in 0..len {
        let point = match cw.word.letters()[len - 1 - i] {
            Letter::Var { var: v, inv } if v == var => {
                if inv {
                    b
                } else {
                    a
                }
            }
            _ => continue,
        };
        if let Some(l) = back_from(&cw.word, &q, i, point) {
            if !new_fixed_point_ok(cw, p, &q, l, window) {
                return false;
            }
        }
    }
    true
}

fn all_good_pair<A: Assignment + ?Sized>(
    p: &A,
    var: usize,
    a: u64,
    b: u64,
    words: &[CheckedWord],
    window: &Window,
) -> bool {
    words.iter().all(|cw| is_good_pair(p, var, a, b, cw, window))
}

/// Every new fixed point of `w(q)` is transported from a fixed point of a
/// conjugate subword under `p`.
pub fn is_good_extension(
    p: &[PartialInjection],
    q: &[PartialInjection],
    w: &Word,
    ctx: &GroupContext,
) -> Result<bool> {
    check_arity(w, p)?;
    check_arity(w, q)?;
    let window = ctx.window();
    let cw = CheckedWord::new(w.clone());
    let len = w.len();
    for i in 0..len {
        let Letter::Var { var, inv } = w.letters()[len - 1 - i] else { continue };
        let (pv, qv) = (&p[var], &q[var]);
        for (a, b) in qv.iter().filter(|&(a, _)| pv.get(a).is_none()) {
            let point = if inv { b } else { a };
            if let Some(l) = back_from(w, q, i, point) {
                if !new_fixed_point_ok(&cw, p, q, l, &window) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `fix(w(q))` is contained in `fix(w(p))` on the window.
pub fn is_very_good_extension<P: Assignment + ?Sized, Q: Assignment + ?Sized>(
    p: &P,
    q: &Q,
    w: &Word,
    window: &Window,
) -> bool {
    window.points().all(|n| evaluate(w, q, n) != Some(n) || evaluate(w, p, n) == Some(n))
}

/// Least `b <= min(bound, W-1)` outside `ran(p[var])` and the avoid set such that
/// adding `(a, b)` is good for every listed word.
pub fn find_domain_extension(
    p: &[PartialInjection],
    var: usize,
    a: u64,
    words: &[CheckedWord],
    window: &Window,
    forbidden: &impl Avoid,
    bound: u64,
) -> Result<u64> {
    precheck(p, var, words)?;
    if p[var].in_dom(a) || forbidden.avoids(a) {
        return Err(Error::Invalid(format!("{a} is already mapped or forbidden")));
    }
    (0..=cap(bound, window))
        .find(|&b| !p[var].in_ran(b) && !forbidden.avoids(b) && all_good_pair(p, var, a, b, words, window))
        .ok_or_else(|| Error::exhausted(bound))
}

/// Least `a <= bound` outside `dom(p[var])` and the avoid set such that
/// adding `(a, b)` is good for every listed word.
pub fn find_range_extension(
    p: &[PartialInjection],
    var: usize,
    b: u64,
    words: &[CheckedWord],
    window: &Window,
    forbidden: &impl Avoid,
    bound: u64,
) -> Result<u64> {
    precheck(p, var, words)?;
    if p[var].in_ran(b) || forbidden.avoids(b) {
        return Err(Error::Invalid(format!("{b} is already a value or forbidden")));
    }
    (0..=cap(bound, window))
        .find(|&a| !p[var].in_dom(a) && !forbidden.avoids(a) && all_good_pair(p, var, a, b, words, window))
        .ok_or_else(|| Error::exhausted(bound))
}

/// Least `n <= bound` such that `(n, f(n))` can be added to `p[var]` as a
/// good extension. Points where `f` is undefined are skipped.
pub fn find_hitting_extension(
    p: &[PartialInjection],
    var: usize,
    f: &(impl Evaluable + ?Sized),
    words: &[CheckedWord],
    window: &Window,
    forbidden: &impl Avoid,
    bound: u64,
) -> Result<u64> {
    precheck(p, var, words)?;
    (0..=cap(bound, window))
        .find(|&n| {
            if p[var].in_dom(n) || forbidden.avoids(n) {
                return false;
            }
            let Some(m) = f.apply(n) else { return false };
            !p[var].in_ran(m) && !forbidden.avoids(m) && all_good_pair(p, var, n, m, words, window)
        })
        .ok_or_else(|| Error::exhausted(bound))
}

/// Candidates outside the window cannot be checked for fixed points.
fn cap(bound: u64, window: &Window) -> u64 {
    bound.min(window.w.saturating_sub(1))
}

fn precheck(p: &[PartialInjection], var: usize, words: &[CheckedWord]) -> Result<()> {
    if var >= p.len() {
        return Err(Error::ArityMismatch { needed: var + 1, given: p.len() });
    }
    for cw in words {
        check_arity(&cw.word, p)?;
    }
    Ok(())
}

/// Words to respect and maps to hit during a staged build. Word `i` enters
/// at stage `i`; target `j` is hit once per stage from stage `j` on.
#[derive(Debug, Clone, Default)]
pub struct BuildSchedule {
    pub words: Vec<Word>,
    pub targets: Vec<FnSpec>,
    pub stages: usize,
    pub forbidden: BTreeSet<u64>,
    /// defaults to the window size
    pub search_bound: Option<u64>,
}

/// Incremental state shared by the staged constructions.
pub struct Builder<'c> {
    pub ctx: &'c GroupContext,
    pub maps: Vec<PartialInjection>,
    pub bound: u64,
    pub trace: Trace,
    pub record_fixed_points: bool,
    active: Vec<CheckedWord>,
    scheduled: Vec<Word>,
}

impl<'c> Builder<'c> {
    pub fn new(ctx: &'c GroupContext, nvars: usize, bound: u64) -> Self {
        Builder {
            ctx,
            maps: vec![PartialInjection::new(); nvars],
            bound,
            trace: Trace::default(),
            record_fixed_points: true,
            active: Vec::new(),
            scheduled: Vec::new(),
        }
    }

    pub fn window(&self) -> Window {
        self.ctx.window()
    }

    pub fn active(&self) -> &[CheckedWord] {
        &self.active
    }

    /// Schedules `w` and every subword from `stage` on.
    pub fn activate(&mut self, w: &Word, stage: usize) -> Result<()> {
        check_arity(w, &self.maps)?;
        let id = self.scheduled.len();
        self.trace.schedule.push(ScheduledWord { id, text: w.display(self.ctx), entry: stage });
        self.scheduled.push(w.clone());
        for cw in active_closure(std::slice::from_ref(w)) {
            if !self.active.iter().any(|a| a.word == cw.word) {
                self.active.push(cw);
            }
        }
        Ok(())
    }

    /// Adds a pair and logs it with the current fixed-point counts.
    pub fn add(&mut self, stage: usize, step: &str, var: usize, a: u64, b: u64) -> Result<()> {
        self.maps[var].insert(a, b)?;
        let window = self.window();
        let fp: BTreeMap<String, usize> = if self.record_fixed_points {
            self.scheduled
                .iter()
                .enumerate()
                .map(|(i, w)| (i.to_string(), word_fixed_points(w, &self.maps, &window).len()))
                .collect()
        } else {
            BTreeMap::new()
        };
        self.trace.push(stage, step, var, (a, b)).fp = fp;
        Ok(())
    }

    /// Maps the least point outside `dom` (and the avoid set).
    pub fn extend_domain(&mut self, stage: usize, var: usize, avoid: &impl Avoid) -> Result<(u64, u64)> {
        let a = (0..).find(|&n| !self.maps[var].in_dom(n) && !avoid.avoids(n)).expect("unbounded");
        let b = find_domain_extension(&self.maps, var, a, &self.active, &self.window(), avoid, self.bound)
            .map_err(|e| e.in_context(format!("stage {stage}, domain step for {a}")))?;
        self.add(stage, "domain", var, a, b)?;
        Ok((a, b))
    }

    /// Puts the least point outside `ran` (and the avoid set) into the range.
    pub fn extend_range(&mut self, stage: usize, var: usize, avoid: &impl Avoid) -> Result<(u64, u64)> {
        let b = (0..).find(|&n| !self.maps[var].in_ran(n) && !avoid.avoids(n)).expect("unbounded");
        let a = find_range_extension(&self.maps, var, b, &self.active, &self.window(), avoid, self.bound)
            .map_err(|e| e.in_context(format!("stage {stage}, range step for {b}")))?;
        self.add(stage, "range", var, a, b)?;
        Ok((a, b))
    }

    pub fn hit(&mut self, stage: usize, var: usize, f: &(impl Evaluable + ?Sized), avoid: &impl Avoid) -> Result<(u64, u64)> {
        let n = find_hitting_extension(&self.maps, var, f, &self.active, &self.window(), avoid, self.bound)
            .map_err(|e| e.in_context(format!("stage {stage}, hitting step")))?;
        let m = f.apply(n).expect("finder checked");
        self.add(stage, "hit", var, n, m)?;
        Ok((n, m))
    }

    pub fn finish(mut self, stages: usize) -> (Vec<PartialInjection>, Trace) {
        self.trace.stages = stages;
        (self.maps, self.trace)
    }
}

/// Builds `nvars` partial generators: per stage and variable one domain and
/// one range step; targets are hit on variable 0 only.
pub fn build_generators(ctx: &GroupContext, schedule: &BuildSchedule, nvars: usize) -> Result<(Vec<PartialInjection>, Trace)> {
    let bound = schedule.search_bound.unwrap_or(ctx.window().w);
    let mut b = Builder::new(ctx, nvars.max(1), bound);
    let avoid = &schedule.forbidden;
    for s in 0..schedule.stages {
        if let Some(w) = schedule.words.get(s) {
            b.activate(w, s)?;
        }
        for var in 0..nvars {
            b.extend_domain(s, var, avoid)?;
            b.extend_range(s, var, avoid)?;
        }
        for f in schedule.targets.iter().take(s + 1) {
            b.hit(s, 0, f, avoid)?;
        }
    }
    Ok(b.finish(schedule.stages))
}

/// The three-step stage loop for a single generator.
pub fn build_cofinitary_generator(ctx: &GroupContext, schedule: &BuildSchedule) -> Result<(PartialInjection, Trace)> {
    let (mut maps, trace) = build_generators(ctx, schedule, 1)?;
    Ok((maps.remove(0), trace))
}

/// Fixed-point counts of `w(g_s)` for every stage, where `g_s` is the state
/// before stage `s` and `counts[stages]` is the final state.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Profile {
    pub counts: Vec<usize>,
    pub entry: usize,
    pub shortest: String,
    pub shortest_at_entry: usize,
}

pub fn fixed_point_profile(w: &Word, trace: &Trace, ctx: &GroupContext) -> Result<Profile> {
    let window = ctx.window();
    let nvars = trace.arity().max(w.arity());
    let entry = trace.entry_of(&w.display(ctx)).unwrap_or(0);
    let mut counts = Vec::with_capacity(trace.stages + 1);
    for s in 0..=trace.stages {
        let g = trace.replay_until(nvars, s)?;
        counts.push(word_fixed_points(w, &g, &window).len());
    }
    let z = shortest_conjugate_subword(w);
    let at_entry = trace.replay_until(nvars, entry)?;
    Ok(Profile {
        counts,
        entry,
        shortest: z.display(ctx),
        shortest_at_entry: word_fixed_points(&z, &at_entry, &window).len(),
    })
}
