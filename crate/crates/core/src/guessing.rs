//! Stepwise combinatorics of the guessing constructions: valid guesses, the
//! P1-P5 step for almost disjoint permutations and witness sets of very
//! good extensions.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::is_very_good_extension;
use crate::partial::PartialInjection;
use crate::perm::Evaluable;
use crate::trace::Trace;
use crate::window::Window;
use crate::words::{evaluate, evaluation_path, Word};

/// `e(j)` for `j <= n`, skipping indices outside the family.
fn members<'a, F: Evaluable>(family: &'a [F], order: &'a [usize], n: usize) -> impl Iterator<Item = &'a F> + 'a {
    order.iter().take(n + 1).filter_map(move |&i| family.get(i))
}

fn distinct(xs: impl Iterator<Item = u64>) -> bool {
    let mut seen = BTreeSet::new();
    xs.into_iter().all(|x| seen.insert(x))
}

/// `6n+1` pairs with distinct first and distinct second coordinates, each
/// `o_i` avoiding the values of the first `n+1` enumerated members at `k_i`.
pub fn valid_guess_ap<F: Evaluable>(guess: &[(u64, u64)], family: &[F], order: &[usize], n: usize, window: &Window) -> bool {
    guess.len() == 6 * n + 1
        && guess.iter().all(|&(k, o)| window.contains(k) && window.contains(o))
        && distinct(guess.iter().map(|x| x.0))
        && distinct(guess.iter().map(|x| x.1))
        && guess.iter().all(|&(k, o)| members(family, order, n).all(|f| f.apply(k) != Some(o)))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ApStats {
    /// `|p|` at the start of each stage
    pub sizes: Vec<usize>,
    /// stages whose guess was valid
    pub ingested: Vec<usize>,
    /// for each ingested guess, how many of its pairs were usable
    pub usable: Vec<usize>,
}

/// Per stage `s`: ingest the guess if valid (least pair with a fresh
/// domain point and fresh value), then add the least missing domain point
/// and the least missing value, both avoiding the first `s+1` members.
pub fn guess_step_ap<F: Evaluable>(
    family: &[F],
    order: &[usize],
    guesses: &dyn Fn(usize) -> Option<Vec<(u64, u64)>>,
    stages: usize,
    window: &Window,
) -> Result<(PartialInjection, Trace, ApStats)> {
    let mut p = PartialInjection::new();
    let mut trace = Trace { stages, ..Trace::default() };
    let mut stats = ApStats::default();
    for s in 0..stages {
        stats.sizes.push(p.len());
        if let Some(g) = guesses(s).filter(|g| valid_guess_ap(g, family, order, s, window)) {
            let usable: Vec<(u64, u64)> = g.iter().copied().filter(|&(k, o)| !p.in_dom(k) && !p.in_ran(o)).collect();
            let &(k, o) = usable.first().ok_or_else(|| Error::Invalid(format!("no usable pair at stage {s}")))?;
            p.insert(k, o)?;
            trace.push(s, "guess", 0, (k, o));
            stats.ingested.push(s);
            stats.usable.push(usable.len());
        }
        let a = p.least_missing_dom();
        let b = window
            .points()
            .find(|&b| !p.in_ran(b) && members(family, order, s).all(|f| f.apply(a) != Some(b)))
            .ok_or_else(|| Error::window(format!("stage {s}, domain step")))?;
        p.insert(a, b)?;
        trace.push(s, "domain", 0, (a, b));
        let d = p.least_missing_ran();
        let c = window
            .points()
            .find(|&c| !p.in_dom(c) && members(family, order, s).all(|f| f.apply_inverse(d) != Some(c)))
            .ok_or_else(|| Error::window(format!("stage {s}, range step")))?;
        p.insert(c, d)?;
        trace.push(s, "range", 0, (c, d));
    }
    Ok((p, trace, stats))
}

/// Occurrences of the variable in `w`.
pub fn var_occurrences(w: &Word) -> usize {
    w.var_count()
}

/// The proof's size: `2k + k * sum #x(w) + 1`.
pub fn witness_bound(words: &[Word], k: usize) -> usize {
    2 * k + k * words.iter().map(var_occurrences).sum::<usize>() + 1
}

/// Pairs of `f` on the window, thinned so that no listed word has a fixed
/// point over the kept pairs alone, and never using a pair that lies on a
/// fixed-point path of a word over `f` itself (unless `w(f)` is the
/// identity, where every path is such a path). Returns the first
/// `witness_bound` pairs.
pub fn witness_set<F: Evaluable>(f: &F, words: &[Word], k: usize, window: &Window) -> Result<Vec<(u64, u64)>> {
    let need = witness_bound(words, k);
    let graph: Vec<(u64, u64)> = window.points().filter_map(|a| f.apply(a).filter(|&b| window.contains(b)).map(|b| (a, b))).collect();
    let full = vec![PartialInjection::from_pairs(graph.iter().copied())?];
    let mut tainted: BTreeSet<(u64, u64)> = BTreeSet::new();
    for w in words {
        let defined: Vec<u64> = window.points().filter(|&n| evaluate(w, &full, n).is_some()).collect();
        let fixed: Vec<u64> = defined.iter().copied().filter(|&n| evaluate(w, &full, n) == Some(n)).collect();
        if fixed.len() == defined.len() {
            continue;
        }
        for l in fixed {
            tainted.extend(evaluation_path(w, &full, l).used.iter().map(|u| u.pair));
        }
    }
    let mut kept = vec![PartialInjection::new()];
    let mut out = Vec::new();
    for &(a, b) in &graph {
        if out.len() == need {
            break;
        }
        if tainted.contains(&(a, b)) {
            continue;
        }
        let mut next = kept.clone();
        next[0].insert(a, b)?;
        if words.iter().all(|w| window.points().all(|n| evaluate(w, &next, n) != Some(n))) {
            kept = next;
            out.push((a, b));
        }
    }
    if out.len() < need {
        return Err(Error::SearchExhausted { bound: window.w, context: format!("only {} of {need} witness pairs", out.len()) });
    }
    Ok(out)
}

/// Every injective `p` with at most `k` pairs inside `[0, sub)`.
pub fn small_injections(k: usize, sub: u64) -> Vec<PartialInjection> {
    fn go(k: usize, sub: u64, from: u64, cur: &mut PartialInjection, out: &mut Vec<PartialInjection>) {
        out.push(cur.clone());
        if cur.len() == k {
            return;
        }
        for a in from..sub {
            for b in 0..sub {
                if !cur.in_ran(b) {
                    cur.insert(a, b).expect("fresh");
                    go(k, sub, a + 1, cur, out);
                    *cur = PartialInjection::from_pairs(cur.iter().filter(|&(x, _)| x != a)).expect("subset");
                }
            }
        }
    }
    let mut out = Vec::new();
    go(k, sub, 0, &mut PartialInjection::new(), &mut out);
    out
}

/// Some pair extends `p` very well for every word.
pub fn has_very_good_pair(p: &PartialInjection, pairs: &[(u64, u64)], words: &[Word], window: &Window) -> bool {
    let base = vec![p.clone()];
    pairs.iter().any(|&(a, b)| {
        if !p.can_insert(a, b) {
            return false;
        }
        let mut q = base.clone();
        q[0].insert(a, b).expect("checked");
        words.iter().all(|w| is_very_good_extension(&base, &q, w, window))
    })
}

/// Exhaustive check of a witness set over all `p` with `|p| <= k` in `[0, sub)`.
/// Returns the first failing `p`.
pub fn verify_witness_set(s: &[(u64, u64)], words: &[Word], k: usize, sub: u64, window: &Window) -> Option<PartialInjection> {
    small_injections(k, sub).into_iter().find(|p| !has_very_good_pair(p, s, words, window))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuessVerdict {
    pub valid: bool,
    pub mode: CheckMode,
    /// how many `p` were examined
    pub checked: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct GuessOptions {
    pub sub_window: u64,
    pub sample_budget: usize,
    pub seed: u64,
}

impl Default for GuessOptions {
    fn default() -> Self {
        GuessOptions { sub_window: 12, sample_budget: 2000, seed: 0 }
    }
}

/// Distinct `k_i`, distinct `o_i`, and every `p` with `|p| <= 3n` has a
/// pair of the guess extending it very well for all words. The last clause
/// is exhaustive over the sub-window when `3n <= 2`, sampled otherwise.
pub fn valid_guess_ag(guess: &[(u64, u64)], words: &[Word], n: usize, window: &Window, opts: &GuessOptions) -> GuessVerdict {
    let size = 3 * n;
    let exact = size <= 2;
    let mode = if exact { CheckMode::Exact } else { CheckMode::Sampled };
    if guess.is_empty() || !distinct(guess.iter().map(|x| x.0)) || !distinct(guess.iter().map(|x| x.1)) {
        return GuessVerdict { valid: false, mode, checked: 0 };
    }
    let ps = if exact { small_injections(size, opts.sub_window) } else { sample_injections(size, opts) };
    let mut checked = 0;
    for p in &ps {
        checked += 1;
        if !has_very_good_pair(p, guess, words, window) {
            return GuessVerdict { valid: false, mode, checked };
        }
    }
    GuessVerdict { valid: true, mode, checked }
}

/// Random injections of each size up to `size` inside the sub-window.
fn sample_injections(size: usize, opts: &GuessOptions) -> Vec<PartialInjection> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pts: Vec<u64> = (0..opts.sub_window).collect();
    (0..opts.sample_budget)
        .map(|i| {
            let len = (i % (size + 1)).min(pts.len());
            let dom: Vec<u64> = pts.choose_multiple(&mut rng, len).copied().collect();
            let ran: Vec<u64> = pts.choose_multiple(&mut rng, len).copied().collect();
            PartialInjection::from_pairs(dom.into_iter().zip(ran)).expect("distinct")
        })
        .collect()
}
