#![allow(dead_code)]

use cofwb::words::{evaluate, Letter};
use cofwb::{FnSpec, GroupContext, PartialInjection, Window, Word};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `h` plus a fixed-point-rich involution `g`.
pub fn two_gen_ctx(w: u64) -> GroupContext {
    let swaps: Vec<(u64, u64)> = (0..w / 6).map(|k| (6 * k + 1, 6 * k + 2)).collect();
    GroupContext::new(vec![("h".into(), FnSpec::BaseH), ("g".into(), FnSpec::patch(swaps))], Window::new(w, 2).unwrap())
        .unwrap()
}

/// Random reduced word with at most `max_len` letters over `nvars`
/// variables and the context generators; always mentions a variable.
pub fn random_word(r: &mut ChaCha8Rng, ctx: &GroupContext, nvars: usize, max_len: usize) -> Word {
    let ngen = ctx.names().len();
    loop {
        let len = r.gen_range(1..=max_len + 2);
        let mut seq = Vec::new();
        for _ in 0..len {
            if ngen > 0 && r.gen_bool(0.35) {
                let g = r.gen_range(0..ngen);
                let e = *[-2, -1, 1, 2].choose(r).unwrap();
                seq.push(Letter::Group(ctx.gen_power(g, e)));
            } else {
                let v = r.gen_range(0..nvars);
                seq.push(if r.gen_bool(0.5) { Letter::x(v) } else { Letter::x_inv(v) });
            }
        }
        let w = cofwb::words::reduce(seq);
        if w.has_var() && w.len() <= max_len {
            return w;
        }
    }
}

/// Random injective map with at most `max_pairs` pairs inside `[0, span)`.
pub fn random_injection(r: &mut ChaCha8Rng, max_pairs: usize, span: u64) -> PartialInjection {
    let mut p = PartialInjection::new();
    let n = r.gen_range(0..=max_pairs);
    for _ in 0..4 * n {
        if p.len() == n {
            break;
        }
        let (a, b) = (r.gen_range(0..span), r.gen_range(0..span));
        if p.can_insert(a, b) {
            p.insert(a, b).unwrap();
        }
    }
    p
}

/// Brute-force good-extension test: every `l < W` and every split
/// `w = u^-1 z u` found by direct comparison of letters.
pub fn oracle_good(p: &[PartialInjection], q: &[PartialInjection], w: &Word, window: &Window) -> bool {
    let splits = oracle_splits(w);
    (0..window.w).all(|l| {
        if evaluate(w, q, l) != Some(l) || evaluate(w, p, l).is_some() {
            return true;
        }
        splits.iter().any(|(u, z)| match evaluate(u, q, l) {
            Some(k) => evaluate(z, p, k) == Some(k),
            None => false,
        })
    })
}

pub fn oracle_splits(w: &Word) -> Vec<(Word, Word)> {
    let n = w.len();
    let mut out = Vec::new();
    for k in 0..=n {
        if 2 * k >= n && k > 0 {
            break;
        }
        let u = w.factor(n - k, n);
        let left = w.factor(0, k);
        if left == u.inverse() {
            out.push((u, w.factor(k, n - k)));
        }
    }
    out
}
