//! Almost disjoint families of functions: eventually-different predicates,
//! the eventually-different forcing, the pointer-chain coding of bits and the
//! orthogonality step.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairing::{checked_pair, unpair};
use crate::perm::Evaluable;
use crate::trace::Trace;
use crate::window::Window;

/// A finite function, not necessarily injective.
pub type PartialFn = BTreeMap<u64, u64>;

impl Evaluable for PartialFn {
    fn apply(&self, n: u64) -> Option<u64> {
        self.get(&n).copied()
    }
    fn apply_inverse(&self, m: u64) -> Option<u64> {
        self.iter().find(|(_, &v)| v == m).map(|(&k, _)| k)
    }
}

/// `(agree at most threshold times, number of agreements below W)`.
pub fn eventually_different(f: &impl Evaluable, g: &impl Evaluable, window: &Window) -> (bool, u64) {
    let count = window.points().filter(|&n| f.apply(n).is_some() && f.apply(n) == g.apply(n)).count() as u64;
    (window.is_finite_count(count), count)
}

fn covered_at<E: Evaluable>(v: u64, n: u64, gs: &[E]) -> bool {
    gs.iter().any(|g| g.apply(n) == Some(v))
}

/// `(f minus the union of the gs is finite, size of that difference below W)`.
pub fn finitely_covered<E: Evaluable>(f: &impl Evaluable, gs: &[E], window: &Window) -> (bool, u64) {
    let count = window
        .points()
        .filter(|&n| match f.apply(n) {
            Some(v) => !covered_at(v, n, gs),
            None => false,
        })
        .count() as u64;
    (window.is_finite_count(count), count)
}

/// Neither family finitely covers a member of the other.
pub fn is_orthogonal<E: Evaluable, F: Evaluable>(a: &[E], b: &[F], window: &Window) -> bool {
    a.iter().all(|f| !finitely_covered(f, b, window).0) && b.iter().all(|f| !finitely_covered(f, a, window).0)
}

/// `<s, A>`: a finite function and finitely many family members to avoid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EDCondition {
    pub s: PartialFn,
    pub a: BTreeSet<usize>,
}

/// `c2 <= c1`: `s1 ⊆ s2`, `A1 ⊆ A2`, and `s2` agrees with no `g ∈ A1` outside `s1`.
pub fn ed_leq<E: Evaluable>(c2: &EDCondition, c1: &EDCondition, family: &[E]) -> bool {
    c1.s.iter().all(|(k, v)| c2.s.get(k) == Some(v))
        && c1.a.is_subset(&c2.a)
        && c1.a.iter().all(|&i| {
            c2.s.iter().all(|(&n, &v)| family[i].apply(n) != Some(v) || c1.s.get(&n) == Some(&v))
        })
}

fn avoided<E: Evaluable>(v: u64, n: u64, members: &[E]) -> bool {
    !covered_at(v, n, members)
}

fn least_avoiding<E: Evaluable>(n: u64, members: &[E]) -> u64 {
    (0..).find(|&v| avoided(v, n, members)).expect("finitely many members")
}

/// Greedy generic for the eventually-different forcing. Stage `s` lets
/// `A[s]` enter (`C_h`), meets `D_s`, meets `E_{f,·}` once for each `f ∈ F`
/// at the least fresh point, and keeps `g` total on an initial segment.
pub fn greedy_generic<E: Evaluable, F: Evaluable>(
    a: &[E],
    f: &[F],
    stages: usize,
    window: &Window,
) -> Result<(PartialFn, Trace)> {
    let mut g = PartialFn::new();
    let mut trace = Trace { stages, ..Trace::default() };
    let mut end = 0u64;
    for s in 0..stages {
        let active = &a[..a.len().min(s + 1)];
        let need = (s as u64 + 1).max(end);
        while end < need {
            if end >= window.w {
                return Err(Error::window(format!("stage {s}: D_{end}")));
            }
            let v = least_avoiding(end, active);
            g.insert(end, v);
            trace.push(s, "domain", 0, (end, v));
            end += 1;
        }
        for target in f {
            let m = (end..window.w)
                .find(|&m| target.apply(m).is_some_and(|v| avoided(v, m, active)))
                .ok_or_else(|| Error::window(format!("stage {s}: E_f has no uncovered point")))?;
            for n in end..m {
                let v = least_avoiding(n, active);
                g.insert(n, v);
                trace.push(s, "domain", 0, (n, v));
            }
            let v = target.apply(m).expect("checked");
            g.insert(m, v);
            trace.push(s, "hit", 0, (m, v));
            end = m + 1;
        }
    }
    Ok((g, trace))
}

/// Output of [`encode_vm`]: the code `g`, where decoding starts, and the end
/// of the defined initial segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VmCode {
    pub g: PartialFn,
    pub start: u64,
    pub end: u64,
    pub trace: Trace,
}

/// Pointer-chain coding of `chi` into a function eventually different from
/// every member of `a`. Stage `s`, with `n_s` the least undefined point:
/// hit each `f_i` (`i <= s`) at increasing fresh points avoiding
/// `a[0..=s]`, fill the gaps, then set
/// `g(n_s) = pair(k, pair(n_{s+1}, chi(s)))` with `k` least avoiding `a[0..=s]`.
pub fn encode_vm<E: Evaluable, F: Evaluable>(a: &[E], f: &[F], chi: &[bool], window: &Window) -> Result<VmCode> {
    let mut g = PartialFn::new();
    let mut trace = Trace { stages: chi.len(), ..Trace::default() };
    let mut n_s = 0u64;
    for (s, &bit) in chi.iter().enumerate() {
        let active = &a[..a.len().min(s + 1)];
        let mut cursor = n_s + 1;
        for target in f.iter().take(s + 1) {
            let n = (cursor..window.w)
                .find(|&n| target.apply(n).is_some_and(|v| avoided(v, n, active)))
                .ok_or_else(|| Error::window(format!("stage {s}: hitting")))?;
            let v = target.apply(n).expect("checked");
            g.insert(n, v);
            trace.push(s, "hit", 0, (n, v));
            cursor = n + 1;
        }
        let next = cursor;
        if next >= window.w {
            return Err(Error::window(format!("stage {s}: pointer")));
        }
        for l in n_s + 1..next {
            if let Entry::Vacant(e) = g.entry(l) {
                let v = least_avoiding(l, active);
                e.insert(v);
                trace.push(s, "fill", 0, (l, v));
            }
        }
        let inner = checked_pair(next, bit as u64).ok_or_else(|| Error::window("pair overflow"))?;
        let v = (0..)
            .map(|k| checked_pair(k, inner))
            .find(|v| v.is_none_or(|v| avoided(v, n_s, active)))
            .flatten()
            .ok_or_else(|| Error::window("pair overflow"))?;
        g.insert(n_s, v);
        trace.push(s, "code", 0, (n_s, v));
        n_s = next;
    }
    Ok(VmCode { g, start: 0, end: n_s, trace })
}

/// Follows the pointer chain from `start` for `bits` steps.
pub fn decode_vm(g: &impl Evaluable, start: u64, bits: usize) -> Result<Vec<bool>> {
    let mut pos = start;
    let mut out = Vec::with_capacity(bits);
    for _ in 0..bits {
        let v = g.apply(pos).ok_or_else(|| Error::MalformedCode(format!("undefined at {pos}")))?;
        let (_, inner) = unpair(v);
        let (next, b) = unpair(inner);
        if b > 1 {
            return Err(Error::MalformedCode(format!("bit {b} at {pos}")));
        }
        if next <= pos {
            return Err(Error::MalformedCode(format!("pointer {next} does not advance past {pos}")));
        }
        out.push(b == 1);
        pos = next;
    }
    Ok(out)
}

/// Value of a good-for function on one finite subset of `B`. Position `i`
/// of each tuple belongs to the `i`-th member of the (sorted) key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodForEntry {
    pub w0: BTreeSet<u64>,
    pub w1: BTreeSet<u64>,
    pub g0: Vec<usize>,
    pub g1: Vec<usize>,
}

/// A function on finite subsets of `B` (keys: sorted member indices), with
/// members of `A` referenced by index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodForWitness {
    pub entries: BTreeMap<Vec<usize>, GoodForEntry>,
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|i| big.contains(i))
}

/// Distinctness, domain agreement on `W_0`/`W_1` (below W), the range
/// clause and antitone W-sets.
pub fn is_good_for<B: Evaluable, A: Evaluable>(h: &GoodForWitness, b: &[B], a: &[A], window: &Window) -> bool {
    for (key, e) in &h.entries {
        if key.windows(2).any(|p| p[0] >= p[1]) || key.iter().any(|&i| i >= b.len()) {
            return false;
        }
        if e.g0.len() != key.len() || e.g1.len() != key.len() {
            return false;
        }
        let all: Vec<usize> = e.g0.iter().chain(e.g1.iter()).copied().collect();
        if all.iter().any(|&i| i >= a.len()) || all.iter().collect::<BTreeSet<_>>().len() != all.len() {
            return false;
        }
        for (pos, &bi) in key.iter().enumerate() {
            let agrees = |ws: &BTreeSet<u64>, ai: usize| {
                ws.iter().filter(|&&n| window.contains(n)).all(|&n| b[bi].apply(n).is_some() && b[bi].apply(n) == a[ai].apply(n))
            };
            if !agrees(&e.w0, e.g0[pos]) || !agrees(&e.w1, e.g1[pos]) {
                return false;
            }
        }
    }
    for (k0, e0) in &h.entries {
        for (k1, e1) in &h.entries {
            if is_subset(k0, k1) && (!e1.w0.is_subset(&e0.w0) || !e1.w1.is_subset(&e0.w1)) {
                return false;
            }
        }
    }
    true
}

/// Result of one orthogonality step.
#[derive(Debug, Clone, Serialize)]
pub struct OrthStep {
    pub g: PartialFn,
    /// `H` extended by every set containing the new member (index `|B|`).
    pub h: GoodForWitness,
    pub trace: Trace,
}

/// The `n`-th finite subset of `0..m`, by binary expansion.
fn subset(n: usize, m: usize) -> Vec<usize> {
    (0..m).filter(|i| n >> i & 1 == 1).collect()
}

/// Builds a new member almost disjoint from `b_prev`. `column` lists the
/// fresh members of `a_all` for this step: `column[0]` and `column[1]` are
/// copied inside the W-sets of `h`, and every `column[i]` and `f[i]` is hit
/// from stage `i` on. An entry for the empty set missing from `h` defaults to
/// the whole window.
pub fn orthogonal_step<A: Evaluable, B: Evaluable, F: Evaluable>(
    a_all: &[A],
    column: &[usize],
    b_prev: &[B],
    h: &GoodForWitness,
    f: &[F],
    stages: usize,
    window: &Window,
) -> Result<OrthStep> {
    if column.len() < 2 || column.iter().any(|&i| i >= a_all.len()) {
        return Err(Error::Invalid("column needs two valid members".into()));
    }
    let used: BTreeSet<usize> = h.entries.values().flat_map(|e| e.g0.iter().chain(&e.g1)).copied().collect();
    if column.iter().any(|i| used.contains(i)) {
        return Err(Error::Invalid("column members already used by H".into()));
    }
    let nb = b_prev.len();
    let nsets = if nb >= usize::BITS as usize - 1 { usize::MAX } else { 1usize << nb };
    let entry_for = |i: usize| -> Result<GoodForEntry> {
        let key = subset(i, nb);
        match h.entries.get(&key) {
            Some(e) => Ok(e.clone()),
            None if key.is_empty() => Ok(GoodForEntry {
                w0: window.points().collect(),
                w1: window.points().collect(),
                ..GoodForEntry::default()
            }),
            None => Err(Error::Invalid(format!("H undefined on {key:?}"))),
        }
    };
    let mut g = PartialFn::new();
    let mut trace = Trace { stages, ..Trace::default() };
    let mut picks: Vec<[BTreeSet<u64>; 2]> = Vec::new();
    let mut n_s = 0u64;
    for s in 0..stages {
        let olds = &b_prev[..nb.min(s + 1)];
        let fresh = |n: u64, v: Option<u64>| v.is_some_and(|v| avoided(v, n, olds));
        let mut cursor = n_s;
        let reach = (s + 1).min(nsets);
        let entries: Vec<GoodForEntry> = (0..reach).map(entry_for).collect::<Result<_>>()?;
        for side in 0..2 {
            let src = &a_all[column[side]];
            for (i, e) in entries.iter().enumerate() {
                let ws = if side == 0 { &e.w0 } else { &e.w1 };
                let w = ws
                    .range(cursor..window.w)
                    .copied()
                    .find(|&w| fresh(w, src.apply(w)))
                    .ok_or_else(|| Error::window(format!("stage {s}: L2 point for set {i}")))?;
                let v = src.apply(w).expect("checked");
                g.insert(w, v);
                trace.push(s, "agree", side, (w, v)).note = Some(format!("set {i}"));
                if picks.len() <= i {
                    picks.resize_with(i + 1, Default::default);
                }
                picks[i][side].insert(w);
                cursor = w + 1;
            }
        }
        for &ai in column.iter().take(s + 1) {
            let src = &a_all[ai];
            let n = (cursor..window.w)
                .find(|&n| fresh(n, src.apply(n)))
                .ok_or_else(|| Error::window(format!("stage {s}: L3 for member {ai}")))?;
            let v = src.apply(n).expect("checked");
            g.insert(n, v);
            trace.push(s, "hit", 0, (n, v));
            cursor = n + 1;
        }
        for (i, target) in f.iter().take(s + 1).enumerate() {
            let m = (cursor..window.w)
                .find(|&m| fresh(m, target.apply(m)))
                .ok_or_else(|| Error::window(format!("stage {s}: L4 for target {i}")))?;
            let v = target.apply(m).expect("checked");
            g.insert(m, v);
            trace.push(s, "hit", 1, (m, v));
            cursor = m + 1;
        }
        for n in n_s..cursor {
            if let Entry::Vacant(e) = g.entry(n) {
                let v = least_avoiding(n, olds);
                e.insert(v);
                trace.push(s, "fill", 0, (n, v));
            }
        }
        n_s = cursor;
    }
    let mut out = h.clone();
    let new_id = nb;
    for i in 0..picks.len() {
        let key = subset(i, nb);
        let old = entry_for(i)?;
        let mut e = GoodForEntry::default();
        // union over supersets keeps the W-sets antitone
        for (j, pj) in picks.iter().enumerate() {
            if is_subset(&key, &subset(j, nb)) {
                e.w0.extend(&pj[0]);
                e.w1.extend(&pj[1]);
            }
        }
        e.g0 = old.g0.iter().copied().chain([column[0]]).collect();
        e.g1 = old.g1.iter().copied().chain([column[1]]).collect();
        let mut k = key;
        k.push(new_id);
        out.entries.insert(k, e);
    }
    Ok(OrthStep { g, h: out, trace })
}
