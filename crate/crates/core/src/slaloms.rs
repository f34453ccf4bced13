//! Localization conditions, slaloms and a greedy localizer on the window.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Evaluable;
use crate::trace::Trace;
use crate::window::Window;

pub type Sets = BTreeMap<u64, BTreeSet<u64>>;

/// `phi(n)` for `n < w`, stored sparsely.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slalom {
    pub w: u64,
    pub phi: Sets,
}

static EMPTY: BTreeSet<u64> = BTreeSet::new();

impl Slalom {
    pub fn get(&self, n: u64) -> &BTreeSet<u64> {
        self.phi.get(&n).unwrap_or(&EMPTY)
    }

    /// `|phi(n)| <= n` for every `n < w`.
    pub fn width_ok(&self) -> bool {
        self.phi.iter().all(|(&n, s)| s.len() as u64 <= n)
    }
}

/// Least `m < W` with `f(n) ∈ phi(n)` for all `n` in `[m, W)`.
pub fn localizes(s: &Slalom, f: &(impl Evaluable + ?Sized), window: &Window) -> (bool, Option<u64>) {
    let mut m = window.w;
    while m > 0 && f.apply(m - 1).is_some_and(|v| s.get(m - 1).contains(&v)) {
        m -= 1;
    }
    if m < window.w {
        (true, Some(m))
    } else {
        (false, None)
    }
}

/// `(sigma, phi)` with `|sigma(i)| <= i` and `|phi(n)| <= lh(sigma)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocCondition {
    pub sigma: Vec<BTreeSet<u64>>,
    pub phi: Sets,
}

impl LocCondition {
    pub fn lh(&self) -> usize {
        self.sigma.len()
    }

    pub fn phi_at(&self, n: u64) -> &BTreeSet<u64> {
        self.phi.get(&n).unwrap_or(&EMPTY)
    }

    pub fn is_valid(&self) -> bool {
        self.sigma.iter().enumerate().all(|(i, s)| s.len() <= i) && self.phi.values().all(|s| s.len() <= self.lh())
    }

    /// The density move for `f`: append `phi(lh)` to `sigma` and add the
    /// graph of `f` to `phi` (on the window).
    pub fn extend_with(&self, f: Option<&dyn Evaluable>, window: &Window) -> LocCondition {
        let mut sigma = self.sigma.clone();
        sigma.push(self.phi_at(self.lh() as u64).clone());
        let mut phi = self.phi.clone();
        if let Some(f) = f {
            for n in window.points() {
                if let Some(v) = f.apply(n) {
                    phi.entry(n).or_default().insert(v);
                }
            }
        }
        LocCondition { sigma, phi }
    }

    /// The slalom this condition decides on the window: `sigma` below its
    /// length, `phi` from there on.
    pub fn slalom(&self, window: &Window) -> Slalom {
        let lh = self.lh() as u64;
        let mut phi: Sets = self.sigma.iter().enumerate().filter(|(_, s)| !s.is_empty()).map(|(i, s)| (i as u64, s.clone())).collect();
        phi.extend(self.phi.range(lh..window.w).filter(|(_, s)| !s.is_empty()).map(|(&n, s)| (n, s.clone())));
        Slalom { w: window.w, phi }
    }
}

/// `q <= p`: `q` is stronger.
pub fn loc_leq(q: &LocCondition, p: &LocCondition) -> bool {
    let (ls, lt) = (p.lh(), q.lh());
    lt >= ls
        && q.sigma[..ls] == p.sigma[..]
        && (ls..lt).all(|j| p.phi_at(j as u64).is_subset(&q.sigma[j]))
        && p.phi.iter().all(|(&j, s)| s.is_subset(q.phi_at(j)))
}

#[derive(Debug, Clone, Serialize)]
pub struct Localization {
    pub slalom: Slalom,
    pub trace: Trace,
    /// `lh(sigma)` right after each real was added
    pub ingestion: Vec<usize>,
    /// every step was an extension in the order
    pub steps_ordered: bool,
    pub condition: LocCondition,
}

/// One density move per stage, adding real `s` at stage `s`.
pub fn greedy_localizer<F: Evaluable>(reals: &[F], stages: usize, window: &Window) -> Result<Localization> {
    if reals.len() > stages {
        return Err(Error::CapacityExceeded(format!("{} reals need {} stages, have {stages}", reals.len(), reals.len())));
    }
    if stages as u64 > window.w {
        return Err(Error::window("more stages than window points"));
    }
    let mut p = LocCondition::default();
    let mut trace = Trace { stages, ..Trace::default() };
    let mut ingestion = Vec::new();
    let mut steps_ordered = true;
    for s in 0..stages {
        let f = reals.get(s).map(|f| f as &dyn Evaluable);
        let q = p.extend_with(f, window);
        steps_ordered &= loc_leq(&q, &p) && q.is_valid();
        let rec = trace.push(s, if f.is_some() { "ingest" } else { "extend" }, 0, (q.lh() as u64, s as u64));
        if f.is_some() {
            rec.note = Some(format!("real {s}"));
            ingestion.push(q.lh());
        }
        p = q;
    }
    Ok(Localization { slalom: p.slalom(window), trace, ingestion, steps_ordered, condition: p })
}

/// Least `l` bounding every `|S(n)|`.
pub fn width_bound(s: &Sets) -> usize {
    s.values().map(BTreeSet::len).max().unwrap_or(0)
}

/// The dense part of the bounded-width forcing: `|S(i)| = i` below the
/// width bound, and `|S(n)| <= n` everywhere.
pub fn in_dense_part(s: &Sets, window: &Window) -> bool {
    let l = width_bound(s) as u64;
    s.iter().all(|(&n, v)| v.len() as u64 <= n)
        && (0..l.min(window.w)).all(|i| s.get(&i).map_or(0, BTreeSet::len) as u64 == i)
}

/// `S |-> (S restricted below l, S)` with `l` the width bound.
pub fn embed_bounded(s: &Sets) -> LocCondition {
    let l = width_bound(s);
    let sigma = (0..l as u64).map(|i| s.get(&i).cloned().unwrap_or_default()).collect();
    LocCondition { sigma, phi: s.iter().filter(|(_, v)| !v.is_empty()).map(|(&n, v)| (n, v.clone())).collect() }
}

/// Order of the bounded-width forcing: `S <= S'` iff `S'(n) ⊆ S(n)` for all `n`.
pub fn bounded_leq(s: &Sets, s2: &Sets) -> bool {
    s2.iter().all(|(n, v)| v.is_subset(s.get(n).unwrap_or(&EMPTY)))
}
