//! Evaluable functions on the naturals: finite tables, swap patches,
//! piecewise affine rules and the base permutation `h`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partial::PartialInjection;
use crate::window::Window;

/// Forward and inverse application, each possibly undefined.
pub trait Evaluable {
    fn apply(&self, n: u64) -> Option<u64>;
    fn apply_inverse(&self, m: u64) -> Option<u64>;
}

impl Evaluable for PartialInjection {
    fn apply(&self, n: u64) -> Option<u64> {
        self.get(n)
    }
    fn apply_inverse(&self, m: u64) -> Option<u64> {
        self.get_inv(m)
    }
}

impl<T: Evaluable + ?Sized> Evaluable for &T {
    fn apply(&self, n: u64) -> Option<u64> {
        (**self).apply(n)
    }
    fn apply_inverse(&self, m: u64) -> Option<u64> {
        (**self).apply_inverse(m)
    }
}

/// `h(0) = 1`, `h(n) = n - 2` for even `n > 0`, `h(n) = n + 2` for odd `n`.
pub fn base_h(n: u64) -> u64 {
    if n == 0 {
        1
    } else if n.is_multiple_of(2) {
        n - 2
    } else {
        n + 2
    }
}

pub fn base_h_inv(m: u64) -> u64 {
    if m == 1 {
        0
    } else if m % 2 == 1 {
        m - 2
    } else {
        m + 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// `n -> mul * n + add` on the points selected by the guard.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<Parity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<u64>,
    /// exclusive upper bound
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub below: Option<u64>,
    pub mul: u64,
    #[serde(default)]
    pub add: i64,
}

impl Clause {
    pub fn affine(mul: u64, add: i64) -> Self {
        Clause { parity: None, min: None, below: None, mul, add }
    }

    pub fn matches(&self, n: u64) -> bool {
        let parity_ok = match self.parity {
            None => true,
            Some(Parity::Even) => n.is_multiple_of(2),
            Some(Parity::Odd) => n % 2 == 1,
        };
        parity_ok && self.min.is_none_or(|m| n >= m) && self.below.is_none_or(|b| n < b)
    }

    fn eval(&self, n: u64) -> Option<u64> {
        let v = (self.mul as i128) * (n as i128) + self.add as i128;
        u64::try_from(v).ok()
    }
}

/// A function given by one of the supported spec kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub enum FnSpec {
    /// finite table; undefined off its entries
    Table { fwd: BTreeMap<u64, u64>, bwd: BTreeMap<u64, u64> },
    /// identity except on the moved points
    Patch { fwd: BTreeMap<u64, u64>, bwd: BTreeMap<u64, u64>, swaps: Vec<[u64; 2]> },
    /// first matching clause wins; `patch` overrides clauses
    Rule { clauses: Vec<Clause>, patch: BTreeMap<u64, u64> },
    BaseH,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawSpec {
    Table {
        entries: Vec<[u64; 2]>,
    },
    Patch {
        swaps: Vec<[u64; 2]>,
    },
    Rule {
        clauses: Vec<Clause>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        patch: Vec<[u64; 2]>,
    },
    BaseH,
}

impl TryFrom<RawSpec> for FnSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        match raw {
            RawSpec::Table { entries } => FnSpec::table(entries.into_iter().map(|[a, b]| (a, b))),
            RawSpec::Patch { swaps } => Ok(FnSpec::patch(swaps.into_iter().map(|[a, b]| (a, b)))),
            RawSpec::Rule { clauses, patch } => {
                let mut map = BTreeMap::new();
                for [a, b] in patch {
                    if map.insert(a, b).is_some() {
                        return Err(Error::Parse(format!("rule patch lists {a} twice")));
                    }
                }
                Ok(FnSpec::Rule { clauses, patch: map })
            }
            RawSpec::BaseH => Ok(FnSpec::BaseH),
        }
    }
}

impl From<FnSpec> for RawSpec {
    fn from(f: FnSpec) -> Self {
        match f {
            FnSpec::Table { fwd, .. } => RawSpec::Table { entries: fwd.into_iter().map(|(a, b)| [a, b]).collect() },
            FnSpec::Patch { swaps, .. } => RawSpec::Patch { swaps },
            FnSpec::Rule { clauses, patch } => {
                RawSpec::Rule { clauses, patch: patch.into_iter().map(|(a, b)| [a, b]).collect() }
            }
            FnSpec::BaseH => RawSpec::BaseH,
        }
    }
}

impl FnSpec {
    /// A table need not be injective; its inverse then returns the least preimage.
    pub fn table<I: IntoIterator<Item = (u64, u64)>>(entries: I) -> Result<Self> {
        let mut fwd = BTreeMap::new();
        let mut bwd = BTreeMap::new();
        for (a, b) in entries {
            if let Some(old) = fwd.insert(a, b) {
                if old != b {
                    return Err(Error::Parse(format!("table maps {a} twice")));
                }
            }
            let e = bwd.entry(b).or_insert(a);
            *e = (*e).min(a);
        }
        Ok(FnSpec::Table { fwd, bwd })
    }

    pub fn from_partial(p: &PartialInjection) -> Self {
        FnSpec::table(p.iter()).expect("partial injection is functional")
    }

    /// Product of the transpositions, applied left to right.
    pub fn patch<I: IntoIterator<Item = (u64, u64)>>(swaps: I) -> Self {
        let swaps: Vec<[u64; 2]> = swaps.into_iter().map(|(a, b)| [a, b]).collect();
        let mut fwd: BTreeMap<u64, u64> = BTreeMap::new();
        for &[a, b] in &swaps {
            // current images of a and b swap places
            let pa = fwd.iter().find(|(_, &v)| v == a).map(|(&k, _)| k).unwrap_or(a);
            let pb = fwd.iter().find(|(_, &v)| v == b).map(|(&k, _)| k).unwrap_or(b);
            fwd.insert(pa, b);
            fwd.insert(pb, a);
        }
        fwd.retain(|k, v| k != v);
        let bwd = fwd.iter().map(|(&a, &b)| (b, a)).collect();
        FnSpec::Patch { fwd, bwd, swaps }
    }

    pub fn affine(mul: u64, add: i64) -> Self {
        FnSpec::Rule { clauses: vec![Clause::affine(mul, add)], patch: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        FnSpec::affine(1, 0)
    }

    pub fn identity_table(w: u64) -> Self {
        FnSpec::table((0..w).map(|n| (n, n))).expect("identity is functional")
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Checks the permutation invariants on `[0, W)`.
    pub fn is_injective_on(&self, window: &Window) -> bool {
        let mut seen = BTreeSet::new();
        for n in window.points() {
            if let Some(m) = self.apply(n) {
                if !seen.insert(m) || self.apply_inverse(m) != Some(n) {
                    return false;
                }
            }
        }
        true
    }
}

impl Evaluable for FnSpec {
    fn apply(&self, n: u64) -> Option<u64> {
        match self {
            FnSpec::Table { fwd, .. } => fwd.get(&n).copied(),
            FnSpec::Patch { fwd, .. } => Some(fwd.get(&n).copied().unwrap_or(n)),
            FnSpec::Rule { clauses, patch } => {
                if let Some(&v) = patch.get(&n) {
                    return Some(v);
                }
                clauses.iter().find(|c| c.matches(n)).and_then(|c| c.eval(n))
            }
            FnSpec::BaseH => Some(base_h(n)),
        }
    }

    fn apply_inverse(&self, m: u64) -> Option<u64> {
        match self {
            FnSpec::Table { bwd, .. } => bwd.get(&m).copied(),
            FnSpec::Patch { fwd, bwd, .. } => match bwd.get(&m) {
                Some(&n) => Some(n),
                None if fwd.contains_key(&m) => None,
                None => Some(m),
            },
            FnSpec::Rule { clauses, patch } => {
                if let Some((&n, _)) = patch.iter().find(|(_, &v)| v == m) {
                    return Some(n);
                }
                let mut best: Option<u64> = None;
                for c in clauses {
                    for n in clause_preimages(c, m) {
                        if !patch.contains_key(&n) && self.apply(n) == Some(m) {
                            best = Some(best.map_or(n, |b| b.min(n)));
                        }
                    }
                }
                best
            }
            FnSpec::BaseH => Some(base_h_inv(m)),
        }
    }
}

fn clause_preimages(c: &Clause, m: u64) -> Vec<u64> {
    if c.mul == 0 {
        if c.add < 0 || c.add as u64 != m {
            return vec![];
        }
        // constant clause: only finite guards are invertible
        return match c.below {
            Some(b) => (c.min.unwrap_or(0)..b).filter(|&n| c.matches(n)).take(1).collect(),
            None => vec![],
        };
    }
    let diff = m as i128 - c.add as i128;
    if diff < 0 || diff % c.mul as i128 != 0 {
        return vec![];
    }
    let n = (diff / c.mul as i128) as u64;
    if c.matches(n) { vec![n] } else { vec![] }
}

/// `{n < W : f(n) = n}`.
pub fn fixed_points<F: Evaluable + ?Sized>(f: &F, window: &Window) -> Vec<u64> {
    window.points().filter(|&n| f.apply(n) == Some(n)).collect()
}
