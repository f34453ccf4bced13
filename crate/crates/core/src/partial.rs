use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite injective partial map on the naturals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct PartialInjection {
    fwd: BTreeMap<u64, u64>,
    bwd: BTreeMap<u64, u64>,
}

impl PartialInjection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Result<Self> {
        let mut p = Self::new();
        for (a, b) in pairs {
            if p.get(a) == Some(b) {
                continue;
            }
            p.insert(a, b)?;
        }
        Ok(p)
    }

    pub fn get(&self, n: u64) -> Option<u64> {
        self.fwd.get(&n).copied()
    }

    pub fn get_inv(&self, m: u64) -> Option<u64> {
        self.bwd.get(&m).copied()
    }

    pub fn in_dom(&self, n: u64) -> bool {
        self.fwd.contains_key(&n)
    }

    pub fn in_ran(&self, m: u64) -> bool {
        self.bwd.contains_key(&m)
    }

    /// Adds `(a, b)`; fails if that would break functionality or injectivity.
    pub fn insert(&mut self, a: u64, b: u64) -> Result<()> {
        if self.in_dom(a) {
            return Err(Error::Invalid(format!("{a} already in domain")));
        }
        if self.in_ran(b) {
            return Err(Error::Invalid(format!("{b} already in range")));
        }
        self.fwd.insert(a, b);
        self.bwd.insert(b, a);
        Ok(())
    }

    pub fn can_insert(&self, a: u64, b: u64) -> bool {
        !self.in_dom(a) && !self.in_ran(b)
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.fwd.iter().map(|(&a, &b)| (a, b))
    }

    pub fn dom(&self) -> impl Iterator<Item = u64> + '_ {
        self.fwd.keys().copied()
    }

    pub fn ran(&self) -> impl Iterator<Item = u64> + '_ {
        self.bwd.keys().copied()
    }

    pub fn invert(&self) -> Self {
        PartialInjection { fwd: self.bwd.clone(), bwd: self.fwd.clone() }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.iter().all(|(a, b)| other.get(a) == Some(b))
    }

    /// Least natural outside the domain.
    pub fn least_missing_dom(&self) -> u64 {
        least_missing(self.fwd.keys().copied())
    }

    pub fn least_missing_ran(&self) -> u64 {
        least_missing(self.bwd.keys().copied())
    }

    /// Largest number mentioned in domain or range.
    pub fn max_point(&self) -> Option<u64> {
        let d = self.fwd.keys().next_back().copied();
        let r = self.bwd.keys().next_back().copied();
        d.max(r)
    }

    /// Re-checks both invariants from scratch.
    pub fn is_valid(&self) -> bool {
        self.fwd.len() == self.bwd.len() && self.iter().all(|(a, b)| self.get_inv(b) == Some(a))
    }
}

fn least_missing(sorted: impl Iterator<Item = u64>) -> u64 {
    let mut next = 0;
    for n in sorted {
        if n != next {
            break;
        }
        next += 1;
    }
    next
}

pub fn apply_partial(p: &PartialInjection, n: u64) -> Option<u64> {
    p.get(n)
}

pub fn invert(p: &PartialInjection) -> PartialInjection {
    p.invert()
}

impl Serialize for PartialInjection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[u64; 2]> = self.iter().map(|(a, b)| [a, b]).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartialInjection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<[u64; 2]> = Vec::deserialize(d)?;
        PartialInjection::from_pairs(v.into_iter().map(|[a, b]| (a, b))).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi(pairs: &[(u64, u64)]) -> PartialInjection {
        PartialInjection::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn lookup_and_invert() {
        let p = pi(&[(0, 1)]);
        assert_eq!(apply_partial(&p, 0), Some(1));
        assert_eq!(apply_partial(&p, 5), None);
        assert_eq!(apply_partial(&invert(&p), 1), Some(0));
        assert_eq!(invert(&pi(&[])), pi(&[]));
        assert_eq!(invert(&pi(&[(0, 1), (2, 3)])), pi(&[(1, 0), (3, 2)]));
        assert_eq!(invert(&pi(&[(5, 5)])), pi(&[(5, 5)]));
    }

    #[test]
    fn rejects_collisions() {
        let mut p = pi(&[(0, 1)]);
        assert!(p.insert(0, 2).is_err());
        assert!(p.insert(3, 1).is_err());
        assert!(p.insert(1, 0).is_ok());
        assert!(p.is_valid());
    }

    #[test]
    fn least_missing_points() {
        let p = pi(&[(0, 3), (1, 0), (3, 1)]);
        assert_eq!(p.least_missing_dom(), 2);
        assert_eq!(p.least_missing_ran(), 2);
        assert_eq!(p.max_point(), Some(3));
    }
}
