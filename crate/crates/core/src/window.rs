use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The bounded universe `[0, w)` and the cutoff below which a count
/// counts as "finite".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub w: u64,
    pub threshold: u64,
}

impl Window {
    pub fn new(w: u64, threshold: u64) -> Result<Self> {
        if threshold >= w {
            return Err(Error::Invalid(format!("threshold {threshold} must be below window {w}")));
        }
        Ok(Window { w, threshold })
    }

    /// Window with threshold `w / 8`.
    pub fn of(w: u64) -> Self {
        Window::new(w, w / 8).expect("w > 0")
    }

    pub fn contains(&self, n: u64) -> bool {
        n < self.w
    }

    pub fn points(&self) -> std::ops::Range<u64> {
        0..self.w
    }

    pub fn is_finite_count(&self, count: u64) -> bool {
        count <= self.threshold
    }
}
