//! Finite, window-bounded constructions around cofinitary permutation groups
//! and almost disjoint families.
//!
//! Everything lives on a [`Window`] `[0, W)`: "finite" means "at most the
//! window threshold", and constructions run for a finite number of stages.

pub mod coding;
pub mod embedding;
pub mod error;
pub mod extension;
pub mod guessing;
pub mod madness;
pub mod orbits;
pub mod pairing;
pub mod partial;
pub mod perm;
pub mod slaloms;
pub mod trace;
pub mod window;
pub mod words;

pub use error::{Error, Result};
pub use pairing::{pair, unpair};
pub use partial::PartialInjection;
pub use perm::{base_h, fixed_points, Evaluable, FnSpec};
pub use window::Window;
pub use words::{GroupContext, GroupElem, Letter, Word};
