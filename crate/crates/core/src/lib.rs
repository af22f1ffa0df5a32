//! Exact and Monte Carlo verification of Burkholder-type moment inequalities
//! for discrete and Itô-integral martingales.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! its inputs: finite probability trees are enumerated exactly, continuous-time
//! checks draw from seeded counter-based streams, so every result is
//! reproducible bit for bit.
//!
//! - [`ptree`]: finite filtered probability spaces and exact `L^p` calculus.
//! - [`ineq`]: discrete inequality evaluators, the pointwise Taylor bound and
//!   constant comparison.
//! - [`sharpness`]: extremal-ratio search over parametric martingale families.
//! - [`wiener`]: Monte Carlo evaluation of the Itô-integral inequalities.
//! - [`quad`], [`nelder_mead`], [`rng`], [`stats`]: numerical plumbing.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod ineq;
pub mod nelder_mead;
pub mod ptree;
pub mod quad;
pub mod rng;
pub mod sharpness;
pub mod stats;
pub mod wiener;

pub use error::{Error, Result};
pub use ineq::{InequalityId, InequalityReport, Verdict};
pub use ptree::{Exponent, ProbTree, TreeNode};
