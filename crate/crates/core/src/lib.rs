//! Exact-arithmetic toolkit for Euler continuants, periodic semi-orthogonal
//! decompositions and higher spherical twists.
//!
//! Everything is computed exactly over the rationals (or a simple extension
//! field); there is no floating point anywhere in this crate.

pub mod bilinear;
pub mod continuants;
pub mod freealg;
pub mod functorcat;
pub mod quiverk0;
pub mod report;
pub mod scalars;
pub mod scenario;

pub use report::{Check, Report};
pub use scalars::{Field, Mat, Rat};

/// Library version echoed into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
