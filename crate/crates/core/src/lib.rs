//! Numerical core for Hankel operators on weighted Bergman spaces of the unit disc.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`weights`]: radial weights, tail masses ω̂, moments and class tests;
//! * [`geometry`]: Möbius maps, the Bergman metric, Bergman discs and r-lattices;
//! * [`quadrature`]: product rules on the disc, on Bergman discs and against dλ;
//! * [`kernels`]: reproducing kernels as moment series and normalized standard kernels;
//! * [`symbols`]: polynomial symbols in z and z̄ with exact weighted inner products;
//! * [`operators`]: Bergman projection, Hankel operators, Gram matrices, Schatten norms;
//! * [`oscillation`]: Berezin-type transform and the global/local mean oscillations.
//!
//! Everything that can be reduced to weight moments is computed exactly in the
//! moments; quadrature is used where the object is genuinely an integral over a
//! region and as an independent cross-check.

#![no_std]
// `!(x > 0.0)` is used on purpose so NaN lands on the rejecting side
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod geometry;
pub mod kernels;
pub mod operators;
pub mod oscillation;
pub mod quadrature;
pub mod special;
pub mod symbols;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Relative tolerance used by series whose caller did not pick one.
pub const DEFAULT_SERIES_TOL: f64 = 1e-14;
