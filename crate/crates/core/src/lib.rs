//! Exact lattice counting on circles, spheres and one-sheeted hyperboloids,
//! cusp-form partial sums, Gauss sums attached to Eisenstein coefficients,
//! and the Mellin cutoff kernels that turn Dirichlet series into smoothed,
//! concentrated and sharp counts.

pub mod arith;
pub mod charsums;
pub mod cuspform;
pub mod error;
pub mod fit;
pub mod kernels;
pub mod lattice;
pub mod sum;

pub use error::{Error, Result};
