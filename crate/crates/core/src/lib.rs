//! Optimal constants for the position-momentum measurement uncertainty
//! relation `d(Q,M₁)·d(P,M₂) ≥ Cħ`, with Wasserstein-1 transport between
//! probability measures and covariant phase-space observables.

// `!(x > 0.0)` is deliberate: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod basis;
pub mod covariant;
pub mod error;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
