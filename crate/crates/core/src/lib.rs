//! Numerical laboratory for the time-fractional (Caputo) Fisher-KPP equation
//!
//! ```text
//! ∂_t^α u = u_xx + f(u),   0 < α < 1.
//! ```
//!
//! The crate covers three strands: the L1 finite-difference simulation of
//! invading fronts ([`fkpp`], [`front`]), the linear analysis of asymptotic
//! traveling waves ([`dispersion`]), and the construction of wave profiles by
//! monotone iteration on an integral equation ([`wavekernels`],
//! [`waveprofile`]). [`specfun`] supplies the Gamma and Mittag-Leffler
//! functions used as oracles.

// `!(x > 0.0)` is deliberate: it rejects NaN along with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caputo;
pub mod dispersion;
mod error;
pub mod fkpp;
pub mod front;
pub mod quad;
pub mod specfun;
pub mod tridiag;
pub mod wavekernels;
pub mod waveprofile;
pub mod weyl;

pub use error::{Error, Result};
