//! Hole probabilities of SU(m+1) Gaussian random polynomials: exact
//! combinatorial identities, asymptotic decay constants, sampling, zero
//! counting, and Monte Carlo estimation.

pub mod ensemble;
pub mod error;
pub mod exact;
pub mod indices;
pub mod montecarlo;
pub mod quadrature;
pub mod rates;
pub mod rng;
pub mod zeros;

pub use error::{Error, Result};
