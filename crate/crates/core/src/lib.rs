//! Regenerative simulation of Markov chains and block Rademacher complexity.
//!
//! The crate is organized bottom-up:
//!
//! - [`chain`]: states, kernels, built-in chains, exact stationary laws.
//! - [`regeneration`]: Nummelin splitting, regeneration blocks, Pitman
//!   occupation estimates and regeneration-time tail diagnostics.
//! - [`classes`]: finite function classes, covering numbers, lifting to blocks.
//! - [`rademacher`]: Monte Carlo Rademacher complexities and bound calculators.
//! - [`kde`]: kernel density estimation of the stationary law and rate experiments.
//! - [`metropolis`]: random-walk Metropolis-Hastings with a certified
//!   minorization, regeneration and quantile experiments.

pub mod chain;
pub mod classes;
pub mod error;
pub mod kde;
pub mod metropolis;
pub mod rademacher;
pub mod regeneration;
pub mod rng;
pub mod stats;

pub use chain::{simulate, ChainModel, State, Trajectory};
pub use error::{Error, Result};
pub use rng::{stream_rng, SimRng};

/// Formats a float with 17 significant digits, independent of locale.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
