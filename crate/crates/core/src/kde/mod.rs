//! Kernel density estimation of the stationary density from chain output.
//!
//! Deviations are centered at `E_pi[pi_hat(x)]`, not at `pi(x)`, and the
//! supremum over R^d is taken over a grid with spacing at most `h / 4`.

mod estimator;
mod kernel;
mod rate;

pub use estimator::{
    eval_grid, integrate, kde_evaluate, uniform_deviation, SmoothedTarget, SmoothingFn, SortedSample, QUADRATURE_TOL,
};
pub use kernel::{Kernel, KernelBase, KernelForm};
pub use rate::{hitting_premise, rate_experiment, RateConfig, RateReport, RateRow};
