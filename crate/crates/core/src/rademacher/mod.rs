//! Monte Carlo Rademacher complexities and the bound calculators they are compared with.

mod bounds;
mod compare;
mod estimate;

pub use bounds::{
    bound_theorem1, bound_theorem2, bound_theorem2_em, bound_theorem2_pm, bound_theorem3, bound_theorem4_probability,
    c_lambda, l_grid, optimize_l, theorem2_em_remainder, theorem2_main_term, theorem2_pm_remainder, theorem2_remainder,
    theorem4_threshold, BoundInputs, LOptimum, Regime,
};
pub use compare::{compare_bound_vs_empirical, minimal_m, BoundReport, BoundRow, CompareConfig};
pub use estimate::{
    block_rademacher, empirical_block_rademacher, empirical_rademacher_iid, rademacher_from_values,
    sigma_prime_from_values, sigma_prime_sq, signed_sup, RademacherEstimate, SigmaPrime, MIN_SIGN_DRAWS,
    SIGN_PARTITIONS,
};
