//! Nummelin splitting, regeneration blocks, Pitman occupation estimates and
//! regeneration-time diagnostics.
//!
//! The atom `A = S x {1}` is never materialized: step `i` is in the atom iff
//! its regeneration flag is set.

mod blocks;
mod pitman;
mod split;
mod tail;

pub use blocks::{extract_blocks, simulate_blocks, Block, BlockBoundaries, BlockSet};
pub use pitman::{pitman_bootstrap, pitman_estimate, PitmanEstimate};
pub use split::{
    simulate_split_forward, simulate_split_forward_stream, simulate_split_retrospective,
    simulate_split_retrospective_stream, split_retrospective_with_diagnostics, SplitDiagnostics, RATIO_TOL,
};
pub use tail::{regen_stats, MgfPoint, MomentPoint, RegenStats, TailConfig, TailReport};

use crate::chain::{ChainModel, State};
use crate::error::Result;
use crate::rng::child_seed;

/// Monte Carlo estimate of `E_x[tau_A^p]` for the split chain started at `x`,
/// where `tau_A` is the first regeneration time `>= 1`.
pub fn hitting_time_moment(model: &ChainModel, x: &State, p: f64, reps: usize, seed: u64) -> Result<f64> {
    let start = model.clone().with_initial(std::sync::Arc::new(crate::chain::PointMass(x.clone())));
    let mut total = 0.0;
    for r in 0..reps {
        let mut splitter = split::RetrospectiveSplitter::new(&start, child_seed(seed, r as u64), 0)?;
        let mut i = 0usize;
        loop {
            let (_, flag) = splitter.next_pair()?;
            if flag && i >= 1 {
                break;
            }
            i += 1;
        }
        total += (i as f64).powf(p);
    }
    Ok(total / reps as f64)
}
