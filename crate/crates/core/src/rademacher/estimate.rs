use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::State;
use crate::classes::EvaluableClass;
use crate::error::{invalid, Error, Result};
use crate::regeneration::{Block, BlockSet};
use crate::rng::stream_rng;
use crate::stats::RunningStats;

/// Minimum number of sign vectors per estimate.
pub const MIN_SIGN_DRAWS: usize = 100;

/// Sign draws are split into this many fixed partitions, each with its own
/// random stream, so results do not depend on the number of threads.
pub const SIGN_PARTITIONS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub mean: f64,
    pub mc_std_error: f64,
    pub n_sign_draws: usize,
    /// Sample size or number of blocks.
    pub n_data: usize,
}

/// Fills `signs` with independent Rademacher variables.
fn draw_signs<R: Rng>(rng: &mut R, signs: &mut [f64]) {
    for chunk in signs.chunks_mut(64) {
        let bits: u64 = rng.random();
        for (k, s) in chunk.iter_mut().enumerate() {
            *s = if bits >> k & 1 == 1 { 1.0 } else { -1.0 };
        }
    }
}

/// `sup_i |sum_j signs_j values[i][j]|`.
pub fn signed_sup(values: &[Vec<f64>], signs: &[f64]) -> f64 {
    values.iter().map(|row| row.iter().zip(signs).map(|(v, s)| v * s).sum::<f64>().abs()).fold(0.0, f64::max)
}

/// Monte Carlo estimate of `E sup_i |sum_j eps_j values[i][j]|` for a member-major value matrix.
pub fn rademacher_from_values(values: &[Vec<f64>], n_mc: usize, seed: u64) -> Result<RademacherEstimate> {
    if values.is_empty() {
        return Err(invalid("function class is empty"));
    }
    let n = values[0].len();
    if n == 0 {
        return Err(invalid("no data points"));
    }
    if n_mc < MIN_SIGN_DRAWS {
        return Err(invalid(format!("need at least {MIN_SIGN_DRAWS} sign draws, got {n_mc}")));
    }
    let parts: Vec<RunningStats> = (0..SIGN_PARTITIONS)
        .into_par_iter()
        .map(|p| {
            let draws = (p + 1) * n_mc / SIGN_PARTITIONS - p * n_mc / SIGN_PARTITIONS;
            let mut rng = stream_rng(seed, p as u64);
            let mut signs = vec![0.0; n];
            let mut stats = RunningStats::new();
            for _ in 0..draws {
                draw_signs(&mut rng, &mut signs);
                stats.push(signed_sup(values, &signs));
            }
            stats
        })
        .collect();
    let mut total = RunningStats::new();
    for p in &parts {
        total.merge(p);
    }
    Ok(RademacherEstimate { mean: total.mean(), mc_std_error: total.std_error(), n_sign_draws: n_mc, n_data: n })
}

/// `R_{n,xi}(F) = E sup_f |sum_i eps_i f(xi_i)|`.
pub fn empirical_rademacher_iid(
    class: &EvaluableClass,
    sample: &[State],
    n_mc: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if sample.is_empty() {
        return Err(invalid("sample is empty"));
    }
    rademacher_from_values(&class.values_at(sample)?, n_mc, seed)
}

/// Block version over a list of complete blocks.
pub fn block_rademacher(
    class: &EvaluableClass,
    blocks: &[Block],
    n_mc: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if blocks.is_empty() {
        return Err(Error::NoRegenerations);
    }
    rademacher_from_values(&class.block_values(blocks)?, n_mc, seed)
}

/// `R_{n,B}(F) = E sup_f |sum_k eps_k f'(B_k)|` over the complete blocks.
pub fn empirical_block_rademacher(
    class: &EvaluableClass,
    blocks: &BlockSet,
    n_mc: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    block_rademacher(class, &blocks.complete, n_mc, seed)
}

/// Plug-in `sigma'^2 = sup_f mean_k f'(B_k)^2` with the standard error of the maximizing mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPrime {
    pub value_sq: f64,
    pub std_error: f64,
    pub argmax: usize,
}

impl SigmaPrime {
    pub fn value(&self) -> f64 {
        self.value_sq.sqrt()
    }

    /// Upper estimate `sqrt(value_sq + k std_error)`.
    pub fn upper(&self, k: f64) -> f64 {
        (self.value_sq + k * self.std_error).sqrt()
    }
}

pub fn sigma_prime_from_values(values: &[Vec<f64>]) -> Result<SigmaPrime> {
    if values.is_empty() || values[0].is_empty() {
        return Err(Error::NoRegenerations);
    }
    let mut best: Option<SigmaPrime> = None;
    for (i, row) in values.iter().enumerate() {
        let s: RunningStats = row.iter().map(|v| v * v).collect();
        if best.as_ref().is_none_or(|b| s.mean() > b.value_sq) {
            let se = if s.count() > 1 { s.std_error() } else { 0.0 };
            best = Some(SigmaPrime { value_sq: s.mean(), std_error: se, argmax: i });
        }
    }
    Ok(best.expect("nonempty class"))
}

pub fn sigma_prime_sq(class: &EvaluableClass, blocks: &BlockSet) -> Result<SigmaPrime> {
    if blocks.complete.is_empty() {
        return Err(Error::NoRegenerations);
    }
    sigma_prime_from_values(&class.block_values(&blocks.complete)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_blocks(xs: &[usize]) -> Vec<Block> {
        xs.iter().map(|&x| Block::from_states(vec![State::Finite(x)])).collect()
    }

    #[test]
    fn single_sign_is_exact() {
        let class = EvaluableClass::constant(vec![1.0]).unwrap();
        let est = empirical_rademacher_iid(&class, &[State::Finite(0)], 1000, 3).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.mc_std_error, 0.0);
    }

    #[test]
    fn unit_blocks_match_iid_bit_for_bit() {
        let class = EvaluableClass::table_default(vec![vec![0.2, -0.7, 0.4], vec![0.9, 0.1, -0.3]]).unwrap();
        let xs = [0, 2, 1, 1, 0, 2, 2];
        let points: Vec<State> = xs.iter().map(|&x| State::Finite(x)).collect();
        let a = empirical_rademacher_iid(&class, &points, 500, 11).unwrap();
        let b = block_rademacher(&class, &unit_blocks(&xs), 500, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let values = vec![vec![0.3, -1.0, 0.5, 0.25]; 3];
        let a = rademacher_from_values(&values, 1000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| rademacher_from_values(&values, 1000, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn errors_on_empty_inputs() {
        let class = EvaluableClass::constant(vec![1.0]).unwrap();
        assert!(empirical_rademacher_iid(&class, &[], 1000, 0).is_err());
        assert!(empirical_rademacher_iid(&class, &[State::Finite(0)], 10, 0).is_err());
        assert!(matches!(block_rademacher(&class, &[], 1000, 0), Err(Error::NoRegenerations)));
    }

    #[test]
    fn sigma_prime_examples() {
        let one = EvaluableClass::constant(vec![1.0]).unwrap();
        let s = sigma_prime_sq(&one, &BlockSet::from_complete(unit_blocks(&[0, 0, 0]))).unwrap();
        assert_eq!(s.value_sq, 1.0);
        let identity: crate::classes::MemberFn = std::sync::Arc::new(|x: &State| x.coord(0));
        let class = EvaluableClass::custom("identity", vec![identity], 3.0, 10.0, 1.0).unwrap();
        let blocks = BlockSet::from_complete(vec![
            Block::from_states(vec![State::scalar(1.0), State::scalar(2.0)]),
            Block::from_states(vec![State::scalar(3.0)]),
        ]);
        assert_eq!(sigma_prime_sq(&class, &blocks).unwrap().value_sq, 9.0);
    }
}
