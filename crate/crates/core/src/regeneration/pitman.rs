use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BlockSet;
use crate::chain::State;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::stats::RunningStats;

/// Ratio estimate of `pi(f)` with its block-bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitmanEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_blocks: usize,
}

fn block_pairs<F: Fn(&State) -> f64>(blocks: &BlockSet, f: &F) -> Result<Vec<(f64, f64)>> {
    if blocks.complete.is_empty() {
        return Err(Error::NoRegenerations);
    }
    Ok(blocks.complete.iter().map(|b| (b.sum(f), b.len() as f64)).collect())
}

fn ratio(pairs: &[(f64, f64)]) -> f64 {
    let (num, den) = pairs.iter().fold((0.0, 0.0), |(a, b), (s, l)| (a + s, b + l));
    num / den
}

/// Pitman occupation estimate: sum of `f'(B_k)` over the sum of `l(B_k)`, complete blocks only.
pub fn pitman_estimate<F: Fn(&State) -> f64>(blocks: &BlockSet, f: F) -> Result<f64> {
    Ok(ratio(&block_pairs(blocks, &f)?))
}

/// As [`pitman_estimate`], with a standard error from resampling complete blocks.
pub fn pitman_bootstrap<F: Fn(&State) -> f64>(
    blocks: &BlockSet,
    f: F,
    n_boot: usize,
    seed: u64,
) -> Result<PitmanEstimate> {
    let pairs = block_pairs(blocks, &f)?;
    let estimate = ratio(&pairs);
    let mut rng = stream_rng(seed, 0);
    let m = pairs.len();
    let mut reps = RunningStats::new();
    for _ in 0..n_boot {
        let (mut num, mut den) = (0.0, 0.0);
        for _ in 0..m {
            let (s, l) = pairs[rng.random_range(0..m)];
            num += s;
            den += l;
        }
        reps.push(num / den);
    }
    Ok(PitmanEstimate { estimate, std_error: reps.std_dev(), n_blocks: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regeneration::Block;

    fn blockset(lens: &[Vec<f64>]) -> BlockSet {
        BlockSet::from_complete(
            lens.iter().map(|v| Block::from_states(v.iter().map(|x| State::scalar(*x)).collect())).collect(),
        )
    }

    #[test]
    fn constant_function_gives_one() {
        let bs = blockset(&[vec![0.1, 0.2], vec![0.3], vec![0.4, 0.5, 0.6]]);
        assert_eq!(pitman_estimate(&bs, |_| 1.0).unwrap(), 1.0);
    }

    #[test]
    fn single_block_arithmetic() {
        let bs = blockset(&[vec![1.0, 2.0, 3.0]]);
        assert_eq!(pitman_estimate(&bs, |s| s.coord(0)).unwrap(), 2.0);
    }

    #[test]
    fn no_blocks_is_an_error() {
        let bs = BlockSet { initial: None, complete: vec![], trailing: None, l_n: 0 };
        let err = pitman_estimate(&bs, |_| 1.0).unwrap_err();
        assert_eq!(err.to_string(), "no regenerations observed");
    }

    #[test]
    fn bootstrap_error_vanishes_for_constant_ratio() {
        let bs = blockset(&[vec![1.0, 1.0], vec![1.0], vec![1.0, 1.0, 1.0]]);
        let est = pitman_bootstrap(&bs, |s| s.coord(0), 50, 1).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert!(est.std_error < 1e-15);
    }
}
