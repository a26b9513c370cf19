//! Internal covering numbers in `L2(Q)` (centers are class members, balls are closed).

use serde::{Deserialize, Serialize};

use super::{EmpiricalMeasure, EvaluableClass};
use crate::chain::State;
use crate::error::{invalid, Error, Result};

/// Members closer than this in `L2(Q)` are treated as identical.
pub const DEDUP_TOL: f64 = 1e-12;

/// Largest number of distinct members handled by exhaustive search.
pub const EXACT_COVER_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverMode {
    Greedy,
    Exact,
}

fn within(d: f64, eps: f64) -> bool {
    d <= eps * (1.0 + 1e-9) + 1e-12
}

/// Pairwise `L2(Q)` distances of rows of a member-major value matrix.
pub fn distance_matrix(values: &[Vec<f64>], weights: &[f64]) -> Vec<Vec<f64>> {
    let m = values.len();
    let mut d = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let s: f64 =
                weights.iter().zip(values[i].iter().zip(&values[j])).map(|(w, (a, b))| w * (a - b) * (a - b)).sum();
            d[i][j] = s.sqrt();
            d[j][i] = d[i][j];
        }
    }
    d
}

/// Indices of one representative per group of members within [`DEDUP_TOL`].
fn representatives(dist: &[Vec<f64>]) -> Vec<usize> {
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..dist.len() {
        if !reps.iter().any(|&r| dist[r][i] < DEDUP_TOL) {
            reps.push(i);
        }
    }
    reps
}

/// Greedy cover: repeatedly take the first uncovered member as a center.
///
/// The centers are pairwise more than `eps` apart, so the result lies between
/// the covering number at `eps` and the covering number at `eps / 2`.
pub fn greedy_cover_size(dist: &[Vec<f64>], eps: f64) -> usize {
    let m = dist.len();
    let mut covered = vec![false; m];
    let mut centers = 0;
    for c in 0..m {
        if covered[c] {
            continue;
        }
        centers += 1;
        for j in 0..m {
            if !covered[j] && within(dist[c][j], eps) {
                covered[j] = true;
            }
        }
    }
    centers
}

/// Minimum cover by exhaustive search over subsets of distinct members.
pub fn exact_cover_size(dist: &[Vec<f64>], eps: f64) -> Result<usize> {
    let reps = representatives(dist);
    let m = reps.len();
    if m > EXACT_COVER_LIMIT {
        return Err(Error::SizeLimit(format!(
            "{m} distinct members exceed the exhaustive-search limit of {EXACT_COVER_LIMIT}; use greedy mode"
        )));
    }
    let ball: Vec<u32> = reps
        .iter()
        .map(|&i| {
            reps.iter().enumerate().filter(|(_, &j)| within(dist[i][j], eps)).fold(0u32, |acc, (b, _)| acc | 1 << b)
        })
        .collect();
    let full = (1u32 << m) - 1;
    let mut union = vec![0u32; 1 << m];
    let mut best = m;
    for mask in 1usize..1 << m {
        let low = mask.trailing_zeros() as usize;
        union[mask] = union[mask & (mask - 1)] | ball[low];
        let size = mask.count_ones() as usize;
        if union[mask] == full && size < best {
            best = size;
        }
    }
    Ok(best.max(1))
}

fn cover(dist: &[Vec<f64>], eps: f64, mode: CoverMode) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(invalid(format!("covering radius must be positive, got {eps}")));
    }
    if dist.is_empty() {
        return Err(invalid("cannot cover an empty class"));
    }
    match mode {
        CoverMode::Greedy => Ok(greedy_cover_size(dist, eps)),
        CoverMode::Exact => exact_cover_size(dist, eps),
    }
}

/// Covering number of the rows of `values` in `L2(weights)`.
pub fn covering_number_values(values: &[Vec<f64>], weights: &[f64], eps: f64, mode: CoverMode) -> Result<usize> {
    cover(&distance_matrix(values, weights), eps, mode)
}

/// Covering number `N(eps, F, L2(Q))`.
pub fn covering_number(
    class: &EvaluableClass,
    measure: &EmpiricalMeasure<State>,
    eps: f64,
    mode: CoverMode,
) -> Result<usize> {
    let points: Vec<State> = measure.points().cloned().collect();
    covering_number_values(&class.values_at(&points)?, &measure.weights(), eps, mode)
}

/// Covering numbers over a grid of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringTable {
    pub eps: Vec<f64>,
    pub greedy: Vec<usize>,
    /// Present when the class is small enough for exhaustive search.
    pub exact: Option<Vec<usize>>,
}

impl CoveringTable {
    pub fn compute(values: &[Vec<f64>], weights: &[f64], eps: &[f64]) -> Result<Self> {
        let dist = distance_matrix(values, weights);
        let greedy = eps.iter().map(|&e| cover(&dist, e, CoverMode::Greedy)).collect::<Result<_>>()?;
        let exact = if representatives(&dist).len() <= EXACT_COVER_LIMIT {
            Some(eps.iter().map(|&e| cover(&dist, e, CoverMode::Exact)).collect::<Result<_>>()?)
        } else {
            None
        };
        Ok(Self { eps: eps.to_vec(), greedy, exact })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_members_need_one_ball() {
        let values = vec![vec![1.0, 2.0]; 3];
        for eps in [1e-6, 0.1, 10.0] {
            assert_eq!(covering_number_values(&values, &[0.5, 0.5], eps, CoverMode::Greedy).unwrap(), 1);
            assert_eq!(covering_number_values(&values, &[0.5, 0.5], eps, CoverMode::Exact).unwrap(), 1);
        }
    }

    #[test]
    fn two_members_at_distance_one() {
        let values = vec![vec![0.0], vec![1.0]];
        for mode in [CoverMode::Greedy, CoverMode::Exact] {
            assert_eq!(covering_number_values(&values, &[1.0], 0.5, mode).unwrap(), 2);
            assert_eq!(covering_number_values(&values, &[1.0], 1.5, mode).unwrap(), 1);
        }
    }

    #[test]
    fn exact_beats_greedy_on_a_path() {
        // points 0, 1, 2 on a line: the middle point covers all at radius 1
        let values = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert_eq!(covering_number_values(&values, &[1.0], 1.0, CoverMode::Greedy).unwrap(), 2);
        assert_eq!(covering_number_values(&values, &[1.0], 1.0, CoverMode::Exact).unwrap(), 1);
    }

    #[test]
    fn exact_search_has_a_size_limit() {
        let values: Vec<Vec<f64>> = (0..13).map(|i| vec![i as f64]).collect();
        assert!(matches!(covering_number_values(&values, &[1.0], 0.1, CoverMode::Exact), Err(Error::SizeLimit(_))));
        assert!(covering_number_values(&values, &[1.0], 0.0, CoverMode::Greedy).is_err());
    }
}
