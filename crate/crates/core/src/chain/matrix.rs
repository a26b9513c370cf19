use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{State, Step, TransitionKernel};
use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;

const ROW_SUM_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-10;

/// Row-stochastic matrix of a finite chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(invalid("transition matrix has no rows"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(invalid(format!("row {i} has {} entries, expected {k}", row.len())));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(invalid(format!("row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic { row: i, sum });
            }
        }
        let cumulative = rows
            .iter()
            .map(|row| {
                row.iter()
                    .scan(0.0, |acc, p| {
                        *acc += p;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        Ok(Self { rows, cumulative })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub(crate) fn sample_row(&self, x: usize, rng: &mut SimRng) -> usize {
        let u: f64 = rng.random::<f64>() * self.cumulative[x][self.size() - 1];
        let cum = &self.cumulative[x];
        let idx = cum.partition_point(|&c| c <= u);
        // guard against rounding at the top of the row
        let mut j = idx.min(self.size() - 1);
        while self.rows[x][j] == 0.0 && j > 0 {
            j -= 1;
        }
        j
    }

    fn reachable(&self, from: usize, forward: bool) -> Vec<bool> {
        let k = self.size();
        let mut seen = vec![false; k];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for v in 0..k {
                let p = if forward { self.rows[u][v] } else { self.rows[v][u] };
                if p > 0.0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Checks strong connectivity of the transition graph.
    pub fn check_irreducible(&self) -> Result<()> {
        let fwd = self.reachable(0, true);
        if let Some(to) = fwd.iter().position(|r| !r) {
            return Err(Error::Reducible { from: 0, to });
        }
        let bwd = self.reachable(0, false);
        if let Some(from) = bwd.iter().position(|r| !r) {
            return Err(Error::Reducible { from, to: 0 });
        }
        Ok(())
    }

    /// Period of an irreducible chain: gcd of `level(u) + 1 - level(v)` over edges.
    pub fn period(&self) -> usize {
        let k = self.size();
        let mut level = vec![usize::MAX; k];
        level[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..k {
                if self.rows[u][v] > 0.0 && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for u in 0..k {
            for v in 0..k {
                if self.rows[u][v] > 0.0 && level[u] != usize::MAX && level[v] != usize::MAX {
                    let diff = (level[u] + 1).abs_diff(level[v]);
                    g = gcd(g, diff);
                }
            }
        }
        g
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Solves `pi P = pi`, `sum(pi) = 1` for an irreducible aperiodic matrix.
pub fn exact_stationary(matrix: &TransitionMatrix) -> Result<Vec<f64>> {
    matrix.check_irreducible()?;
    let period = matrix.period();
    if period != 1 {
        return Err(Error::Periodic { period });
    }
    let k = matrix.size();
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1
    let mut a = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] = matrix.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k);
    b[k - 1] = 1.0;
    let pi = a.lu().solve(&b).ok_or_else(|| Error::Singular("balance equations are singular".into()))?;
    let pi: Vec<f64> = pi.iter().copied().collect();
    let residual =
        (0..k).map(|j| ((0..k).map(|i| pi[i] * matrix.get(i, j)).sum::<f64>() - pi[j]).abs()).fold(0.0, f64::max);
    if residual > RESIDUAL_TOL {
        return Err(Error::Singular(format!("stationary residual {residual:e} exceeds tolerance")));
    }
    Ok(pi)
}

/// Kernel of a finite chain given by its matrix.
#[derive(Debug, Clone)]
pub struct FiniteKernel {
    matrix: TransitionMatrix,
}

impl FiniteKernel {
    pub fn new(matrix: TransitionMatrix) -> Self {
        Self { matrix }
    }
}

impl TransitionKernel for FiniteKernel {
    fn step(&self, x: &State, rng: &mut SimRng) -> Result<Step> {
        let l = match x {
            State::Finite(l) if *l < self.matrix.size() => *l,
            other => return Err(invalid(format!("state {other} is not a label of this chain"))),
        };
        let y = self.matrix.sample_row(l, rng);
        Ok(Step { next: State::Finite(y), density: Some(self.matrix.get(l, y)) })
    }

    fn density(&self, x: &State, y: &State) -> Option<f64> {
        match (x, y) {
            (State::Finite(a), State::Finite(b)) => Some(self.matrix.get(*a, *b)),
            _ => None,
        }
    }

    fn matrix(&self) -> Option<&TransitionMatrix> {
        Some(&self.matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: Vec<Vec<f64>>) -> TransitionMatrix {
        TransitionMatrix::new(rows).unwrap()
    }

    #[test]
    fn symmetric_two_state() {
        let pi = exact_stationary(&m(vec![vec![0.5, 0.5], vec![0.5, 0.5]])).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-12 && (pi[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_two_state_matches_balance_equation() {
        // pi0 * 0.5 = pi1 * 0.2  =>  pi = (2/7, 5/7)
        let pi = exact_stationary(&m(vec![vec![0.5, 0.5], vec![0.2, 0.8]])).unwrap();
        assert!((pi[0] - 2.0 / 7.0).abs() < 1e-12);
        assert!((pi[1] - 5.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_matrix_is_rejected() {
        let err = exact_stationary(&m(vec![vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::Periodic { period: 2 }));
        assert!(err.to_string().contains("period"));
    }

    #[test]
    fn reducible_matrix_is_rejected() {
        let err = exact_stationary(&m(vec![vec![1.0, 0.0], vec![0.5, 0.5]])).unwrap_err();
        assert!(matches!(err, Error::Reducible { .. }));
    }

    #[test]
    fn rows_must_be_stochastic() {
        assert!(matches!(
            TransitionMatrix::new(vec![vec![0.5, 0.6], vec![0.5, 0.5]]),
            Err(Error::NotStochastic { row: 0, .. })
        ));
        assert!(TransitionMatrix::new(vec![vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn three_cycle_with_self_loop_is_aperiodic() {
        let mat = m(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.5, 0.0, 0.5]]);
        assert_eq!(mat.period(), 1);
        let pi = exact_stationary(&mat).unwrap();
        let s: f64 = pi.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}
