//! Numerical checks of the covering-number comparisons between a class and
//! its lift to blocks:
//!
//! - full lift: `N(eps ||l||_{L2(Q')}, F', L2(Q')) <= N(eps, F, L2(Q))`;
//! - truncated lift: `N(eps L, F' 1{l <= L}, L2(Q')) <= N(eps, F, L2(Q~))`.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::covering::{distance_matrix, exact_cover_size, greedy_cover_size};
use super::{lift_measure, lift_measure_truncated, CoverMode, EmpiricalMeasure, EvaluableClass, LiftMode, LiftedClass};
use crate::chain::State;
use crate::error::{invalid, Error, Result};
use crate::format_float;
use crate::regeneration::Block;
use crate::rng::{stream_rng, SimRng};

/// Longest block accepted in exact mode.
pub const MAX_EXACT_BLOCK_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    /// Greedy bounds were not tight enough to decide.
    Inconclusive,
}

/// Both sides of a covering comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub verdict: Verdict,
    /// Exact left side, or its greedy upper bound.
    pub lhs: usize,
    /// Exact right side, or a lower bound on it.
    pub rhs: usize,
    pub lhs_radius: f64,
    pub rhs_radius: f64,
    pub mode: CoverMode,
}

impl LemmaCheck {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

fn check_exact_limits(q: &EmpiricalMeasure<Block>) -> Result<()> {
    if let Some(b) = q.points().find(|b| b.len() > MAX_EXACT_BLOCK_LEN) {
        return Err(Error::SizeLimit(format!(
            "block of length {} exceeds {MAX_EXACT_BLOCK_LEN} in exact mode; use greedy mode",
            b.len()
        )));
    }
    Ok(())
}

fn compare(
    lhs_values: &[Vec<f64>],
    lhs_weights: &[f64],
    lhs_radius: f64,
    rhs: Option<(&[Vec<f64>], &[f64])>,
    rhs_radius: f64,
    mode: CoverMode,
) -> Result<LemmaCheck> {
    let lhs_dist = distance_matrix(lhs_values, lhs_weights);
    let rhs_dist = rhs.map(|(v, w)| distance_matrix(v, w));
    let (lhs, rhs, verdict) = match mode {
        CoverMode::Exact => {
            let lhs = exact_cover_size(&lhs_dist, lhs_radius)?;
            let rhs = rhs_dist.as_deref().map_or(Ok(1), |d| exact_cover_size(d, rhs_radius))?;
            (lhs, rhs, if lhs <= rhs { Verdict::Holds } else { Verdict::Violated })
        }
        CoverMode::Greedy => {
            let lhs = greedy_cover_size(&lhs_dist, lhs_radius);
            // greedy at twice the radius never exceeds the exact value at the radius
            let rhs = rhs_dist.as_deref().map_or(1, |d| {
                exact_cover_size(d, rhs_radius).unwrap_or_else(|_| greedy_cover_size(d, 2.0 * rhs_radius))
            });
            (lhs, rhs, if lhs <= rhs { Verdict::Holds } else { Verdict::Inconclusive })
        }
    };
    Ok(LemmaCheck { verdict, lhs, rhs, lhs_radius, rhs_radius, mode })
}

fn points_and_weights(m: &EmpiricalMeasure<State>) -> (Vec<State>, Vec<f64>) {
    (m.points().cloned().collect(), m.weights())
}

fn blocks_of(q: &EmpiricalMeasure<Block>) -> Vec<Block> {
    q.points().cloned().collect()
}

/// Compares covering numbers of the full lift and of the base class under the lifted measure.
pub fn verify_lemma1(
    class: &EvaluableClass,
    q: &EmpiricalMeasure<Block>,
    eps: f64,
    mode: CoverMode,
) -> Result<LemmaCheck> {
    if !(eps > 0.0) {
        return Err(invalid("covering radius must be positive"));
    }
    if mode == CoverMode::Exact {
        check_exact_limits(q)?;
    }
    let blocks = blocks_of(q);
    let lhs_values = LiftedClass::new(class.clone(), LiftMode::Full)?.values(&blocks)?;
    let (points, weights) = points_and_weights(&lift_measure(q)?);
    let rhs_values = class.values_at(&points)?;
    compare(&lhs_values, &q.weights(), eps * q.length_norm(), Some((&rhs_values, &weights)), eps, mode)
}

/// Compares covering numbers of the truncated lift and of the base class under the truncated lifted measure.
pub fn verify_lemma2(
    class: &EvaluableClass,
    q: &EmpiricalMeasure<Block>,
    eps: f64,
    l_max: f64,
    mode: CoverMode,
) -> Result<LemmaCheck> {
    if !(eps > 0.0) {
        return Err(invalid("covering radius must be positive"));
    }
    if !(l_max >= 0.0) {
        return Err(invalid("truncation level must be nonnegative"));
    }
    if mode == CoverMode::Exact {
        check_exact_limits(q)?;
    }
    if l_max < 1.0 || !q.points().any(|b| b.len() as f64 <= l_max) {
        // every lifted member is the zero function
        return Ok(LemmaCheck {
            verdict: Verdict::Holds,
            lhs: 1,
            rhs: 1,
            lhs_radius: eps * l_max,
            rhs_radius: eps,
            mode,
        });
    }
    let blocks = blocks_of(q);
    let lhs_values = LiftedClass::new(class.clone(), LiftMode::Truncated(l_max))?.values(&blocks)?;
    let (points, weights) = points_and_weights(&lift_measure_truncated(q, l_max)?);
    let rhs_values = class.values_at(&points)?;
    compare(&lhs_values, &q.weights(), eps * l_max, Some((&rhs_values, &weights)), eps, mode)
}

/// Largest value of `Q'(f'^2) - Q(f^2) Q'(l^2)` over the class (nonpositive by Cauchy-Schwarz).
pub fn jensen_gap(class: &EvaluableClass, q: &EmpiricalMeasure<Block>) -> Result<f64> {
    let blocks = blocks_of(q);
    let lifted = class.block_values(&blocks)?;
    let lifted_measure = lift_measure(q)?;
    let (points, weights) = points_and_weights(&lifted_measure);
    let base = class.values_at(&points)?;
    let l2 = q.length_second_moment();
    let qw = q.weights();
    Ok(lifted
        .iter()
        .zip(&base)
        .map(|(fp, f)| {
            let lhs: f64 = fp.iter().zip(&qw).map(|(v, w)| w * v * v).sum();
            let qf2: f64 = f.iter().zip(&weights).map(|(v, w)| w * v * v).sum();
            lhs - qf2 * l2
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// A random small instance: a table class on at most 4 labels and a measure on at most 5 short blocks.
#[derive(Debug, Clone)]
pub struct LemmaInstance {
    pub class: EvaluableClass,
    pub measure: EmpiricalMeasure<Block>,
    pub truncation: f64,
}

pub fn random_lemma_instance(rng: &mut SimRng) -> Result<LemmaInstance> {
    let states = rng.random_range(1..=4usize);
    let members = rng.random_range(1..=6usize);
    let n_blocks = rng.random_range(1..=5usize);
    let values: Vec<Vec<f64>> =
        (0..members).map(|_| (0..states).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
    let atoms = (0..n_blocks)
        .map(|_| {
            let len = rng.random_range(1..=MAX_EXACT_BLOCK_LEN);
            let b = Block::from_states((0..len).map(|_| State::Finite(rng.random_range(0..states))).collect());
            (b, rng.random_range(0.05..1.0))
        })
        .collect();
    Ok(LemmaInstance {
        class: EvaluableClass::table_default(values)?,
        measure: EmpiricalMeasure::normalized(atoms)?,
        truncation: 0.5 * rng.random_range(1..=10u32) as f64,
    })
}

/// One line of the randomized verification CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub instance: usize,
    pub lemma: u8,
    pub eps: f64,
    /// Truncation level (second lemma only).
    pub truncation: Option<f64>,
    pub lhs: usize,
    pub rhs: usize,
    pub pass: bool,
}

/// Checks both comparisons with exact covering numbers on `n_trials` random instances.
pub fn verify_random_instances(n_trials: usize, eps_grid: &[f64], seed: u64) -> Result<Vec<InstanceRow>> {
    let per_instance: Vec<Vec<InstanceRow>> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let inst = random_lemma_instance(&mut rng)?;
            let mut rows = Vec::with_capacity(2 * eps_grid.len());
            for &eps in eps_grid {
                let c = verify_lemma1(&inst.class, &inst.measure, eps, CoverMode::Exact)?;
                rows.push(InstanceRow {
                    instance: i,
                    lemma: 1,
                    eps,
                    truncation: None,
                    lhs: c.lhs,
                    rhs: c.rhs,
                    pass: c.holds(),
                });
            }
            for &eps in eps_grid {
                let c = verify_lemma2(&inst.class, &inst.measure, eps, inst.truncation, CoverMode::Exact)?;
                rows.push(InstanceRow {
                    instance: i,
                    lemma: 2,
                    eps,
                    truncation: Some(inst.truncation),
                    lhs: c.lhs,
                    rhs: c.rhs,
                    pass: c.holds(),
                });
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}

pub fn write_instances_csv<W: Write>(rows: &[InstanceRow], mut w: W) -> Result<()> {
    writeln!(w, "instance,lemma,eps,L,lhs,rhs,pass")?;
    for r in rows {
        let l = r.truncation.map(format_float).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.instance,
            r.lemma,
            format_float(r.eps),
            l,
            r.lhs,
            r.rhs,
            u8::from(r.pass)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks(spec: &[&[usize]]) -> Vec<Block> {
        spec.iter().map(|b| Block::from_states(b.iter().map(|&x| State::Finite(x)).collect())).collect()
    }

    #[test]
    fn singleton_class() {
        let class = EvaluableClass::table_default(vec![vec![0.3, -0.2]]).unwrap();
        let q = EmpiricalMeasure::uniform(blocks(&[&[0, 1], &[1]])).unwrap();
        let c = verify_lemma1(&class, &q, 0.1, CoverMode::Exact).unwrap();
        assert_eq!((c.lhs, c.rhs, c.verdict), (1, 1, Verdict::Holds));
    }

    #[test]
    fn unit_blocks_give_equal_sides() {
        let class = EvaluableClass::table_default(vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let q = EmpiricalMeasure::uniform(blocks(&[&[0], &[1]])).unwrap();
        for eps in [0.1, 0.4, 0.8] {
            let c = verify_lemma1(&class, &q, eps, CoverMode::Exact).unwrap();
            assert_eq!(c.lhs, c.rhs);
        }
    }

    #[test]
    fn truncation_below_one_collapses_the_class() {
        let class = EvaluableClass::table_default(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let q = EmpiricalMeasure::uniform(blocks(&[&[0], &[1, 0]])).unwrap();
        let c = verify_lemma2(&class, &q, 0.1, 0.0, CoverMode::Exact).unwrap();
        assert_eq!((c.lhs, c.rhs), (1, 1));
        let c = verify_lemma2(&class, &q, 0.1, 10.0, CoverMode::Exact).unwrap();
        assert!(c.holds());
    }

    #[test]
    fn long_blocks_require_greedy_mode() {
        let class = EvaluableClass::table_default(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let q = EmpiricalMeasure::uniform(blocks(&[&[0, 1, 0, 1, 0]])).unwrap();
        assert!(matches!(verify_lemma1(&class, &q, 0.1, CoverMode::Exact), Err(Error::SizeLimit(_))));
        let c = verify_lemma1(&class, &q, 0.1, CoverMode::Greedy).unwrap();
        assert_ne!(c.verdict, Verdict::Violated);
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let rows = verify_random_instances(3, &[0.5, 1.0], 9).unwrap();
        assert_eq!(rows.len(), 12);
        let mut buf = Vec::new();
        write_instances_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 13);
    }
}
