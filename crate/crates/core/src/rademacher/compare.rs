use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{c_lambda, l_grid, optimize_l, theorem2_main_term, theorem2_remainder, BoundInputs, Regime};
use super::estimate::{rademacher_from_values, sigma_prime_from_values};
use crate::chain::ChainModel;
use crate::classes::EvaluableClass;
use crate::error::{in_replication, invalid, Result};
use crate::format_float;
use crate::regeneration::{simulate_blocks, RegenStats};
use crate::rng::child_seed;
use crate::stats::{log_log_fit, RunningStats};

/// Settings of the block-bound domination experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    /// Numbers of complete blocks.
    pub n_grid: Vec<usize>,
    pub replications: usize,
    /// Sign draws per replication.
    pub n_mc: usize,
    pub seed: u64,
    pub m_const: f64,
    pub regime: Regime,
    /// Moment order for the polynomial regime.
    pub p: f64,
    /// Exponent for the exponential regime.
    pub lambda: f64,
    /// Multiple of the Monte Carlo standard error added to the plug-in `sigma'^2`.
    pub sigma_inflation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub empirical: f64,
    pub mc_err: f64,
    /// Bound at the configured `M`, minimized over `L`.
    pub bound: f64,
    pub ratio: f64,
    pub l_opt: f64,
    pub m_min: f64,
    /// Bound at `M = m_min`, minimized over `L`.
    pub bound_at_m_min: f64,
    pub sigma_prime: f64,
    pub e_tau_p: f64,
    pub c_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub model: String,
    pub class_size: usize,
    pub regime: Regime,
    pub m_const: f64,
    /// Smallest `M` for which the bound dominates the empirical value at every `n`.
    pub m_min: f64,
    pub growth_exponent: f64,
    pub growth_exponent_se: f64,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,empirical,mc_err,bound,ratio,L_opt,M_min")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.n,
                format_float(r.empirical),
                format_float(r.mc_err),
                format_float(r.bound),
                format_float(r.ratio),
                format_float(r.l_opt),
                format_float(r.m_min)
            )?;
        }
        Ok(())
    }

    pub fn dominates_at_m_min(&self) -> bool {
        self.rows.iter().all(|r| r.bound_at_m_min >= r.empirical)
    }
}

fn min_over_l(x: &BoundInputs, regime: Regime, m: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for l in l_grid() {
        if x.sigma > l * x.u {
            continue;
        }
        best = best.min(m * theorem2_main_term(x, l)? + theorem2_remainder(x, l, regime)?);
    }
    Ok(best)
}

/// Smallest `M` with `min_L [M main(L) + remainder(L)] >= target`, up to a relative 1e-10.
pub fn minimal_m(x: &BoundInputs, regime: Regime, target: f64) -> Result<f64> {
    let f = |m: f64| min_over_l(x, regime, m);
    if f(0.0)? >= target {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while f(hi)? < target {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(invalid("no finite constant makes the bound dominate"));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

struct Replicate {
    estimate: f64,
    values: Vec<Vec<f64>>,
    lengths: Vec<u64>,
}

/// Pairs the empirical block Rademacher complexity with the block bound
/// evaluated at plug-in moment estimates.
pub fn compare_bound_vs_empirical(
    model: &ChainModel,
    class: &EvaluableClass,
    cfg: &CompareConfig,
) -> Result<BoundReport> {
    if cfg.n_grid.len() < 2 {
        return Err(invalid("need at least two sample sizes"));
    }
    if cfg.replications == 0 {
        return Err(invalid("need at least one replication"));
    }
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    let mut inputs = Vec::with_capacity(cfg.n_grid.len());
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let reps: Vec<Replicate> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let stream = (i * cfg.replications + r) as u64;
                let blocks = simulate_blocks(model, n, cfg.seed, stream).map_err(in_replication(cfg.seed, stream))?;
                let values = class.block_values(&blocks)?;
                let est = rademacher_from_values(&values, cfg.n_mc, child_seed(cfg.seed, stream))?;
                Ok(Replicate { estimate: est.mean, values, lengths: blocks.iter().map(|b| b.len() as u64).collect() })
            })
            .collect::<Result<_>>()?;
        let emp: RunningStats = reps.iter().map(|r| r.estimate).collect();
        let pooled: Vec<Vec<f64>> =
            (0..class.len()).map(|m| reps.iter().flat_map(|r| r.values[m].iter().copied()).collect()).collect();
        let sp = sigma_prime_from_values(&pooled)?;
        let tau = RegenStats::new(reps.iter().flat_map(|r| r.lengths.iter().copied()).collect());
        let x = BoundInputs {
            u: class.envelope(),
            sigma: sp.upper(cfg.sigma_inflation),
            c: class.vc_c(),
            v: class.vc_v(),
            n: n as f64,
            p: cfg.p,
            e_tau_p: tau.moment_p(cfg.p),
            lambda: cfg.lambda,
            c_lambda: c_lambda(tau.mgf(cfg.lambda), cfg.lambda),
            m_const: cfg.m_const,
            ..Default::default()
        };
        let opt = optimize_l(&x, cfg.regime)?;
        let mc_err = if cfg.replications > 1 { emp.std_error() } else { 0.0 };
        rows.push(BoundRow {
            n,
            empirical: emp.mean(),
            mc_err,
            bound: opt.bound,
            ratio: opt.bound / emp.mean(),
            l_opt: opt.l,
            m_min: f64::NAN,
            bound_at_m_min: f64::NAN,
            sigma_prime: x.sigma,
            e_tau_p: x.e_tau_p,
            c_lambda: x.c_lambda,
        });
        inputs.push(x);
    }
    let mut m_min: f64 = 0.0;
    for (row, x) in rows.iter().zip(&inputs) {
        m_min = m_min.max(minimal_m(x, cfg.regime, row.empirical)?);
    }
    for (row, x) in rows.iter_mut().zip(&inputs) {
        row.m_min = m_min;
        row.bound_at_m_min = min_over_l(x, cfg.regime, m_min)?;
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let emps: Vec<f64> = rows.iter().map(|r| r.empirical).collect();
    let fit = log_log_fit(&ns, &emps);
    Ok(BoundReport {
        model: model.id.clone(),
        class_size: class.len(),
        regime: cfg.regime,
        m_const: cfg.m_const,
        m_min,
        growth_exponent: fit.slope,
        growth_exponent_se: fit.slope_std_error,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_m_reaches_the_target() {
        let x = BoundInputs {
            u: 1.0,
            sigma: 1.0,
            c: 30.0,
            v: 1.0,
            n: 100.0,
            p: 2.0,
            e_tau_p: 1.0,
            m_const: 1.0,
            ..Default::default()
        };
        let target = 50.0;
        let m = minimal_m(&x, Regime::Polynomial, target).unwrap();
        assert!(min_over_l(&x, Regime::Polynomial, m).unwrap() >= target);
        assert!(min_over_l(&x, Regime::Polynomial, m * (1.0 - 1e-6)).unwrap() < target);
        assert_eq!(minimal_m(&x, Regime::Polynomial, 0.0).unwrap(), 0.0);
    }
}
