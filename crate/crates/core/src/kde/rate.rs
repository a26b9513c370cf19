use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eval_grid, uniform_deviation, Kernel, SmoothedTarget};
use crate::chain::{simulate_stream, ChainModel, State};
use crate::error::{in_replication, invalid, Result};
use crate::format_float;
use crate::regeneration::hitting_time_moment;
use crate::rng::child_seed;
use crate::stats::{log_log_fit, RunningStats};

/// Settings of a deviation-rate experiment with bandwidth `h_n = c n^-beta`.
#[derive(Debug, Clone)]
pub struct RateConfig {
    pub c: f64,
    pub beta: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// Support box of the stationary law; the grid covers it plus a margin `h`.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Grid spacing as a fraction of `h`.
    pub spacing_factor: f64,
    pub target: SmoothedTarget,
    /// Allowed distance between fitted and theoretical slope.
    pub slope_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub h: f64,
    pub mean_dev: f64,
    pub std_err: f64,
    /// `sqrt(log(n)^2 / (n h^d))`.
    pub theory_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub model: String,
    pub beta: f64,
    pub dim: usize,
    pub slope: f64,
    pub slope_std_error: f64,
    /// `-(1 - beta d) / 2`, log factors ignored.
    pub theoretical_slope: f64,
    pub slope_tolerance: f64,
    pub pass: bool,
    pub rows: Vec<RateRow>,
}

impl RateReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,h,mean_dev,std_err,theory_rate")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.n,
                format_float(r.h),
                format_float(r.mean_dev),
                format_float(r.std_err),
                format_float(r.theory_rate)
            )?;
        }
        Ok(())
    }
}

/// Runs the experiment on `model`, whose stationary law must match `cfg.target`.
pub fn rate_experiment(model: &ChainModel, kernel: &Kernel, cfg: &RateConfig) -> Result<RateReport> {
    if cfg.n_grid.len() < 3 {
        return Err(invalid("need at least three sample sizes"));
    }
    if !(cfg.c > 0.0 && cfg.beta >= 0.0) {
        return Err(invalid("bandwidth rule needs c > 0 and beta >= 0"));
    }
    if cfg.replications == 0 {
        return Err(invalid("need at least one replication"));
    }
    let d = kernel.dim;
    if model.dim != d || cfg.lo.len() != d || cfg.hi.len() != d {
        return Err(invalid("model, kernel and domain dimensions differ"));
    }
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let h = cfg.c * (n as f64).powf(-cfg.beta);
        let grid = eval_grid(&cfg.lo, &cfg.hi, h, cfg.spacing_factor);
        let devs: Vec<f64> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let stream = (i * cfg.replications + r) as u64;
                let traj = simulate_stream(model, n, cfg.seed, stream).map_err(in_replication(cfg.seed, stream))?;
                uniform_deviation(&traj.states, kernel, h, &grid, &cfg.target)
            })
            .collect::<Result<_>>()?;
        let stats: RunningStats = devs.into_iter().collect();
        let nf = n as f64;
        rows.push(RateRow {
            n,
            h,
            mean_dev: stats.mean(),
            std_err: if cfg.replications > 1 { stats.std_error() } else { 0.0 },
            theory_rate: (nf.ln().powi(2) / (nf * h.powi(d as i32))).sqrt(),
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let devs: Vec<f64> = rows.iter().map(|r| r.mean_dev).collect();
    let fit = log_log_fit(&ns, &devs);
    let theoretical_slope = -(1.0 - cfg.beta * d as f64) / 2.0;
    Ok(RateReport {
        model: model.id.clone(),
        beta: cfg.beta,
        dim: d,
        slope: fit.slope,
        slope_std_error: fit.slope_std_error,
        theoretical_slope,
        slope_tolerance: cfg.slope_tolerance,
        pass: (fit.slope - theoretical_slope).abs() <= cfg.slope_tolerance,
        rows,
    })
}

/// `sup_x pi(x) E_x[tau_A^p]` over `points`, with the moments estimated from `reps` split chains started at each point.
pub fn hitting_premise(
    model: &ChainModel,
    density: impl Fn(&State) -> f64,
    points: &[State],
    p: f64,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for (i, x) in points.iter().enumerate() {
        let m = hitting_time_moment(model, x, p, reps, child_seed(seed, i as u64))?;
        sup = sup.max(density(x) * m);
    }
    Ok(sup)
}
