use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MhSetup;
use crate::error::{in_replication, invalid, Result};
use crate::format_float;
use crate::regeneration::simulate_split_retrospective_stream;
use crate::stats::{log_log_fit, RunningStats};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub k: usize,
    /// Thresholds `t` of the half-line indicators `1{x_k <= t}`.
    pub thresholds: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub max_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    /// Mean over replications of `sup_g |sum_i (g(X_i) - pi(g))|`.
    pub mean_sup: f64,
    pub std_err: f64,
    /// `mean_sup / sqrt(n log log n)`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub model: String,
    pub rows: Vec<GrowthRow>,
    pub exponent: f64,
    pub exponent_std_error: f64,
    pub max_exponent: f64,
    /// Smallest `D` with `mean_sup <= D sqrt(n log log n)` at every `n` of the grid.
    pub d_min: f64,
    pub pass: bool,
}

impl GrowthReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,mean_sup,std_err,normalized")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.n,
                format_float(r.mean_sup),
                format_float(r.std_err),
                format_float(r.normalized)
            )?;
        }
        Ok(())
    }
}

/// `sup_t |#{i : x_i <= t} - n F(t)|` over the thresholds, for a sorted sample.
pub fn halfline_sup_deviation(sorted: &[f64], thresholds: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    thresholds.iter().map(|&t| (sorted.partition_point(|x| *x <= t) as f64 - n * cdf(t)).abs()).fold(0.0, f64::max)
}

/// Growth in `n` of the centered half-line partial sums along the MH chain.
pub fn halfline_growth_experiment(setup: &MhSetup, cfg: &GrowthConfig) -> Result<GrowthReport> {
    if cfg.n_grid.len() < 2 || cfg.replications == 0 || cfg.thresholds.is_empty() {
        return Err(invalid("need two sample sizes, one replication and one threshold"));
    }
    if cfg.n_grid.iter().any(|&n| n < 16) {
        return Err(invalid("sample sizes below 16 make log log n degenerate"));
    }
    let t = &setup.target;
    if t.marginal_cdf(cfg.k, 0.5).is_none() {
        return Err(invalid("target has no closed-form marginal"));
    }
    let model = setup.model()?;
    let cdf = |x: f64| t.marginal_cdf(cfg.k, x).expect("checked above");
    let mut rows = Vec::new();
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let sups: Vec<f64> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let stream = (i * cfg.replications + r) as u64;
                let traj = simulate_split_retrospective_stream(&model, n, cfg.seed, stream)
                    .map_err(in_replication(cfg.seed, stream))?;
                let mut xs = traj.coordinate(cfg.k);
                xs.sort_by(f64::total_cmp);
                Ok(halfline_sup_deviation(&xs, &cfg.thresholds, cdf))
            })
            .collect::<Result<_>>()?;
        let stats: RunningStats = sups.into_iter().collect();
        let nf = n as f64;
        rows.push(GrowthRow {
            n,
            mean_sup: stats.mean(),
            std_err: if cfg.replications > 1 { stats.std_error() } else { 0.0 },
            normalized: stats.mean() / (nf * nf.ln().ln()).sqrt(),
        });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let sups: Vec<f64> = rows.iter().map(|r| r.mean_sup).collect();
    let fit = log_log_fit(&ns, &sups);
    Ok(GrowthReport {
        model: model.id.clone(),
        d_min: rows.iter().map(|r| r.normalized).fold(0.0, f64::max),
        rows,
        exponent: fit.slope,
        exponent_std_error: fit.slope_std_error,
        max_exponent: cfg.max_exponent,
        pass: fit.slope <= cfg.max_exponent,
    })
}
