use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MhSetup;
use crate::chain::Trajectory;
use crate::error::{in_replication, invalid, Result};
use crate::format_float;
use crate::regeneration::simulate_split_retrospective_stream;
use crate::stats::{log_log_fit, RunningStats};

/// Position (1-based) of `Q_hat(u)` in a sorted sample of size `n`: the smallest `i` with `i / n >= u`.
fn quantile_rank(n: usize, u: f64) -> usize {
    let mut i = ((n as f64 * u).ceil() as usize).clamp(1, n);
    while i > 1 && (i - 1) as f64 / n as f64 >= u {
        i -= 1;
    }
    while i < n && (i as f64 / n as f64) < u {
        i += 1;
    }
    i
}

/// `Q_hat(u) = inf { x : F_hat(x) >= u }` for an already sorted sample.
pub fn sorted_quantile(sorted: &[f64], u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid(format!("quantile level {u} outside (0, 1)")));
    }
    if sorted.is_empty() {
        return Err(invalid("empty sample"));
    }
    Ok(sorted[quantile_rank(sorted.len(), u) - 1])
}

fn sorted_coordinate(traj: &Trajectory, k: usize) -> Vec<f64> {
    let mut xs = traj.coordinate(k);
    xs.sort_by(f64::total_cmp);
    xs
}

/// Empirical quantile of coordinate `k` along a trajectory.
pub fn empirical_cdf_quantile(traj: &Trajectory, k: usize, u: f64) -> Result<f64> {
    sorted_quantile(&sorted_coordinate(traj, k), u)
}

/// Empirical quantiles and their errors on one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileReport {
    pub n: usize,
    pub replication: usize,
    pub k: usize,
    pub u: Vec<f64>,
    pub qhat: Vec<f64>,
    pub qref: Vec<f64>,
    pub sup_err: f64,
    pub monotone: bool,
    pub b_k_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileConfig {
    pub k: usize,
    pub gamma: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// Number of evenly spaced levels in `[2 gamma, 1 - 2 gamma]`.
    pub u_points: usize,
    pub slope_tolerance: f64,
}

/// Mean sup-error at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub n: usize,
    pub mean_sup_err: f64,
    pub std_err: f64,
    /// `sqrt(log log n / n) / b_{k, gamma}`.
    pub theory_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileExperiment {
    pub model: String,
    pub k: usize,
    pub gamma: f64,
    pub b_k_gamma: f64,
    pub rows: Vec<QuantileRow>,
    pub slope: f64,
    pub slope_std_error: f64,
    pub expected_slope: f64,
    pub slope_tolerance: f64,
    pub monotone_all: bool,
    /// `None` when the rate check was skipped.
    pub pass: Option<bool>,
    pub warnings: Vec<String>,
    pub reports: Vec<QuantileReport>,
}

/// Number of levels used to estimate `b_{k, gamma}`.
const FLOOR_LEVELS: usize = 2001;

/// `b_{k, gamma} = inf over u in [gamma, 1 - gamma] of pi_k(Q_k(u))`, on a fine grid.
pub fn density_floor(setup: &MhSetup, k: usize, gamma: f64) -> Result<f64> {
    let t = &setup.target;
    (0..FLOOR_LEVELS)
        .map(|i| {
            let u = gamma + (1.0 - 2.0 * gamma) * i as f64 / (FLOOR_LEVELS - 1) as f64;
            let q = t.quantile(k, u).ok_or_else(|| invalid("target has no closed-form marginal"))?;
            t.marginal_density(k, q).ok_or_else(|| invalid("target has no closed-form marginal"))
        })
        .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)))
}

impl QuantileExperiment {
    /// Per-`n` means over replications: `n,u,qhat,qref,err` with `qhat` and `err` averaged.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,u,qhat,qref,err")?;
        for row in &self.rows {
            let reps: Vec<&QuantileReport> = self.reports.iter().filter(|r| r.n == row.n).collect();
            let m = reps.len() as f64;
            let first = reps[0];
            for j in 0..first.u.len() {
                let qhat = reps.iter().map(|r| r.qhat[j]).sum::<f64>() / m;
                let err = reps.iter().map(|r| (r.qhat[j] - r.qref[j]).abs()).sum::<f64>() / m;
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    row.n,
                    format_float(first.u[j]),
                    format_float(qhat),
                    format_float(first.qref[j]),
                    format_float(err)
                )?;
            }
        }
        Ok(())
    }

    /// JSON summary without the per-replication reports.
    pub fn summary_json(&self) -> Result<String> {
        let mut s = self.clone();
        s.reports.clear();
        Ok(serde_json::to_string_pretty(&s)?)
    }
}

/// Sup-error of empirical quantiles against the target's quantile function along the MH chain.
pub fn credible_interval_experiment(setup: &MhSetup, cfg: &QuantileConfig) -> Result<QuantileExperiment> {
    if !(cfg.gamma > 0.0 && cfg.gamma < 0.25) {
        return Err(invalid("gamma must lie in (0, 1/4)"));
    }
    if cfg.n_grid.len() < 2 || cfg.replications == 0 || cfg.u_points < 2 {
        return Err(invalid("need two sample sizes, one replication and two levels"));
    }
    if cfg.k >= setup.target.dim() {
        return Err(invalid("coordinate out of range"));
    }
    let model = setup.model()?;
    let b = density_floor(setup, cfg.k, cfg.gamma)?;
    let (u_lo, u_hi) = (2.0 * cfg.gamma, 1.0 - 2.0 * cfg.gamma);
    let u: Vec<f64> = (0..cfg.u_points).map(|i| u_lo + (u_hi - u_lo) * i as f64 / (cfg.u_points - 1) as f64).collect();
    let qref: Vec<f64> =
        u.iter().map(|&v| setup.target.quantile(cfg.k, v).expect("checked by density_floor")).collect();
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let reps: Vec<QuantileReport> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let stream = (i * cfg.replications + r) as u64;
                let traj = simulate_split_retrospective_stream(&model, n, cfg.seed, stream)
                    .map_err(in_replication(cfg.seed, stream))?;
                let sorted = sorted_coordinate(&traj, cfg.k);
                let qhat = u.iter().map(|&v| sorted_quantile(&sorted, v)).collect::<Result<Vec<_>>>()?;
                let sup_err = qhat.iter().zip(&qref).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let monotone = qhat.windows(2).all(|w| w[0] <= w[1]);
                Ok(QuantileReport {
                    n,
                    replication: r,
                    k: cfg.k,
                    u: u.clone(),
                    qhat,
                    qref: qref.clone(),
                    sup_err,
                    monotone,
                    b_k_gamma: b,
                })
            })
            .collect::<Result<_>>()?;
        let stats: RunningStats = reps.iter().map(|r| r.sup_err).collect();
        let nf = n as f64;
        rows.push(QuantileRow {
            n,
            mean_sup_err: stats.mean(),
            std_err: if cfg.replications > 1 { stats.std_error() } else { 0.0 },
            theory_rate: (nf.ln().ln().max(0.0) / nf).sqrt() / b,
        });
        reports.extend(reps);
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.mean_sup_err).collect();
    let fit = log_log_fit(&ns, &errs);
    let mut warnings = Vec::new();
    let expected_slope = -0.5;
    let pass = if b > 0.0 {
        Some((fit.slope - expected_slope).abs() <= cfg.slope_tolerance)
    } else {
        warnings.push(format!("density floor b = {b} is not positive; rate check skipped"));
        None
    };
    Ok(QuantileExperiment {
        model: model.id.clone(),
        k: cfg.k,
        gamma: cfg.gamma,
        b_k_gamma: b,
        monotone_all: reports.iter().all(|r| r.monotone),
        rows,
        slope: fit.slope,
        slope_std_error: fit.slope_std_error,
        expected_slope,
        slope_tolerance: cfg.slope_tolerance,
        pass,
        warnings,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_examples() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(sorted_quantile(&s, 0.5).unwrap(), 2.0);
        assert_eq!(sorted_quantile(&s, 0.51).unwrap(), 3.0);
        assert_eq!(sorted_quantile(&s, 1.0 - 1.0 / 8.0).unwrap(), 4.0);
        assert_eq!(sorted_quantile(&s, 0.2).unwrap(), 1.0);
        assert!(sorted_quantile(&s, 0.0).is_err());
        assert!(sorted_quantile(&s, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn rank_is_minimal(n in 1usize..500, u in 0.0001f64..0.9999) {
            let i = quantile_rank(n, u);
            proptest::prop_assert!(i as f64 / n as f64 >= u);
            proptest::prop_assert!(i == 1 || ((i - 1) as f64 / n as f64) < u);
        }

        #[test]
        fn quantiles_are_monotone(mut xs in proptest::collection::vec(-10.0f64..10.0, 1..100)) {
            xs.sort_by(f64::total_cmp);
            let qs: Vec<f64> = (1..100).map(|i| sorted_quantile(&xs, i as f64 / 100.0).unwrap()).collect();
            proptest::prop_assert!(qs.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
