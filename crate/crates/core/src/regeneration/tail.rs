//! Empirical moments, moment generating function and tail diagnostics of the
//! regeneration time.

use serde::{Deserialize, Serialize};

use super::BlockSet;
use crate::stats::{linear_fit, LinearFit};

/// Configuration of the tail diagnostics. The thresholds are pragmatic defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConfig {
    pub min_blocks: usize,
    /// A grid point is flagged when one block carries more than this share of the MGF sum.
    pub max_single_share: f64,
    pub lambda_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    /// Survival points need at least this many blocks beyond them to enter the fit.
    pub min_tail_count: usize,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            min_blocks: 30,
            max_single_share: 0.5,
            lambda_grid: (1..=20).map(|i| 0.05 * i as f64).collect(),
            p_grid: vec![1.0, 1.5, 2.0, 3.0, 4.0],
            min_tail_count: 5,
        }
    }
}

/// Empirical law of the complete-block lengths `tau_A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegenStats {
    pub tau_samples: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfPoint {
    pub lambda: f64,
    pub value: f64,
    /// Largest share of the MGF sum carried by a single block.
    pub max_share: f64,
    pub finite_looking: bool,
}

/// JSON report of the regeneration-time diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub n_blocks: usize,
    pub mean: f64,
    pub moments: Vec<MomentPoint>,
    pub mgf: Vec<MgfPoint>,
    /// Fit of `log P(tau > k)` against `k`; the negated slope is the exponential rate.
    pub log_survival_fit: Option<LinearFit>,
    /// Half the estimated exponential rate, a conservative `lambda` for (EM) bounds.
    pub suggested_lambda: Option<f64>,
    pub warnings: Vec<String>,
}

impl RegenStats {
    pub fn new(tau_samples: Vec<u64>) -> Self {
        Self { tau_samples }
    }

    pub fn from_blocks(blocks: &BlockSet) -> Self {
        Self::new(blocks.complete.iter().map(|b| b.len() as u64).collect())
    }

    pub fn len(&self) -> usize {
        self.tau_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_samples.is_empty()
    }

    /// Empirical `E_A[tau^p]`.
    pub fn moment_p(&self, p: f64) -> f64 {
        if self.tau_samples.is_empty() {
            return f64::NAN;
        }
        self.tau_samples.iter().map(|&t| (t as f64).powf(p)).sum::<f64>() / self.len() as f64
    }

    fn log_terms(&self, lambda: f64) -> (f64, f64) {
        // log-sum-exp of lambda * tau and the largest term
        let max = self.tau_samples.iter().map(|&t| lambda * t as f64).fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self.tau_samples.iter().map(|&t| (lambda * t as f64 - max).exp()).sum();
        (max + sum.ln(), max)
    }

    /// Empirical `E_A[exp(lambda tau)]`.
    pub fn mgf(&self, lambda: f64) -> f64 {
        if self.tau_samples.is_empty() {
            return f64::NAN;
        }
        let (lse, _) = self.log_terms(lambda);
        (lse - (self.len() as f64).ln()).exp()
    }

    /// Largest single-block share of the MGF sum at `lambda`.
    pub fn mgf_max_share(&self, lambda: f64) -> f64 {
        let (lse, max) = self.log_terms(lambda);
        (max - lse).exp()
    }

    /// Least-squares fit of the log empirical survival function.
    pub fn log_survival_fit(&self, min_tail_count: usize) -> Option<LinearFit> {
        let n = self.len();
        let max = *self.tau_samples.iter().max()?;
        let mut counts = vec![0usize; max as usize + 2];
        for &t in &self.tau_samples {
            counts[t as usize] += 1;
        }
        let (mut ks, mut ls) = (Vec::new(), Vec::new());
        let mut beyond = n;
        for (k, c) in counts.iter().enumerate() {
            beyond -= c;
            if k >= 1 && beyond >= min_tail_count.max(1) {
                ks.push(k as f64);
                ls.push((beyond as f64 / n as f64).ln());
            }
        }
        (ks.len() >= 2).then(|| linear_fit(&ks, &ls))
    }

    pub fn report(&self, config: &TailConfig) -> TailReport {
        let mut warnings = Vec::new();
        if self.len() < config.min_blocks {
            warnings.push(format!(
                "only {} complete blocks (< {}); tail diagnostics are unreliable",
                self.len(),
                config.min_blocks
            ));
        }
        let moments = config.p_grid.iter().map(|&p| MomentPoint { p, value: self.moment_p(p) }).collect();
        let mgf = if self.is_empty() {
            Vec::new()
        } else {
            config
                .lambda_grid
                .iter()
                .map(|&lambda| {
                    let max_share = self.mgf_max_share(lambda);
                    MgfPoint {
                        lambda,
                        value: self.mgf(lambda),
                        max_share,
                        finite_looking: max_share <= config.max_single_share,
                    }
                })
                .collect()
        };
        let fit = self.log_survival_fit(config.min_tail_count);
        if fit.is_none() && !self.is_empty() {
            warnings.push("too few distinct block lengths for a survival fit".into());
        }
        let suggested_lambda = fit.filter(|f| f.slope < 0.0).map(|f| -0.5 * f.slope);
        TailReport {
            n_blocks: self.len(),
            mean: self.moment_p(1.0),
            moments,
            mgf,
            log_survival_fit: fit,
            suggested_lambda,
            warnings,
        }
    }
}

/// Computes [`RegenStats`] and its diagnostic report from a block set.
pub fn regen_stats(blocks: &BlockSet, config: &TailConfig) -> (RegenStats, TailReport) {
    let stats = RegenStats::from_blocks(blocks);
    let report = stats.report(config);
    (stats, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_blocks() {
        let s = RegenStats::new(vec![1; 50]);
        for p in [0.0, 1.0, 2.5, 4.0] {
            assert_eq!(s.moment_p(p), 1.0);
        }
        assert!((s.mgf(0.7) - 0.7f64.exp()).abs() < 1e-12);
        assert!((s.mgf(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lengths_one_two_three() {
        let s = RegenStats::new(vec![1, 2, 3]);
        assert!((s.moment_p(2.0) - 14.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.moment_p(1.0), 2.0);
    }

    #[test]
    fn few_blocks_warn() {
        let s = RegenStats::new(vec![1, 2, 3]);
        let r = s.report(&TailConfig::default());
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn huge_lambda_does_not_overflow() {
        let s = RegenStats::new(vec![1, 400, 2]);
        assert!(s.mgf_max_share(5.0) > 0.999);
        assert!(s.mgf(5.0).is_infinite() || s.mgf(5.0) > 1e300);
    }

    proptest! {
        #[test]
        fn moments_are_monotone_in_p(taus in prop::collection::vec(1u64..50, 1..100)) {
            let s = RegenStats::new(taus);
            prop_assert!((s.moment_p(0.0) - 1.0).abs() < 1e-12);
            prop_assert!((s.mgf(0.0) - 1.0).abs() < 1e-12);
            let mut prev = 0.0;
            for p in [0.0, 0.5, 1.0, 2.0, 3.0] {
                let m = s.moment_p(p);
                prop_assert!(m >= prev * (1.0 - 1e-12));
                prev = m;
            }
        }
    }
}
