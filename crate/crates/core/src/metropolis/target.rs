use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

use crate::chain::{Measure, State, REJECTION_CAP};
use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;

/// Bounded convex support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Support {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Support {
    pub fn unit_box(dim: usize) -> Self {
        Support::Box { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Support::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
                    return Err(invalid("box support needs lo < hi coordinatewise"));
                }
            }
            Support::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) {
                    return Err(invalid("ball support needs a center and a positive radius"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Support::Box { lo, .. } => lo.len(),
            Support::Ball { center, .. } => center.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Support::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a <= *v && *v <= *b),
            Support::Ball { center, radius } => dist(x, center) <= *radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Support::Box { lo, hi } => dist(lo, hi),
            Support::Ball { radius, .. } => 2.0 * radius,
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        match self {
            Support::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            Support::Ball { center, .. } => center.clone(),
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Support::Box { lo, hi } => (lo.clone(), hi.clone()),
            Support::Ball { center, radius } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Support::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            Support::Ball { center, radius } => {
                let d = center.len() as f64;
                std::f64::consts::PI.powf(d / 2.0) / gamma(d / 2.0 + 1.0) * radius.powf(d)
            }
        }
    }

    /// Whether `x` lies in the interior.
    pub fn interior(&self, x: &[f64]) -> bool {
        match self {
            Support::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a < *v && *v < *b),
            Support::Ball { center, radius } => dist(x, center) < *radius,
        }
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Shape of a built-in target density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetKind {
    Uniform,
    /// Independent normal coordinates truncated to a box.
    TruncatedGaussian {
        mean: Vec<f64>,
        sd: Vec<f64>,
    },
    /// One-dimensional normal mixture truncated to an interval.
    Mixture {
        weights: Vec<f64>,
        means: Vec<f64>,
        sds: Vec<f64>,
    },
}

/// A bounded density on a bounded convex set, with a certified bound on its sup norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub kind: TargetKind,
    pub support: Support,
    /// Normalizing constant: the density is `shape(x) / normalizer`.
    normalizer: f64,
    /// Certified upper bound on the sup norm of the normalized density.
    sup_norm: f64,
}

fn normal(mean: f64, sd: f64) -> Normal {
    Normal::new(mean, sd).expect("positive standard deviation")
}

/// Points of the certification grid for one-dimensional mixtures.
const SUP_GRID: usize = 100_000;

impl Target {
    pub fn new(kind: TargetKind, support: Support) -> Result<Self> {
        support.validate()?;
        let d = support.dim();
        let (normalizer, sup_norm) = match (&kind, &support) {
            (TargetKind::Uniform, s) => (s.volume(), 1.0 / s.volume()),
            (TargetKind::TruncatedGaussian { mean, sd }, Support::Box { lo, hi }) => {
                if mean.len() != d || sd.len() != d || sd.iter().any(|s| !(*s > 0.0)) {
                    return Err(invalid("truncated Gaussian needs one mean and one positive sd per coordinate"));
                }
                let mut z = 1.0;
                let mut peak = 1.0;
                for k in 0..d {
                    let nk = normal(mean[k], sd[k]);
                    z *= nk.cdf(hi[k]) - nk.cdf(lo[k]);
                    peak *= nk.pdf(mean[k].clamp(lo[k], hi[k]));
                }
                (z, peak / z)
            }
            (TargetKind::Mixture { weights, means, sds }, Support::Box { lo, hi }) if d == 1 => {
                if weights.is_empty()
                    || weights.len() != means.len()
                    || weights.len() != sds.len()
                    || weights.iter().any(|w| !(*w > 0.0))
                    || sds.iter().any(|s| !(*s > 0.0))
                {
                    return Err(invalid("mixture needs matching positive weights, means and sds"));
                }
                let comps: Vec<(f64, Normal)> =
                    weights.iter().zip(means.iter().zip(sds)).map(|(w, (m, s))| (*w, normal(*m, *s))).collect();
                let z: f64 = comps.iter().map(|(w, n)| w * (n.cdf(hi[0]) - n.cdf(lo[0]))).sum();
                let shape = |x: f64| comps.iter().map(|(w, n)| w * n.pdf(x)).sum::<f64>();
                // grid maximum plus the Lipschitz slack over half a cell
                let lip: f64 = weights
                    .iter()
                    .zip(sds)
                    .map(|(w, s)| w / (s * s * (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt()))
                    .sum();
                let step = (hi[0] - lo[0]) / SUP_GRID as f64;
                let grid_max = (0..=SUP_GRID).map(|i| shape(lo[0] + i as f64 * step)).fold(0.0, f64::max);
                (z, (grid_max + lip * step / 2.0) / z)
            }
            _ => return Err(invalid("unsupported combination of target kind and support")),
        };
        if !(normalizer > 0.0 && sup_norm.is_finite()) {
            return Err(invalid("target has no mass on its support"));
        }
        Ok(Self { kind, support, normalizer, sup_norm })
    }

    pub fn uniform(support: Support) -> Result<Self> {
        Self::new(TargetKind::Uniform, support)
    }

    pub fn dim(&self) -> usize {
        self.support.dim()
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    fn shape(&self, x: &[f64]) -> f64 {
        match &self.kind {
            TargetKind::Uniform => 1.0,
            TargetKind::TruncatedGaussian { mean, sd } => {
                x.iter().zip(mean.iter().zip(sd)).map(|(v, (m, s))| normal(*m, *s).pdf(*v)).product()
            }
            TargetKind::Mixture { weights, means, sds } => {
                weights.iter().zip(means.iter().zip(sds)).map(|(w, (m, s))| w * normal(*m, *s).pdf(x[0])).sum()
            }
        }
    }

    /// Normalized density; zero outside the support.
    pub fn density(&self, x: &[f64]) -> f64 {
        if x.len() != self.dim() || !self.support.contains(x) {
            return 0.0;
        }
        self.shape(x) / self.normalizer
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.density(x).ln()
    }

    fn box_bounds(&self, k: usize) -> Option<(f64, f64)> {
        match &self.support {
            Support::Box { lo, hi } => Some((lo[k], hi[k])),
            Support::Ball { center, radius } if self.dim() == 1 => Some((center[0] - radius, center[0] + radius)),
            Support::Ball { .. } => None,
        }
    }

    /// Marginal CDF of coordinate `k` (box supports and one-dimensional balls).
    pub fn marginal_cdf(&self, k: usize, x: f64) -> Option<f64> {
        let (lo, hi) = self.box_bounds(k)?;
        if x <= lo {
            return Some(0.0);
        }
        if x >= hi {
            return Some(1.0);
        }
        Some(match &self.kind {
            TargetKind::Uniform => (x - lo) / (hi - lo),
            TargetKind::TruncatedGaussian { mean, sd } => {
                let n = normal(mean[k], sd[k]);
                (n.cdf(x) - n.cdf(lo)) / (n.cdf(hi) - n.cdf(lo))
            }
            TargetKind::Mixture { weights, means, sds } => {
                let comps = weights.iter().zip(means.iter().zip(sds)).map(|(w, (m, s))| (w, normal(*m, *s)));
                let (num, den) = comps.fold((0.0, 0.0), |(a, b), (w, n)| {
                    (a + w * (n.cdf(x) - n.cdf(lo)), b + w * (n.cdf(hi) - n.cdf(lo)))
                });
                num / den
            }
        })
    }

    /// Marginal density of coordinate `k`.
    pub fn marginal_density(&self, k: usize, x: f64) -> Option<f64> {
        let (lo, hi) = self.box_bounds(k)?;
        if x < lo || x > hi {
            return Some(0.0);
        }
        Some(match &self.kind {
            TargetKind::Uniform => 1.0 / (hi - lo),
            TargetKind::TruncatedGaussian { mean, sd } => {
                let n = normal(mean[k], sd[k]);
                n.pdf(x) / (n.cdf(hi) - n.cdf(lo))
            }
            TargetKind::Mixture { .. } => self.shape(&[x]) / self.normalizer,
        })
    }

    /// Quantile function `Q_k(u)` of coordinate `k`.
    pub fn quantile(&self, k: usize, u: f64) -> Option<f64> {
        let (lo, hi) = self.box_bounds(k)?;
        let u = u.clamp(0.0, 1.0);
        Some(match &self.kind {
            TargetKind::Uniform => lo + u * (hi - lo),
            TargetKind::TruncatedGaussian { mean, sd } => {
                let n = normal(mean[k], sd[k]);
                let (a, b) = (n.cdf(lo), n.cdf(hi));
                n.inverse_cdf(a + u * (b - a)).clamp(lo, hi)
            }
            TargetKind::Mixture { .. } => {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if self.marginal_cdf(k, m)? < u {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            }
        })
    }

    /// `pi(B(z, r) ∩ E)`: exact in one dimension, midpoint quadrature otherwise.
    pub fn ball_mass(&self, z: &[f64], r: f64) -> f64 {
        let d = self.dim();
        if d == 1 {
            if let (Some(a), Some(b)) = (self.marginal_cdf(0, z[0] - r), self.marginal_cdf(0, z[0] + r)) {
                return b - a;
            }
        }
        let m: usize = match d {
            1 => 100_000,
            2 => 1000,
            3 => 100,
            _ => 20,
        };
        let (slo, shi) = self.support.bounding_box();
        let lo: Vec<f64> = (0..d).map(|k| (z[k] - r).max(slo[k])).collect();
        let hi: Vec<f64> = (0..d).map(|k| (z[k] + r).min(shi[k])).collect();
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return 0.0;
        }
        let cell: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / m as f64).collect();
        let vol: f64 = cell.iter().product();
        let mut idx = vec![0usize; d];
        let mut total = 0.0;
        let mut x = vec![0.0; d];
        loop {
            for k in 0..d {
                x[k] = lo[k] + (idx[k] as f64 + 0.5) * cell[k];
            }
            if dist(&x, z) <= r {
                total += self.density(&x);
            }
            let mut k = 0;
            loop {
                if k == d {
                    return total * vol;
                }
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Rejection sampler from the uniform law on a box, restricted to `accept_region`.
    pub(crate) fn sample_restricted(
        &self,
        lo: &[f64],
        hi: &[f64],
        accept_region: impl Fn(&[f64]) -> bool,
        rng: &mut SimRng,
    ) -> Result<Vec<f64>> {
        for _ in 0..REJECTION_CAP {
            let x: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect();
            if accept_region(&x) && rng.random::<f64>() * self.sup_norm < self.density(&x) {
                return Ok(x);
            }
        }
        Err(Error::RejectionCap { cap: REJECTION_CAP })
    }
}

/// The target as an initial law, sampled exactly by rejection.
#[derive(Debug, Clone)]
pub struct TargetMeasure(pub Target);

impl Measure for TargetMeasure {
    fn density(&self, y: &State) -> f64 {
        y.coords().map_or(0.0, |c| self.0.density(c))
    }

    fn sample(&self, rng: &mut SimRng) -> Result<State> {
        let (lo, hi) = self.0.support.bounding_box();
        self.0.sample_restricted(&lo, &hi, |_| true, rng).map(State::Vector)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bimodal() -> Target {
        Target::new(
            TargetKind::Mixture { weights: vec![0.5, 0.5], means: vec![0.25, 0.75], sds: vec![0.08, 0.08] },
            Support::unit_box(1),
        )
        .unwrap()
    }

    #[test]
    fn uniform_quantiles_are_linear() {
        let t = Target::uniform(Support::unit_box(1)).unwrap();
        for u in [0.1, 0.5, 0.9] {
            assert!((t.quantile(0, u).unwrap() - u).abs() < 1e-15);
        }
        assert_eq!(t.sup_norm(), 1.0);
        assert!((t.ball_mass(&[0.5], 0.1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn quantiles_invert_cdfs() {
        let tg = Target::new(TargetKind::TruncatedGaussian { mean: vec![0.5], sd: vec![0.2] }, Support::unit_box(1))
            .unwrap();
        for t in [tg, bimodal()] {
            for u in [0.05, 0.3, 0.5, 0.77, 0.95] {
                let q = t.quantile(0, u).unwrap();
                assert!((t.marginal_cdf(0, q).unwrap() - u).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sup_norm_bounds_the_density() {
        let t = bimodal();
        let max = (0..=10_000).map(|i| t.density(&[i as f64 / 10_000.0])).fold(0.0, f64::max);
        assert!(t.sup_norm() >= max && t.sup_norm() < max * 1.001);
    }

    #[test]
    fn density_integrates_to_one() {
        let t = bimodal();
        let m = 100_000;
        let total: f64 = (0..m).map(|i| t.density(&[(i as f64 + 0.5) / m as f64]) / m as f64).sum();
        assert!((total - 1.0).abs() < 1e-8);
        let disc = Target::uniform(Support::Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap();
        assert!((disc.ball_mass(&[0.0, 0.0], 2.0) - 1.0).abs() < 1e-2);
        // lens of the unit disc and a disc of radius 1/2 centered on its boundary
        let lens = (0.875f64).acos() + 0.25 * (0.25f64).acos() - 0.5 * 0.9375f64.sqrt();
        assert!((disc.ball_mass(&[1.0, 0.0], 0.5) - lens / std::f64::consts::PI).abs() < 1e-3);
    }
}
