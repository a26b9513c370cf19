//! Random-walk Metropolis-Hastings on bounded convex supports.
//!
//! A random-walk proposal with `q >= b` on `B(0, eps)` and a bounded target
//! `pi` give, for any interior center `z`, the minorization
//! `P(x, dy) >= delta Psi(dy)` on `S = B(z, eps / 2) ∩ E` with
//! `delta = b pi(S) / ||pi||_inf` and `Psi = pi|_S / pi(S)`. Certificates are
//! validated on a grid of pairs before use and re-checked at every split step.

mod cert;
mod geometry;
mod growth;
mod mh;
mod proposal;
mod quantile;
mod target;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use cert::{build_minorization, mh_chain_model, MhStart, MinorizationCert, PsiMeasure, CERT_GRID_POINTS};
pub use geometry::{minimal_steps, verify_prop1_geometry, GeometryCheck};
pub use growth::{halfline_growth_experiment, halfline_sup_deviation, GrowthConfig, GrowthReport, GrowthRow};
pub use mh::{acceptance, mh_step, MhKernel, MhMove};
pub use proposal::{Increment, RwProposal, FLOOR_GRID_POINTS};
pub use quantile::{
    credible_interval_experiment, density_floor, empirical_cdf_quantile, sorted_quantile, QuantileConfig,
    QuantileExperiment, QuantileReport, QuantileRow,
};
pub use target::{Support, Target, TargetKind, TargetMeasure};

use crate::chain::{ChainModel, Trajectory};
use crate::error::Result;
use crate::regeneration::simulate_split_retrospective_stream;

/// Serializable description of a Metropolis-Hastings configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhSpec {
    pub name: String,
    pub target: TargetKind,
    pub support: Support,
    pub increment: Increment,
    pub eps: f64,
    /// Small-set center; the support centroid when absent.
    pub center: Option<Vec<f64>>,
    pub start: MhStart,
}

impl MhSpec {
    pub fn build(&self) -> Result<MhSetup> {
        let target = Arc::new(Target::new(self.target.clone(), self.support.clone())?);
        let proposal = RwProposal::new(self.increment, target.dim(), self.eps)?;
        let center = self.center.clone().unwrap_or_else(|| self.support.centroid());
        let cert = build_minorization(&target, &proposal, &center)?;
        Ok(MhSetup { name: self.name.clone(), target, proposal, cert, start: self.start.clone() })
    }
}

/// A validated target, proposal and certificate.
#[derive(Debug, Clone)]
pub struct MhSetup {
    pub name: String,
    pub target: Arc<Target>,
    pub proposal: RwProposal,
    pub cert: MinorizationCert,
    pub start: MhStart,
}

impl MhSetup {
    pub fn model(&self) -> Result<ChainModel> {
        mh_chain_model(self.name.clone(), self.target.clone(), self.proposal.clone(), &self.cert, &self.start)
    }
}

/// Regeneration-instrumented MH trajectory; the `X` path equals plain MH for the same seed.
pub fn mh_chain_regen(setup: &MhSetup, n: usize, seed: u64, stream: u64) -> Result<Trajectory> {
    simulate_split_retrospective_stream(&setup.model()?, n, seed, stream)
}

/// Built-in configurations, each with a certificate that validates.
pub fn builtin_mh_specs() -> Vec<MhSpec> {
    let centroid_start = |d: usize| MhStart::Point { x: vec![0.5; d] };
    vec![
        MhSpec {
            name: "mh-uniform-1d".into(),
            target: TargetKind::Uniform,
            support: Support::unit_box(1),
            increment: Increment::UniformCube { half_width: 0.2 },
            eps: 0.2,
            center: None,
            start: centroid_start(1),
        },
        MhSpec {
            name: "mh-truncated-gaussian-1d".into(),
            target: TargetKind::TruncatedGaussian { mean: vec![0.5], sd: vec![0.2] },
            support: Support::unit_box(1),
            increment: Increment::UniformCube { half_width: 0.25 },
            eps: 0.25,
            center: None,
            start: centroid_start(1),
        },
        MhSpec {
            name: "mh-bimodal-1d".into(),
            target: TargetKind::Mixture { weights: vec![0.5, 0.5], means: vec![0.25, 0.75], sds: vec![0.08, 0.08] },
            support: Support::unit_box(1),
            increment: Increment::UniformCube { half_width: 0.3 },
            eps: 0.3,
            center: Some(vec![0.25]),
            start: centroid_start(1),
        },
        MhSpec {
            name: "mh-uniform-2d".into(),
            target: TargetKind::Uniform,
            support: Support::unit_box(2),
            increment: Increment::Gaussian { sd: 0.15 },
            eps: 0.2,
            center: None,
            start: centroid_start(2),
        },
    ]
}

/// Looks up a built-in configuration by name.
pub fn builtin_mh_spec(name: &str) -> Option<MhSpec> {
    builtin_mh_specs().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_certificates_validate() {
        let expected = [0.5, 0.469, 0.315, 0.0914];
        for (spec, want) in builtin_mh_specs().iter().zip(expected) {
            let setup = spec.build().unwrap();
            assert!((setup.cert.delta - want).abs() < 2e-3, "{}: {}", spec.name, setup.cert.delta);
            assert!(setup.cert.max_grid_ratio <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn regenerations_occur_on_the_uniform_chain() {
        let setup = builtin_mh_spec("mh-uniform-1d").unwrap().build().unwrap();
        let t = mh_chain_regen(&setup, 5000, 1, 0).unwrap();
        let flags = t.regen_flags.unwrap().iter().filter(|f| **f).count();
        assert!(flags > 100, "{flags}");
    }
}
