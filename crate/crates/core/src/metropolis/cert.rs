use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mh::{acceptance, MhKernel};
use super::proposal::{lattice, RwProposal};
use super::target::{dist, Target, TargetMeasure};
use crate::chain::{ChainModel, Measure, Minorization, PointMass, SmallSet, State};
use crate::error::{invalid, Error, Result};
use crate::regeneration::RATIO_TOL;
use crate::rng::SimRng;

/// Number of small-set points used by the pairwise certificate validation.
pub const CERT_GRID_POINTS: usize = 1000;

/// Doeblin certificate `P(x, .) >= delta Psi` on `S = B(z, eps / 2) ∩ E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorizationCert {
    pub center: Vec<f64>,
    pub eps: f64,
    /// Radius `eps / 2` of the small set.
    pub radius: f64,
    pub b: f64,
    /// `pi(S)`.
    pub small_set_mass: f64,
    pub sup_norm: f64,
    pub delta: f64,
    pub grid_points: usize,
    pub grid_pairs: usize,
    /// Largest `delta psi(y) / p(x, y)` over the validation grid.
    pub max_grid_ratio: f64,
    /// SHA-256 of the validation grid and the certified constants.
    pub grid_hash: String,
}

impl MinorizationCert {
    pub fn small_set(&self) -> SmallSet {
        SmallSet::Ball { center: self.center.clone(), radius: self.radius }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `Psi`: the target restricted to the small set and renormalized.
#[derive(Debug, Clone)]
pub struct PsiMeasure {
    target: Arc<Target>,
    center: Vec<f64>,
    radius: f64,
    mass: f64,
}

impl PsiMeasure {
    pub fn new(target: Arc<Target>, cert: &MinorizationCert) -> Self {
        Self { target, center: cert.center.clone(), radius: cert.radius, mass: cert.small_set_mass }
    }

    pub fn density_at(&self, y: &[f64]) -> f64 {
        if dist(y, &self.center) <= self.radius {
            self.target.density(y) / self.mass
        } else {
            0.0
        }
    }
}

impl Measure for PsiMeasure {
    fn density(&self, y: &State) -> f64 {
        y.coords().map_or(0.0, |c| self.density_at(c))
    }

    fn sample(&self, rng: &mut SimRng) -> Result<State> {
        let (slo, shi) = self.target.support.bounding_box();
        let lo: Vec<f64> = self.center.iter().zip(&slo).map(|(c, l)| (c - self.radius).max(*l)).collect();
        let hi: Vec<f64> = self.center.iter().zip(&shi).map(|(c, h)| (c + self.radius).min(*h)).collect();
        self.target.sample_restricted(&lo, &hi, |x| dist(x, &self.center) <= self.radius, rng).map(State::Vector)
    }
}

/// Validation points of `S`: a lattice over its bounding box, clipped to `S`, plus the center.
fn small_set_grid(target: &Target, z: &[f64], r: f64) -> Vec<Vec<f64>> {
    let d = z.len();
    let (slo, shi) = target.support.bounding_box();
    let lo: Vec<f64> = (0..d).map(|k| (z[k] - r).max(slo[k])).collect();
    let hi: Vec<f64> = (0..d).map(|k| (z[k] + r).min(shi[k])).collect();
    let m = ((CERT_GRID_POINTS as f64).powf(1.0 / d as f64).floor() as usize).max(2);
    let mut pts: Vec<Vec<f64>> =
        lattice(&lo, &hi, m).into_iter().filter(|x| dist(x, z) <= r && target.support.contains(x)).collect();
    pts.push(z.to_vec());
    pts
}

fn grid_hash(points: &[Vec<f64>], z: &[f64], eps: f64, delta: f64) -> String {
    let mut h = Sha256::new();
    for v in z.iter().chain([eps, delta].iter()) {
        h.update(v.to_le_bytes());
    }
    for p in points {
        for c in p {
            h.update(c.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

/// Builds `delta = b pi(S) / ||pi||_inf` and `Psi = pi|_S / pi(S)` and validates
/// `q(y - x) rho(x, y) >= delta psi(y)` on every pair of grid points of `S`.
pub fn build_minorization(target: &Target, proposal: &RwProposal, z: &[f64]) -> Result<MinorizationCert> {
    if z.len() != target.dim() || proposal.dim != target.dim() {
        return Err(invalid("center, target and proposal dimensions differ"));
    }
    if !target.support.interior(z) {
        return Err(invalid(format!("center {z:?} is not an interior point of the support")));
    }
    let radius = proposal.eps / 2.0;
    let mass = target.ball_mass(z, radius);
    if !(mass > 0.0) {
        return Err(invalid("small set has zero target mass"));
    }
    let sup = target.sup_norm();
    let delta = proposal.b * mass / sup;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Hypothesis(format!("minorization constant {delta} outside (0, 1)")));
    }
    let points = small_set_grid(target, z, radius);
    let ratio_at = |x: &[f64], y: &[f64]| -> f64 {
        let lower = delta * target.density(y) / mass;
        if lower == 0.0 {
            return 0.0;
        }
        let inc: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let p = proposal.density(&inc) * acceptance(target, proposal, x, y);
        if p > 0.0 {
            lower / p
        } else {
            f64::INFINITY
        }
    };
    let worst = points
        .par_iter()
        .flat_map_iter(|x| points.iter().map(move |y| (x, y)))
        .map(|(x, y)| (ratio_at(x, y), x, y))
        .reduce(|| (0.0, &points[0], &points[0]), |a, b| if b.0 > a.0 { b } else { a });
    let worst = (worst.0, worst.1.clone(), worst.2.clone());
    if worst.0 > 1.0 + RATIO_TOL {
        return Err(Error::CertificateViolation {
            x: State::Vector(worst.1),
            y: State::Vector(worst.2),
            ratio: worst.0,
        });
    }
    Ok(MinorizationCert {
        center: z.to_vec(),
        eps: proposal.eps,
        radius,
        b: proposal.b,
        small_set_mass: mass,
        sup_norm: sup,
        delta,
        grid_points: points.len(),
        grid_pairs: points.len() * points.len(),
        max_grid_ratio: worst.0,
        grid_hash: grid_hash(&points, z, proposal.eps, delta),
    })
}

/// Initial law of a Metropolis-Hastings chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MhStart {
    /// Exact draw from the target.
    Stationary,
    Point {
        x: Vec<f64>,
    },
}

/// Wraps the kernel and its certificate into a splittable chain model.
pub fn mh_chain_model(
    id: impl Into<String>,
    target: Arc<Target>,
    proposal: RwProposal,
    cert: &MinorizationCert,
    start: &MhStart,
) -> Result<ChainModel> {
    let dim = target.dim();
    let initial: Arc<dyn Measure> = match start {
        MhStart::Stationary => Arc::new(TargetMeasure((*target).clone())),
        MhStart::Point { x } => {
            if x.len() != dim || !target.support.contains(x) {
                return Err(invalid("starting point lies outside the support"));
            }
            Arc::new(PointMass(State::Vector(x.clone())))
        }
    };
    let psi = Arc::new(PsiMeasure::new(target.clone(), cert));
    let minorization = Minorization::new(cert.delta, cert.small_set(), psi)?;
    Ok(ChainModel {
        id: id.into(),
        dim,
        kernel: Arc::new(MhKernel::new(target, proposal)?),
        initial,
        minorization,
        residual: None,
    })
}
