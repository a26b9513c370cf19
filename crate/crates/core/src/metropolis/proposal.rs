use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;

/// Number of interior points used to validate the proposal floor.
pub const FLOOR_GRID_POINTS: usize = 1000;

/// Relative slack tolerated when checking `q(z) >= b`.
const FLOOR_TOL: f64 = 1e-12;

/// Law of the random-walk increment `Y - X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Increment {
    /// Uniform on the cube `[-half_width, half_width]^d`.
    UniformCube { half_width: f64 },
    /// Isotropic centered normal.
    Gaussian { sd: f64 },
}

/// Random-walk proposal `q(x, y) = q(y - x)` with a certified floor `q >= b` on `B(0, eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RwProposal {
    pub increment: Increment,
    pub dim: usize,
    pub eps: f64,
    pub b: f64,
    /// `q(z) = q(-z)`; both built-in increments are symmetric.
    pub symmetric: bool,
}

impl RwProposal {
    /// Builds the proposal and validates its floor on a deterministic grid.
    pub fn new(increment: Increment, dim: usize, eps: f64) -> Result<Self> {
        if dim == 0 || !(eps > 0.0) {
            return Err(invalid("proposal needs a positive dimension and a positive radius"));
        }
        let d = dim as f64;
        let b = match increment {
            Increment::UniformCube { half_width } => {
                if !(half_width > 0.0) {
                    return Err(invalid("uniform increment needs a positive half width"));
                }
                if eps > half_width {
                    return Err(invalid(format!("radius {eps} exceeds the cube half width {half_width}")));
                }
                (2.0 * half_width).powf(-d)
            }
            Increment::Gaussian { sd } => {
                if !(sd > 0.0) {
                    return Err(invalid("Gaussian increment needs a positive sd"));
                }
                (2.0 * std::f64::consts::PI * sd * sd).powf(-d / 2.0) * (-eps * eps / (2.0 * sd * sd)).exp()
            }
        };
        let p = Self { increment, dim, eps, b, symmetric: true };
        p.validate_floor()?;
        Ok(p)
    }

    /// Increment density `q(z)`.
    pub fn density(&self, z: &[f64]) -> f64 {
        let d = self.dim as f64;
        match self.increment {
            Increment::UniformCube { half_width } => {
                if z.iter().all(|c| c.abs() <= half_width) {
                    (2.0 * half_width).powf(-d)
                } else {
                    0.0
                }
            }
            Increment::Gaussian { sd } => {
                let r2: f64 = z.iter().map(|c| c * c).sum();
                (2.0 * std::f64::consts::PI * sd * sd).powf(-d / 2.0) * (-r2 / (2.0 * sd * sd)).exp()
            }
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        match self.increment {
            Increment::UniformCube { half_width } => {
                (0..self.dim).map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0)).collect()
            }
            Increment::Gaussian { sd } => (0..self.dim).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect(),
        }
    }

    /// Grid of increments in the closed ball `B(0, eps)`, boundary points included.
    pub fn floor_grid(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        let m = ((FLOOR_GRID_POINTS as f64).powf(1.0 / d as f64).floor() as usize).max(2);
        let mut out = lattice(&vec![-self.eps; d], &vec![self.eps; d], m)
            .into_iter()
            .filter(|z| z.iter().map(|c| c * c).sum::<f64>() <= self.eps * self.eps)
            .collect::<Vec<_>>();
        for k in 0..d {
            for s in [-1.0, 1.0] {
                let mut z = vec![0.0; d];
                z[k] = s * self.eps;
                out.push(z);
            }
        }
        out
    }

    /// Checks `q(z) >= b` on [`Self::floor_grid`].
    pub fn validate_floor(&self) -> Result<()> {
        for z in self.floor_grid() {
            let q = self.density(&z);
            if q < self.b * (1.0 - FLOOR_TOL) {
                return Err(Error::Hypothesis(format!(
                    "proposal density {q} below floor {} at increment {z:?}",
                    self.b
                )));
            }
        }
        Ok(())
    }
}

/// `m` evenly spaced points per axis over the box, endpoints included.
pub(crate) fn lattice(lo: &[f64], hi: &[f64], m: usize) -> Vec<Vec<f64>> {
    let d = lo.len();
    let axis = |k: usize, i: usize| {
        if m == 1 {
            0.5 * (lo[k] + hi[k])
        } else {
            lo[k] + (hi[k] - lo[k]) * i as f64 / (m - 1) as f64
        }
    };
    let total = m.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|k| {
                    let i = idx % m;
                    idx /= m;
                    axis(k, i)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn uniform_floor_is_the_density() {
        let p = RwProposal::new(Increment::UniformCube { half_width: 0.2 }, 1, 0.2).unwrap();
        assert!((p.b - 2.5).abs() < 1e-12);
        assert_eq!(p.density(&[0.2]), 2.5);
        assert_eq!(p.density(&[0.21]), 0.0);
        assert!(RwProposal::new(Increment::UniformCube { half_width: 0.1 }, 1, 0.2).is_err());
    }

    #[test]
    fn gaussian_floor_is_attained_on_the_sphere() {
        let p = RwProposal::new(Increment::Gaussian { sd: 0.15 }, 2, 0.2).unwrap();
        assert!((p.density(&[0.2, 0.0]) - p.b).abs() < 1e-12 * p.b.max(1.0));
        assert!(p.floor_grid().len() > 700);
    }

    #[test]
    fn gaussian_density_integrates_to_one() {
        let p = RwProposal::new(Increment::Gaussian { sd: 0.3 }, 1, 0.1).unwrap();
        let m = 200_000;
        let total: f64 = (0..m).map(|i| p.density(&[-3.0 + 6.0 * (i as f64 + 0.5) / m as f64]) * 6.0 / m as f64).sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn samples_have_the_right_spread() {
        let p = RwProposal::new(Increment::UniformCube { half_width: 0.5 }, 1, 0.1).unwrap();
        let mut rng = stream_rng(1, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| p.sample(&mut rng)[0]).collect();
        assert!(xs.iter().all(|x| x.abs() <= 0.5));
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((var - 1.0 / 12.0).abs() < 0.005);
    }
}
