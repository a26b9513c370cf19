use rand::Rng;
use serde::{Deserialize, Serialize};

use super::target::{dist, Support};
use crate::error::{invalid, Result};
use crate::rng::{stream_rng, SimRng};

/// Relative slack on the inclusion checks.
const INCLUSION_TOL: f64 = 1e-12;

/// Points of `B(m, gamma / 4)` tested per triple.
const POINTS_PER_TRIPLE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryCheck {
    pub diameter: f64,
    pub eps: f64,
    /// Smallest `n >= 1` with `eps (1 + n / 4) > diameter`.
    pub n_min: usize,
    pub trials: usize,
    pub passed: usize,
    pub pass: bool,
}

/// Smallest `n >= 1` with `eps (1 + n / 4) > diameter`.
pub fn minimal_steps(diameter: f64, eps: f64) -> usize {
    let bound = 4.0 * (diameter / eps - 1.0);
    let mut n = if bound < 0.0 { 1 } else { bound.floor() as usize + 1 };
    while n > 1 && eps * (1.0 + (n - 1) as f64 / 4.0) > diameter {
        n -= 1;
    }
    while eps * (1.0 + n as f64 / 4.0) <= diameter {
        n += 1;
    }
    n
}

fn uniform_in_support(support: &Support, rng: &mut SimRng) -> Vec<f64> {
    let (lo, hi) = support.bounding_box();
    loop {
        let x: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect();
        if support.contains(&x) {
            return x;
        }
    }
}

fn uniform_in_ball(center: &[f64], r: f64, rng: &mut SimRng) -> Vec<f64> {
    loop {
        let z: Vec<f64> = center.iter().map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        if z.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            return center.iter().zip(&z).map(|(c, u)| c + r * u).collect();
        }
    }
}

/// Checks `B(m, gamma / 4) ⊂ B(x, eta) ∩ B(y, gamma)` for one triple, where `m` lies on the segment `[x, y]`.
fn check_triple(x: &[f64], y: &[f64], eta: f64, gamma: f64, rng: &mut SimRng) -> bool {
    let dxy = dist(x, y);
    let t_lo = (dxy - 0.75 * gamma).max(0.0);
    let t_hi = dxy.min(eta - 0.25 * gamma);
    let t = 0.5 * (t_lo + t_hi);
    let m: Vec<f64> =
        if dxy == 0.0 { x.to_vec() } else { x.iter().zip(y).map(|(a, b)| a + (b - a) * t / dxy).collect() };
    let r = 0.25 * gamma;
    let inside = |w: &[f64]| dist(w, x) <= eta * (1.0 + INCLUSION_TOL) && dist(w, y) <= gamma * (1.0 + INCLUSION_TOL);
    dist(&m, x) + r <= eta * (1.0 + INCLUSION_TOL)
        && dist(&m, y) + r <= gamma * (1.0 + INCLUSION_TOL)
        && (0..POINTS_PER_TRIPLE).all(|_| inside(&uniform_in_ball(&m, r, rng)))
}

/// Computes the minimal number of steps and spot-checks the ball inclusion on random triples.
///
/// Each trial draws `gamma` and `eta >= gamma / 4`, then `x, y` in the support
/// with `|x - y| <= eta + gamma / 2`, which is exactly when a segment point `m`
/// with the inclusion exists.
pub fn verify_prop1_geometry(support: &Support, eps: f64, trials: usize, seed: u64) -> Result<GeometryCheck> {
    support.validate()?;
    if !(eps > 0.0) || trials == 0 {
        return Err(invalid("need eps > 0 and at least one trial"));
    }
    let diameter = support.diameter();
    let mut rng = stream_rng(seed, 0);
    let mut passed = 0;
    for _ in 0..trials {
        let gamma = diameter * (0.05 + 0.95 * rng.random::<f64>());
        let eta = gamma / 4.0 + (diameter - gamma / 4.0).max(0.0) * rng.random::<f64>();
        let x = uniform_in_support(support, &mut rng);
        let reach = eta + gamma / 2.0;
        let y = loop {
            let y = uniform_in_ball(&x, reach, &mut rng);
            if support.contains(&y) {
                break y;
            }
        };
        if check_triple(&x, &y, eta, gamma, &mut rng) {
            passed += 1;
        }
    }
    Ok(GeometryCheck { diameter, eps, n_min: minimal_steps(diameter, eps), trials, passed, pass: passed == trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_step_examples() {
        assert_eq!(minimal_steps(1.0, 1.0), 1);
        assert_eq!(minimal_steps(2f64.sqrt(), 0.1), 53);
        assert_eq!(minimal_steps(1.0, 5.0), 1);
    }

    #[test]
    fn inclusion_holds_on_random_triples() {
        for s in [Support::unit_box(1), Support::unit_box(2), Support::Ball { center: vec![0.0; 3], radius: 1.0 }] {
            let c = verify_prop1_geometry(&s, 0.1, 2000, 9).unwrap();
            assert!(c.pass, "{c:?}");
        }
    }
}
