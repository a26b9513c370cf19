use std::sync::Arc;

use rand::Rng;

use super::proposal::RwProposal;
use super::target::Target;
use crate::chain::{State, Step, TransitionKernel};
use crate::error::{invalid, Result};
use crate::rng::SimRng;

/// Outcome of one Metropolis-Hastings transition.
#[derive(Debug, Clone, PartialEq)]
pub struct MhMove {
    pub next: Vec<f64>,
    pub proposed: Vec<f64>,
    pub accepted: bool,
    /// Proposal density `q(y - x)` at the proposed point.
    pub q: f64,
    /// Acceptance probability `rho(x, y)`.
    pub rho: f64,
}

/// `rho(x, y) = min(1, pi(y) q(x - y) / (pi(x) q(y - x)))`, or 1 when `pi(x) q(y - x) = 0`.
pub fn acceptance(target: &Target, proposal: &RwProposal, x: &[f64], y: &[f64]) -> f64 {
    let fwd: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let den = target.density(x) * proposal.density(&fwd);
    if den == 0.0 {
        return 1.0;
    }
    let back = if proposal.symmetric {
        proposal.density(&fwd)
    } else {
        proposal.density(&fwd.iter().map(|c| -c).collect::<Vec<_>>())
    };
    (target.density(y) * back / den).min(1.0)
}

/// Draws `Y ~ q(x, .)` and accepts it with probability `rho(x, Y)`.
///
/// Exactly one proposal and one uniform are drawn per call.
pub fn mh_step(target: &Target, proposal: &RwProposal, x: &[f64], rng: &mut SimRng) -> MhMove {
    let z = proposal.sample(rng);
    let u: f64 = rng.random();
    let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + b).collect();
    let q = proposal.density(&z);
    let rho = acceptance(target, proposal, x, &y);
    let accepted = u < rho;
    let next = if accepted { y.clone() } else { x.to_vec() };
    MhMove { next, proposed: y, accepted, q, rho }
}

/// The Metropolis-Hastings kernel as a [`TransitionKernel`].
///
/// The step density reported for splitting is `q(y - x) rho(x, y)` on accepted
/// moves and absent on rejections, which never regenerate.
#[derive(Debug, Clone)]
pub struct MhKernel {
    pub target: Arc<Target>,
    pub proposal: RwProposal,
}

impl MhKernel {
    pub fn new(target: Arc<Target>, proposal: RwProposal) -> Result<Self> {
        if target.dim() != proposal.dim {
            return Err(invalid("target and proposal dimensions differ"));
        }
        Ok(Self { target, proposal })
    }
}

impl TransitionKernel for MhKernel {
    fn step(&self, x: &State, rng: &mut SimRng) -> Result<Step> {
        let xs = x.coords().ok_or_else(|| invalid("Metropolis-Hastings needs vector states"))?;
        let m = mh_step(&self.target, &self.proposal, xs, rng);
        let density = (m.accepted && m.next.as_slice() != xs).then_some(m.q * m.rho);
        Ok(Step { next: State::Vector(m.next), density })
    }

    fn density(&self, x: &State, y: &State) -> Option<f64> {
        let (xs, ys) = (x.coords()?, y.coords()?);
        let z: Vec<f64> = ys.iter().zip(xs).map(|(a, b)| a - b).collect();
        Some(self.proposal.density(&z) * acceptance(&self.target, &self.proposal, xs, ys))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metropolis::proposal::Increment;
    use crate::metropolis::target::{Support, TargetKind};
    use crate::rng::stream_rng;

    fn gaussian_1d() -> (Target, RwProposal) {
        let t = Target::new(TargetKind::TruncatedGaussian { mean: vec![0.5], sd: vec![0.2] }, Support::unit_box(1))
            .unwrap();
        let p = RwProposal::new(Increment::UniformCube { half_width: 0.25 }, 1, 0.25).unwrap();
        (t, p)
    }

    #[test]
    fn half_density_gives_half_acceptance() {
        let (t, p) = gaussian_1d();
        let x = [0.5];
        // pi(y) = pi(x) / 2 where (y - 0.5)^2 / (2 * 0.04) = ln 2
        let y = [0.5 + (0.08 * 2f64.ln()).sqrt()];
        assert!((acceptance(&t, &p, &x, &y) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_denominator_accepts() {
        let (t, p) = gaussian_1d();
        assert_eq!(acceptance(&t, &p, &[-0.5], &[-0.4]), 1.0);
        assert_eq!(acceptance(&t, &p, &[0.1], &[0.9]), 1.0);
    }

    #[test]
    fn uphill_moves_always_accept() {
        let (t, p) = gaussian_1d();
        assert_eq!(acceptance(&t, &p, &[0.3], &[0.45]), 1.0);
        assert_eq!(acceptance(&t, &p, &[0.9], &[1.05]), 0.0);
    }

    #[test]
    fn rejections_carry_no_density() {
        let (t, p) = gaussian_1d();
        let k = MhKernel::new(Arc::new(t), p).unwrap();
        let mut rng = stream_rng(3, 0);
        let mut x = State::scalar(0.95);
        let (mut acc, mut rej) = (0, 0);
        for _ in 0..2000 {
            let s = k.step(&x, &mut rng).unwrap();
            if s.next == x {
                assert!(s.density.is_none());
                rej += 1;
            } else {
                assert!(s.density.unwrap() > 0.0);
                acc += 1;
            }
            assert!((0.0..=1.0).contains(&s.next.coord(0)));
            x = s.next;
        }
        assert!(acc > 0 && rej > 0);
    }
}
