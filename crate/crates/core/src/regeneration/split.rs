//! Nummelin splitting.
//!
//! Retrospective mode simulates the chain with its own kernel and draws the
//! flag `Y_i` after seeing `X_{i+1}`, with probability
//! `delta psi(X_{i+1}) / p(X_i, X_{i+1})` when `X_i` is in the small set.
//! Flags come from a dedicated random stream, so the path of `X` is exactly the
//! one [`crate::chain::simulate`] produces for the same seed.
//!
//! Forward mode draws `Y_i ~ Bernoulli(delta)` first and then `X_{i+1}` from
//! `Psi` or from the residual kernel.

use rand::Rng;

use crate::chain::{at_step, ChainModel, State, Trajectory, REJECTION_CAP};
use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, SimRng};

/// Slack allowed on the regeneration probability before the certificate is rejected.
pub const RATIO_TOL: f64 = 1e-9;

const FLAG_STREAM_BIT: u64 = 1 << 63;

/// Runtime information collected while splitting.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SplitDiagnostics {
    /// Largest regeneration probability evaluated.
    pub max_ratio: f64,
    /// Number of ratio evaluations (steps from inside the small set).
    pub evaluations: u64,
}

/// Step-by-step retrospective splitter.
pub(crate) struct RetrospectiveSplitter<'a> {
    model: &'a ChainModel,
    chain_rng: SimRng,
    flag_rng: SimRng,
    current: State,
    step: usize,
    pub diagnostics: SplitDiagnostics,
}

impl<'a> RetrospectiveSplitter<'a> {
    pub fn new(model: &'a ChainModel, seed: u64, stream: u64) -> Result<Self> {
        let mut chain_rng = stream_rng(seed, stream);
        let flag_rng = stream_rng(seed, stream | FLAG_STREAM_BIT);
        let current = model.initial.sample(&mut chain_rng).map_err(at_step(0))?;
        Ok(Self { model, chain_rng, flag_rng, current, step: 0, diagnostics: SplitDiagnostics::default() })
    }

    /// Returns `(X_i, Y_i)` and advances to `X_{i+1}`.
    pub fn next_pair(&mut self) -> Result<(State, bool)> {
        let m = &self.model.minorization;
        let step = self.model.kernel.step(&self.current, &mut self.chain_rng).map_err(at_step(self.step + 1))?;
        let mut flag = false;
        if m.small_set.contains(&self.current) {
            if let Some(p) = step.density {
                let num = m.delta * m.psi.density(&step.next);
                let ratio = if num == 0.0 {
                    0.0
                } else if p > 0.0 {
                    num / p
                } else {
                    f64::INFINITY
                };
                self.diagnostics.evaluations += 1;
                self.diagnostics.max_ratio = self.diagnostics.max_ratio.max(ratio);
                if ratio > 1.0 + RATIO_TOL {
                    return Err(Error::CertificateViolation { x: self.current.clone(), y: step.next, ratio });
                }
                flag = self.flag_rng.random::<f64>() < ratio;
            }
        }
        self.step += 1;
        let x = std::mem::replace(&mut self.current, step.next);
        Ok((x, flag))
    }
}

/// Retrospective split of `n` steps, with runtime diagnostics.
pub fn split_retrospective_with_diagnostics(
    model: &ChainModel,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<(Trajectory, SplitDiagnostics)> {
    if n == 0 {
        return Err(invalid("trajectory length must be at least 1"));
    }
    let mut splitter = RetrospectiveSplitter::new(model, seed, stream)?;
    let mut states = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = splitter.next_pair()?;
        states.push(x);
        flags.push(y);
    }
    let traj = Trajectory { model_id: model.id.clone(), seed, dim: model.dim, states, regen_flags: Some(flags) };
    Ok((traj, splitter.diagnostics))
}

/// Simulates the split chain retrospectively (the default splitting mode).
pub fn simulate_split_retrospective(model: &ChainModel, n: usize, seed: u64) -> Result<Trajectory> {
    split_retrospective_with_diagnostics(model, n, seed, 0).map(|(t, _)| t)
}

pub fn simulate_split_retrospective_stream(model: &ChainModel, n: usize, seed: u64, stream: u64) -> Result<Trajectory> {
    split_retrospective_with_diagnostics(model, n, seed, stream).map(|(t, _)| t)
}

fn sample_residual(model: &ChainModel, x: &State, rng: &mut SimRng) -> Result<State> {
    if let Some(residual) = &model.residual {
        return residual.sample_residual(x, rng);
    }
    let m = &model.minorization;
    for _ in 0..REJECTION_CAP {
        let step = model.kernel.step(x, rng)?;
        let accept = match step.density {
            None => 1.0,
            Some(p) => {
                let num = m.delta * m.psi.density(&step.next);
                let ratio = if num == 0.0 {
                    0.0
                } else if p > 0.0 {
                    num / p
                } else {
                    f64::INFINITY
                };
                if ratio > 1.0 + RATIO_TOL {
                    return Err(Error::CertificateViolation { x: x.clone(), y: step.next, ratio });
                }
                (1.0 - ratio).max(0.0)
            }
        };
        if rng.random::<f64>() < accept {
            return Ok(step.next);
        }
    }
    Err(Error::RejectionCap { cap: REJECTION_CAP })
}

/// Simulates the split chain forward: flag first, then the mixture component.
pub fn simulate_split_forward(model: &ChainModel, n: usize, seed: u64) -> Result<Trajectory> {
    simulate_split_forward_stream(model, n, seed, 0)
}

pub fn simulate_split_forward_stream(model: &ChainModel, n: usize, seed: u64, stream: u64) -> Result<Trajectory> {
    if n == 0 {
        return Err(invalid("trajectory length must be at least 1"));
    }
    let m = &model.minorization;
    let mut rng = stream_rng(seed, stream);
    let mut states = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    let mut x = model.initial.sample(&mut rng).map_err(at_step(0))?;
    for i in 0..n {
        let in_set = m.small_set.contains(&x);
        let flag = in_set && (m.delta >= 1.0 || rng.random::<f64>() < m.delta);
        flags.push(flag);
        if i + 1 == n {
            states.push(x);
            break;
        }
        let next = if flag {
            m.psi.sample(&mut rng)
        } else if in_set {
            sample_residual(model, &x, &mut rng)
        } else {
            model.kernel.sample_next(&x, &mut rng)
        }
        .map_err(at_step(i + 1))?;
        states.push(std::mem::replace(&mut x, next));
    }
    Ok(Trajectory { model_id: model.id.clone(), seed, dim: model.dim, states, regen_flags: Some(flags) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{canonical_doeblin_chain, simulate, simulate_stream};

    #[test]
    fn retrospective_path_equals_plain_simulation() {
        let model = canonical_doeblin_chain(0.3).unwrap();
        let split = simulate_split_retrospective(&model, 2000, 17).unwrap();
        let plain = simulate(&model, 2000, 17).unwrap();
        assert_eq!(split.states, plain.states);
        let split = simulate_split_retrospective_stream(&model, 500, 17, 4).unwrap();
        assert_eq!(split.states, simulate_stream(&model, 500, 17, 4).unwrap().states);
    }

    #[test]
    fn delta_one_flags_every_step() {
        let model = canonical_doeblin_chain(1.0).unwrap();
        for t in
            [simulate_split_forward(&model, 200, 3).unwrap(), simulate_split_retrospective(&model, 200, 3).unwrap()]
        {
            assert!(t.regen_flags.unwrap().iter().all(|f| *f));
        }
    }

    #[test]
    fn doeblin_ratio_never_exceeds_one() {
        let model = canonical_doeblin_chain(0.3).unwrap();
        let (_, diag) = split_retrospective_with_diagnostics(&model, 10_000, 1, 0).unwrap();
        assert!(diag.max_ratio <= 1.0 + RATIO_TOL);
        assert_eq!(diag.evaluations, 10_000);
    }

    #[test]
    fn flag_frequency_is_delta() {
        // Bernoulli(0.3) per step: sd of the mean = sqrt(0.21 / 1e5)
        let model = canonical_doeblin_chain(0.3).unwrap();
        let n = 100_000;
        let se = (0.3f64 * 0.7 / n as f64).sqrt();
        for t in [simulate_split_retrospective(&model, n, 5).unwrap(), simulate_split_forward(&model, n, 6).unwrap()] {
            let freq = t.regen_flags.unwrap().iter().filter(|f| **f).count() as f64 / n as f64;
            assert!((freq - 0.3).abs() < 3.0 * se, "frequency {freq}");
        }
    }
}
