//! Built-in chains with known structure, used as test beds.

use std::sync::Arc;

use rand::Rng;

use super::{
    ChainModel, FiniteKernel, Measure, Minorization, ResidualKernel, SmallSet, State, Step, TransitionKernel,
    TransitionMatrix,
};
use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;

const DOMINATION_TOL: f64 = 1e-12;

/// Probability vector over the labels of a finite chain.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl FiniteMeasure {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(invalid("probability vector must be nonempty and nonnegative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("probabilities sum to {sum}, not 1")));
        }
        let cumulative = probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self { probs, cumulative })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl Measure for FiniteMeasure {
    fn density(&self, y: &State) -> f64 {
        match y {
            State::Finite(l) => self.probs.get(*l).copied().unwrap_or(0.0),
            State::Vector(_) => 0.0,
        }
    }

    fn sample(&self, rng: &mut SimRng) -> Result<State> {
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u: f64 = rng.random::<f64>() * total;
        let mut idx = self.cumulative.partition_point(|&c| c <= u).min(self.probs.len() - 1);
        while self.probs[idx] == 0.0 && idx > 0 {
            idx -= 1;
        }
        Ok(State::Finite(idx))
    }
}

/// Dirac mass, used for fixed starting points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMass(pub State);

impl Measure for PointMass {
    fn density(&self, y: &State) -> f64 {
        if *y == self.0 {
            1.0
        } else {
            0.0
        }
    }

    fn sample(&self, _rng: &mut SimRng) -> Result<State> {
        Ok(self.0.clone())
    }
}

/// Uniform law on an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
    volume: f64,
}

impl UniformBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(invalid("box bounds must satisfy lo < hi coordinatewise"));
        }
        let volume = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        Ok(Self { lo, hi, volume })
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(vec![0.0; dim], vec![1.0; dim]).expect("unit box")
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }
}

impl Measure for UniformBox {
    fn density(&self, y: &State) -> f64 {
        match y.coords() {
            Some(v) if self.contains(v) => 1.0 / self.volume,
            _ => 0.0,
        }
    }

    fn sample(&self, rng: &mut SimRng) -> Result<State> {
        Ok(State::Vector(self.lo.iter().zip(&self.hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect()))
    }
}

/// Random walk on the circle `[0, 1)` with uniform increments on `[-w, w]`.
///
/// The uniform law is invariant, so any Doeblin mixture with a uniform
/// regeneration measure keeps the uniform stationary law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularWalk {
    half_width: f64,
}

impl CircularWalk {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width < 0.5) {
            return Err(invalid("circular walk half-width must lie in (0, 0.5)"));
        }
        Ok(Self { half_width })
    }
}

impl ResidualKernel for CircularWalk {
    fn sample_residual(&self, x: &State, rng: &mut SimRng) -> Result<State> {
        let x = x.coord(0);
        let z = self.half_width * (2.0 * rng.random::<f64>() - 1.0);
        let mut y = (x + z).rem_euclid(1.0);
        if y >= 1.0 {
            y = 0.0;
        }
        Ok(State::scalar(y))
    }

    fn residual_density(&self, x: &State, y: &State) -> f64 {
        let d = (x.coord(0) - y.coord(0)).abs();
        if d.min(1.0 - d) <= self.half_width {
            0.5 / self.half_width
        } else {
            0.0
        }
    }
}

/// Residual rows of a finite chain on its small set.
struct MatrixResidual {
    residual: TransitionMatrix,
}

impl ResidualKernel for MatrixResidual {
    fn sample_residual(&self, x: &State, rng: &mut SimRng) -> Result<State> {
        let l = x.label().ok_or_else(|| invalid("finite residual needs a label"))?;
        Ok(State::Finite(self.residual.sample_row(l, rng)))
    }

    fn residual_density(&self, x: &State, y: &State) -> f64 {
        match (x, y) {
            (State::Finite(a), State::Finite(b)) => self.residual.get(*a, *b),
            _ => 0.0,
        }
    }
}

/// Mixture kernel `P(x, .) = delta Psi + (1 - delta) R(x, .)`.
#[derive(Clone)]
pub struct DoeblinKernel {
    delta: f64,
    psi: Arc<dyn Measure>,
    residual: Arc<dyn ResidualKernel>,
}

impl TransitionKernel for DoeblinKernel {
    fn step(&self, x: &State, rng: &mut SimRng) -> Result<Step> {
        let next = if self.delta >= 1.0 || rng.random::<f64>() < self.delta {
            self.psi.sample(rng)?
        } else {
            self.residual.sample_residual(x, rng)?
        };
        let density = self.density(x, &next);
        Ok(Step { next, density })
    }

    fn density(&self, x: &State, y: &State) -> Option<f64> {
        let r = if self.delta < 1.0 { self.residual.residual_density(x, y) } else { 0.0 };
        Some(self.delta * self.psi.density(y) + (1.0 - self.delta) * r)
    }
}

/// Uniformly ergodic chain whose whole state space is small:
/// `P(x, .) = delta Psi + (1 - delta) R(x, .)`. Regeneration times are
/// geometric with parameter `delta`.
pub fn builtin_doeblin_chain(
    id: impl Into<String>,
    dim: usize,
    delta: f64,
    residual: Arc<dyn ResidualKernel>,
    psi: Arc<dyn Measure>,
    initial: Arc<dyn Measure>,
) -> Result<ChainModel> {
    let minorization = Minorization::new(delta, SmallSet::Whole, psi.clone())?;
    let kernel = DoeblinKernel { delta, psi, residual: residual.clone() };
    Ok(ChainModel { id: id.into(), dim, kernel: Arc::new(kernel), initial, minorization, residual: Some(residual) })
}

/// The reference Doeblin chain on `[0, 1)`: regenerate from the uniform law
/// with probability `delta`, otherwise take a circular step of half-width 0.1.
/// Its stationary law is uniform and it starts from stationarity.
pub fn canonical_doeblin_chain(delta: f64) -> Result<ChainModel> {
    let uniform: Arc<dyn Measure> = Arc::new(UniformBox::unit(1));
    builtin_doeblin_chain(
        format!("doeblin-circle(delta={delta})"),
        1,
        delta,
        Arc::new(CircularWalk::new(0.1)?),
        uniform.clone(),
        uniform,
    )
}

/// Finite chain with a minorization on `small_set`.
///
/// When `psi` is `None` the regeneration measure is the normalized column
/// minimum of the rows in the small set. Domination `P(x, y) >= delta Psi(y)`
/// is checked exactly for every `x` in the small set.
pub fn finite_chain_model(
    id: impl Into<String>,
    matrix: TransitionMatrix,
    initial: Arc<dyn Measure>,
    small_set: SmallSet,
    delta: f64,
    psi: Option<Vec<f64>>,
) -> Result<ChainModel> {
    let k = matrix.size();
    let in_set: Vec<usize> = (0..k).filter(|l| small_set.contains(&State::Finite(*l))).collect();
    if in_set.is_empty() {
        return Err(invalid("small set contains no state of the chain"));
    }
    let psi = match psi {
        Some(p) => p,
        None => {
            let mins: Vec<f64> =
                (0..k).map(|y| in_set.iter().map(|&x| matrix.get(x, y)).fold(f64::INFINITY, f64::min)).collect();
            let total: f64 = mins.iter().sum();
            if total <= 0.0 {
                return Err(invalid("rows of the small set share no common mass"));
            }
            mins.iter().map(|m| m / total).collect()
        }
    };
    if psi.len() != k {
        return Err(invalid("regeneration measure has the wrong length"));
    }
    let psi_measure = FiniteMeasure::new(psi.clone())?;
    let minorization = Minorization::new(delta, small_set, Arc::new(psi_measure))?;
    for &x in &in_set {
        for y in 0..k {
            let p = matrix.get(x, y);
            let bound = delta * psi[y];
            if p < bound - DOMINATION_TOL {
                return Err(Error::Domination { x, y, p, bound });
            }
        }
    }
    let residual: Option<Arc<dyn ResidualKernel>> = if delta < 1.0 {
        let rows = (0..k)
            .map(|x| {
                if !in_set.contains(&x) {
                    return matrix.row(x).to_vec();
                }
                let raw: Vec<f64> =
                    (0..k).map(|y| ((matrix.get(x, y) - delta * psi[y]) / (1.0 - delta)).max(0.0)).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|r| r / s).collect()
            })
            .collect();
        Some(Arc::new(MatrixResidual { residual: TransitionMatrix::new(rows)? }))
    } else {
        None
    };
    Ok(ChainModel {
        id: id.into(),
        dim: 0,
        kernel: Arc::new(FiniteKernel::new(matrix)),
        initial,
        minorization,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::simulate;
    use crate::rng::stream_rng;

    #[test]
    fn finite_domination_is_checked() {
        let m = TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let init: Arc<dyn Measure> = Arc::new(PointMass(State::Finite(0)));
        // column minima (0.2, 0.5) carry mass 0.7
        let ok = finite_chain_model("m", m.clone(), init.clone(), SmallSet::Whole, 0.7, None);
        assert!(ok.is_ok());
        let err = finite_chain_model("m", m, init, SmallSet::Whole, 0.8, None).unwrap_err();
        assert!(matches!(err, Error::Domination { .. }));
    }

    #[test]
    fn delta_one_draws_only_from_psi() {
        let model = canonical_doeblin_chain(1.0).unwrap();
        let mut rng = stream_rng(1, 0);
        let x = State::scalar(0.5);
        let s = model.kernel.step(&x, &mut rng).unwrap();
        assert_eq!(s.density, Some(1.0));
    }

    #[test]
    fn canonical_chain_stays_in_unit_interval() {
        let model = canonical_doeblin_chain(0.3).unwrap();
        let t = simulate(&model, 10_000, 5).unwrap();
        assert!(t.states.iter().all(|s| (0.0..1.0).contains(&s.coord(0))));
        let mean = t.coordinate(0).iter().sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.03);
    }

    #[test]
    fn circular_density_wraps() {
        let w = CircularWalk::new(0.1).unwrap();
        assert_eq!(w.residual_density(&State::scalar(0.02), &State::scalar(0.95)), 5.0);
        assert_eq!(w.residual_density(&State::scalar(0.5), &State::scalar(0.65)), 0.0);
    }
}
