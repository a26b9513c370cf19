//! States, transition kernels and chain models.
//!
//! Reference measures: densities of finite chains are taken with respect to
//! counting measure, densities of vector chains with respect to Lebesgue
//! measure on R^d.

mod builtin;
mod io;
mod matrix;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{stream_rng, SimRng};

pub use builtin::{
    builtin_doeblin_chain, canonical_doeblin_chain, finite_chain_model, CircularWalk, DoeblinKernel, FiniteMeasure,
    PointMass, UniformBox,
};
pub use io::{read_trajectory_csv, write_trajectory_csv};
pub use matrix::{exact_stationary, FiniteKernel, TransitionMatrix};

/// Maximum number of proposals a rejection sampler may use for one draw.
pub const REJECTION_CAP: usize = 1_000_000;

/// A point of the state space: a label of a finite chain or a point of R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum State {
    Finite(usize),
    Vector(Vec<f64>),
}

impl State {
    pub fn scalar(x: f64) -> Self {
        State::Vector(vec![x])
    }

    /// Coordinate `k`; the label itself for finite states.
    pub fn coord(&self, k: usize) -> f64 {
        match self {
            State::Finite(l) => *l as f64,
            State::Vector(v) => v[k],
        }
    }

    pub fn label(&self) -> Option<usize> {
        match self {
            State::Finite(l) => Some(*l),
            State::Vector(_) => None,
        }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            State::Finite(_) => None,
            State::Vector(v) => Some(v),
        }
    }

    /// Sum of coordinates (the label for finite states).
    pub fn coord_sum(&self) -> f64 {
        match self {
            State::Finite(l) => *l as f64,
            State::Vector(v) => v.iter().sum(),
        }
    }

    pub(crate) fn key(&self) -> StateKey {
        match self {
            State::Finite(l) => StateKey::Finite(*l),
            State::Vector(v) => StateKey::Vector(v.iter().map(|c| c.to_bits()).collect()),
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Finite(l) => write!(f, "#{l}"),
            State::Vector(v) => {
                write!(f, "(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Hashable identity of a state (bitwise for coordinates).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum StateKey {
    Finite(usize),
    Vector(Vec<u64>),
}

/// One realized transition.
///
/// `density` is the density of the absolutely continuous part of `P(x, .)` at
/// the new state, or `None` when the move landed on an atom of the kernel
/// (the rejection atom of Metropolis-Hastings).
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub next: State,
    pub density: Option<f64>,
}

pub trait TransitionKernel: Send + Sync {
    fn step(&self, x: &State, rng: &mut SimRng) -> Result<Step>;

    fn sample_next(&self, x: &State, rng: &mut SimRng) -> Result<State> {
        self.step(x, rng).map(|s| s.next)
    }

    /// Transition density `p(x, y)` against the reference measure, if known.
    fn density(&self, _x: &State, _y: &State) -> Option<f64> {
        None
    }

    fn matrix(&self) -> Option<&TransitionMatrix> {
        None
    }
}

/// A probability measure that can be sampled and has a density.
pub trait Measure: Send + Sync {
    fn density(&self, y: &State) -> f64;
    fn sample(&self, rng: &mut SimRng) -> Result<State>;
}

/// Exact sampler for the residual kernel `(P(x,.) - delta Psi) / (1 - delta)`.
pub trait ResidualKernel: Send + Sync {
    fn sample_residual(&self, x: &State, rng: &mut SimRng) -> Result<State>;
    fn residual_density(&self, x: &State, y: &State) -> f64;
}

/// The small set `S` of a minorization condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SmallSet {
    Whole,
    Labels(Vec<usize>),
    /// Closed Euclidean ball, intersected with the state space.
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
}

impl SmallSet {
    pub fn contains(&self, x: &State) -> bool {
        match (self, x) {
            (SmallSet::Whole, _) => true,
            (SmallSet::Labels(ls), State::Finite(l)) => ls.contains(l),
            (SmallSet::Ball { center, radius }, State::Vector(v)) => {
                let d2: f64 = center.iter().zip(v).map(|(c, a)| (c - a).powi(2)).sum();
                d2 <= radius * radius
            }
            _ => false,
        }
    }
}

/// `P(x, .) >= delta * Psi` for every `x` in the small set.
#[derive(Clone)]
pub struct Minorization {
    pub delta: f64,
    pub small_set: SmallSet,
    pub psi: Arc<dyn Measure>,
}

impl Minorization {
    pub fn new(delta: f64, small_set: SmallSet, psi: Arc<dyn Measure>) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(invalid(format!("minorization constant {delta} outside (0, 1]")));
        }
        Ok(Self { delta, small_set, psi })
    }
}

impl fmt::Debug for Minorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Minorization")
            .field("delta", &self.delta)
            .field("small_set", &self.small_set)
            .finish_non_exhaustive()
    }
}

/// A Markov chain together with the minorization used to split it.
#[derive(Clone)]
pub struct ChainModel {
    pub id: String,
    /// 0 for finite chains.
    pub dim: usize,
    pub kernel: Arc<dyn TransitionKernel>,
    pub initial: Arc<dyn Measure>,
    pub minorization: Minorization,
    /// Exact residual sampler for forward splitting; rejection is used otherwise.
    pub residual: Option<Arc<dyn ResidualKernel>>,
}

impl fmt::Debug for ChainModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChainModel")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("minorization", &self.minorization)
            .finish_non_exhaustive()
    }
}

impl ChainModel {
    pub fn with_initial(mut self, initial: Arc<dyn Measure>) -> Self {
        self.initial = initial;
        self
    }
}

/// A realized path, optionally carrying the split-chain flags `Y_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub model_id: String,
    pub seed: u64,
    pub dim: usize,
    pub states: Vec<State>,
    pub regen_flags: Option<Vec<bool>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Coordinate `k` of every state.
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.coord(k)).collect()
    }
}

pub(crate) fn at_step(step: usize) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        e @ Error::CertificateViolation { .. } => e,
        e => Error::Sampling { step, source: Box::new(e) },
    }
}

/// Simulates `n` states of the chain: `X_0 ~ nu`, `X_{i+1} ~ P(X_i, .)`.
pub fn simulate(model: &ChainModel, n: usize, seed: u64) -> Result<Trajectory> {
    simulate_stream(model, n, seed, 0)
}

/// As [`simulate`], drawing from stream `stream` of `seed`.
pub fn simulate_stream(model: &ChainModel, n: usize, seed: u64, stream: u64) -> Result<Trajectory> {
    if n == 0 {
        return Err(invalid("trajectory length must be at least 1"));
    }
    let mut rng = stream_rng(seed, stream);
    let mut states = Vec::with_capacity(n);
    let mut x = model.initial.sample(&mut rng).map_err(at_step(0))?;
    for i in 1..n {
        let next = model.kernel.sample_next(&x, &mut rng).map_err(at_step(i))?;
        states.push(std::mem::replace(&mut x, next));
    }
    states.push(x);
    Ok(Trajectory { model_id: model.id.clone(), seed, dim: model.dim, states, regen_flags: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(rows: Vec<Vec<f64>>, start: usize) -> ChainModel {
        let m = TransitionMatrix::new(rows).unwrap();
        finite_chain_model(
            "two-state",
            m,
            Arc::new(PointMass(State::Finite(start))),
            SmallSet::Labels(vec![start]),
            1.0,
            None,
        )
        .unwrap()
    }

    #[test]
    fn identity_kernel_is_absorbing() {
        let model = two_state(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 0);
        let t = simulate(&model, 5, 3).unwrap();
        assert!(t.states.iter().all(|s| *s == State::Finite(0)));
        assert_eq!(t.len(), 5);
    }

    #[test]
    fn same_seed_same_path() {
        let model = two_state(vec![vec![0.5, 0.5], vec![0.2, 0.8]], 0);
        let a = simulate(&model, 1000, 11).unwrap();
        let b = simulate(&model, 1000, 11).unwrap();
        let c = simulate(&model, 1000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.states, c.states);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn zero_length_is_rejected() {
        let model = two_state(vec![vec![0.5, 0.5], vec![0.2, 0.8]], 0);
        assert!(matches!(simulate(&model, 0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn small_set_membership() {
        let ball = SmallSet::Ball { center: vec![0.5], radius: 0.1 };
        assert!(ball.contains(&State::scalar(0.55)));
        assert!(ball.contains(&State::scalar(0.6)));
        assert!(!ball.contains(&State::scalar(0.61)));
        assert!(!ball.contains(&State::Finite(0)));
        assert!(SmallSet::Labels(vec![1]).contains(&State::Finite(1)));
    }

    #[test]
    fn minorization_constant_range() {
        let psi: Arc<dyn Measure> = Arc::new(FiniteMeasure::new(vec![1.0]).unwrap());
        assert!(Minorization::new(0.0, SmallSet::Whole, psi.clone()).is_err());
        assert!(Minorization::new(1.5, SmallSet::Whole, psi.clone()).is_err());
        assert!(Minorization::new(1.0, SmallSet::Whole, psi).is_ok());
    }
}
