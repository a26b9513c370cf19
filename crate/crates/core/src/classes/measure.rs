use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::chain::State;
use crate::error::{invalid, Result};
use crate::regeneration::Block;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Finitely supported probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure<T> {
    atoms: Vec<(T, f64)>,
}

impl<T> EmpiricalMeasure<T> {
    pub fn new(atoms: Vec<(T, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("measure has no atoms"));
        }
        if atoms.iter().any(|(_, w)| !(*w >= 0.0 && w.is_finite())) {
            return Err(invalid("atom weights must be finite and nonnegative"));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(invalid(format!("atom weights sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    /// Normalizes nonnegative weights.
    pub fn normalized(atoms: Vec<(T, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(invalid("total weight must be positive"));
        }
        Self::new(atoms.into_iter().map(|(x, w)| (x, w / total)).collect())
    }

    pub fn uniform(points: Vec<T>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        Self::new(points.into_iter().map(|x| (x, w)).collect())
    }

    pub fn atoms(&self) -> &[(T, f64)] {
        &self.atoms
    }

    pub fn points(&self) -> impl Iterator<Item = &T> {
        self.atoms.iter().map(|(x, _)| x)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|(_, w)| *w).collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `int g dQ`.
    pub fn integrate(&self, g: impl Fn(&T) -> f64) -> f64 {
        self.atoms.iter().map(|(x, w)| w * g(x)).sum()
    }
}

impl EmpiricalMeasure<Block> {
    /// `Q'(l^2)`.
    pub fn length_second_moment(&self) -> f64 {
        self.integrate(|b| (b.len() * b.len()) as f64)
    }

    /// `||l||_{L2(Q')}`.
    pub fn length_norm(&self) -> f64 {
        self.length_second_moment().sqrt()
    }
}

fn lift_with(q: &EmpiricalMeasure<Block>, keep: impl Fn(&Block) -> bool) -> Result<EmpiricalMeasure<State>> {
    let mut index = HashMap::new();
    let mut atoms: Vec<(State, f64)> = Vec::new();
    let mut norm = 0.0;
    for (b, w) in q.atoms() {
        if b.is_empty() || !keep(b) {
            continue;
        }
        let l = b.len() as f64;
        norm += w * l * l;
        for x in &b.states {
            let slot = *index.entry(x.key()).or_insert_with(|| {
                atoms.push((x.clone(), 0.0));
                atoms.len() - 1
            });
            atoms[slot].1 += w * l;
        }
    }
    if !(norm > 0.0) {
        return Err(invalid("lifted measure is undefined: Q'(l^2) = 0"));
    }
    for a in &mut atoms {
        a.1 /= norm;
    }
    EmpiricalMeasure::new(atoms)
}

/// State-level measure `Q(A) = E_Q'[l(B) M(B, A)] / Q'(l^2)`, where `M(B, .)`
/// counts the visits of block `B`.
pub fn lift_measure(q: &EmpiricalMeasure<Block>) -> Result<EmpiricalMeasure<State>> {
    lift_with(q, |_| true)
}

/// As [`lift_measure`] with `l` replaced by `l 1{l <= L}`.
pub fn lift_measure_truncated(q: &EmpiricalMeasure<Block>, l_max: f64) -> Result<EmpiricalMeasure<State>> {
    lift_with(q, |b| b.len() as f64 <= l_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(x: f64) -> State {
        State::scalar(x)
    }

    fn block(xs: &[f64]) -> Block {
        Block::from_states(xs.iter().map(|x| s(*x)).collect())
    }

    fn weight_of(m: &EmpiricalMeasure<State>, x: f64) -> f64 {
        m.atoms().iter().filter(|(p, _)| *p == s(x)).map(|(_, w)| w).sum()
    }

    #[test]
    fn single_point_block() {
        let q = EmpiricalMeasure::new(vec![(block(&[1.0]), 1.0)]).unwrap();
        let m = lift_measure(&q).unwrap();
        assert_eq!(m.atoms(), &[(s(1.0), 1.0)]);
    }

    #[test]
    fn two_point_block_splits_evenly() {
        let q = EmpiricalMeasure::new(vec![(block(&[1.0, 2.0]), 1.0)]).unwrap();
        let m = lift_measure(&q).unwrap();
        assert_eq!(weight_of(&m, 1.0), 0.5);
        assert_eq!(weight_of(&m, 2.0), 0.5);
    }

    #[test]
    fn repeated_point_block() {
        let q = EmpiricalMeasure::uniform(vec![block(&[1.0]), block(&[2.0, 2.0])]).unwrap();
        let m = lift_measure(&q).unwrap();
        assert!((weight_of(&m, 1.0) - 0.2).abs() < 1e-15);
        assert!((weight_of(&m, 2.0) - 0.8).abs() < 1e-15);
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn truncation_drops_long_blocks() {
        let q = EmpiricalMeasure::uniform(vec![block(&[1.0]), block(&[2.0, 3.0])]).unwrap();
        let m = lift_measure_truncated(&q, 1.0).unwrap();
        assert_eq!(m.atoms(), &[(s(1.0), 1.0)]);
        assert!(lift_measure_truncated(&q, 0.5).is_err());
    }

    #[test]
    fn invalid_weights_are_rejected() {
        assert!(EmpiricalMeasure::new(vec![(1, 0.5), (2, 0.4)]).is_err());
        assert!(EmpiricalMeasure::new(vec![(1, -0.5), (2, 1.5)]).is_err());
        assert!(EmpiricalMeasure::<u8>::new(vec![]).is_err());
    }

    proptest! {
        #[test]
        fn lifted_weights_sum_to_one(
            blocks in prop::collection::vec(prop::collection::vec(0u8..5, 1..6), 1..8),
            raw in prop::collection::vec(0.01f64..1.0, 8),
        ) {
            let atoms = blocks.iter().zip(&raw)
                .map(|(b, w)| (block(&b.iter().map(|x| *x as f64).collect::<Vec<_>>()), *w))
                .collect();
            let q = EmpiricalMeasure::normalized(atoms).unwrap();
            let m = lift_measure(&q).unwrap();
            let total: f64 = m.weights().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
