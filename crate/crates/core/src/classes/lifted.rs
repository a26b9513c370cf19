use serde::{Deserialize, Serialize};

use super::EvaluableClass;
use crate::error::{invalid, Result};
use crate::regeneration::Block;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftMode {
    /// `f'(B) = sum_{x in B} f(x)`.
    Full,
    /// `f'(B) 1{l(B) <= L}`.
    Truncated(f64),
}

/// A class lifted to blocks.
#[derive(Debug, Clone)]
pub struct LiftedClass {
    pub base: EvaluableClass,
    pub mode: LiftMode,
}

impl LiftedClass {
    pub fn new(base: EvaluableClass, mode: LiftMode) -> Result<Self> {
        if let LiftMode::Truncated(l) = mode {
            if !(l >= 0.0) {
                return Err(invalid(format!("truncation level must be nonnegative, got {l}")));
            }
        }
        Ok(Self { base, mode })
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    fn keeps(&self, b: &Block) -> bool {
        match self.mode {
            LiftMode::Full => true,
            LiftMode::Truncated(l) => b.len() as f64 <= l,
        }
    }

    /// Member-major matrix of lifted values on `blocks`.
    pub fn values(&self, blocks: &[Block]) -> Result<Vec<Vec<f64>>> {
        let mut v = self.base.block_values(blocks)?;
        for row in &mut v {
            for (x, b) in row.iter_mut().zip(blocks) {
                if !self.keeps(b) {
                    *x = 0.0;
                }
            }
        }
        Ok(v)
    }

    /// Envelope `U l` of the lifted class: `U L` when truncated, `U max l` otherwise.
    pub fn envelope(&self, blocks: &[Block]) -> f64 {
        let max_len = blocks.iter().map(Block::len).max().unwrap_or(0) as f64;
        match self.mode {
            LiftMode::Full => self.base.envelope() * max_len,
            LiftMode::Truncated(l) => self.base.envelope() * l.min(max_len),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::State;
    use proptest::prelude::*;

    fn blocks(lens: &[usize]) -> Vec<Block> {
        lens.iter().map(|&l| Block::from_states(vec![State::Finite(0); l])).collect()
    }

    #[test]
    fn truncated_members_vanish_on_long_blocks() {
        let base = EvaluableClass::table_default(vec![vec![1.0], vec![-0.5]]).unwrap();
        let lifted = LiftedClass::new(base, LiftMode::Truncated(2.0)).unwrap();
        let v = lifted.values(&blocks(&[1, 2, 3])).unwrap();
        assert_eq!(v, vec![vec![1.0, 2.0, 0.0], vec![-0.5, -1.0, 0.0]]);
    }

    proptest! {
        #[test]
        fn truncated_values_respect_envelope(lens in prop::collection::vec(1usize..10, 1..10), l in 0.0f64..12.0, f in -1.0f64..1.0) {
            let base = EvaluableClass::table_default(vec![vec![f]]).unwrap();
            let u = base.envelope();
            let lifted = LiftedClass::new(base, LiftMode::Truncated(l)).unwrap();
            for x in lifted.values(&blocks(&lens)).unwrap().into_iter().flatten() {
                prop_assert!(x.abs() <= u * l + 1e-12);
            }
        }
    }
}
