use serde::{Deserialize, Serialize};

use super::split::RetrospectiveSplitter;
use crate::chain::{ChainModel, State, Trajectory};
use crate::error::{invalid, Error, Result};

/// A segment of the trajectory between regenerations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// 0 for the initial block, `l_n` for the trailing block.
    pub index: usize,
    /// Position of the first state in the trajectory.
    pub start: usize,
    pub states: Vec<State>,
}

impl Block {
    pub fn new(index: usize, start: usize, states: Vec<State>) -> Self {
        Self { index, start, states }
    }

    /// Builds a block from bare states (index and position unknown).
    pub fn from_states(states: Vec<State>) -> Self {
        Self { index: 0, start: 0, states }
    }

    /// Block length `l(B)`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Inclusive index of the last state.
    pub fn end(&self) -> usize {
        self.start + self.states.len() - 1
    }

    /// Block sum `f'(B) = sum over x in B of f(x)`.
    pub fn sum<F: Fn(&State) -> f64 + ?Sized>(&self, f: &F) -> f64 {
        self.states.iter().map(f).sum()
    }
}

/// Decomposition of a flagged trajectory into initial, complete and trailing blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSet {
    pub initial: Option<Block>,
    pub complete: Vec<Block>,
    pub trailing: Option<Block>,
    /// Number of regenerations (flags set).
    pub l_n: usize,
}

/// Block boundaries as written to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockBoundaries {
    pub n: usize,
    pub l_n: usize,
    pub initial: Option<(usize, usize)>,
    pub complete: Vec<(usize, usize)>,
    pub trailing: Option<(usize, usize)>,
}

impl BlockSet {
    pub fn lengths(&self) -> Vec<usize> {
        self.complete.iter().map(Block::len).collect()
    }

    pub fn total_len(&self) -> usize {
        self.initial.as_ref().map_or(0, Block::len)
            + self.complete.iter().map(Block::len).sum::<usize>()
            + self.trailing.as_ref().map_or(0, Block::len)
    }

    /// Concatenation of all blocks, which recovers the trajectory.
    pub fn concat_states(&self) -> Vec<State> {
        let mut out = Vec::with_capacity(self.total_len());
        for b in self.initial.iter().chain(&self.complete).chain(&self.trailing) {
            out.extend(b.states.iter().cloned());
        }
        out
    }

    pub fn boundaries(&self) -> BlockBoundaries {
        let span = |b: &Block| (b.start, b.end());
        BlockBoundaries {
            n: self.total_len(),
            l_n: self.l_n,
            initial: self.initial.as_ref().map(span),
            complete: self.complete.iter().map(span).collect(),
            trailing: self.trailing.as_ref().map(span),
        }
    }

    pub fn boundaries_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.boundaries())?)
    }

    /// Wraps already-complete blocks (e.g. from [`simulate_blocks`]).
    pub fn from_complete(complete: Vec<Block>) -> Self {
        let l_n = complete.len() + 1;
        Self { initial: None, complete, trailing: None, l_n }
    }
}

/// Cuts a flagged trajectory at its regeneration times.
///
/// With flags at positions `t_1 < ... < t_l`, the initial block holds steps
/// `0..=t_1`, complete block `k` holds `t_k + 1..=t_{k+1}` and the trailing
/// block holds `t_l + 1..n`.
pub fn extract_blocks(traj: &Trajectory) -> Result<BlockSet> {
    let flags = traj.regen_flags.as_ref().ok_or(Error::MissingFlags)?;
    if flags.len() != traj.states.len() {
        return Err(invalid("flag and state sequences differ in length"));
    }
    let times: Vec<usize> = flags.iter().enumerate().filter(|(_, f)| **f).map(|(i, _)| i).collect();
    let n = traj.states.len();
    let l_n = times.len();
    let slice = |from: usize, to: usize| traj.states[from..=to].to_vec();
    if l_n == 0 {
        let initial = (n > 0).then(|| Block::new(0, 0, slice(0, n - 1)));
        return Ok(BlockSet { initial, complete: Vec::new(), trailing: None, l_n });
    }
    let initial = Some(Block::new(0, 0, slice(0, times[0])));
    let complete =
        times.windows(2).enumerate().map(|(k, w)| Block::new(k + 1, w[0] + 1, slice(w[0] + 1, w[1]))).collect();
    let last = times[l_n - 1];
    let trailing = (last + 1 < n).then(|| Block::new(l_n, last + 1, slice(last + 1, n - 1)));
    Ok(BlockSet { initial, complete, trailing, l_n })
}

/// Simulates the split chain until `n_blocks` complete blocks are collected,
/// discarding the initial block.
pub fn simulate_blocks(model: &ChainModel, n_blocks: usize, seed: u64, stream: u64) -> Result<Vec<Block>> {
    if n_blocks == 0 {
        return Err(invalid("need at least one block"));
    }
    let mut splitter = RetrospectiveSplitter::new(model, seed, stream)?;
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut pos = 0usize;
    let mut started = false;
    let mut current: Vec<State> = Vec::new();
    let mut start = 0usize;
    while blocks.len() < n_blocks {
        let (x, flag) = splitter.next_pair()?;
        if started {
            current.push(x);
        }
        if flag {
            if started {
                blocks.push(Block::new(blocks.len() + 1, start, std::mem::take(&mut current)));
            }
            started = true;
            start = pos + 1;
        }
        pos += 1;
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(n: usize, flags_at: &[usize]) -> Trajectory {
        Trajectory {
            model_id: "t".into(),
            seed: 0,
            dim: 0,
            states: (0..n).map(State::Finite).collect(),
            regen_flags: Some((0..n).map(|i| flags_at.contains(&i)).collect()),
        }
    }

    fn labels(b: &Block) -> Vec<usize> {
        b.states.iter().map(|s| s.label().unwrap()).collect()
    }

    #[test]
    fn flags_at_two_and_five() {
        let bs = extract_blocks(&traj(8, &[2, 5])).unwrap();
        assert_eq!(labels(bs.initial.as_ref().unwrap()), vec![0, 1, 2]);
        assert_eq!(bs.complete.len(), 1);
        assert_eq!(labels(&bs.complete[0]), vec![3, 4, 5]);
        assert_eq!(labels(bs.trailing.as_ref().unwrap()), vec![6, 7]);
        assert_eq!(bs.l_n, 2);
        let b = bs.boundaries();
        assert_eq!(b.initial, Some((0, 2)));
        assert_eq!(b.complete, vec![(3, 5)]);
        assert_eq!(b.trailing, Some((6, 7)));
    }

    #[test]
    fn no_flags_means_no_complete_blocks() {
        let bs = extract_blocks(&traj(6, &[])).unwrap();
        assert_eq!(bs.l_n, 0);
        assert!(bs.complete.is_empty());
        assert_eq!(bs.initial.as_ref().unwrap().len(), 6);
        assert!(bs.trailing.is_none());
    }

    #[test]
    fn flags_at_both_ends() {
        let bs = extract_blocks(&traj(5, &[0, 4])).unwrap();
        assert_eq!(labels(bs.initial.as_ref().unwrap()), vec![0]);
        assert_eq!(labels(&bs.complete[0]), vec![1, 2, 3, 4]);
        assert!(bs.trailing.is_none());
    }

    #[test]
    fn missing_flags_is_an_error() {
        let mut t = traj(3, &[]);
        t.regen_flags = None;
        assert!(matches!(extract_blocks(&t), Err(Error::MissingFlags)));
    }

    #[test]
    fn complete_count_is_l_n_minus_one() {
        let bs = extract_blocks(&traj(20, &[1, 3, 4, 9, 15])).unwrap();
        assert_eq!(bs.complete.len(), bs.l_n - 1);
        assert_eq!(bs.lengths(), vec![2, 1, 5, 6]);
    }

    proptest::proptest! {
        #[test]
        fn concatenation_recovers_trajectory(flags in proptest::collection::vec(proptest::bool::ANY, 1..200)) {
            let n = flags.len();
            let t = Trajectory {
                model_id: "t".into(),
                seed: 0,
                dim: 0,
                states: (0..n).map(State::Finite).collect(),
                regen_flags: Some(flags.clone()),
            };
            let bs = extract_blocks(&t).unwrap();
            proptest::prop_assert_eq!(bs.concat_states(), t.states);
            proptest::prop_assert_eq!(bs.l_n, flags.iter().filter(|f| **f).count());
            proptest::prop_assert_eq!(bs.complete.len(), bs.l_n.saturating_sub(1));
        }
    }
}
