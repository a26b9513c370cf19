//! Run manifests: what was run, with which seeds, and what it produced.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Seed and random stream of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationSeed {
    /// Sample size, or the instance index for randomized checks.
    pub n: usize,
    pub replication: usize,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    /// sha256 of the canonical JSON form of the effective configuration.
    pub config_hash: String,
    pub version: String,
    pub started_unix_secs: u64,
    pub wall_clock_secs: f64,
    pub jobs: usize,
    pub seeds: Vec<ReplicationSeed>,
    /// sha256 of every output file, keyed by file name.
    pub outputs: BTreeMap<String, String>,
    pub pass: Option<bool>,
    pub summary: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

/// Streams `i * replications + r` for every size index `i` and replication `r`.
pub fn grid_seeds(n_grid: &[usize], replications: usize, seed: u64) -> Vec<ReplicationSeed> {
    n_grid
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| {
            (0..replications).map(move |r| ReplicationSeed {
                n,
                replication: r,
                seed,
                stream: (i * replications + r) as u64,
            })
        })
        .collect()
}
