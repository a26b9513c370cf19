//! Experiment configuration files.
//!
//! Every field is optional at parse time so that [`crate::validate`] can
//! report all missing or inconsistent fields at once.

use std::fmt;
use std::path::Path;

use regenrad::metropolis::{Increment, MhStart, Support, TargetKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Blocks,
    Rademacher,
    Bounds,
    KdeRate,
    MhCredible,
    VerifyLemmas,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Blocks => "blocks",
            ExperimentKind::Rademacher => "rademacher",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::KdeRate => "kde-rate",
            ExperimentKind::MhCredible => "mh-credible",
            ExperimentKind::VerifyLemmas => "verify-lemmas",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub n_grid: Option<Vec<usize>>,
    pub replications: Option<usize>,
    pub model: Option<ModelSpec>,
    pub class: Option<ClassSpec>,
    pub constants: Option<Constants>,
    pub output: Option<OutputSpec>,
    pub simulate: Option<SimulateSection>,
    pub rademacher: Option<RademacherSection>,
    pub bounds: Option<BoundsSection>,
    pub kde: Option<KdeSection>,
    pub mh: Option<MhSection>,
    pub lemmas: Option<LemmasSection>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    /// Canonical serialization used for the configuration hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }
}

/// The chain to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Finite chain given by its transition matrix.
    Finite { matrix: Vec<Vec<f64>>, initial: Vec<f64>, small_set: Vec<usize>, delta: f64, psi: Option<Vec<f64>> },
    /// Circular Doeblin chain on `[0, 1)` with uniform stationary law.
    Doeblin { delta: f64 },
    /// Random-walk Metropolis-Hastings, either built in or spelled out.
    Mh {
        builtin: Option<String>,
        target: Option<TargetKind>,
        support: Option<Support>,
        increment: Option<Increment>,
        eps: Option<f64>,
        center: Option<Vec<f64>>,
        start: Option<MhStart>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassSpec {
    Halfline {
        thresholds: Vec<f64>,
        #[serde(default)]
        coordinate: usize,
    },
    Kernel {
        kernel: KernelName,
        h: f64,
        centers: Vec<f64>,
    },
    /// `values[member][label]` for finite chains.
    Table {
        values: Vec<Vec<f64>>,
        envelope: f64,
    },
    Constant {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    Box,
    Epanechnikov,
}

/// Universal constants and VC characteristics. None has a default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub m_const: Option<f64>,
    pub k_const: Option<f64>,
    pub tau_param: Option<f64>,
    pub vc_c: Option<f64>,
    pub vc_v: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    None,
    Retrospective,
    Forward,
}

/// Used by `simulate` and `blocks`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub n: Option<usize>,
    pub split: Option<SplitMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RademacherSection {
    /// Chain length per replication.
    pub n: Option<usize>,
    pub n_mc: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsMode {
    /// Empirical block complexity against the block bound at plug-in moments.
    Compare,
    /// Direct evaluation of the bound formulas at given inputs.
    Formula,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeName {
    Polynomial,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub mode: Option<BoundsMode>,
    pub regime: Option<RegimeName>,
    pub n_mc: Option<usize>,
    pub p: Option<f64>,
    pub lambda: Option<f64>,
    pub sigma_inflation: Option<f64>,
    /// Accepted range of the fitted growth exponent.
    pub growth_range: Option<[f64; 2]>,
    pub inputs: Option<FormulaInputs>,
}

/// Inputs of the bound formulas in `formula` mode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaInputs {
    pub u: Option<f64>,
    pub sigma: Option<f64>,
    pub n: Option<f64>,
    pub l: Option<f64>,
    pub e_tau_p: Option<f64>,
    pub mgf: Option<f64>,
    pub e_tau_1: Option<f64>,
    pub e_tau_2: Option<f64>,
    pub e_nu_tau: Option<f64>,
    pub sup_pi_f: Option<f64>,
    pub r_nb: Option<f64>,
    pub r_n: Option<f64>,
    pub t: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdeSection {
    pub kernel: Option<KernelName>,
    pub c: Option<f64>,
    pub beta: Option<f64>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub spacing_factor: Option<f64>,
    pub slope_tolerance: Option<f64>,
    /// Moment condition assumed for the rate; `polynomial` requires `p`.
    pub regime: Option<RegimeName>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MhSection {
    pub k: Option<usize>,
    pub gamma: Option<f64>,
    pub u_points: Option<usize>,
    pub slope_tolerance: Option<f64>,
    pub growth: Option<GrowthSection>,
    pub geometry: Option<GeometrySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthSection {
    pub thresholds: Vec<f64>,
    pub max_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub eps: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmasSection {
    pub n_trials: Option<usize>,
    pub eps_grid: Option<Vec<f64>>,
}
