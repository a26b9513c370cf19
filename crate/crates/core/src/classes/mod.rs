//! Finite function classes, empirical measures, covering numbers and lifting
//! of classes to regeneration blocks.
//!
//! Parameterized families are discretized on explicit grids, so every class
//! is finite.

mod covering;
mod lemmas;
mod lifted;
mod measure;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chain::State;
use crate::error::{invalid, Error, Result};
use crate::kde::Kernel;
use crate::regeneration::Block;

pub use covering::{
    covering_number, covering_number_values, distance_matrix, exact_cover_size, greedy_cover_size, CoverMode,
    CoveringTable, DEDUP_TOL, EXACT_COVER_LIMIT,
};
pub use lemmas::{
    jensen_gap, random_lemma_instance, verify_lemma1, verify_lemma2, verify_random_instances, write_instances_csv,
    InstanceRow, LemmaCheck, LemmaInstance, Verdict, MAX_EXACT_BLOCK_LEN,
};
pub use lifted::{LiftMode, LiftedClass};
pub use measure::{lift_measure, lift_measure_truncated, EmpiricalMeasure};

/// Lower bound `(3 sqrt(e))^v` on an admissible VC constant `C`.
pub fn admissible_c(v: f64) -> f64 {
    (3.0 * 0.5f64.exp()).powf(v)
}

/// The covering constant of half-line indicators: `N(eps) <= 2 eps^-2`.
pub const HALFLINE_COVERING_CONSTANT: f64 = 2.0;

pub type MemberFn = Arc<dyn Fn(&State) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Family {
    /// `values[i][x]` is member `i` at label `x` of a finite chain.
    Table(Vec<Vec<f64>>),
    /// `1{x_k <= t}` for each threshold `t`.
    HalfLines { coordinate: usize, thresholds: Vec<f64> },
    /// `y -> K((x - y) / h)` for each center `x`.
    KernelTranslates { kernel: Kernel, h: f64, centers: Vec<Vec<f64>> },
    /// Constant functions.
    Constant(Vec<f64>),
    /// Arbitrary closures.
    Custom { label: String, members: Vec<MemberFn> },
}

/// Serializable description of a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ClassDescriptor {
    Table { values: Vec<Vec<f64>> },
    HalfLines { coordinate: usize, thresholds: Vec<f64> },
    KernelTranslates { kernel: Kernel, h: f64, centers: Vec<Vec<f64>> },
    Constant { values: Vec<f64> },
    Custom { label: String, size: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    #[serde(flatten)]
    pub descriptor: ClassDescriptor,
    pub size: usize,
    pub envelope: f64,
    pub vc_c: f64,
    pub vc_v: f64,
}

/// A finite function class with envelope `U` and VC characteristic `(C, v)`.
#[derive(Clone)]
pub struct EvaluableClass {
    family: Family,
    envelope: f64,
    vc_c: f64,
    vc_v: f64,
}

impl fmt::Debug for EvaluableClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvaluableClass")
            .field("descriptor", &self.descriptor())
            .field("envelope", &self.envelope)
            .field("vc_c", &self.vc_c)
            .field("vc_v", &self.vc_v)
            .finish()
    }
}

impl EvaluableClass {
    pub fn new(family: Family, envelope: f64, vc_c: f64, vc_v: f64) -> Result<Self> {
        if !(envelope > 0.0 && envelope.is_finite()) {
            return Err(invalid(format!("envelope must be positive and finite, got {envelope}")));
        }
        if !(vc_v >= 1.0) {
            return Err(invalid(format!("VC exponent v must be at least 1, got {vc_v}")));
        }
        if !(vc_c >= admissible_c(vc_v) * (1.0 - 1e-12)) {
            return Err(invalid(format!("VC constant C = {vc_c} is below (3 sqrt(e))^v = {}", admissible_c(vc_v))));
        }
        let class = Self { family, envelope, vc_c, vc_v };
        if class.is_empty() {
            return Err(invalid("function class is empty"));
        }
        match &class.family {
            Family::Table(rows) => {
                let width = rows[0].len();
                if rows.iter().any(|r| r.len() != width) {
                    return Err(invalid("table rows differ in length"));
                }
                class.check_bound(rows.iter().flatten().copied())?;
            }
            Family::Constant(values) => class.check_bound(values.iter().copied())?,
            Family::KernelTranslates { kernel, h, centers } => {
                if !(*h > 0.0) {
                    return Err(invalid("bandwidth must be positive"));
                }
                if centers.iter().any(|c| c.len() != kernel.dim) {
                    return Err(invalid("kernel centers must match the kernel dimension"));
                }
                class.check_bound(std::iter::once(kernel.sup_norm()))?;
            }
            Family::HalfLines { .. } | Family::Custom { .. } => {}
        }
        Ok(class)
    }

    fn check_bound(&self, values: impl Iterator<Item = f64>) -> Result<()> {
        for v in values {
            if !(v.abs() <= self.envelope * (1.0 + 1e-12)) {
                return Err(Error::Hypothesis(format!("|f| = {} exceeds the envelope {}", v.abs(), self.envelope)));
            }
        }
        Ok(())
    }

    /// Functions on the labels of a finite chain, `values[i][x]`.
    pub fn table(values: Vec<Vec<f64>>, envelope: f64, vc_c: f64, vc_v: f64) -> Result<Self> {
        Self::new(Family::Table(values), envelope, vc_c, vc_v)
    }

    /// Table class with `v = 1` and the smallest admissible `C`.
    pub fn table_default(values: Vec<Vec<f64>>) -> Result<Self> {
        let u = values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        Self::table(values, u, admissible_c(1.0), 1.0)
    }

    pub fn constant(values: Vec<f64>) -> Result<Self> {
        let u = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        Self::new(Family::Constant(values), u, admissible_c(1.0), 1.0)
    }

    pub fn custom(
        label: impl Into<String>,
        members: Vec<MemberFn>,
        envelope: f64,
        vc_c: f64,
        vc_v: f64,
    ) -> Result<Self> {
        Self::new(Family::Custom { label: label.into(), members }, envelope, vc_c, vc_v)
    }

    pub fn len(&self) -> usize {
        match &self.family {
            Family::Table(v) => v.len(),
            Family::HalfLines { thresholds, .. } => thresholds.len(),
            Family::KernelTranslates { centers, .. } => centers.len(),
            Family::Constant(v) => v.len(),
            Family::Custom { members, .. } => members.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn envelope(&self) -> f64 {
        self.envelope
    }

    pub fn vc_c(&self) -> f64 {
        self.vc_c
    }

    pub fn vc_v(&self) -> f64 {
        self.vc_v
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Member `i` at `x`. Callers must have checked the state with [`Self::check_state`].
    pub fn eval(&self, i: usize, x: &State) -> f64 {
        match &self.family {
            Family::Table(v) => v[i][x.label().expect("finite state")],
            Family::HalfLines { coordinate, thresholds } => f64::from(u8::from(x.coord(*coordinate) <= thresholds[i])),
            Family::KernelTranslates { kernel, h, centers } => {
                let y = x.coords().expect("vector state");
                let z: Vec<f64> = centers[i].iter().zip(y).map(|(c, y)| (c - y) / h).collect();
                kernel.eval(&z)
            }
            Family::Constant(v) => v[i],
            Family::Custom { members, .. } => members[i](x),
        }
    }

    pub fn check_state(&self, x: &State) -> Result<()> {
        let ok = match (&self.family, x) {
            (Family::Table(v), State::Finite(l)) => *l < v[0].len(),
            (Family::Table(_), _) => false,
            (Family::HalfLines { coordinate, .. }, State::Vector(c)) => *coordinate < c.len(),
            (Family::HalfLines { .. }, State::Finite(_)) => true,
            (Family::KernelTranslates { kernel, .. }, State::Vector(c)) => c.len() == kernel.dim,
            (Family::KernelTranslates { .. }, State::Finite(_)) => false,
            (Family::Constant(_), _) | (Family::Custom { .. }, _) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("state {x} is outside the domain of the class")))
        }
    }

    /// Member-major value matrix `values[i][j] = f_i(points[j])`.
    pub fn values_at(&self, points: &[State]) -> Result<Vec<Vec<f64>>> {
        points.iter().try_for_each(|x| self.check_state(x))?;
        Ok((0..self.len()).map(|i| points.iter().map(|x| self.eval(i, x)).collect()).collect())
    }

    /// Member-major block sums `values[i][k] = f_i'(B_k)`.
    pub fn block_values(&self, blocks: &[Block]) -> Result<Vec<Vec<f64>>> {
        for b in blocks {
            b.states.iter().try_for_each(|x| self.check_state(x))?;
        }
        Ok((0..self.len())
            .map(|i| blocks.iter().map(|b| b.states.iter().map(|x| self.eval(i, x)).sum()).collect())
            .collect())
    }

    /// Checks `|f| <= U` at the given points.
    pub fn check_envelope(&self, points: &[State]) -> Result<()> {
        let values = self.values_at(points)?;
        self.check_bound(values.into_iter().flatten())
    }

    pub fn descriptor(&self) -> ClassDescriptor {
        match &self.family {
            Family::Table(v) => ClassDescriptor::Table { values: v.clone() },
            Family::HalfLines { coordinate, thresholds } => {
                ClassDescriptor::HalfLines { coordinate: *coordinate, thresholds: thresholds.clone() }
            }
            Family::KernelTranslates { kernel, h, centers } => {
                ClassDescriptor::KernelTranslates { kernel: *kernel, h: *h, centers: centers.clone() }
            }
            Family::Constant(v) => ClassDescriptor::Constant { values: v.clone() },
            Family::Custom { label, members } => ClassDescriptor::Custom { label: label.clone(), size: members.len() },
        }
    }

    pub fn summary(&self) -> ClassSummary {
        ClassSummary {
            descriptor: self.descriptor(),
            size: self.len(),
            envelope: self.envelope,
            vc_c: self.vc_c,
            vc_v: self.vc_v,
        }
    }

    /// Rebuilds a class from its descriptor (custom classes cannot be rebuilt).
    pub fn from_summary(s: &ClassSummary) -> Result<Self> {
        let family = match &s.descriptor {
            ClassDescriptor::Table { values } => Family::Table(values.clone()),
            ClassDescriptor::HalfLines { coordinate, thresholds } => {
                Family::HalfLines { coordinate: *coordinate, thresholds: thresholds.clone() }
            }
            ClassDescriptor::KernelTranslates { kernel, h, centers } => {
                Family::KernelTranslates { kernel: *kernel, h: *h, centers: centers.clone() }
            }
            ClassDescriptor::Constant { values } => Family::Constant(values.clone()),
            ClassDescriptor::Custom { label, .. } => {
                return Err(invalid(format!("custom class {label} has no serializable members")))
            }
        };
        Self::new(family, s.envelope, s.vc_c, s.vc_v)
    }

    /// Class with the given subset of members (table, half-line, kernel and constant families).
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let family = match &self.family {
            Family::Table(v) => Family::Table(idx.iter().map(|&i| v[i].clone()).collect()),
            Family::HalfLines { coordinate, thresholds } => {
                Family::HalfLines { coordinate: *coordinate, thresholds: pick(thresholds) }
            }
            Family::KernelTranslates { kernel, h, centers } => Family::KernelTranslates {
                kernel: *kernel,
                h: *h,
                centers: idx.iter().map(|&i| centers[i].clone()).collect(),
            },
            Family::Constant(v) => Family::Constant(pick(v)),
            Family::Custom { label, members } => {
                Family::Custom { label: label.clone(), members: idx.iter().map(|&i| members[i].clone()).collect() }
            }
        };
        Self::new(family, self.envelope, self.vc_c, self.vc_v)
    }
}

/// Half-line indicators `1{x_k <= t}` on a threshold grid.
///
/// The envelope is 1. Half-lines satisfy `N(eps) <= 2 eps^-2`, so `v = 2`; the
/// stored `C` is the smallest admissible constant `(3 sqrt(e))^2`, which also
/// dominates the covering constant [`HALFLINE_COVERING_CONSTANT`].
pub fn halfline_class(thresholds: Vec<f64>, coordinate: usize) -> Result<EvaluableClass> {
    if thresholds.iter().any(|t| t.is_nan()) {
        return Err(invalid("thresholds must not be NaN"));
    }
    EvaluableClass::new(Family::HalfLines { coordinate, thresholds }, 1.0, admissible_c(2.0), 2.0)
}

/// Kernel translates `y -> K((x - y) / h)` for `x` on a grid of centers.
pub fn kernel_class(kernel: Kernel, h: f64, centers: Vec<Vec<f64>>, vc_c: f64, vc_v: f64) -> Result<EvaluableClass> {
    let u = kernel.sup_norm();
    EvaluableClass::new(Family::KernelTranslates { kernel, h, centers }, u, vc_c, vc_v)
}
