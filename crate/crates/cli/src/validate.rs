//! Validation of experiment configurations into runnable plans.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use regenrad::chain::{canonical_doeblin_chain, finite_chain_model, FiniteMeasure, SmallSet, TransitionMatrix};
use regenrad::classes::{admissible_c, halfline_class, kernel_class, EvaluableClass};
use regenrad::kde::{Kernel, KernelBase, KernelForm, RateConfig, SmoothedTarget};
use regenrad::metropolis::{builtin_mh_spec, GrowthConfig, MhSetup, MhSpec, QuantileConfig, Support, TargetKind};
use regenrad::rademacher::{c_lambda, BoundInputs, CompareConfig, Regime};
use regenrad::{ChainModel, State};

use crate::config::{
    BoundsMode, ClassSpec, Constants, ExperimentConfig, ExperimentKind, GeometrySection, KernelName, ModelSpec,
    RegimeName, SplitMode,
};

/// One violated field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// All violations of a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "configuration has {} violation(s):", self.0.len())?;
        for v in &self.0 {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violations {}

/// A chain together with what the experiments need to know about its stationary law.
#[derive(Debug, Clone)]
pub enum Model {
    Chain(ChainModel),
    Mh(MhSetup),
}

impl Model {
    pub fn chain(&self) -> regenrad::Result<ChainModel> {
        match self {
            Model::Chain(m) => Ok(m.clone()),
            Model::Mh(s) => s.model(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Model::Chain(m) => m.dim,
            Model::Mh(s) => s.target.dim(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FormulaPlan {
    pub inputs: BoundInputs,
    pub regime: Regime,
    pub r_nb: Option<f64>,
    pub r_n: Option<f64>,
    pub t: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum Job {
    Simulate {
        model: ChainModel,
        n: usize,
        split: SplitMode,
    },
    Blocks {
        model: ChainModel,
        n: usize,
    },
    Rademacher {
        model: ChainModel,
        class: EvaluableClass,
        n_grid: Vec<usize>,
        replications: usize,
        n_mc: usize,
    },
    BoundsCompare {
        model: ChainModel,
        class: EvaluableClass,
        config: CompareConfig,
        growth_range: Option<[f64; 2]>,
    },
    BoundsFormula(FormulaPlan),
    KdeRate {
        model: ChainModel,
        kernel: Kernel,
        config: RateConfig,
    },
    MhCredible {
        setup: MhSetup,
        quantile: QuantileConfig,
        growth: Option<GrowthConfig>,
        geometry: Option<GeometrySection>,
    },
    VerifyLemmas {
        n_trials: usize,
        eps_grid: Vec<f64>,
    },
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Plan {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub job: Job,
}

#[derive(Default)]
struct Checker {
    found: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.found.push(Violation { field: field.into(), message: message.into() });
    }

    fn need<T: Clone>(&mut self, field: &str, value: &Option<T>) -> Option<T> {
        if value.is_none() {
            self.push(field, "missing");
        }
        value.clone()
    }

    fn positive(&mut self, field: &str, value: &Option<f64>) -> Option<f64> {
        let v = self.need(field, value)?;
        if v > 0.0 && v.is_finite() {
            Some(v)
        } else {
            self.push(field, format!("must be positive and finite, got {v}"));
            None
        }
    }

    fn at_least(&mut self, field: &str, value: &Option<usize>, min: usize) -> Option<usize> {
        let v = self.need(field, value)?;
        if v >= min {
            Some(v)
        } else {
            self.push(field, format!("must be at least {min}, got {v}"));
            None
        }
    }

    fn n_grid(&mut self, value: &Option<Vec<usize>>, min_len: usize, min_n: usize) -> Option<Vec<usize>> {
        let grid = self.need("n_grid", value)?;
        if grid.len() < min_len {
            self.push("n_grid", format!("needs at least {min_len} sizes, got {}", grid.len()));
            return None;
        }
        if let Some(n) = grid.iter().find(|n| **n < min_n) {
            self.push("n_grid", format!("sizes must be at least {min_n}, got {n}"));
            return None;
        }
        Some(grid)
    }

    fn core<T>(&mut self, field: &str, result: regenrad::Result<T>) -> Option<T> {
        result.map_err(|e| self.push(field, e.to_string())).ok()
    }
}

/// Lists every violation; empty exactly when [`resolve`] succeeds.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Violation> {
    resolve(cfg).err().map(|v| v.0).unwrap_or_default()
}

/// Checks the configuration and builds everything the run needs.
pub fn resolve(cfg: &ExperimentConfig) -> Result<Plan, Violations> {
    let mut ck = Checker::default();
    let kind = ck.need("kind", &cfg.kind);
    let seed = ck.need("seed", &cfg.seed);
    let out_dir = match cfg.output.as_ref().and_then(|o| o.dir.clone()) {
        Some(d) => Some(PathBuf::from(d)),
        None => {
            ck.push("output.dir", "missing (set it in the file or pass --out)");
            None
        }
    };
    let job = match (kind, seed) {
        (Some(kind), Some(seed)) => job(&mut ck, cfg, kind, seed),
        (Some(kind), None) => job(&mut ck, cfg, kind, 0),
        _ => None,
    };
    match (kind, seed, out_dir, job) {
        (Some(kind), Some(seed), Some(out_dir), Some(job)) if ck.found.is_empty() => {
            Ok(Plan { kind, seed, out_dir, job })
        }
        _ => {
            if ck.found.is_empty() {
                ck.push("config", "could not be resolved");
            }
            Err(Violations(ck.found))
        }
    }
}

fn job(ck: &mut Checker, cfg: &ExperimentConfig, kind: ExperimentKind, seed: u64) -> Option<Job> {
    match kind {
        ExperimentKind::Simulate | ExperimentKind::Blocks => {
            let model = model(ck, cfg).and_then(|m| ck.core("model", m.chain()));
            let section = ck.need("simulate", &cfg.simulate)?;
            let n = ck.at_least("simulate.n", &section.n, 1);
            let split = section.split.unwrap_or(SplitMode::Retrospective);
            if kind == ExperimentKind::Blocks && split != SplitMode::Retrospective && section.split.is_some() {
                ck.push("simulate.split", "block extraction uses retrospective splitting");
            }
            let (model, n) = (model?, n?);
            Some(match kind {
                ExperimentKind::Simulate => Job::Simulate { model, n, split },
                _ => Job::Blocks { model, n },
            })
        }
        ExperimentKind::Rademacher => {
            let model = model(ck, cfg).and_then(|m| ck.core("model", m.chain()));
            let class = model.as_ref().and_then(|m| class(ck, cfg, m));
            let n_grid = ck.n_grid(&cfg.n_grid, 1, 1);
            let replications = ck.at_least("replications", &cfg.replications, 1);
            let section = ck.need("rademacher", &cfg.rademacher)?;
            let n_mc = ck.at_least("rademacher.n_mc", &section.n_mc, 1);
            Some(Job::Rademacher {
                model: model?,
                class: class?,
                n_grid: n_grid?,
                replications: replications?,
                n_mc: n_mc?,
            })
        }
        ExperimentKind::Bounds => bounds(ck, cfg, seed),
        ExperimentKind::KdeRate => kde(ck, cfg, seed),
        ExperimentKind::MhCredible => mh(ck, cfg, seed),
        ExperimentKind::VerifyLemmas => {
            let section = ck.need("lemmas", &cfg.lemmas)?;
            let n_trials = ck.at_least("lemmas.n_trials", &section.n_trials, 1);
            let eps_grid = ck.need("lemmas.eps_grid", &section.eps_grid);
            if let Some(grid) = &eps_grid {
                if grid.is_empty() || grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                    ck.push("lemmas.eps_grid", "must be a nonempty list of positive radii");
                    return None;
                }
            }
            Some(Job::VerifyLemmas { n_trials: n_trials?, eps_grid: eps_grid? })
        }
    }
}

fn model(ck: &mut Checker, cfg: &ExperimentConfig) -> Option<Model> {
    match ck.need("model", &cfg.model)? {
        ModelSpec::Finite { matrix, initial, small_set, delta, psi } => {
            let k = matrix.len();
            let m = ck.core("model.matrix", TransitionMatrix::new(matrix));
            let init = ck.core("model.initial", FiniteMeasure::new(initial.clone()));
            if init.is_some() && initial.len() != k {
                ck.push("model.initial", format!("has {} entries for {k} states", initial.len()));
                return None;
            }
            if let Some(l) = small_set.iter().find(|l| **l >= k) {
                ck.push("model.small_set", format!("label {l} is not a state of a {k}-state chain"));
                return None;
            }
            let id = format!("finite(k={k},delta={delta})");
            let built = finite_chain_model(id, m?, Arc::new(init?), SmallSet::Labels(small_set), delta, psi);
            ck.core("model", built).map(Model::Chain)
        }
        ModelSpec::Doeblin { delta } => ck.core("model.delta", canonical_doeblin_chain(delta)).map(Model::Chain),
        ModelSpec::Mh { builtin, target, support, increment, eps, center, start } => {
            let spec = match builtin {
                Some(name) => {
                    if target.is_some() || support.is_some() || increment.is_some() || eps.is_some() || center.is_some()
                    {
                        ck.push("model.builtin", "a built-in configuration cannot be combined with inline fields");
                        return None;
                    }
                    let Some(mut spec) = builtin_mh_spec(&name) else {
                        ck.push("model.builtin", format!("unknown built-in configuration {name}"));
                        return None;
                    };
                    if let Some(s) = start {
                        spec.start = s;
                    }
                    spec
                }
                None => MhSpec {
                    name: "mh-inline".into(),
                    target: ck.need("model.target", &target)?,
                    support: ck.need("model.support", &support)?,
                    increment: ck.need("model.increment", &increment)?,
                    eps: ck.need("model.eps", &eps)?,
                    center,
                    start: ck.need("model.start", &start)?,
                },
            };
            ck.core("model", spec.build()).map(Model::Mh)
        }
    }
}

fn vc(ck: &mut Checker, constants: Option<&Constants>) -> Option<(f64, f64)> {
    let empty = Constants::default();
    let c = constants.unwrap_or(&empty);
    let vc_c = ck.positive("constants.vc_c", &c.vc_c);
    let vc_v = ck.positive("constants.vc_v", &c.vc_v);
    let (vc_c, vc_v) = (vc_c?, vc_v?);
    if vc_v < 1.0 {
        ck.push("constants.vc_v", format!("VC exponent must be at least 1, got {vc_v}"));
        return None;
    }
    let floor = admissible_c(vc_v);
    if vc_c < floor * (1.0 - 1e-12) {
        ck.push("constants.vc_c", format!("C = {vc_c} is below the admissible floor (3 sqrt(e))^v = {floor}"));
        return None;
    }
    Some((vc_c, vc_v))
}

fn class(ck: &mut Checker, cfg: &ExperimentConfig, model: &ChainModel) -> Option<EvaluableClass> {
    let built = match ck.need("class", &cfg.class)? {
        ClassSpec::Halfline { thresholds, coordinate } => halfline_class(thresholds, coordinate),
        ClassSpec::Kernel { kernel, h, centers } => {
            let (c, v) = vc(ck, cfg.constants.as_ref())?;
            let k = ck.core("class.kernel", Kernel::new(kernel_base(kernel), KernelForm::Product, 1))?;
            kernel_class(k, h, centers.into_iter().map(|x| vec![x]).collect(), c, v)
        }
        ClassSpec::Table { values, envelope } => {
            let (c, v) = vc(ck, cfg.constants.as_ref())?;
            EvaluableClass::table(values, envelope, c, v)
        }
        ClassSpec::Constant { values } => EvaluableClass::constant(values),
    };
    let class = ck.core("class", built)?;
    let probe = if model.dim == 0 { State::Finite(0) } else { State::Vector(vec![0.0; model.dim]) };
    ck.core("class", class.check_state(&probe))?;
    Some(class)
}

fn kernel_base(name: KernelName) -> KernelBase {
    match name {
        KernelName::Box => KernelBase::Box,
        KernelName::Epanechnikov => KernelBase::Epanechnikov,
    }
}

fn regime(name: RegimeName) -> Regime {
    match name {
        RegimeName::Polynomial => Regime::Polynomial,
        RegimeName::Exponential => Regime::Exponential,
    }
}

fn m_const(ck: &mut Checker, cfg: &ExperimentConfig) -> Option<f64> {
    let c = cfg.constants.clone().unwrap_or_default();
    ck.positive("constants.m_const", &c.m_const)
}

fn bounds(ck: &mut Checker, cfg: &ExperimentConfig, seed: u64) -> Option<Job> {
    let section = ck.need("bounds", &cfg.bounds)?;
    let mode = ck.need("bounds.mode", &section.mode);
    let regime = ck.need("bounds.regime", &section.regime).map(regime);
    let m = m_const(ck, cfg);
    let (p, lambda) = match regime {
        Some(Regime::Polynomial) => {
            let p = ck.need("bounds.p", &section.p);
            if let Some(p) = p.filter(|p| !(*p > 1.0)) {
                ck.push("bounds.p", format!("the polynomial-moment regime needs p > 1, got {p}"));
            }
            (p, Some(1.0))
        }
        Some(Regime::Exponential) => (Some(2.0), ck.positive("bounds.lambda", &section.lambda)),
        None => (None, None),
    };
    match mode? {
        BoundsMode::Compare => {
            let model = model(ck, cfg).and_then(|m| ck.core("model", m.chain()));
            let class = model.as_ref().and_then(|m| class(ck, cfg, m));
            let n_grid = ck.n_grid(&cfg.n_grid, 2, 1);
            let replications = ck.at_least("replications", &cfg.replications, 1);
            let n_mc = ck.at_least("bounds.n_mc", &section.n_mc, 1);
            let inflation = ck.need("bounds.sigma_inflation", &section.sigma_inflation);
            if let Some(s) = inflation.filter(|s| !(*s >= 0.0)) {
                ck.push("bounds.sigma_inflation", format!("must be nonnegative, got {s}"));
            }
            if let Some([lo, hi]) = section.growth_range {
                if !(lo < hi) {
                    ck.push("bounds.growth_range", format!("needs lower < upper, got [{lo}, {hi}]"));
                }
            }
            let config = CompareConfig {
                n_grid: n_grid?,
                replications: replications?,
                n_mc: n_mc?,
                seed,
                m_const: m?,
                regime: regime?,
                p: p?,
                lambda: lambda?,
                sigma_inflation: inflation?,
            };
            Some(Job::BoundsCompare { model: model?, class: class?, config, growth_range: section.growth_range })
        }
        BoundsMode::Formula => {
            let x = ck.need("bounds.inputs", &section.inputs)?;
            let (c, v) = vc(ck, cfg.constants.as_ref()).unzip();
            let u = ck.positive("bounds.inputs.u", &x.u);
            let sigma = ck.positive("bounds.inputs.sigma", &x.sigma);
            let n = ck.positive("bounds.inputs.n", &x.n);
            let l = ck.positive("bounds.inputs.l", &x.l);
            if let (Some(s), Some(l), Some(u)) = (sigma, l, u) {
                if s > l * u {
                    ck.push(
                        "bounds.inputs.sigma",
                        format!(
                            "sigma' = {s} exceeds L U = {}; the block complexity bound assumes 0 < sigma' <= L U",
                            l * u
                        ),
                    );
                }
            }
            let mut inputs = BoundInputs { p: p.unwrap_or(0.0), lambda: lambda.unwrap_or(0.0), ..Default::default() };
            match regime {
                Some(Regime::Polynomial) => {
                    inputs.e_tau_p = ck.positive("bounds.inputs.e_tau_p", &x.e_tau_p).unwrap_or(0.0);
                }
                Some(Regime::Exponential) => {
                    let mgf = ck.positive("bounds.inputs.mgf", &x.mgf).unwrap_or(0.0);
                    inputs.c_lambda = c_lambda(mgf, inputs.lambda);
                }
                None => {}
            }
            let consts = cfg.constants.clone().unwrap_or_default();
            if x.r_nb.is_some() {
                inputs.e_tau_1 = ck.need("bounds.inputs.e_tau_1", &x.e_tau_1).unwrap_or(0.0);
                inputs.e_tau_2 = ck.need("bounds.inputs.e_tau_2", &x.e_tau_2).unwrap_or(0.0);
                inputs.e_nu_tau = ck.need("bounds.inputs.e_nu_tau", &x.e_nu_tau).unwrap_or(0.0);
                inputs.sup_pi_f = ck.need("bounds.inputs.sup_pi_f", &x.sup_pi_f).unwrap_or(0.0);
            }
            if x.r_n.is_some() {
                inputs.e_tau_1 = ck.positive("bounds.inputs.e_tau_1", &x.e_tau_1).unwrap_or(0.0);
                inputs.k_const = ck.positive("constants.k_const", &consts.k_const).unwrap_or(0.0);
                inputs.tau_param = ck.positive("constants.tau_param", &consts.tau_param).unwrap_or(0.0);
                if x.t.is_none() && x.delta.is_none() {
                    ck.push("bounds.inputs", "r_n is given without t or delta");
                }
            } else if x.t.is_some() || x.delta.is_some() {
                ck.push("bounds.inputs.r_n", "missing (needed by t and delta)");
            }
            inputs.u = u?;
            inputs.sigma = sigma?;
            inputs.n = n?;
            inputs.l = l?;
            inputs.c = c?;
            inputs.v = v?;
            inputs.m_const = m?;
            Some(Job::BoundsFormula(FormulaPlan {
                inputs,
                regime: regime?,
                r_nb: x.r_nb,
                r_n: x.r_n,
                t: x.t,
                delta: x.delta,
            }))
        }
    }
}

fn kde(ck: &mut Checker, cfg: &ExperimentConfig, seed: u64) -> Option<Job> {
    let model = model(ck, cfg);
    let section = ck.need("kde", &cfg.kde)?;
    let kernel_name = ck.need("kde.kernel", &section.kernel);
    let c = ck.positive("kde.c", &section.c);
    let beta = ck.need("kde.beta", &section.beta);
    let spacing = ck.positive("kde.spacing_factor", &section.spacing_factor);
    let tolerance = ck.positive("kde.slope_tolerance", &section.slope_tolerance);
    let n_grid = ck.n_grid(&cfg.n_grid, 3, 1);
    let replications = ck.at_least("replications", &cfg.replications, 1);
    let d = model.as_ref().map_or(1, Model::dim).max(1) as f64;
    if let Some(beta) = beta {
        if !(beta >= 0.0) {
            ck.push("kde.beta", format!("must be nonnegative, got {beta}"));
        }
        match section.regime {
            Some(RegimeName::Polynomial) => match section.p {
                None => ck.push("kde.p", "missing (the polynomial-moment regime needs p)"),
                Some(p) if !(p > 1.0) => ck.push("kde.p", format!("must exceed 1, got {p}")),
                Some(p) => {
                    let a = beta * p / (p - 1.0);
                    if !(a > 0.0 && a < 1.0 / d) {
                        ck.push(
                            "kde.beta",
                            format!(
                                "beta p / (p - 1) = {a} must lie in (0, 1/d) = (0, {}) under polynomial moments",
                                1.0 / d
                            ),
                        );
                    }
                }
            },
            Some(RegimeName::Exponential) => {
                if !(beta > 0.0 && beta < 1.0 / d) {
                    ck.push(
                        "kde.beta",
                        format!("beta = {beta} must lie in (0, 1/d) = (0, {}) under exponential moments", 1.0 / d),
                    );
                }
            }
            None => {
                if !(beta * d < 1.0) {
                    ck.push("kde.beta", format!("beta d = {} must be below 1", beta * d));
                }
            }
        }
    }
    let (target, lo, hi, chain) = match model? {
        Model::Chain(m) if m.id.starts_with("doeblin") => (SmoothedTarget::uniform_unit(1), vec![0.0], vec![1.0], m),
        Model::Chain(_) => {
            ck.push("model", "kernel density experiments need a continuous chain (doeblin or mh)");
            return None;
        }
        Model::Mh(setup) => {
            let t = setup.target.clone();
            let (lo, hi) = t.support.bounding_box();
            let target = match (&t.kind, &t.support) {
                (TargetKind::Uniform, Support::Box { lo, hi }) => {
                    SmoothedTarget::UniformBox { lo: lo.clone(), hi: hi.clone() }
                }
                _ if t.dim() == 1 => {
                    SmoothedTarget::Density1d { density: Arc::new(move |x| t.marginal_density(0, x).unwrap_or(0.0)) }
                }
                _ => {
                    ck.push("model", "a multivariate target must be uniform on a box for the smoothed reference");
                    return None;
                }
            };
            (target, lo, hi, ck.core("model", setup.model())?)
        }
    };
    let lo = section.lo.unwrap_or(lo);
    let hi = section.hi.unwrap_or(hi);
    if lo.len() != chain.dim || hi.len() != chain.dim || lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
        ck.push("kde.lo", format!("lo and hi must describe a nonempty box of dimension {}", chain.dim));
    }
    let kernel = ck.core("kde.kernel", Kernel::new(kernel_base(kernel_name?), KernelForm::Product, chain.dim))?;
    let config = RateConfig {
        c: c?,
        beta: beta?,
        n_grid: n_grid?,
        replications: replications?,
        seed,
        lo,
        hi,
        spacing_factor: spacing?,
        target,
        slope_tolerance: tolerance?,
    };
    Some(Job::KdeRate { model: chain, kernel, config })
}

fn mh(ck: &mut Checker, cfg: &ExperimentConfig, seed: u64) -> Option<Job> {
    let setup = match model(ck, cfg) {
        Some(Model::Mh(s)) => Some(s),
        Some(Model::Chain(_)) => {
            ck.push("model", "credible-interval experiments need an mh model");
            None
        }
        None => None,
    };
    let section = ck.need("mh", &cfg.mh)?;
    let n_grid = ck.n_grid(&cfg.n_grid, 2, 16);
    let replications = ck.at_least("replications", &cfg.replications, 1);
    let k = ck.need("mh.k", &section.k);
    let gamma = ck.need("mh.gamma", &section.gamma);
    if let Some(g) = gamma.filter(|g| !(*g > 0.0 && *g < 0.25)) {
        ck.push("mh.gamma", format!("must lie in (0, 1/4), got {g}"));
    }
    let u_points = ck.at_least("mh.u_points", &section.u_points, 2);
    let tolerance = ck.positive("mh.slope_tolerance", &section.slope_tolerance);
    if let (Some(s), Some(k)) = (&setup, k) {
        if k >= s.target.dim() {
            ck.push("mh.k", format!("coordinate {k} out of range for dimension {}", s.target.dim()));
        }
    }
    if let Some(g) = &section.growth {
        if g.thresholds.is_empty() {
            ck.push("mh.growth.thresholds", "must not be empty");
        }
        if !(g.max_exponent > 0.0) {
            ck.push("mh.growth.max_exponent", "must be positive");
        }
    }
    if let Some(g) = &section.geometry {
        if !(g.eps > 0.0) {
            ck.push("mh.geometry.eps", "must be positive");
        }
        if g.trials == 0 {
            ck.push("mh.geometry.trials", "must be at least 1");
        }
    }
    let quantile = QuantileConfig {
        k: k?,
        gamma: gamma?,
        n_grid: n_grid?,
        replications: replications?,
        seed,
        u_points: u_points?,
        slope_tolerance: tolerance?,
    };
    let growth = section.growth.map(|g| GrowthConfig {
        k: quantile.k,
        thresholds: g.thresholds,
        n_grid: quantile.n_grid.clone(),
        replications: quantile.replications,
        seed,
        max_exponent: g.max_exponent,
    });
    Some(Job::MhCredible { setup: setup?, quantile, growth, geometry: section.geometry })
}
