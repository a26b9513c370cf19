//! Execution of validated plans.

use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use rayon::prelude::*;
use regenrad::chain::{simulate_stream, write_trajectory_csv};
use regenrad::classes::{verify_random_instances, write_instances_csv, EvaluableClass};
use regenrad::kde::rate_experiment;
use regenrad::metropolis::{credible_interval_experiment, halfline_growth_experiment, verify_prop1_geometry};
use regenrad::rademacher::{
    block_rademacher, bound_theorem1, bound_theorem2, bound_theorem3, bound_theorem4_probability,
    compare_bound_vs_empirical, optimize_l, theorem4_threshold,
};
use regenrad::regeneration::{
    extract_blocks, regen_stats, simulate_blocks, simulate_split_forward_stream, simulate_split_retrospective_stream,
    TailConfig,
};
use regenrad::rng::child_seed;
use regenrad::stats::{log_log_fit, RunningStats};
use regenrad::{format_float, ChainModel, Trajectory};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, SplitMode};
use crate::manifest::{file_digest, grid_seeds, sha256_hex, ReplicationSeed, RunManifest};
use crate::validate::{resolve, FormulaPlan, Job, Plan};

/// Result of a run: the manifest and the process exit status it implies.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub manifest: RunManifest,
}

impl RunReport {
    /// 0 on pass or when no threshold applies, 2 on a threshold failure.
    pub fn exit_code(&self) -> i32 {
        if self.manifest.pass == Some(false) {
            2
        } else {
            0
        }
    }
}

struct Outcome {
    files: Vec<(String, Vec<u8>)>,
    seeds: Vec<ReplicationSeed>,
    pass: Option<bool>,
    summary: String,
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> regenrad::Result<()>) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn verdict(pass: Option<bool>) -> &'static str {
    match pass {
        Some(true) => " [PASS]",
        Some(false) => " [FAIL]",
        None => "",
    }
}

/// Validates `cfg`, runs the experiment, writes its outputs and `manifest.json`.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<RunReport> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let plan = resolve(cfg)?;
    let outcome = execute(&plan)?;
    std::fs::create_dir_all(&plan.out_dir).with_context(|| format!("cannot create {}", plan.out_dir.display()))?;
    let mut outputs = BTreeMap::new();
    for (name, bytes) in &outcome.files {
        let path = plan.out_dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        outputs.insert(name.clone(), file_digest(&path)?);
    }
    let manifest = RunManifest {
        experiment: plan.kind.name().to_string(),
        config_hash: sha256_hex(cfg.canonical_json().as_bytes()),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_secs: started,
        wall_clock_secs: clock.elapsed().as_secs_f64(),
        jobs: rayon::current_num_threads(),
        seeds: outcome.seeds,
        outputs,
        pass: outcome.pass,
        summary: outcome.summary,
    };
    std::fs::write(plan.out_dir.join("manifest.json"), json_bytes(&manifest)?)?;
    Ok(RunReport { manifest })
}

fn execute(plan: &Plan) -> anyhow::Result<Outcome> {
    let seed = plan.seed;
    match &plan.job {
        Job::Simulate { model, n, split } => simulate(model, *n, *split, seed),
        Job::Blocks { model, n } => blocks(model, *n, seed),
        Job::Rademacher { model, class, n_grid, replications, n_mc } => {
            rademacher(model, class, n_grid, *replications, *n_mc, seed)
        }
        Job::BoundsCompare { model, class, config, growth_range } => {
            let report = compare_bound_vs_empirical(model, class, config)?;
            let in_range = growth_range.is_none_or(|[lo, hi]| (lo..=hi).contains(&report.growth_exponent));
            let pass = report.dominates_at_m_min() && in_range;
            Ok(Outcome {
                files: vec![
                    ("bounds.csv".into(), csv_bytes(|w| report.write_csv(w))?),
                    ("bounds.json".into(), json_bytes(&report)?),
                ],
                seeds: grid_seeds(&config.n_grid, config.replications, seed),
                pass: Some(pass),
                summary: format!(
                    "bounds: M_min = {:.6}, growth exponent = {:.4}{}",
                    report.m_min,
                    report.growth_exponent,
                    verdict(Some(pass))
                ),
            })
        }
        Job::BoundsFormula(f) => formula(f),
        Job::KdeRate { model, kernel, config } => {
            let report = rate_experiment(model, kernel, config)?;
            Ok(Outcome {
                files: vec![
                    ("kde_rate.csv".into(), csv_bytes(|w| report.write_csv(w))?),
                    ("kde_rate.json".into(), json_bytes(&report)?),
                ],
                seeds: grid_seeds(&config.n_grid, config.replications, seed),
                pass: Some(report.pass),
                summary: format!(
                    "kde-rate: slope = {:.4} (theory {:.4} +/- {}){}",
                    report.slope,
                    report.theoretical_slope,
                    report.slope_tolerance,
                    verdict(Some(report.pass))
                ),
            })
        }
        Job::MhCredible { setup, quantile, growth, geometry } => {
            let q = credible_interval_experiment(setup, quantile)?;
            let mut pass = q.monotone_all && q.pass.unwrap_or(true);
            let mut files = vec![
                ("quantile.csv".into(), csv_bytes(|w| q.write_csv(w))?),
                ("quantile.json".into(), format!("{}\n", q.summary_json()?).into_bytes()),
                ("certificate.json".into(), format!("{}\n", setup.cert.to_json()?).into_bytes()),
            ];
            let mut summary = format!("mh-credible: quantile slope = {:.4}, monotone = {}", q.slope, q.monotone_all);
            if let Some(g) = growth {
                let report = halfline_growth_experiment(setup, g)?;
                pass &= report.pass;
                summary.push_str(&format!(", growth exponent = {:.4}", report.exponent));
                files.push(("growth.csv".into(), csv_bytes(|w| report.write_csv(w))?));
                files.push(("growth.json".into(), json_bytes(&report)?));
            }
            if let Some(g) = geometry {
                let check = verify_prop1_geometry(&setup.target.support, g.eps, g.trials, seed)?;
                pass &= check.pass;
                summary.push_str(&format!(", geometry {}/{}", check.passed, check.trials));
                files.push(("geometry.json".into(), json_bytes(&check)?));
            }
            summary.push_str(verdict(Some(pass)));
            Ok(Outcome {
                files,
                seeds: grid_seeds(&quantile.n_grid, quantile.replications, seed),
                pass: Some(pass),
                summary,
            })
        }
        Job::VerifyLemmas { n_trials, eps_grid } => {
            let rows = verify_random_instances(*n_trials, eps_grid, seed)?;
            let count = |lemma: u8, pass: bool| rows.iter().filter(|r| r.lemma == lemma && r.pass == pass).count();
            let failures = count(1, false) + count(2, false);
            let summary_json = json!({
                "instances": n_trials,
                "eps_grid": eps_grid,
                "lemma1": { "checks": count(1, true) + count(1, false), "failures": count(1, false) },
                "lemma2": { "checks": count(2, true) + count(2, false), "failures": count(2, false) },
            });
            let pass = failures == 0;
            Ok(Outcome {
                files: vec![
                    ("lemmas.csv".into(), csv_bytes(|w| write_instances_csv(&rows, w))?),
                    ("lemmas.json".into(), json_bytes(&summary_json)?),
                ],
                seeds: (0..*n_trials)
                    .map(|i| ReplicationSeed { n: i, replication: 0, seed, stream: i as u64 })
                    .collect(),
                pass: Some(pass),
                summary: format!("verify-lemmas: {} checks, {failures} failures{}", rows.len(), verdict(Some(pass))),
            })
        }
    }
}

fn one_seed(n: usize, seed: u64) -> Vec<ReplicationSeed> {
    vec![ReplicationSeed { n, replication: 0, seed, stream: 0 }]
}

fn simulate(model: &ChainModel, n: usize, split: SplitMode, seed: u64) -> anyhow::Result<Outcome> {
    let traj: Trajectory = match split {
        SplitMode::None => simulate_stream(model, n, seed, 0)?,
        SplitMode::Retrospective => simulate_split_retrospective_stream(model, n, seed, 0)?,
        SplitMode::Forward => simulate_split_forward_stream(model, n, seed, 0)?,
    };
    let flags = traj.regen_flags.as_ref().map(|f| f.iter().filter(|x| **x).count());
    let summary = match flags {
        Some(l) => format!("simulate: {n} steps of {}, {l} regenerations", model.id),
        None => format!("simulate: {n} steps of {}", model.id),
    };
    Ok(Outcome {
        files: vec![("trajectory.csv".into(), csv_bytes(|w| write_trajectory_csv(&traj, w))?)],
        seeds: one_seed(n, seed),
        pass: None,
        summary,
    })
}

fn blocks(model: &ChainModel, n: usize, seed: u64) -> anyhow::Result<Outcome> {
    let traj = simulate_split_retrospective_stream(model, n, seed, 0)?;
    let set = extract_blocks(&traj)?;
    let (_, tail) = regen_stats(&set, &TailConfig::default());
    Ok(Outcome {
        files: vec![
            ("trajectory.csv".into(), csv_bytes(|w| write_trajectory_csv(&traj, w))?),
            ("blocks.json".into(), format!("{}\n", set.boundaries_json()?).into_bytes()),
            ("regeneration.json".into(), json_bytes(&tail)?),
        ],
        seeds: one_seed(n, seed),
        pass: None,
        summary: format!(
            "blocks: {} regenerations, {} complete blocks, mean length {}",
            set.l_n,
            set.complete.len(),
            format_float(tail.mean)
        ),
    })
}

#[derive(Serialize)]
struct RademacherRow {
    n: usize,
    mean: f64,
    std_err: f64,
    mc_err: f64,
}

fn rademacher(
    model: &ChainModel,
    class: &EvaluableClass,
    n_grid: &[usize],
    replications: usize,
    n_mc: usize,
    seed: u64,
) -> anyhow::Result<Outcome> {
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut estimates = Vec::with_capacity(n_grid.len());
    for (i, &n) in n_grid.iter().enumerate() {
        let reps: Vec<(f64, f64)> = (0..replications)
            .into_par_iter()
            .map(|r| {
                let stream = (i * replications + r) as u64;
                let blocks = simulate_blocks(model, n, seed, stream)?;
                let est = block_rademacher(class, &blocks, n_mc, child_seed(seed, stream))?;
                Ok((est.mean, est.mc_std_error))
            })
            .collect::<regenrad::Result<_>>()?;
        let stats: RunningStats = reps.iter().map(|r| r.0).collect();
        rows.push(RademacherRow {
            n,
            mean: stats.mean(),
            std_err: if replications > 1 { stats.std_error() } else { 0.0 },
            mc_err: reps.iter().map(|r| r.1).sum::<f64>() / replications as f64,
        });
        estimates.push(reps.iter().map(|r| r.0).collect::<Vec<_>>());
    }
    let mut csv = String::from("n,mean,std_err,mc_err\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            format_float(r.mean),
            format_float(r.std_err),
            format_float(r.mc_err)
        ));
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let fit = (rows.len() >= 2).then(|| log_log_fit(&ns, &means));
    let report = json!({
        "model": model.id,
        "class": class.summary(),
        "n_mc": n_mc,
        "replications": replications,
        "rows": rows,
        "estimates": estimates,
        "growth_exponent": fit.map(|f| f.slope),
        "growth_exponent_std_error": fit.map(|f| f.slope_std_error),
    });
    let last = rows.last().expect("nonempty grid");
    Ok(Outcome {
        files: vec![("rademacher.csv".into(), csv.into_bytes()), ("rademacher.json".into(), json_bytes(&report)?)],
        seeds: grid_seeds(n_grid, replications, seed),
        pass: None,
        summary: format!("rademacher: R_n,B = {} at n = {}", format_float(last.mean), last.n),
    })
}

fn formula(f: &FormulaPlan) -> anyhow::Result<Outcome> {
    let x = &f.inputs;
    let iid = (x.sigma <= x.u).then(|| bound_theorem1(x)).transpose()?;
    let block = bound_theorem2(x, f.regime)?;
    let best = optimize_l(x, f.regime)?;
    let expectation = f.r_nb.map(|r| bound_theorem3(x, r)).transpose()?;
    let probability = match (f.r_n, f.t) {
        (Some(r), Some(t)) => Some(bound_theorem4_probability(t, x, r)?),
        _ => None,
    };
    let threshold = match (f.r_n, f.delta) {
        (Some(r), Some(d)) => Some(theorem4_threshold(x, r, d)?),
        _ => None,
    };
    let report = json!({
        "inputs": x,
        "regime": f.regime,
        "iid_bound": iid,
        "block_bound": block,
        "optimal_l": best.l,
        "optimal_block_bound": best.bound,
        "expected_deviation_bound": expectation,
        "tail_probability_bound": probability,
        "deviation_threshold": threshold,
    });
    Ok(Outcome {
        files: vec![("bounds.json".into(), json_bytes(&report)?)],
        seeds: Vec::new(),
        pass: None,
        summary: format!("bounds: block bound = {} at L = {}", format_float(block), format_float(x.l)),
    })
}
