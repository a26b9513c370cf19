use rand::Rng;
use regenrad::chain::{canonical_doeblin_chain, simulate};
use regenrad::kde::{eval_grid, kde_evaluate, rate_experiment, uniform_deviation, Kernel, RateConfig, SmoothedTarget};
use regenrad::{stream_rng, State};

fn config(beta: f64, seed: u64) -> RateConfig {
    RateConfig {
        c: 0.5,
        beta,
        n_grid: (8..=14).map(|k| 1usize << k).collect(),
        replications: 20,
        seed,
        lo: vec![0.0],
        hi: vec![1.0],
        spacing_factor: 0.25,
        target: SmoothedTarget::uniform_unit(1),
        slope_tolerance: 0.1,
    }
}

#[test]
fn iid_uniform_density_at_the_center() {
    let mut rng = stream_rng(1, 0);
    let sample: Vec<State> = (0..100_000).map(|_| State::scalar(rng.random::<f64>())).collect();
    let v = kde_evaluate(&sample, &Kernel::box_1d(), 0.05, &[0.5]).unwrap();
    assert!((v - 1.0).abs() < 0.05, "{v}");
}

#[test]
fn markov_deviation_is_near_the_iid_benchmark() {
    let n = 1 << 14;
    let h = (n as f64).powf(-0.2);
    let model = canonical_doeblin_chain(0.3).unwrap();
    let kernel = Kernel::box_1d();
    let grid = eval_grid(&[0.0], &[1.0], h, 0.25);
    let target = SmoothedTarget::uniform_unit(1);
    let reps = 20;
    let mut markov = 0.0;
    let mut iid = 0.0;
    for r in 0..reps {
        let traj = simulate(&model, n, 100 + r).unwrap();
        markov += uniform_deviation(&traj.states, &kernel, h, &grid, &target).unwrap() / reps as f64;
        let mut rng = stream_rng(200 + r, 0);
        let sample: Vec<State> = (0..n).map(|_| State::scalar(rng.random::<f64>())).collect();
        iid += uniform_deviation(&sample, &kernel, h, &grid, &target).unwrap() / reps as f64;
    }
    let benchmark = ((1.0 / h).ln() / (n as f64 * h)).sqrt();
    assert!(markov / benchmark < 3.0 && benchmark / markov < 3.0, "{markov} vs {benchmark}");
    assert!(markov >= iid, "{markov} vs {iid}");
}

#[test]
fn doeblin_rate_slope() {
    let r = rate_experiment(&canonical_doeblin_chain(0.3).unwrap(), &Kernel::box_1d(), &config(0.2, 3)).unwrap();
    assert!((r.theoretical_slope + 0.4).abs() < 1e-12);
    assert!(r.pass, "slope {}", r.slope);
    assert_eq!(r.rows.len(), 7);
}

#[test]
fn iid_chain_has_the_same_slope_and_a_lower_level() {
    let markov = rate_experiment(&canonical_doeblin_chain(0.3).unwrap(), &Kernel::box_1d(), &config(0.2, 4)).unwrap();
    // delta = 1 regenerates from the uniform law at every step
    let iid = rate_experiment(&canonical_doeblin_chain(1.0).unwrap(), &Kernel::box_1d(), &config(0.2, 5)).unwrap();
    assert!(iid.pass, "slope {}", iid.slope);
    assert!((iid.slope - markov.slope).abs() < 0.1);
    let ratio: f64 = markov.rows.iter().zip(&iid.rows).map(|(a, b)| a.mean_dev / b.mean_dev).sum::<f64>() / 7.0;
    assert!(ratio >= 1.0, "{ratio}");
}

#[test]
fn fixed_bandwidth_gives_root_n() {
    let r = rate_experiment(&canonical_doeblin_chain(0.3).unwrap(), &Kernel::box_1d(), &config(0.0, 6)).unwrap();
    assert!((r.slope + 0.5).abs() <= 0.1, "slope {}", r.slope);
}

#[test]
fn rate_needs_three_sizes() {
    let mut cfg = config(0.2, 7);
    cfg.n_grid = vec![256, 512];
    assert!(rate_experiment(&canonical_doeblin_chain(0.3).unwrap(), &Kernel::box_1d(), &cfg).is_err());
}
