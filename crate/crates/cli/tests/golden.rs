//! Every experiment kind against checked-in outputs.
//!
//! Set `REGENRAD_BLESS=1` to regenerate the expected files.

use std::path::{Path, PathBuf};

use regenrad_cli::{run, ExperimentConfig};

const FIXTURES: [&str; 8] =
    ["simulate", "blocks", "rademacher", "bounds", "bounds_formula", "kde_rate", "mh_credible", "verify_lemmas"];

fn tests_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn load(name: &str, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&tests_dir().join("fixtures").join(format!("{name}.toml"))).unwrap();
    cfg.output.as_mut().unwrap().dir = Some(out.display().to_string());
    cfg
}

#[test]
fn outputs_match_golden_files() {
    let bless = std::env::var_os("REGENRAD_BLESS").is_some();
    for name in FIXTURES {
        let tmp = tempfile::tempdir().unwrap();
        let report = run(&load(name, tmp.path())).unwrap();
        let golden = tests_dir().join("golden").join(name);
        assert!(!report.manifest.outputs.is_empty(), "{name} wrote nothing");
        for file in report.manifest.outputs.keys() {
            let actual = std::fs::read_to_string(tmp.path().join(file)).unwrap();
            let expected_path = golden.join(file);
            if bless {
                std::fs::create_dir_all(&golden).unwrap();
                std::fs::write(&expected_path, &actual).unwrap();
                continue;
            }
            let expected =
                std::fs::read_to_string(&expected_path).unwrap_or_else(|e| panic!("{}: {e}", expected_path.display()));
            assert_eq!(actual, expected, "{name}/{file} differs from the golden copy");
        }
    }
}

#[test]
fn identical_configs_give_identical_digests() {
    for name in ["simulate", "rademacher", "mh_credible"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let first = run(&load(name, a.path())).unwrap().manifest;
        let second = run(&load(name, b.path())).unwrap().manifest;
        assert_eq!(first.outputs, second.outputs, "{name}");
        assert_ne!(first.config_hash, "");
    }
}

#[test]
fn manifest_lists_every_output_and_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let m = run(&load("kde_rate", tmp.path())).unwrap().manifest;
    assert_eq!(m.seeds.len(), 3 * 2);
    assert!(m.seeds.iter().enumerate().all(|(i, s)| s.stream == i as u64 && s.seed == 16));
    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(written["outputs"].as_object().unwrap().len(), 2);
}
