use std::fs;
use std::path::Path;
use std::process::Command;

use slate_ope::harness::{run_experiment, CardinalityRule, EstimatorKind, ExperimentConfig};
use slate_ope::report::{
    parse_config, parse_config_str, run, write_results, RunManifest, FITS_FILE, MANIFEST_FILE, ORACLE_CHECK_FILE,
    RESULTS_FILE, RESULTS_HEADER, SUMMARY_FILE,
};
use slate_ope::Error;

const BIN: &str = env!("CARGO_BIN_EXE_slate-ope");

fn small(experiment: &str, out: &Path) -> String {
    format!(
        "experiment = {experiment}\nseed = 5\nn = 500\nt = 3\ns = 10\nout_dir = {}\n",
        out.display()
    )
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn column(name: &str) -> usize {
    RESULTS_HEADER.split(',').position(|c| c == name).unwrap()
}

#[test]
fn one_tensor_writes_three_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(&format!(
        "{}t = 1\nd = 2-7\n",
        small("prior-grid", dir.path()).replace("t = 3\n", "")
    ))
    .unwrap();
    let results = run_experiment(&cfg.experiment_config()).unwrap();
    let mut manifest = RunManifest::new(cfg.clone());
    let files = write_results(&results, &mut manifest, dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    let csv = fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap();
    assert_eq!(csv.lines().next().unwrap(), RESULTS_HEADER);
    let body = rows(&csv);
    assert_eq!(body.len(), 3);
    let names: Vec<&str> = body.iter().map(|r| r[column("estimator")].as_str()).collect();
    assert_eq!(names, ["IPS", "PI", "PI++"]);
    assert!(body
        .iter()
        .all(|r| r.len() == 17 && r[column("cardinalities")] == "2-7"));
    let manifest_text = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(manifest_text.contains("results.csv"));
    assert_eq!(parse_config_str(&manifest_text).unwrap(), cfg);
}

#[test]
fn delta_column_matches_the_nmse_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(&format!("{}d = 3-9\n", small("prior-grid", dir.path()))).unwrap();
    let results = run_experiment(&cfg.experiment_config()).unwrap();
    write_results(&results, &mut RunManifest::new(cfg), dir.path()).unwrap();
    let body = rows(&fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap());
    for tensor in body.chunks(3) {
        let nmse = |r: &Vec<String>| r[column("nmse")].parse::<f64>().unwrap();
        let delta: f64 = tensor[0][column("delta_nmse")].parse().unwrap();
        assert!((delta - (nmse(&tensor[1]) - nmse(&tensor[2]))).abs() <= 1e-9 * delta.abs().max(1.0));
        let mse: f64 = tensor[1][column("mse")].parse().unwrap();
        let bias: f64 = tensor[1][column("bias")].parse().unwrap();
        let var: f64 = tensor[1][column("variance")].parse().unwrap();
        assert!((mse - (bias * bias + var)).abs() <= 1e-9 * mse);
    }
}

#[test]
fn even_division_cardinalities_are_dash_joined() {
    let cfg = ExperimentConfig {
        sample_size: 200,
        tensor_count: 1,
        replications: 3,
        ..ExperimentConfig::new(CardinalityRule::EvenDivision { slots: 4 }, 1)
    };
    let dir = tempfile::tempdir().unwrap();
    let run_cfg = parse_config_str(&small("slot-sweep", dir.path())).unwrap();
    write_results(
        &run_experiment(&cfg).unwrap(),
        &mut RunManifest::new(run_cfg),
        dir.path(),
    )
    .unwrap();
    let body = rows(&fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap());
    assert!(body
        .iter()
        .all(|r| r[column("cardinalities")] == "2-33-66-100" && r[column("K")] == "4"));
}

#[test]
fn empty_results_and_unwritable_paths_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(&small("prior-grid", dir.path())).unwrap();
    assert!(write_results(&[], &mut RunManifest::new(cfg.clone()), dir.path()).is_err());

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let results = run_experiment(&ExperimentConfig {
        sample_size: 100,
        tensor_count: 1,
        replications: 2,
        ..cfg.experiment_config()
    })
    .unwrap();
    let err = write_results(&results, &mut RunManifest::new(cfg), &blocker.join("sub")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn every_experiment_writes_its_files() {
    let cases = [
        (
            "prior-grid",
            "p_bar_grid = 0.1,0.2\np_prime_grid = 0.1,0.3,0.5\nd = 2-6\n",
            vec![RESULTS_FILE, SUMMARY_FILE],
        ),
        (
            "cardinality-grid",
            "cardinality_choices = 2,4\n",
            vec![RESULTS_FILE, SUMMARY_FILE],
        ),
        (
            "slot-sweep",
            "k_values = 2,3,4\n",
            vec![RESULTS_FILE, SUMMARY_FILE, FITS_FILE],
        ),
        (
            "regression",
            "k_values = 2,3\nt = 4\n",
            vec![RESULTS_FILE, SUMMARY_FILE, FITS_FILE],
        ),
        ("oracle-check", "oracle_models = 20\ns = 50\n", vec![ORACLE_CHECK_FILE]),
    ];
    for (experiment, extra, files) in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut text = small(experiment, dir.path());
        for line in extra.lines() {
            let key = line.split('=').next().unwrap();
            text = text
                .lines()
                .filter(|l| !l.starts_with(key))
                .map(|l| format!("{l}\n"))
                .collect();
        }
        text.push_str(extra);
        let cfg = parse_config_str(&text).unwrap();
        let outcome = run(&cfg, &mut |_| {}).unwrap();
        assert!(outcome.passed(), "{experiment}: {:?}", outcome.checks);
        for f in files.iter().chain([&MANIFEST_FILE]) {
            assert!(dir.path().join(f).exists(), "{experiment} did not write {f}");
        }
        let manifest = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(parse_config_str(&manifest).unwrap(), cfg);
    }
}

#[test]
fn prior_grid_rows_cover_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{}d = 2-6\np_bar_grid = 0.1,0.2\np_prime_grid = 0.1,0.3,0.5\n",
        small("prior-grid", dir.path())
    );
    let outcome = run(&parse_config_str(&text).unwrap(), &mut |_| {}).unwrap();
    assert_eq!(outcome.summaries.len(), 6);
    let body = rows(&fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap());
    assert_eq!(body.len(), 6 * 3 * 3);
    let pi_rows = body
        .iter()
        .filter(|r| r[column("estimator")] == EstimatorKind::Pi.name())
        .count();
    assert_eq!(pi_rows, 18);
}

#[test]
fn manifest_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let cfg = parse_config_str(&format!(
        "{}d = 4-2-3\nreward_kind = pairwise\n",
        small("prior-grid", first.path())
    ))
    .unwrap();
    run(&cfg, &mut |_| {}).unwrap();
    let second = tempfile::tempdir().unwrap();
    let replay = parse_config(
        Some(&first.path().join(MANIFEST_FILE)),
        &[("out_dir".into(), second.path().display().to_string())],
    )
    .unwrap();
    run(&replay, &mut |_| {}).unwrap();
    assert_eq!(
        fs::read(first.path().join(RESULTS_FILE)).unwrap(),
        fs::read(second.path().join(RESULTS_FILE)).unwrap()
    );
}

#[test]
fn binary_runs_with_flags_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(
        &cfg_path,
        "experiment = prior-grid\nseed = 1\np_bar_grid = 0.2\np_prime_grid = 0.2\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(BIN)
        .args([
            "--config",
            cfg_path.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
        ])
        .args([
            "--n",
            "1e3",
            "--t",
            "2",
            "--s",
            "5",
            "--d",
            "2-5",
            "--p-bar",
            "0.3",
            "--p-prime",
            "0.3",
        ])
        .args([
            "--reward-kind",
            "elementwise",
            "--threads",
            "1",
            "--deterministic-reduce",
            "--seed",
            "8",
        ])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let cfg = parse_config(Some(&out.join(MANIFEST_FILE)), &[]).unwrap();
    assert_eq!(cfg.seed, 8);
    assert_eq!(cfg.sample_size, 1000);
    assert_eq!(cfg.cardinalities, vec![2, 5]);
    assert_eq!(cfg.true_prior_mean, 0.3);
    assert!(cfg.deterministic_reduce);
    assert_eq!(cfg.threads, Some(1));
    let body = rows(&fs::read_to_string(out.join(RESULTS_FILE)).unwrap());
    assert_eq!(body.len(), 2 * 3);
}

#[test]
fn binary_reports_errors_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["--experiment", "prior-grid", "--seed", "1", "--p-bar", "1.5"],
        vec!["--experiment", "prior-grid"],
        vec!["--experiment", "flowers", "--seed", "1"],
        vec!["--experiment", "prior-grid", "--seed", "1", "--d", "3-x"],
    ] {
        let out = Command::new(BIN).args(&args).current_dir(dir.path()).output().unwrap();
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{args:?}");
    }
    let out = Command::new(BIN).arg("--bogus").output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn binary_oracle_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args([
            "--experiment",
            "oracle-check",
            "--seed",
            "2",
            "--n",
            "1000",
            "--s",
            "200",
            "--oracle-models",
            "50",
        ])
        .args(["--out-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.path().join(ORACLE_CHECK_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}
