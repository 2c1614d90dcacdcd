use std::fs;

use slelab::harness::{resume, resume_file, run_experiment, ExperimentConfig, ExperimentKind, Manifest};
use slelab::SleError;

fn exponent_config(dir: &std::path::Path, n: u64, workers: usize) -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::Exponent,
        points: vec![[0.0, 1.0]],
        radius_list: vec![0.3, 0.2, 0.1],
        n_samples: n,
        seed: 9,
        workers,
        output_dir: Some(dir.to_path_buf()),
        ..ExperimentConfig::default()
    }
}

#[test]
fn repeated_runs_write_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run_experiment(&exponent_config(&a, 60, 1)).unwrap();
    run_experiment(&exponent_config(&b, 60, 3)).unwrap();
    let csv_a = fs::read(a.join("results.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("results.csv")).unwrap());
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("estimand,params_digest,mean,stderr,n\n"));
    assert!(text.contains("\"slope\""));
}

#[test]
fn resume_matches_single_run() {
    let tmp = tempfile::tempdir().unwrap();
    let first = run_experiment(&exponent_config(&tmp.path().join("first"), 30, 2)).unwrap();
    let mut bigger = exponent_config(&tmp.path().join("resumed"), 70, 2);
    let resumed = resume(&first, &bigger).unwrap();
    bigger.output_dir = Some(tmp.path().join("fresh"));
    let fresh = run_experiment(&bigger).unwrap();
    assert_eq!(resumed.estimands, fresh.estimands);
    assert_eq!(
        fs::read(tmp.path().join("resumed/results.csv")).unwrap(),
        fs::read(tmp.path().join("fresh/results.csv")).unwrap()
    );

    let via_file = resume_file(&tmp.path().join("first/manifest.json"), 70, Some(tmp.path().join("file"))).unwrap();
    assert_eq!(via_file.estimands, fresh.estimands);
    let loaded = Manifest::load(&tmp.path().join("file/manifest.json")).unwrap();
    assert_eq!(loaded.accumulator.unwrap().n, 70);
}

#[test]
fn resume_rejects_changed_config() {
    let tmp = tempfile::tempdir().unwrap();
    let first = run_experiment(&exponent_config(tmp.path(), 10, 1)).unwrap();
    let mut other = exponent_config(tmp.path(), 20, 1);
    other.kappa = 3.0;
    assert!(matches!(resume(&first, &other), Err(SleError::ConfigHashMismatch { .. })));
}

#[test]
fn invalid_config_fails_before_sampling() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = exponent_config(tmp.path(), 10, 1);
    cfg.kappa = 9.0;
    assert!(matches!(run_experiment(&cfg), Err(SleError::InvalidKappa(_))));
    let mut cfg = exponent_config(tmp.path(), 10, 1);
    cfg.points = vec![[0.0, -1.0]];
    assert!(run_experiment(&cfg).is_err());
    assert!(!tmp.path().join("manifest.json").exists());
    assert!(ExperimentConfig::from_json(r#"{"kind": "hit-prob", "bogus": 1}"#).is_err());
}

#[test]
fn small_hit_prob_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{"kind": "hit-prob", "kappa": 2.6666666666666665, "points": [[0, 1]], "radii": [0.2],
            "n_samples": 10, "seed": 3, "workers": 1, "output_dir": {:?}}}"#,
        tmp.path().to_str().unwrap()
    ))
    .unwrap();
    let manifest = run_experiment(&cfg).unwrap();
    assert!(manifest.ok());
    assert_eq!(manifest.estimands.len(), 1);
    let e = manifest.estimand("hit_prob").unwrap();
    assert_eq!(e.n, 10);
    let mean = e.mean.unwrap();
    assert!((0.0..=1.0).contains(&mean));
    // Indicator means are multiples of 1/10.
    assert!(((mean * 10.0).round() - mean * 10.0).abs() < 1e-12);
    let csv = fs::read_to_string(tmp.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn mink_and_integral_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let mink = ExperimentConfig {
        kind: ExperimentKind::MinkMoments,
        radius_list: vec![0.2, 0.1],
        n_max: 2,
        n_samples: 4,
        workers: 1,
        output_dir: Some(tmp.path().join("mink")),
        ..ExperimentConfig::default()
    };
    let m = run_experiment(&mink).unwrap();
    assert!(m.ok());
    assert_eq!(m.estimands.len(), 4);
    assert!(m.estimand("moment[r=0.1,m=2]").is_some());

    let integral = ExperimentConfig::from_json(&format!(
        r#"{{"kind": "integral", "region": {{"shape": "half-disk", "radius": 1.0}}, "integral_order": 2,
            "n_samples": 2000, "workers": 1, "output_dir": {:?}}}"#,
        tmp.path().join("int").to_str().unwrap()
    ))
    .unwrap();
    let m = run_experiment(&integral).unwrap();
    let e = m.estimand("integral[n=2]").unwrap();
    assert!(e.mean.unwrap() > 0.0 && e.mean.unwrap().is_finite());
}
