use std::process::{Command, Output};

fn slelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_writes_one_row_per_grid_time() {
    let o = slelab(&["simulate", "--kappa", "2", "--t", "1", "--steps", "10000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,re,im"));
    assert_eq!(lines.count(), 10001);
}

#[test]
fn simulate_needs_kappa() {
    let o = slelab(&["simulate", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_rejects_bad_kappa() {
    let o = slelab(&["simulate", "--kappa", "8"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_svg_has_one_polyline() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("trace.svg");
    let csv = dir.path().join("trace.csv");
    let o = slelab(&[
        "simulate", "--kappa", "4", "--steps", "500", "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(svg).unwrap();
    assert!(text.starts_with("<?xml"));
    assert_eq!(text.matches("<svg").count(), 1);
    assert_eq!(text.matches("</svg>").count(), 1);
    assert_eq!(text.matches("<polyline").count(), 1);
    // Every element opened is closed or self-closing.
    let opened = text.matches("<text").count();
    assert_eq!(opened, text.matches("</text>").count());
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 502);
}

#[test]
fn bound_single_point_is_one() {
    let o = slelab(&["bound", "--kappa", "2", "--points", "0,1", "--radii", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "bound 1"));
}

#[test]
fn bound_two_point_example() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("family.json");
    let svg = dir.path().join("family.svg");
    let o = slelab(&[
        "bound", "--kappa", "2", "--points", "0,1;0,2", "--radii", "0.1,0.1",
        "--json", json.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("bound ")).unwrap();
    let value: f64 = line[6..].parse().unwrap();
    assert!((value - 10f64.powf(-1.5)).abs() < 1e-11, "{line}");
    assert!(line.starts_with("bound 0.0316227766"));
    assert!(out.contains("4^(alpha n^2) x bound: yes"));
    let dump: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(!dump["circles"].as_array().unwrap().is_empty());
    assert!(std::fs::read_to_string(svg).unwrap().contains("<circle"));
}

#[test]
fn malformed_points_exit_2() {
    for points in ["0,1;2", "a,b", "0,1,2"] {
        let o = slelab(&["bound", "--kappa", "2", "--points", points, "--radii", "0.1"]);
        assert_eq!(o.status.code(), Some(2), "{points}");
    }
    let o = slelab(&["bound", "--kappa", "2", "--points", "0,1;0,1", "--radii", "0.1,0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn green_along_ray() {
    let o = slelab(&["green", "--kappa", "4", "--count", "3", "--rmin", "1", "--rmax", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    // On the imaginary axis G = y^(d-2) with d = 1.5.
    for r in rows {
        assert!((r[3] - r[1].powf(-0.5)).abs() < 1e-12);
    }
    let o = slelab(&["green", "--kappa", "4", "--points", "1,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hit_prob_run_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = slelab(&[
        "hit-prob", "--points", "0,1", "--radii", "0.2", "--n-samples", "10", "--workers", "1",
        "--output-dir", first.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("hit_prob "));
    assert_eq!(std::fs::read_to_string(first.join("results.csv")).unwrap().lines().count(), 2);

    let second = dir.path().join("second");
    let o = slelab(&[
        "hit-prob", "--resume", first.join("manifest.json").to_str().unwrap(), "--n-samples", "20",
        "--output-dir", second.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("(n = 20)"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(r#"{{"kind": "exponent", "radius_list": [0.3, 0.2, 0.1], "n_samples": 8, "workers": 1, "output_dir": {:?}}}"#, out.to_str().unwrap()),
    )
    .unwrap();
    let svg = dir.path().join("fit.svg");
    let o = slelab(&["hit-prob", "--config", cfg.to_str().unwrap(), "--n-samples", "1000", "--svg", svg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("(n = 8)"));
    assert!(std::fs::read_to_string(svg).unwrap().contains("</svg>"));

    std::fs::write(&cfg, r#"{"kind": "exponent", "kappa": -1}"#).unwrap();
    let o = slelab(&["hit-prob", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mink_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = slelab(&[
        "mink", "--radius-list", "0.2,0.1", "--n-max", "2", "--n-samples", "3", "--workers", "1",
        "--output-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("moment[r=0.1,m=2]"));
    let o = slelab(&["mink", "--domain", "0,1,0", "--n-samples", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_fast_criteria() {
    let o = slelab(&["verify", "--criteria", "1,2,9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains(" PASS ")).count(), 3);
    let o = slelab(&["verify", "--criteria", "13"]);
    assert_eq!(o.status.code(), Some(2));
}
