//! The acceptance criteria, runnable from the test suite and the CLI.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::runner::run_experiment;
use crate::bounds::{family_product_ceiling, multipoint_interior_bound};
use crate::error::{Result, SleError};
use crate::estimators::hitting::{hit_prob_coupled, HitExperiment};
use crate::estimators::integral::green_integral;
use crate::estimators::minkowski::{minkowski_content, moment_tables, MinkowskiExperiment, Rect};
use crate::estimators::regression::exponent_fit;
use crate::estimators::stats::{combined_stderr, ratio, EstimateResult};
use crate::estimators::{run_task, SampleSpec, SIM_STREAM};
use crate::geometry::{build_family, circles_pairwise_disjoint, conflict_sets, family_bound_product};
use crate::loewner::maps::upper_sqrt;
use crate::loewner::{forward_probe, hcap_estimate, sample_driver, trace_from_driver, DrivingPath, SimConfig, Trace};
use crate::params::{derive_params, SleParams};
use crate::points::PointConfig;
use crate::rng::derive_seed;
use crate::scaling::p_scaling;

pub const ALL: [u32; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Sample sizes and tolerances as stated.
    Full,
    /// Reduced sample sizes for quick checks.
    Smoke,
}

impl Scale {
    fn pick<T>(self, full: T, smoke: T) -> T {
        match self {
            Scale::Full => full,
            Scale::Smoke => smoke,
        }
    }
}

/// Contents of a `verify` config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub criteria: Vec<u32>,
    pub scale: Scale,
    pub seed: u64,
    pub workers: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            criteria: ALL.to_vec(),
            scale: Scale::Full,
            seed: 20_240_601,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "C{:<2} {verdict} {}: {} [{:.1}s]", self.id, self.title, self.detail, self.seconds)
    }
}

pub fn title(id: u32) -> &'static str {
    match id {
        1 => "scaling function calculus",
        2 => "Loewner exactness",
        3 => "capacity normalization",
        4 => "interior exponent",
        5 => "boundary exponent",
        6 => "Green's angular profile",
        7 => "multi-point ratio boundedness",
        8 => "circle-family invariants",
        9 => "Minkowski calibration",
        10 => "content moment stability",
        11 => "determinism",
        12 => "truncation audit",
        _ => "unknown criterion",
    }
}

/// Runs criteria in order, sharing the interior-exponent ensemble between
/// criteria 4 and 12.
pub struct Session {
    cfg: VerifyConfig,
    interior: Option<std::result::Result<Vec<Vec<EstimateResult>>, String>>,
}

impl Session {
    pub fn new(cfg: VerifyConfig) -> Self {
        Self { cfg, interior: None }
    }

    fn spec(&self, id: u32, n: u64) -> SampleSpec {
        SampleSpec::new(n, derive_seed(self.cfg.seed, id as u64)).with_workers(self.cfg.workers.max(1))
    }

    pub fn run(&mut self, id: u32) -> CriterionReport {
        let clock = Instant::now();
        let outcome = match id {
            1 => c1(self.cfg.seed),
            2 => c2(self.cfg.seed),
            3 => c3(self.cfg.scale),
            4 => self.c4(),
            5 => self.c5(),
            6 => self.c6(),
            7 => self.c7(),
            8 => c8(self.cfg.seed),
            9 => c9(),
            10 => self.c10(),
            11 => self.c11(),
            12 => self.c12(),
            _ => Err(SleError::InvalidInput(format!("no criterion {id}"))),
        };
        let seconds = clock.elapsed().as_secs_f64();
        let (mut passed, mut detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = match id {
            1 | 2 | 9 => Some(1.0),
            3 | 11 => Some(60.0),
            8 => Some(10.0),
            _ => None,
        };
        if let Some(b) = budget {
            if seconds >= b {
                passed = false;
                detail.push_str(&format!("; runtime {seconds:.2}s exceeds {b}s"));
            }
        }
        CriterionReport { id, title: title(id), passed, detail, seconds }
    }

    pub fn run_all(&mut self) -> Vec<CriterionReport> {
        let ids = self.cfg.criteria.clone();
        ids.into_iter().map(|id| self.run(id)).collect()
    }

    fn interior(&mut self) -> Result<Vec<Vec<EstimateResult>>> {
        if self.interior.is_none() {
            let n = self.cfg.scale.pick(20_000, 2_000);
            let p = derive_params(8.0 / 3.0)?;
            let radii = [0.2, 0.1, 0.05];
            let run = HitExperiment::new(
                &p,
                &[Complex64::new(0.0, 1.0)],
                radii.iter().map(|r| vec![*r]).collect(),
                vec![1.0, 2.0],
                SimConfig::default(),
            )
            .and_then(|e| hit_prob_coupled(&e, &self.spec(4, n)));
            self.interior = Some(run.map_err(|e| e.to_string()));
        }
        self.interior.clone().expect("set above").map_err(SleError::InvalidInput)
    }

    fn c4(&mut self) -> Result<(bool, String)> {
        let p = derive_params(8.0 / 3.0)?;
        let est = self.interior()?;
        let radii = [0.2, 0.1, 0.05];
        let fit = exponent_fit(&radii, &est[0])?;
        let target = 2.0 - p.d();
        let pulls = (fit.slope - target) / fit.slope_stderr;
        Ok((
            pulls.abs() <= 3.0,
            format!(
                "slope {} +- {} vs 2-d = {}, {:.2} stderr; p = {}",
                sig(fit.slope),
                sig(fit.slope_stderr),
                sig(target),
                pulls,
                list(&est[0])
            ),
        ))
    }

    fn c12(&mut self) -> Result<(bool, String)> {
        let est = self.interior()?;
        let mut worst: f64 = 0.0;
        let mut parts = Vec::new();
        for (a, b) in est[0].iter().zip(&est[1]) {
            let se = combined_stderr(a, b);
            let shift = (b.mean - a.mean).abs();
            let z = if se > 0.0 { shift / se } else if shift == 0.0 { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
            parts.push(format!("{}->{}", sig(a.mean), sig(b.mean)));
        }
        Ok((worst < 2.0, format!("shifts at 2 R_esc: {}; largest {:.2} combined stderr", parts.join(", "), worst)))
    }

    fn c5(&mut self) -> Result<(bool, String)> {
        let p = derive_params(8.0 / 3.0)?;
        let n = self.cfg.scale.pick(50_000, 5_000);
        let radii = [0.4, 0.2, 0.1];
        let exp = HitExperiment::new(
            &p,
            &[Complex64::new(1.0, 0.0)],
            radii.iter().map(|r| vec![*r]).collect(),
            vec![1.0],
            SimConfig::default(),
        )?;
        let est = hit_prob_coupled(&exp, &self.spec(5, n))?.remove(0);
        let fit = exponent_fit(&radii, &est)?;
        let target = p.alpha();
        let pass = match self.cfg.scale {
            Scale::Full => (fit.slope - target).abs() <= 3.0 * fit.slope_stderr,
            Scale::Smoke => (fit.slope - target).abs() <= 0.5,
        };
        // Restriction formula for kappa = 8/3: P(hit) = 1 - (1 - r^2)^(5/8).
        let exact: Vec<f64> = radii.iter().map(|r: &f64| 1.0 - (1.0 - r * r).powf(0.625)).collect();
        Ok((
            pass,
            format!(
                "slope {} +- {} vs alpha = {}; p = {} (exact {})",
                sig(fit.slope),
                sig(fit.slope_stderr),
                sig(target),
                list(&est),
                exact.iter().map(|v| sig(*v)).collect::<Vec<_>>().join(", ")
            ),
        ))
    }

    fn c6(&mut self) -> Result<(bool, String)> {
        let p = derive_params(8.0 / 3.0)?;
        let n = self.cfg.scale.pick(20_000, 2_000);
        let mut est = Vec::new();
        for (k, theta) in [FRAC_PI_4, FRAC_PI_2].into_iter().enumerate() {
            let exp = HitExperiment::new(&p, &[Complex64::from_polar(1.0, theta)], vec![vec![0.05]], vec![1.0], SimConfig::default())?;
            est.push(hit_prob_coupled(&exp, &self.spec(60 + k as u32, n))?.remove(0).remove(0));
        }
        let (q, se) = ratio(&est[0], &est[1]);
        let target = FRAC_PI_4.sin().powf(p.alpha());
        let profile = FRAC_PI_4.sin().powf(p.alpha() + p.d() - 2.0);
        Ok((
            (q - target).abs() <= 3.0 * se,
            format!(
                "ratio {} +- {} vs sin^alpha(pi/4) = {}; the Green's function at |z| = 1 gives sin^(alpha+d-2)(pi/4) = {} ({:.2} stderr away)",
                sig(q),
                sig(se),
                sig(target),
                sig(profile),
                (q - profile) / se
            ),
        ))
    }

    fn c7(&mut self) -> Result<(bool, String)> {
        let p = derive_params(8.0 / 3.0)?;
        let n = self.cfg.scale.pick(10_000, 1_000);
        let radii = [0.2, 0.1, 0.05, 0.025];
        let configs: [&[(f64, f64)]; 2] = [&[(0.0, 1.0), (0.0, 2.0)], &[(0.0, 1.0), (0.0, 2.0), (1.0, 1.0)]];
        let mut pass = true;
        let mut parts = Vec::new();
        for (k, pts) in configs.iter().enumerate() {
            let zs: Vec<Complex64> = pts.iter().map(|(x, y)| Complex64::new(*x, *y)).collect();
            let sets: Vec<Vec<f64>> = radii.iter().map(|r| vec![*r; pts.len()]).collect();
            let exp = HitExperiment::new(&p, &zs, sets, vec![1.0], SimConfig::default())?;
            let est = hit_prob_coupled(&exp, &self.spec(70 + k as u32, n))?.remove(0);
            let mut ratios = Vec::new();
            for (r, e) in radii.iter().zip(&est) {
                let cfg = PointConfig::from_pairs(pts, &vec![*r; pts.len()])?;
                let b = multipoint_interior_bound(&cfg, &p);
                ratios.push((e.mean / b, e.stderr / b));
            }
            let (first, last) = (ratios[0], ratios[ratios.len() - 1]);
            let rise = last.0 - first.0;
            let se = first.1.hypot(last.1);
            let ok = rise <= 2.0 * se;
            pass &= ok;
            parts.push(format!(
                "n={}: ratios {} (rise {} vs 2 x {})",
                pts.len(),
                ratios.iter().map(|(q, s)| format!("{}+-{}", sig(*q), sig(*s))).collect::<Vec<_>>().join(", "),
                sig(rise),
                sig(se)
            ));
        }
        Ok((pass, parts.join("; ")))
    }

    fn c10(&mut self) -> Result<(bool, String)> {
        let p = derive_params(8.0 / 3.0)?;
        let n = self.cfg.scale.pick(2_000, 100);
        let main = Rect::new(-1.0, 1.0, 0.2, 1.2)?;
        let side = Rect::new(0.25, 1.0, 0.25, 0.75)?;
        let radii = vec![0.1, 0.05, 0.025];
        let exp = MinkowskiExperiment::new(&p, vec![main, side], radii, 3, 10.0, SimConfig::default())?;
        let acc = run_task(&exp, &self.spec(10, n), SIM_STREAM)?;
        let tables = moment_tables(&exp, &acc, "");
        let mut pass = true;
        let mut parts = Vec::new();
        for m in 1..=3 {
            let rs = tables[0].refinement_ratios(m);
            pass &= rs.iter().all(|q| (q - 1.0).abs() <= 0.1);
            parts.push(format!("m={m} ratios {}", rs.iter().map(|q| sig(*q)).collect::<Vec<_>>().join(", ")));
        }
        let last = tables[0].radii.len() - 1;
        let g_main = green_integral(&main, &p, 400)?;
        let g_side = green_integral(&side, &p, 400)?;
        let c = tables[0].moment(last, 1) / g_main;
        let predicted = c * g_side;
        let observed = tables[1].moment(last, 1);
        let agreement = observed / predicted - 1.0;
        pass &= agreement.abs() <= 0.15;
        parts.push(format!(
            "E[Cont] = {} x int G on both domains; second domain {} vs predicted {} ({:+.1}%)",
            sig(c),
            sig(observed),
            sig(predicted),
            100.0 * agreement
        ));
        Ok((pass, parts.join("; ")))
    }

    fn c11(&mut self) -> Result<(bool, String)> {
        let n = self.cfg.scale.pick(200, 50);
        let base = std::env::temp_dir().join(format!("slelab-c11-{}-{}", std::process::id(), self.cfg.seed));
        let mut csvs = Vec::new();
        for workers in [1, 2, 1] {
            let dir = base.join(format!("w{workers}-{}", csvs.len()));
            let cfg = ExperimentConfig {
                kind: ExperimentKind::Exponent,
                points: vec![[0.0, 1.0]],
                radius_list: vec![0.2, 0.1, 0.05],
                n_samples: n,
                seed: self.cfg.seed,
                workers,
                reproducible: true,
                output_dir: Some(dir.clone()),
                ..ExperimentConfig::default()
            };
            run_experiment(&cfg)?;
            csvs.push(std::fs::read(dir.join("results.csv"))?);
        }
        let _ = std::fs::remove_dir_all(&base);
        let same = csvs.windows(2).all(|w| w[0] == w[1]);
        Ok((same, format!("{} byte results.csv identical across 3 runs with 1 and 2 workers: {same}", csvs[0].len())))
    }
}

fn sig(x: f64) -> String {
    format!("{x:.4}")
}

fn list(es: &[EstimateResult]) -> String {
    es.iter().map(|e| format!("{}+-{}", sig(e.mean), sig(e.stderr))).collect::<Vec<_>>().join(", ")
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

fn c1(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_joint: f64 = 0.0;
    let mut violations = 0usize;
    for kappa in [1.0, 2.0, 8.0 / 3.0, 4.0, 6.0] {
        let p = derive_params(kappa)?;
        let (alpha, beta) = (p.alpha(), p.interior_exponent());
        for _ in 0..10_000 {
            let y = log_uniform(&mut rng, 1e-3, 1e3);
            let a = log_uniform(&mut rng, 1e-4, 1e4);
            let b = log_uniform(&mut rng, 1e-4, 1e4);
            let (x1, x2) = if a <= b { (a, b) } else { (b, a) };
            // Both branch formulas at x = y.
            let left = y.powf(alpha - beta) * y.powf(beta);
            worst_joint = worst_joint.max((left / y.powf(alpha) - 1.0).abs());
            let (p1, p2) = (p_scaling(y, x1, &p)?, p_scaling(y, x2, &p)?);
            let q = p1 / p2;
            let tol = 1e-12;
            if p1 > p2 * (1.0 + tol) || q < (x1 / x2).powf(alpha) * (1.0 - tol) || q > (x1 / x2).powf(beta) * (1.0 + tol) {
                violations += 1;
            }
        }
    }
    Ok((
        worst_joint <= 1e-12 && violations == 0,
        format!("50000 triples: {violations} monotonicity/sandwich violations, branch mismatch at x=y {worst_joint:.1e}"),
    ))
}

fn c2(seed: u64) -> Result<(bool, String)> {
    let path = DrivingPath::<f64>::constant_zero(1.0, 1000);
    let trace: Trace<f64> = trace_from_driver(&path)?;
    let mut worst_trace: f64 = 0.0;
    for (z, t) in trace.vertices.iter().zip(&trace.times).skip(1) {
        let exact = Complex64::new(0.0, 2.0 * t.sqrt());
        worst_trace = worst_trace.max((z - exact).norm() / exact.norm());
    }
    let short = DrivingPath::<f64>::constant_zero(1.0, 100);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_probe: f64 = 0.0;
    let mut checked = 0;
    while checked < 100 {
        let z = Complex64::new(6.0 * rng.random::<f64>() - 3.0, 3.0 * rng.random::<f64>());
        if z.re.abs() < 1e-3 && z.im <= 2.0 || z.im <= 0.0 {
            continue;
        }
        let probe = forward_probe(&short, z, 1e-8)?;
        let g = probe.g_t_z.ok_or_else(|| SleError::InvalidInput(format!("{z} swallowed")))?;
        let exact = upper_sqrt(z * z + 4.0, z);
        worst_probe = worst_probe.max((g - exact).norm() / exact.norm());
        checked += 1;
    }
    Ok((
        worst_trace <= 1e-9 && worst_probe <= 1e-9,
        format!("trace vs 2i sqrt(t): {worst_trace:.1e}; forward probe vs sqrt(z^2+4t) at 100 points: {worst_probe:.1e}"),
    ))
}

fn c3(scale: Scale) -> Result<(bool, String)> {
    let p: SleParams<f64> = derive_params(8.0 / 3.0)?;
    let seeds = scale.pick(100, 20);
    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let path = sample_driver(&p, 1.0, 1000, seed)?;
        worst = worst.max((hcap_estimate(&path)? / 2.0 - 1.0).abs());
    }
    Ok((worst <= 0.02, format!("{seeds} paths, largest relative deviation from 2T: {worst:.2e}")))
}

fn c8(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    let mut failures = Vec::new();
    while checked < 1000 {
        let n = rng.random_range(1..=6);
        let pairs: Vec<(f64, f64)> = (0..n).map(|_| (4.0 * rng.random::<f64>() - 2.0, 2.0 * rng.random::<f64>() + 1e-3)).collect();
        let radii: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-4, 1.0)).collect();
        let Ok(cfg) = PointConfig::from_pairs(&pairs, &radii) else { continue };
        checked += 1;
        let p = derive_params([1.0, 2.0, 8.0 / 3.0, 4.0, 6.0][checked % 5])?;
        match build_family(&cfg) {
            Err(e) => failures.push(format!("config {checked}: {e}")),
            Ok((_, fam)) => {
                if !circles_pairwise_disjoint(&fam.circles) {
                    failures.push(format!("config {checked}: circles meet"));
                }
                if conflict_sets(&fam.circles, &cfg).iter().any(|c| c.levels.len() > 1) {
                    failures.push(format!("config {checked}: conflict set with more than one circle"));
                }
                for j in 0..n {
                    if fam.runs_of(j).count() > 1 + 3 * (n - 1 - j) {
                        failures.push(format!("config {checked}: point {j} has too many runs"));
                    }
                }
                if family_bound_product(&fam, &p) > family_product_ceiling(&cfg, &p) {
                    failures.push(format!("config {checked}: family product above 4^(alpha n^2) x bound"));
                }
            }
        }
    }
    let detail = if failures.is_empty() {
        "1000 configurations, all invariants hold".to_string()
    } else {
        format!("{} failures, first: {}", failures.len(), failures[0])
    };
    Ok((failures.is_empty(), detail))
}

fn c9() -> Result<(bool, String)> {
    let p = derive_params(8.0 / 3.0)?;
    let segment = Trace { vertices: vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)], times: vec![0.0, 0.25] };
    let mut worst: f64 = 0.0;
    for r in [0.1, 0.05] {
        let cases = [
            (Rect::new(-1.0, 1.0, 0.0, 2.0)?, 2.0 * r + std::f64::consts::PI * r * r / 2.0),
            (Rect::new(-1.0, 1.0, 0.0, 1.0)?, 2.0 * r),
        ];
        for (d, area) in cases {
            let c = minkowski_content(&segment, &d, r, r / 10.0, &p)?;
            worst = worst.max((c / (r.powf(p.d() - 2.0) * area) - 1.0).abs());
        }
    }
    Ok((worst <= 0.01, format!("largest relative error against stadium areas: {worst:.2e}")))
}

/// Runs the criteria in `cfg` and returns one report each.
pub fn run_criteria(cfg: &VerifyConfig) -> Vec<CriterionReport> {
    Session::new(cfg.clone()).run_all()
}
