mod plot;

use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use slelab::estimators::minkowski::Rect;
use slelab::geometry::{build_family, family_bound_product};
use slelab::harness::acceptance::{Scale, Session, VerifyConfig};
use slelab::harness::{resume_file, run_experiment, ExperimentConfig, ExperimentKind, Manifest};
use slelab::loewner::{sample_driver, trace_from_driver};
use slelab::{derive_params, family_product_ceiling, green_halfplane, multipoint_interior_bound};
use slelab::{HalfPlanePoint, PointConfig, SleError};

use plot::{PlotKind, PlotSpec, Series};

#[derive(Parser)]
#[command(name = "slelab", version, about = "Chordal SLE simulation, hitting bounds and content moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one trace on a uniform time grid.
    Simulate(SimulateArgs),
    /// Multi-point bound and circle family for a configuration.
    Bound(BoundArgs),
    /// Green's function along a ray or at given points.
    Green(GreenArgs),
    /// Monte Carlo hitting probabilities.
    HitProb(HitArgs),
    /// Moments of the Minkowski content.
    Mink(MinkArgs),
    /// Run acceptance criteria.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    kappa: f64,
    /// Time horizon.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    kappa: f64,
    /// Points as `x,y;x,y;...`.
    #[arg(long, value_parser = parse_points)]
    points: Points,
    /// One radius per point, comma separated.
    #[arg(long, value_parser = parse_list)]
    radii: List,
    /// Circle family JSON destination; stdout when absent.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct GreenArgs {
    #[arg(long)]
    kappa: f64,
    /// Evaluate at these points instead of along a ray.
    #[arg(long, value_parser = parse_points)]
    points: Option<Points>,
    /// Angle of the ray.
    #[arg(long, default_value_t = FRAC_PI_2)]
    theta: f64,
    #[arg(long, default_value_t = 0.01)]
    rmin: f64,
    #[arg(long, default_value_t = 10.0)]
    rmax: f64,
    #[arg(long, default_value_t = 25)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file; replaces every other flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Manifest of an earlier run to extend to `--n-samples`.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    n_samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Allow worker-count dependent floating-point summation order.
    #[arg(long)]
    throughput: bool,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Write the first k traces as CSV.
    #[arg(long)]
    dump_traces: Option<usize>,
    /// Escape radius multipliers at which results are also reported.
    #[arg(long, value_parser = parse_list)]
    escape_multipliers: Option<List>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct HitArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_parser = parse_points)]
    points: Option<Points>,
    /// One radius per point.
    #[arg(long, value_parser = parse_list)]
    radii: Option<List>,
    /// Common radii for an exponent fit; overrides `--radii`.
    #[arg(long, value_parser = parse_list)]
    radius_list: Option<List>,
    /// With `--radius-list`, compare against the multi-point bound.
    #[arg(long)]
    bound_check: bool,
}

#[derive(Args)]
struct MinkArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Rectangle `x0,x1,y0,y1`.
    #[arg(long, value_parser = parse_list)]
    domain: Option<List>,
    #[arg(long, value_parser = parse_list)]
    radius_list: Option<List>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    grid_factor: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Verify config file; replaces every other flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma separated criterion numbers; all when absent.
    #[arg(long, value_parser = parse_list)]
    criteria: Option<List>,
    #[arg(long)]
    smoke: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Debug)]
struct Points(Vec<(f64, f64)>);

#[derive(Clone, Debug)]
struct List(Vec<f64>);

fn parse_list(s: &str) -> Result<List, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad number {v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(List)
}

fn parse_points(s: &str) -> Result<Points, String> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| match parse_list(p)?.0.as_slice() {
            [x, y] => Ok((*x, *y)),
            _ => Err(format!("point {p:?} is not of the form x,y")),
        })
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| if v.is_empty() { Err("no points given".into()) } else { Ok(Points(v)) })
}

#[derive(Debug)]
enum Failure {
    /// Bad input; exit status 2.
    Usage(String),
    /// Some acceptance criterion failed; exit status 1.
    Criteria(usize),
}

impl From<SleError> for Failure {
    fn from(e: SleError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Twelve significant digits.
fn sig(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}

fn output(path: Option<&Path>) -> std::io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let p = derive_params(a.kappa)?;
    let path = sample_driver(&p, a.t, a.steps, a.seed)?;
    let trace = trace_from_driver(&path)?;
    let mut out = output(a.out.as_deref())?;
    trace.write_csv(&mut out)?;
    out.flush()?;
    if let Some(svg) = &a.svg {
        plot::write(&PlotSpec {
            kind: PlotKind::Trace,
            series: vec![Series::new("trace", trace.vertices.iter().map(|z| (z.re, z.im)).collect())],
            x_label: "Re".into(),
            y_label: "Im".into(),
            output: svg.clone(),
        })?;
    }
    Ok(())
}

fn bound(a: &BoundArgs) -> Result<(), Failure> {
    let p = derive_params(a.kappa)?;
    let cfg = PointConfig::from_pairs(&a.points.0, &a.radii.0)?;
    let value = multipoint_interior_bound(&cfg, &p);
    let (levels, fam) = build_family(&cfg)?;
    let product = family_bound_product(&fam, &p);
    let ceiling = family_product_ceiling(&cfg, &p);
    println!("bound {}", sig(value));
    println!("family_product {}", sig(product));
    println!(
        "family_product <= 4^(alpha n^2) x bound: {} ({} <= {})",
        if product <= ceiling { "yes" } else { "no" },
        sig(product),
        sig(ceiling)
    );
    let dump = serde_json::json!({ "levels": levels, "circles": fam.dump(), "runs": fam.runs });
    match &a.json {
        Some(path) => std::fs::write(path, serde_json::to_string_pretty(&dump)?)?,
        None => println!("{}", serde_json::to_string_pretty(&dump)?),
    }
    if let Some(svg) = &a.svg {
        let circles = fam.dump();
        let mut series = vec![Series {
            label: "points".into(),
            points: cfg.points().iter().map(|z| (z.re, z.im)).collect(),
            extra: cfg.radii().to_vec(),
        }];
        series.push(Series {
            label: "circles".into(),
            points: circles.iter().map(|c| (c.center[0], c.center[1])).collect(),
            extra: circles.iter().map(|c| c.radius).collect(),
        });
        plot::write(&PlotSpec { kind: PlotKind::Circles, series, x_label: "Re".into(), y_label: "Im".into(), output: svg.clone() })?;
    }
    Ok(())
}

fn green(a: &GreenArgs) -> Result<(), Failure> {
    let p = derive_params(a.kappa)?;
    let zs: Vec<Complex64> = match &a.points {
        Some(Points(v)) => v.iter().map(|(x, y)| Complex64::new(*x, *y)).collect(),
        None => {
            if !(a.rmin > 0.0 && a.rmax >= a.rmin && a.count >= 1) {
                return Err(Failure::Usage("need 0 < rmin <= rmax and count >= 1".into()));
            }
            let step = if a.count > 1 { (a.rmax / a.rmin).ln() / (a.count - 1) as f64 } else { 0.0 };
            (0..a.count).map(|k| Complex64::from_polar(a.rmin * (step * k as f64).exp(), a.theta)).collect()
        }
    };
    let mut rows = Vec::with_capacity(zs.len());
    for z in &zs {
        rows.push((*z, green_halfplane(HalfPlanePoint::from_complex(*z)?, &p)?));
    }
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "re,im,abs,green")?;
    for (z, g) in &rows {
        writeln!(out, "{},{},{},{}", z.re, z.im, z.norm(), g)?;
    }
    out.flush()?;
    if let Some(svg) = &a.svg {
        plot::write(&PlotSpec {
            kind: PlotKind::LogLog,
            series: vec![Series::new("G", rows.iter().map(|(z, g)| (z.norm(), *g)).collect())],
            x_label: "|z|".into(),
            y_label: "G(z)".into(),
            output: svg.clone(),
        })?;
    }
    Ok(())
}

fn apply_run_flags(cfg: &mut ExperimentConfig, r: &RunArgs) {
    if let Some(v) = r.kappa {
        cfg.kappa = v;
    }
    if let Some(v) = r.n_samples {
        cfg.n_samples = v;
    }
    if let Some(v) = r.seed {
        cfg.seed = v;
    }
    if let Some(v) = r.workers {
        cfg.workers = v;
    }
    if r.throughput {
        cfg.reproducible = false;
    }
    if let Some(v) = &r.output_dir {
        cfg.output_dir = Some(v.clone());
    }
    if let Some(v) = r.dump_traces {
        cfg.dump_traces = v;
    }
    if let Some(List(v)) = &r.escape_multipliers {
        cfg.escape_multipliers = v.clone();
    }
}

fn execute(r: &RunArgs, from_flags: impl FnOnce() -> Result<ExperimentConfig, Failure>) -> Result<Manifest, Failure> {
    let manifest = if let Some(prev) = &r.resume {
        let n = r.n_samples.ok_or_else(|| Failure::Usage("--resume needs --n-samples".into()))?;
        resume_file(prev, n, r.output_dir.clone())?
    } else {
        let cfg = match &r.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => from_flags()?,
        };
        run_experiment(&cfg)?
    };
    let dir = manifest.config.resolved_output_dir();
    println!("config_hash {}", manifest.config_hash);
    for e in &manifest.estimands {
        match (e.mean, e.stderr, &e.error) {
            (Some(m), Some(se), _) => println!("{} {} +- {} (n = {})", e.estimand, sig(m), sig(se), e.n),
            (_, _, Some(err)) => println!("{} failed: {err}", e.estimand),
            _ => {}
        }
    }
    for err in &manifest.errors {
        eprintln!("error: {err}");
    }
    println!("wrote {}", dir.display());
    if let Some(svg) = &r.svg {
        plot::write(&loglog(&manifest, svg.clone()))?;
    }
    if manifest.ok() {
        Ok(manifest)
    } else {
        Err(Failure::Usage("sampling failed; see manifest errors".into()))
    }
}

/// Estimates against radius for every estimand family with a radius tag.
fn loglog(m: &Manifest, output: PathBuf) -> PlotSpec {
    let cfg = &m.config;
    let mut series = Vec::new();
    match cfg.kind {
        ExperimentKind::Exponent | ExperimentKind::BoundCheck => {
            let pts = cfg
                .radius_list
                .iter()
                .filter_map(|r| m.estimand(&format!("hit_prob[r={r}]")).and_then(|e| e.mean).map(|v| (*r, v)))
                .collect();
            series.push(Series::new("hit_prob", pts));
        }
        ExperimentKind::MinkMoments => {
            for k in 1..=cfg.n_max {
                let pts = cfg
                    .radius_list
                    .iter()
                    .filter_map(|r| m.estimand(&format!("moment[r={r},m={k}]")).and_then(|e| e.mean).map(|v| (*r, v)))
                    .collect();
                series.push(Series::new(format!("m = {k}"), pts));
            }
        }
        _ => {}
    }
    PlotSpec { kind: PlotKind::LogLog, series, x_label: "r".into(), y_label: "estimate".into(), output }
}

fn hit_prob(a: &HitArgs) -> Result<(), Failure> {
    execute(&a.run, || {
        let mut cfg = ExperimentConfig { kind: ExperimentKind::HitProb, ..ExperimentConfig::default() };
        if let Some(Points(v)) = &a.points {
            cfg.points = v.iter().map(|(x, y)| [*x, *y]).collect();
        }
        if let Some(List(v)) = &a.radii {
            cfg.radii = v.clone();
        } else if cfg.radii.len() != cfg.points.len() {
            cfg.radii = vec![cfg.radii[0]; cfg.points.len()];
        }
        if let Some(List(v)) = &a.radius_list {
            cfg.radius_list = v.clone();
            cfg.kind = if a.bound_check { ExperimentKind::BoundCheck } else { ExperimentKind::Exponent };
        } else if a.bound_check {
            return Err(Failure::Usage("--bound-check needs --radius-list".into()));
        }
        apply_run_flags(&mut cfg, &a.run);
        Ok(cfg)
    })
    .map(|_| ())
}

fn mink(a: &MinkArgs) -> Result<(), Failure> {
    execute(&a.run, || {
        let mut cfg = ExperimentConfig { kind: ExperimentKind::MinkMoments, ..ExperimentConfig::default() };
        if let Some(List(v)) = &a.domain {
            let [x0, x1, y0, y1] = v.as_slice() else {
                return Err(Failure::Usage("--domain takes x0,x1,y0,y1".into()));
            };
            cfg.domain = Rect::new(*x0, *x1, *y0, *y1)?;
        }
        if let Some(List(v)) = &a.radius_list {
            cfg.radius_list = v.clone();
        }
        if let Some(v) = a.n_max {
            cfg.n_max = v;
        }
        if let Some(v) = a.grid_factor {
            cfg.grid_factor = v;
        }
        apply_run_flags(&mut cfg, &a.run);
        Ok(cfg)
    })
    .map(|_| ())
}

fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let cfg = match &a.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => {
            let mut cfg = VerifyConfig::default();
            if let Some(List(v)) = &a.criteria {
                cfg.criteria = v.iter().map(|c| *c as u32).collect();
            }
            if a.smoke {
                cfg.scale = Scale::Smoke;
            }
            if let Some(s) = a.seed {
                cfg.seed = s;
            }
            if let Some(w) = a.workers {
                cfg.workers = w;
            }
            cfg
        }
    };
    if let Some(bad) = cfg.criteria.iter().find(|c| !(1..=12).contains(*c)) {
        return Err(Failure::Usage(format!("no criterion {bad}")));
    }
    let mut session = Session::new(cfg.clone());
    let mut failed = 0;
    for id in &cfg.criteria {
        let report = session.run(*id);
        println!("{report}");
        failed += usize::from(!report.passed);
    }
    if failed > 0 {
        Err(Failure::Criteria(failed))
    } else {
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Bound(a) => bound(a),
        Command::Green(a) => green(a),
        Command::HitProb(a) => hit_prob(a),
        Command::Mink(a) => mink(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Criteria(n)) => {
            eprintln!("{n} criteria failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
