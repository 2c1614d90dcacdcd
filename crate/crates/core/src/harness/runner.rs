use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::bounds::multipoint_interior_bound;
use crate::digest::sha256_json;
use crate::error::{Result, SleError};
use crate::estimators::hitting::HitExperiment;
use crate::estimators::integral::IntegralTask;
use crate::estimators::minkowski::MinkowskiExperiment;
use crate::estimators::regression::exponent_fit;
use crate::estimators::stats::{Accumulator, EstimateResult};
use crate::estimators::{extend, SampleTask, INTEGRAL_STREAM, SIM_STREAM};
use crate::points::PointConfig;
use crate::rng::derive_seed;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimandRecord {
    pub estimand: String,
    pub params_digest: String,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub n: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
    pub estimands: Vec<EstimandRecord>,
    /// Sample sums; a later run extends them from `accumulator.n`.
    pub accumulator: Option<Accumulator>,
    pub errors: Vec<String>,
}

impl Manifest {
    pub fn ok(&self) -> bool {
        self.errors.is_empty() && self.estimands.iter().all(|e| e.error.is_none())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn estimand(&self, name: &str) -> Option<&EstimandRecord> {
        self.estimands.iter().find(|e| e.estimand == name)
    }
}

/// The sampling task behind an experiment kind.
pub enum Task {
    Hit(HitExperiment),
    Mink(MinkowskiExperiment),
    Integral(IntegralTask),
}

impl SampleTask for Task {
    fn width(&self) -> usize {
        match self {
            Task::Hit(t) => t.width(),
            Task::Mink(t) => t.width(),
            Task::Integral(t) => t.width(),
        }
    }

    fn outcome(&self, seed: u64, index: u64) -> Result<Vec<f64>> {
        match self {
            Task::Hit(t) => t.outcome(seed, index),
            Task::Mink(t) => t.outcome(seed, index),
            Task::Integral(t) => t.outcome(seed, index),
        }
    }
}

impl Task {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let p = cfg.params()?;
        let zs = cfg.complex_points();
        let n = zs.len();
        Ok(match cfg.kind {
            ExperimentKind::HitProb => Task::Hit(HitExperiment::new(
                &p,
                &zs,
                vec![cfg.radii.clone()],
                cfg.escape_multipliers.clone(),
                cfg.sim,
            )?),
            ExperimentKind::Exponent | ExperimentKind::BoundCheck => Task::Hit(HitExperiment::new(
                &p,
                &zs,
                cfg.radius_list.iter().map(|r| vec![*r; n]).collect(),
                cfg.escape_multipliers.clone(),
                cfg.sim,
            )?),
            ExperimentKind::MinkMoments => Task::Mink(MinkowskiExperiment::new(
                &p,
                std::iter::once(cfg.domain).chain(cfg.extra_domains.iter().copied()).collect(),
                cfg.radius_list.clone(),
                cfg.n_max,
                cfg.grid_factor,
                cfg.sim,
            )?),
            ExperimentKind::Integral => Task::Integral(IntegralTask { region: cfg.region(), n: cfg.integral_order, d: p.d() }),
        })
    }

    pub fn stream(&self) -> u64 {
        match self {
            Task::Integral(_) => INTEGRAL_STREAM,
            _ => SIM_STREAM,
        }
    }
}

fn digest(hash: &str, name: &str) -> String {
    sha256_json(&(hash, name)).map(|h| h[..16].to_string()).unwrap_or_default()
}

fn record(hash: &str, name: String, e: &EstimateResult) -> EstimandRecord {
    EstimandRecord {
        params_digest: digest(hash, &name),
        estimand: name,
        mean: Some(e.mean),
        stderr: Some(e.stderr),
        n: e.n_samples,
        error: None,
    }
}

fn failed(hash: &str, name: String, err: &SleError) -> EstimandRecord {
    EstimandRecord {
        params_digest: digest(hash, &name),
        estimand: name,
        mean: None,
        stderr: None,
        n: 0,
        error: Some(err.to_string()),
    }
}

fn escape_suffix(cfg: &ExperimentConfig, c: usize) -> String {
    if c == 0 {
        String::new()
    } else {
        format!(",esc={}", cfg.escape_multipliers[c])
    }
}

/// Names of the raw sample estimands, in outcome order.
fn raw_names(cfg: &ExperimentConfig) -> Vec<String> {
    match cfg.kind {
        ExperimentKind::HitProb => (0..cfg.escape_multipliers.len())
            .map(|c| if c == 0 { "hit_prob".to_string() } else { format!("hit_prob[esc={}]", cfg.escape_multipliers[c]) })
            .collect(),
        ExperimentKind::Exponent | ExperimentKind::BoundCheck => (0..cfg.escape_multipliers.len())
            .flat_map(|c| cfg.radius_list.iter().map(move |r| format!("hit_prob[r={r}{}]", escape_suffix(cfg, c))))
            .collect(),
        ExperimentKind::MinkMoments => (0..=cfg.extra_domains.len())
            .flat_map(|k| {
                let tag = if k == 0 { String::new() } else { format!("domain={k},") };
                cfg.radius_list
                    .iter()
                    .flat_map(move |r| {
                        let tag = tag.clone();
                        (1..=cfg.n_max).map(move |m| format!("moment[{tag}r={r},m={m}]"))
                    })
                    .collect::<Vec<_>>()
            })
            .collect(),
        ExperimentKind::Integral => vec![format!("integral[n={}]", cfg.integral_order)],
    }
}

/// Turns the sample sums into the estimand table of `cfg`.
pub fn summarize(cfg: &ExperimentConfig, hash: &str, acc: &Accumulator) -> Vec<EstimandRecord> {
    let raw = acc.estimates(hash);
    let mut out: Vec<EstimandRecord> =
        raw_names(cfg).into_iter().zip(&raw).map(|(name, e)| record(hash, name, e)).collect();
    match cfg.kind {
        ExperimentKind::Exponent => {
            let k = cfg.radius_list.len();
            for c in 0..cfg.escape_multipliers.len() {
                let name = if c == 0 { "slope".to_string() } else { format!("slope[esc={}]", cfg.escape_multipliers[c]) };
                match exponent_fit(&cfg.radius_list, &raw[c * k..(c + 1) * k]) {
                    Ok(fit) => out.push(EstimandRecord {
                        params_digest: digest(hash, &name),
                        estimand: name,
                        mean: Some(fit.slope),
                        stderr: Some(fit.slope_stderr),
                        n: acc.n,
                        error: None,
                    }),
                    Err(e) => out.push(failed(hash, name, &e)),
                }
            }
        }
        ExperimentKind::BoundCheck => {
            let p = cfg.params().expect("validated");
            let pairs: Vec<(f64, f64)> = cfg.points.iter().map(|z| (z[0], z[1])).collect();
            for (j, r) in cfg.radius_list.iter().enumerate() {
                let name = format!("bound[r={r}]");
                let bound = PointConfig::from_pairs(&pairs, &vec![*r; pairs.len()])
                    .map(|c| multipoint_interior_bound(&c, &p));
                match bound {
                    Ok(b) => {
                        out.push(EstimandRecord {
                            params_digest: digest(hash, &name),
                            estimand: name,
                            mean: Some(b),
                            stderr: Some(0.0),
                            n: 0,
                            error: None,
                        });
                        let hit = &raw[j];
                        let name = format!("ratio[r={r}]");
                        out.push(EstimandRecord {
                            params_digest: digest(hash, &name),
                            estimand: name,
                            mean: Some(hit.mean / b),
                            stderr: Some(hit.stderr / b),
                            n: acc.n,
                            error: None,
                        });
                    }
                    Err(e) => out.push(failed(hash, name, &e)),
                }
            }
        }
        _ => {}
    }
    out
}

/// CSV rows `estimand,params_digest,mean,stderr,n` with round-trip floats.
pub fn results_csv(estimands: &[EstimandRecord]) -> String {
    let mut s = String::from("estimand,params_digest,mean,stderr,n\n");
    for e in estimands {
        if let (Some(m), Some(se)) = (e.mean, e.stderr) {
            let _ = writeln!(s, "\"{}\",{},{},{},{}", e.estimand, e.params_digest, m, se, e.n);
        }
    }
    s
}

fn write_outputs(dir: &Path, manifest: &Manifest) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(manifest)?)?;
    fs::write(dir.join("results.csv"), results_csv(&manifest.estimands))?;
    Ok(())
}

fn dump_traces(task: &Task, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    let seed = derive_seed(cfg.seed, task.stream());
    for k in 0..cfg.dump_traces.min(cfg.n_samples as usize) {
        let trace = match task {
            Task::Hit(t) => t.trace(seed, k as u64)?,
            Task::Mink(t) => t.trace(seed, k as u64)?,
            Task::Integral(_) => return Ok(()),
        };
        fs::create_dir_all(dir)?;
        trace.write_csv(fs::File::create(dir.join(format!("trace_{k}.csv")))?)?;
    }
    Ok(())
}

fn execute(cfg: &ExperimentConfig, start: Option<Accumulator>) -> Result<Manifest> {
    let clock = Instant::now();
    let task = Task::build(cfg)?;
    let hash = cfg.hash()?;
    let acc = start.unwrap_or_else(|| Accumulator::new(task.width()));
    if acc.width() != task.width() {
        return Err(SleError::InvalidInput("stored sample sums do not match the experiment".into()));
    }
    let dir = cfg.resolved_output_dir();
    let mut errors = Vec::new();
    let (estimands, accumulator) = match extend(&task, acc, cfg.n_samples, &cfg.spec(), task.stream()) {
        Ok(acc) => (summarize(cfg, &hash, &acc), Some(acc)),
        Err(e) => {
            errors.push(e.to_string());
            (raw_names(cfg).into_iter().map(|n| failed(&hash, n, &e)).collect(), None)
        }
    };
    if let Err(e) = dump_traces(&task, cfg, &dir) {
        errors.push(format!("trace dump: {e}"));
    }
    let mut stored = cfg.clone();
    stored.output_dir = Some(dir.clone());
    let manifest = Manifest {
        artifact_version: ARTIFACT_VERSION.to_string(),
        config_hash: hash,
        config: stored,
        wall_time_s: clock.elapsed().as_secs_f64(),
        estimands,
        accumulator,
        errors,
    };
    write_outputs(&dir, &manifest)?;
    Ok(manifest)
}

/// Validates `cfg`, computes every estimand, and writes `manifest.json` and
/// `results.csv` to the output directory. Sampling failures are recorded in
/// the manifest rather than returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Manifest> {
    execute(cfg, None)
}

/// Extends a previous run to `cfg.n_samples` samples, reusing its sums.
/// The result is identical to a single run of the larger size.
pub fn resume(previous: &Manifest, cfg: &ExperimentConfig) -> Result<Manifest> {
    let computed = cfg.hash()?;
    if computed != previous.config_hash {
        return Err(SleError::ConfigHashMismatch { stored: previous.config_hash.clone(), computed });
    }
    let acc = previous
        .accumulator
        .clone()
        .ok_or_else(|| SleError::InvalidInput("manifest has no sample sums to resume from".into()))?;
    if cfg.n_samples < acc.n {
        return Err(SleError::InvalidInput(format!("manifest already has {} samples", acc.n)));
    }
    execute(cfg, Some(acc))
}

/// Resumes from a manifest file, keeping its configuration but targeting `n_samples`.
pub fn resume_file(path: &Path, n_samples: u64, output_dir: Option<PathBuf>) -> Result<Manifest> {
    let previous = Manifest::load(path)?;
    let mut cfg = previous.config.clone();
    cfg.n_samples = n_samples;
    if let Some(dir) = output_dir {
        cfg.output_dir = Some(dir);
    }
    resume(&previous, &cfg)
}
