use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::digest::sha256_json;
use crate::error::{Result, SleError};
use crate::estimators::integral::Region;
use crate::estimators::minkowski::Rect;
use crate::estimators::SampleSpec;
use crate::loewner::SimConfig;
use crate::params::{derive_params, SleParams};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SLELAB_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Joint hitting probability of `points` at `radii`.
    HitProb,
    /// Hitting probability of `points` at each radius of `radius_list`, and
    /// the fitted log-log slope.
    Exponent,
    /// Moments of the Minkowski content in `domain` at each radius of `radius_list`.
    MinkMoments,
    /// Hitting probability against the multi-point bound at each radius of `radius_list`.
    BoundCheck,
    /// The gap-product integral over `region`.
    Integral,
}

/// One experiment, stored with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub kappa: f64,
    pub points: Vec<[f64; 2]>,
    /// One radius per point.
    pub radii: Vec<f64>,
    /// Common radius applied to every point, one experiment per entry.
    pub radius_list: Vec<f64>,
    pub domain: Rect,
    /// Further rectangles measured on the same traces as `domain`.
    pub extra_domains: Vec<Rect>,
    /// Integration region; the domain rectangle when absent.
    pub region: Option<Region>,
    pub n_max: usize,
    pub integral_order: usize,
    /// Grid step is `r / grid_factor`.
    pub grid_factor: f64,
    /// Escape radii, as multiples of the base escape radius, at which hitting
    /// events are read off.
    pub escape_multipliers: Vec<f64>,
    pub sim: SimConfig,
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub reproducible: bool,
    pub dump_traces: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::HitProb,
            kappa: 8.0 / 3.0,
            points: vec![[0.0, 1.0]],
            radii: vec![0.1],
            radius_list: vec![0.2, 0.1, 0.05],
            domain: Rect { x0: -1.0, x1: 1.0, y0: 0.2, y1: 1.2 },
            extra_domains: Vec::new(),
            region: None,
            n_max: 3,
            integral_order: 1,
            grid_factor: 10.0,
            escape_multipliers: vec![1.0],
            sim: SimConfig::default(),
            n_samples: 1000,
            seed: 1,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            reproducible: true,
            dump_traces: 0,
            output_dir: None,
        }
    }
}

/// Fields that do not change what is being estimated.
#[derive(Serialize)]
struct HashView<'a> {
    kind: ExperimentKind,
    kappa: f64,
    points: &'a [[f64; 2]],
    radii: &'a [f64],
    radius_list: &'a [f64],
    domain: &'a Rect,
    extra_domains: &'a [Rect],
    region: &'a Option<Region>,
    n_max: usize,
    integral_order: usize,
    grid_factor: f64,
    escape_multipliers: &'a [f64],
    sim: &'a SimConfig,
    seed: u64,
    dump_traces: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Digest of everything that determines the per-sample outcomes. The
    /// sample count, scheduling and output location are left out so that a
    /// resumed run keeps its identity.
    pub fn hash(&self) -> Result<String> {
        sha256_json(&HashView {
            kind: self.kind,
            kappa: self.kappa,
            points: &self.points,
            radii: &self.radii,
            radius_list: &self.radius_list,
            domain: &self.domain,
            extra_domains: &self.extra_domains,
            region: &self.region,
            n_max: self.n_max,
            integral_order: self.integral_order,
            grid_factor: self.grid_factor,
            escape_multipliers: &self.escape_multipliers,
            sim: &self.sim,
            seed: self.seed,
            dump_traces: self.dump_traces,
        })
    }

    pub fn params(&self) -> Result<SleParams<f64>> {
        derive_params(self.kappa)
    }

    pub fn spec(&self) -> SampleSpec {
        SampleSpec { n_samples: self.n_samples, seed: self.seed, workers: self.workers, reproducible: self.reproducible }
    }

    pub fn complex_points(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    }

    pub fn region(&self) -> Region {
        self.region.unwrap_or(Region::Rect(self.domain))
    }

    /// Output directory: the configured one, else `$SLELAB_OUT`, else `./slelab-out`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("slelab-out"))
    }

    /// Checks every field the chosen kind uses, before any sampling.
    pub fn validate(&self) -> Result<()> {
        let p = self.params()?;
        self.spec().validate()?;
        if self.workers == 0 {
            return Err(SleError::InvalidInput("workers must be at least 1".into()));
        }
        self.sim.validate()?;
        let needs_points = matches!(self.kind, ExperimentKind::HitProb | ExperimentKind::Exponent | ExperimentKind::BoundCheck);
        if needs_points {
            if self.points.is_empty() {
                return Err(SleError::InvalidInput("no points given".into()));
            }
            for (k, z) in self.points.iter().enumerate() {
                if !(z[1] >= 0.0) || !z[0].is_finite() || !z[1].is_finite() {
                    return Err(SleError::BelowRealLine(k));
                }
            }
        }
        match self.kind {
            ExperimentKind::HitProb => {
                if self.radii.len() != self.points.len() {
                    return Err(SleError::InvalidInput(format!(
                        "{} radii for {} points",
                        self.radii.len(),
                        self.points.len()
                    )));
                }
                self.check_radii(&self.radii)?;
            }
            ExperimentKind::Exponent | ExperimentKind::BoundCheck | ExperimentKind::MinkMoments => {
                if self.radius_list.is_empty() {
                    return Err(SleError::InvalidInput("radius_list is empty".into()));
                }
                self.check_radii(&self.radius_list)?;
                if self.kind == ExperimentKind::Exponent && self.radius_list.len() < 3 {
                    return Err(SleError::TooFewRadii(self.radius_list.len()));
                }
                if self.kind == ExperimentKind::BoundCheck {
                    let cfg = crate::points::PointConfig::from_pairs(
                        &self.points.iter().map(|z| (z[0], z[1])).collect::<Vec<_>>(),
                        &vec![self.radius_list[0]; self.points.len()],
                    )?;
                    if let Some(k) = cfg.points().iter().position(|z| z.is_boundary()) {
                        return Err(SleError::BoundaryPointPresent(k));
                    }
                }
                if self.kind == ExperimentKind::MinkMoments {
                    self.domain.validate()?;
                    for d in &self.extra_domains {
                        d.validate()?;
                    }
                    if !(self.grid_factor >= 4.0) {
                        return Err(SleError::InvalidInput(format!("grid_factor must be at least 4, got {}", self.grid_factor)));
                    }
                    if !(1..=4).contains(&self.n_max) {
                        return Err(SleError::InvalidInput(format!("n_max must be in 1..=4, got {}", self.n_max)));
                    }
                }
            }
            ExperimentKind::Integral => {
                self.region().validate()?;
                if !(1..=4).contains(&self.integral_order) {
                    return Err(SleError::InvalidInput(format!(
                        "integral_order must be in 1..=4, got {}",
                        self.integral_order
                    )));
                }
            }
        }
        if matches!(self.kind, ExperimentKind::HitProb | ExperimentKind::Exponent | ExperimentKind::BoundCheck) {
            let m = &self.escape_multipliers;
            if m.is_empty() || m.iter().any(|x| !(*x >= 1.0)) || m.windows(2).any(|w| w[1] <= w[0]) {
                return Err(SleError::InvalidInput("escape_multipliers must be increasing and at least 1".into()));
            }
        }
        let _ = p;
        Ok(())
    }

    fn check_radii(&self, radii: &[f64]) -> Result<()> {
        for &r in radii {
            if !(r > 0.0) {
                return Err(SleError::NonPositive { name: "radius", value: r });
            }
            self.sim.check_radius(r)?;
        }
        Ok(())
    }
}
