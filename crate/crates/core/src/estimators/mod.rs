//! Monte Carlo estimators built on the adaptive trace simulator.

pub mod hitting;
pub mod integral;
pub mod minkowski;
pub mod regression;
pub mod stats;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SleError};
use crate::rng::derive_seed;

/// How many samples to draw and how to schedule them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub reproducible: bool,
}

impl SampleSpec {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self { n_samples, seed, workers: 1, reproducible: true }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(SleError::InvalidInput("n_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// A family of i.i.d. samples, each producing a fixed-width outcome vector.
pub trait SampleTask: Sync {
    fn width(&self) -> usize;
    /// Outcome of sample `index`; the stream depends only on `(seed, index)`.
    fn outcome(&self, seed: u64, index: u64) -> Result<Vec<f64>>;
}

/// Stream key separating the per-kind sample streams of one master seed.
pub const SIM_STREAM: u64 = 0x5e1;
pub const INTEGRAL_STREAM: u64 = 0x1a7;

/// Extends `acc` with samples `acc.n .. target` of `task`.
pub fn extend<T: SampleTask>(task: &T, acc: Accumulator, target: u64, spec: &SampleSpec, key: u64) -> Result<Accumulator> {
    let seed = derive_seed(spec.seed, key);
    let start = acc.n;
    if target < start {
        return Err(SleError::InvalidInput(format!("cannot shrink {start} samples to {target}")));
    }
    crate::pool::accumulate(acc, start..target, spec.workers, spec.reproducible, |i| task.outcome(seed, i))
}

/// Runs all `spec.n_samples` samples of `task` from scratch.
pub fn run_task<T: SampleTask>(task: &T, spec: &SampleSpec, key: u64) -> Result<Accumulator> {
    spec.validate()?;
    extend(task, Accumulator::new(task.width()), spec.n_samples, spec, key)
}

pub use hitting::{hit_prob, HitExperiment, HitObserver};
pub use integral::{integral_lk_bound, Region};
pub use minkowski::{content_moments, minkowski_content, MomentTable, Rect};
pub use regression::{exponent_fit, ExponentFit};
pub use stats::{Accumulator, EstimateResult};
