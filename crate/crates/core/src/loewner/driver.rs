use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SleError};
use crate::params::SleParams;
use crate::rng::substream;
use crate::scalar::Real;

/// Driving function `V_t = sqrt(kappa) B_t` sampled on a time grid.
///
/// On `(t_{k-1}, t_k]` the driver is held at `values[k]`, so the tip at time
/// `t_k` is the preimage of `values[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivingPath<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub kappa: T,
    pub seed: u64,
}

impl<T: Real> DrivingPath<T> {
    /// Path from explicit grid and values; `times[0] = values[0] = 0`.
    pub fn from_parts(times: Vec<T>, values: Vec<T>, kappa: T, seed: u64) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(SleError::InvalidInput("times and values must be non-empty and equally long".into()));
        }
        if times[0] != T::zero() || values[0] != T::zero() {
            return Err(SleError::InvalidInput("path must start at t = 0 with V_0 = 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(SleError::InvalidInput("time grid must be non-decreasing".into()));
        }
        Ok(Self { times, values, kappa, seed })
    }

    /// Identically zero driver on a uniform grid.
    pub fn constant_zero(horizon: T, steps: usize) -> Self {
        let times = uniform_grid(horizon, steps);
        let values = vec![T::zero(); times.len()];
        Self { times, values, kappa: T::zero(), seed: 0 }
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> T {
        *self.times.last().expect("non-empty grid")
    }

    /// `(driver value, dt)` for each step.
    pub fn increments(&self) -> Vec<(T, T)> {
        self.times
            .windows(2)
            .zip(&self.values[1..])
            .map(|(w, &v)| (v, w[1] - w[0]))
            .collect()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

fn uniform_grid<T: Real>(horizon: T, steps: usize) -> Vec<T> {
    let n = T::from_usize(steps).expect("step count");
    (0..=steps)
        .map(|k| horizon * T::from_usize(k).expect("index") / n)
        .collect()
}

/// Brownian driver on a uniform grid of `steps` intervals over `[0, horizon]`,
/// drawn from stream 0 of `seed`.
pub fn sample_driver<T: Real>(p: &SleParams<T>, horizon: T, steps: usize, seed: u64) -> Result<DrivingPath<T>> {
    if steps == 0 {
        return Err(SleError::InvalidInput("steps must be at least 1".into()));
    }
    if !(horizon > T::zero()) {
        return Err(SleError::NonPositive { name: "T", value: horizon.as_f64() });
    }
    let times = uniform_grid(horizon, steps);
    let mut rng = substream(seed, 0);
    let mut values = Vec::with_capacity(steps + 1);
    values.push(T::zero());
    let mut v = 0.0_f64;
    let kappa = p.kappa().as_f64();
    for w in times.windows(2) {
        let dt = (w[1] - w[0]).as_f64();
        let xi: f64 = rng.sample(StandardNormal);
        v += (kappa * dt).sqrt() * xi;
        values.push(T::lit(v));
    }
    Ok(DrivingPath { times, values, kappa: p.kappa(), seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;

    #[test]
    fn reproducible_from_seed() {
        let p = derive_params(8.0 / 3.0).unwrap();
        let a = sample_driver(&p, 1.0, 100, 5).unwrap();
        let b = sample_driver(&p, 1.0, 100, 5).unwrap();
        let c = sample_driver(&p, 1.0, 100, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert_eq!(a.values[0], 0.0);
        assert_eq!(a.times.len(), 101);
        assert_eq!(a.horizon(), 1.0);
    }

    #[test]
    fn golden_seed_42() {
        let p = derive_params(2.0).unwrap();
        let path = sample_driver(&p, 1.0_f64, 4, 42).unwrap();
        assert_eq!(path.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let golden = GOLDEN_SEED_42;
        for (v, g) in path.values.iter().zip(golden) {
            assert_eq!(v.to_bits(), g.to_bits(), "{v} vs {g}");
        }
    }

    const GOLDEN_SEED_42: [f64; 5] = [0.0, 0.33798377491795095, 1.2813141499945377, 1.1322088883272763, 1.4690370283498455];

    #[test]
    fn tiny_kappa_is_nearly_still() {
        let p = derive_params(1e-12).unwrap();
        let path = sample_driver(&p, 1.0, 50, 1).unwrap();
        assert!(path.max_abs() < 1e-4);
    }

    #[test]
    fn variance_matches_kappa_t() {
        // E[V_T^2] / (kappa T) = 1 with stderr sqrt(2 / n)
        let p = derive_params(3.0).unwrap();
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|s| {
                let v = *sample_driver(&p, 2.0, 4, s).unwrap().values.last().unwrap();
                v * v / (3.0 * 2.0)
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() <= 3.0 * (2.0 / n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn zero_steps_rejected() {
        let p = derive_params(2.0).unwrap();
        assert!(sample_driver(&p, 1.0, 0, 1).is_err());
        assert!(sample_driver(&p, 0.0, 3, 1).is_err());
    }

    #[test]
    fn increments_pair_right_endpoint_values() {
        let path = DrivingPath::from_parts(vec![0.0, 0.5, 1.5], vec![0.0, 1.0, -1.0], 2.0, 0).unwrap();
        assert_eq!(path.increments(), vec![(1.0, 0.5), (-1.0, 1.0)]);
        assert!(DrivingPath::from_parts(vec![0.0, 1.0, 0.5], vec![0.0, 0.0, 0.0], 2.0, 0).is_err());
    }
}
