//! Probabilities that the trace passes near a set of marked points.

use num_complex::Complex64;
use serde::Serialize;

use super::stats::EstimateResult;
use super::{run_task, SampleSpec, SampleTask, SIM_STREAM};
use crate::digest::sha256_json;
use crate::error::{Result, SleError};
use crate::loewner::adaptive::{background_spacing, simulate, Flow, SimConfig, TraceObserver};
use crate::loewner::trace::point_segment_distance;
use crate::params::SleParams;
use crate::points::PointConfig;
use crate::rng::substream;

/// Tracks the distance from each marked point to the trace so far, and its
/// value when the trace first reaches each checkpoint radius.
pub struct HitObserver<'a> {
    points: &'a [Complex64],
    resolve: &'a [f64],
    checkpoints: &'a [f64],
    sim: &'a SimConfig,
    scale: f64,
    floor: f64,
    pub mins: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
}

impl<'a> HitObserver<'a> {
    /// `resolve[k]` is the smallest radius of interest around `points[k]`;
    /// once the trace is that close, the point no longer constrains the grid.
    pub fn new(points: &'a [Complex64], resolve: &'a [f64], checkpoints: &'a [f64], sim: &'a SimConfig) -> Self {
        let scale = points.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        Self {
            points,
            resolve,
            checkpoints,
            sim,
            scale: if scale.is_finite() && scale > 0.0 { scale } else { 1.0 },
            floor: sim.near_spacing(resolve.iter().cloned().fold(f64::INFINITY, f64::min)),
            mins: vec![f64::INFINITY; points.len()],
            snapshots: Vec::with_capacity(checkpoints.len()),
        }
    }

    fn resolved(&self) -> bool {
        self.mins.iter().zip(self.resolve).all(|(m, r)| m <= r)
    }

    /// Checkpoints the trace never reached inherit the final distances.
    pub fn finish(&mut self) {
        while self.snapshots.len() < self.checkpoints.len() {
            self.snapshots.push(self.mins.clone());
        }
    }
}

impl TraceObserver for HitObserver<'_> {
    fn spacing(&self, tip: Complex64) -> f64 {
        let mut s = background_spacing(tip, self.scale, self.sim.far_factor, self.floor);
        for ((z, &r), &m) in self.points.iter().zip(self.resolve).zip(&self.mins) {
            if m > r {
                let far = ((tip - z).norm() - r) / self.sim.far_factor;
                s = s.min(far.max(self.sim.near_spacing(r)));
            }
        }
        s
    }

    fn probes(&self) -> Vec<Complex64> {
        self.points.to_vec()
    }

    fn probe_active(&self, k: usize) -> bool {
        self.mins[k] > self.resolve[k]
    }

    fn segment(&mut self, a: Complex64, b: Complex64) -> Flow {
        for (m, z) in self.mins.iter_mut().zip(self.points) {
            *m = m.min(point_segment_distance(*z, a, b));
        }
        while self.snapshots.len() < self.checkpoints.len() && b.norm() >= self.checkpoints[self.snapshots.len()] {
            self.snapshots.push(self.mins.clone());
        }
        if self.resolved() {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

/// Joint hitting events for several radius sets on one trace ensemble.
///
/// Outcome `c * sets + j` is the indicator that every point `k` is within
/// `radius_sets[j][k]` of the trace before it first leaves the disk of radius
/// `escape_multipliers[c] * r_esc`.
#[derive(Debug, Clone, Serialize)]
pub struct HitExperiment {
    pub kappa: f64,
    pub points: Vec<[f64; 2]>,
    pub radius_sets: Vec<Vec<f64>>,
    pub escape_multipliers: Vec<f64>,
    pub sim: SimConfig,
    #[serde(skip)]
    params: Option<SleParams<f64>>,
    #[serde(skip)]
    zs: Vec<Complex64>,
    #[serde(skip)]
    resolve: Vec<f64>,
    #[serde(skip)]
    checkpoints: Vec<f64>,
}

impl HitExperiment {
    pub fn new(
        p: &SleParams<f64>,
        points: &[Complex64],
        radius_sets: Vec<Vec<f64>>,
        escape_multipliers: Vec<f64>,
        sim: SimConfig,
    ) -> Result<Self> {
        sim.validate()?;
        if points.is_empty() || radius_sets.is_empty() {
            return Err(SleError::InvalidInput("hitting experiment needs points and radii".into()));
        }
        for (k, z) in points.iter().enumerate() {
            if !(z.im >= 0.0) || !z.re.is_finite() || !z.im.is_finite() {
                return Err(SleError::BelowRealLine(k));
            }
        }
        for set in &radius_sets {
            if set.len() != points.len() {
                return Err(SleError::InvalidInput(format!(
                    "radius set has {} entries for {} points",
                    set.len(),
                    points.len()
                )));
            }
            for &r in set {
                sim.check_radius(r)?;
            }
        }
        let mut mults = escape_multipliers;
        if mults.is_empty() {
            mults.push(1.0);
        }
        if mults.iter().any(|m| !(*m >= 1.0)) || mults.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SleError::InvalidInput("escape multipliers must be increasing and at least 1".into()));
        }
        let resolve: Vec<f64> = (0..points.len())
            .map(|k| radius_sets.iter().map(|s| s[k]).fold(f64::INFINITY, f64::min))
            .collect();
        let reach = points
            .iter()
            .enumerate()
            .map(|(k, z)| z.norm() + radius_sets.iter().map(|s| s[k]).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let r_esc = sim.r_esc_factor * reach;
        let checkpoints = mults.iter().map(|m| m * r_esc).collect();
        Ok(Self {
            kappa: p.kappa(),
            points: points.iter().map(|z| [z.re, z.im]).collect(),
            radius_sets,
            escape_multipliers: mults,
            sim,
            params: Some(*p),
            zs: points.to_vec(),
            resolve,
            checkpoints,
        })
    }

    pub fn escape_radius(&self) -> f64 {
        self.checkpoints[0]
    }

    pub fn sets(&self) -> usize {
        self.radius_sets.len()
    }

    pub fn digest(&self) -> Result<String> {
        sha256_json(self)
    }

    /// The trace of sample `index`, up to the point where its outcome is decided.
    pub fn trace(&self, seed: u64, index: u64) -> Result<crate::loewner::Trace<f64>> {
        let p = self.params.as_ref().expect("constructed through new");
        let mut obs = HitObserver::new(&self.zs, &self.resolve, &self.checkpoints, &self.sim);
        let r_esc = *self.checkpoints.last().expect("at least one checkpoint");
        let out = simulate(p, &self.sim, r_esc, &mut substream(seed, index), &mut obs, true)?;
        Ok(out.recorded.expect("recording requested").1)
    }

    /// Distances from each point to the trace at each checkpoint.
    pub fn distances(&self, seed: u64, index: u64) -> Result<Vec<Vec<f64>>> {
        let p = self.params.as_ref().expect("constructed through new");
        let mut obs = HitObserver::new(&self.zs, &self.resolve, &self.checkpoints, &self.sim);
        let mut rng = substream(seed, index);
        let r_esc = *self.checkpoints.last().expect("at least one checkpoint");
        simulate(p, &self.sim, r_esc, &mut rng, &mut obs, false)?;
        obs.finish();
        Ok(obs.snapshots)
    }
}

impl SampleTask for HitExperiment {
    fn width(&self) -> usize {
        self.checkpoints.len() * self.radius_sets.len()
    }

    fn outcome(&self, seed: u64, index: u64) -> Result<Vec<f64>> {
        let snaps = self.distances(seed, index)?;
        let mut out = Vec::with_capacity(self.width());
        for mins in &snaps {
            for set in &self.radius_sets {
                let hit = mins.iter().zip(set).all(|(m, r)| m <= r);
                out.push(if hit { 1.0 } else { 0.0 });
            }
        }
        Ok(out)
    }
}

/// Runs a hitting experiment; results are indexed `[checkpoint][set]`.
pub fn hit_prob_coupled(exp: &HitExperiment, spec: &SampleSpec) -> Result<Vec<Vec<EstimateResult>>> {
    let acc = run_task(exp, spec, SIM_STREAM)?;
    let hash = exp.digest()?;
    let flat = acc.estimates(&hash);
    Ok(flat.chunks(exp.sets()).map(|c| c.to_vec()).collect())
}

/// Probability that the trace comes within `r_k` of every `z_k`.
pub fn hit_prob(cfg: &PointConfig<f64>, p: &SleParams<f64>, spec: &SampleSpec, sim: &SimConfig) -> Result<EstimateResult> {
    let points: Vec<Complex64> = cfg.points().iter().map(|z| z.to_complex()).collect();
    let exp = HitExperiment::new(p, &points, vec![cfg.radii().to_vec()], vec![1.0], *sim)?;
    Ok(hit_prob_coupled(&exp, spec)?.remove(0).remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::trace::dist_to_trace;
    use crate::params::derive_params;

    fn exp(kappa: f64, z: Complex64, radii: &[f64]) -> HitExperiment {
        let p = derive_params(kappa).unwrap();
        let sets = radii.iter().map(|r| vec![*r]).collect();
        HitExperiment::new(&p, &[z], sets, vec![1.0, 2.0], SimConfig::default()).unwrap()
    }

    #[test]
    fn incremental_distance_matches_recorded_trace() {
        let p = derive_params(8.0 / 3.0).unwrap();
        let sim = SimConfig::default();
        let z = [Complex64::new(0.3, 0.8)];
        let resolve = [0.05];
        let cps = [6.0];
        for seed in 0..5 {
            let mut obs = HitObserver::new(&z, &resolve, &cps, &sim);
            let out = simulate(&p, &sim, 6.0, &mut substream(seed, 0), &mut obs, true).unwrap();
            let (_, trace) = out.recorded.unwrap();
            let d = dist_to_trace(&trace, z[0]).unwrap();
            assert_eq!(d, obs.mins[0]);
            // Vertices next to the point are resolved finely.
            for w in trace.vertices.windows(2) {
                if (w[0] - z[0]).norm() < 0.1 {
                    assert!((w[1] - w[0]).norm() <= 0.01 * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn coupled_radii_are_monotone() {
        let e = exp(8.0 / 3.0, Complex64::new(0.0, 1.0), &[0.3, 0.15, 0.08]);
        for i in 0..20 {
            let o = e.outcome(11, i).unwrap();
            for c in o.chunks(3) {
                assert!(c[0] >= c[1] && c[1] >= c[2]);
            }
            // a hit before the first exit is a hit before the second
            for j in 0..3 {
                assert!(o[3 + j] >= o[j]);
            }
        }
    }

    #[test]
    fn huge_radius_always_hits() {
        let p = derive_params(2.0).unwrap();
        let cfg = PointConfig::from_pairs(&[(0.0, 1.0)], &[5.0]).unwrap();
        let e = hit_prob(&cfg, &p, &SampleSpec::new(20, 1), &SimConfig::default()).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn zero_samples_rejected() {
        let p = derive_params(2.0).unwrap();
        let cfg = PointConfig::from_pairs(&[(0.0, 1.0)], &[0.2]).unwrap();
        assert!(hit_prob(&cfg, &p, &SampleSpec::new(0, 1), &SimConfig::default()).is_err());
    }

    #[test]
    fn radius_below_floor_rejected() {
        let p = derive_params(2.0).unwrap();
        let cfg = PointConfig::from_pairs(&[(0.0, 1.0)], &[1e-9]).unwrap();
        let err = hit_prob(&cfg, &p, &SampleSpec::new(5, 1), &SimConfig::default()).unwrap_err();
        assert!(matches!(err, SleError::BelowResolutionFloor { .. }));
    }

    #[test]
    fn later_checkpoint_sees_returns() {
        let p = derive_params(6.0).unwrap();
        let sim = SimConfig { r_esc_factor: 1.0, ..SimConfig::default() };
        let e = HitExperiment::new(&p, &[Complex64::new(0.0, 1.0)], vec![vec![0.3]], vec![1.0, 8.0], sim).unwrap();
        let est = hit_prob_coupled(&e, &SampleSpec::new(200, 4)).unwrap();
        assert!(est[1][0].mean > est[0][0].mean, "{} vs {}", est[1][0].mean, est[0][0].mean);
    }
}
