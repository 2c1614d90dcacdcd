//! Trace generation on an adaptive time grid.
//!
//! The driver is refined where the trace needs resolution and coarsened
//! elsewhere. Each proposed step is pulled back to the original domain; if
//! the new vertex lands farther from the previous one than the observer's
//! requested spacing, the step is split at its midpoint with a Brownian
//! bridge draw, so the grid values remain exact samples of `sqrt(kappa) B`.
//! The run ends when the trace leaves the escape disk or the observer stops it.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::driver::DrivingPath;
use super::maps::{forward_slit, pull_back};
use super::trace::Trace;
use crate::error::{Result, SleError};
use crate::params::SleParams;

/// Resolution and truncation policy shared by every simulation-backed estimand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Near a target of radius `r`, vertices are at most `2 r / sqrt(c_res)` apart.
    pub c_res: f64,
    /// Away from targets, vertices are at most `distance / far_factor` apart.
    pub far_factor: f64,
    /// Escape radius as a multiple of the farthest target extent.
    pub r_esc_factor: f64,
    /// Each step's slit, `2 sqrt(dt)`, is kept below `1 / probe_factor` of the
    /// distance from the driver to the current image of every active probe.
    /// Zero disables the control.
    pub probe_factor: f64,
    /// Blow-up threshold for forward probes.
    pub blowup: f64,
    /// Smallest step the refinement may produce.
    pub dt_min: f64,
    pub max_steps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            c_res: 100.0,
            far_factor: 10.0,
            probe_factor: 2.5,
            r_esc_factor: 8.0,
            blowup: super::probe::DEFAULT_BLOWUP,
            dt_min: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c_res", self.c_res),
            ("far_factor", self.far_factor),
            ("r_esc_factor", self.r_esc_factor),
            ("blowup", self.blowup),
            ("dt_min", self.dt_min),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SleError::NonPositive { name, value });
            }
        }
        if !(self.probe_factor >= 0.0 && self.probe_factor.is_finite()) {
            return Err(SleError::Negative { name: "probe_factor", value: self.probe_factor });
        }
        if self.c_res < 64.0 {
            // Near spacing 2r/sqrt(c_res) must stay below r/4.
            return Err(SleError::InvalidInput(format!("c_res must be at least 64, got {}", self.c_res)));
        }
        if self.r_esc_factor < 1.0 {
            return Err(SleError::InvalidInput("r_esc_factor must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(SleError::InvalidInput("max_steps must be positive".into()));
        }
        Ok(())
    }

    /// Vertex spacing near a target of radius `r`.
    pub fn near_spacing(&self, r: f64) -> f64 {
        2.0 * r / self.c_res.sqrt()
    }

    /// Smallest radius the grid can resolve: the slit height of a step must
    /// stay below a quarter of the radius, `8 sqrt(dt) <= r`.
    pub fn resolution_floor(&self) -> f64 {
        8.0 * self.dt_min.sqrt()
    }

    /// Rejects radii the configured resolution cannot resolve.
    pub fn check_radius(&self, r: f64) -> Result<()> {
        let floor = self.resolution_floor();
        if !(r >= floor) || !r.is_finite() {
            return Err(SleError::BelowResolutionFloor { radius: r, floor });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Consumes the trace as it is generated and steers the resolution.
pub trait TraceObserver {
    /// Largest acceptable distance between consecutive vertices near `tip`.
    fn spacing(&self, tip: Complex64) -> f64;
    /// Receives segment `[a, b]`; the first call is the degenerate `[0, 0]`.
    fn segment(&mut self, a: Complex64, b: Complex64) -> Flow;
    /// Points whose images under the Loewner flow also limit the step size.
    fn probes(&self) -> Vec<Complex64> {
        Vec::new()
    }
    fn probe_active(&self, _k: usize) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub steps: usize,
    pub rejected: usize,
    pub final_time: f64,
    pub exited: bool,
    /// Driving path and trace, when recording was requested.
    pub recorded: Option<(DrivingPath<f64>, Trace<f64>)>,
}

/// Runs one trace until it leaves the disk of radius `r_esc` or the observer
/// stops it. Randomness is drawn from `rng` in a fixed order.
pub fn simulate<R: Rng, O: TraceObserver>(
    p: &SleParams<f64>,
    sim: &SimConfig,
    r_esc: f64,
    rng: &mut R,
    observer: &mut O,
    record: bool,
) -> Result<SimOutcome> {
    let kappa = p.kappa();
    let sqrt_kappa = kappa.sqrt();
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut knots: Vec<(f64, f64)> = Vec::new();
    let (mut t, mut v) = (0.0_f64, 0.0_f64);
    let mut tip = Complex64::new(0.0, 0.0);
    let mut rec_times = vec![0.0];
    let mut rec_values = vec![0.0];
    let mut rec_vertices = vec![tip];
    let mut rejected = 0usize;
    let mut exited = false;

    let outcome = |steps: &Vec<(f64, f64)>, t, exited, rejected, times, values, vertices| SimOutcome {
        steps: steps.len(),
        rejected,
        final_time: t,
        exited,
        recorded: record.then(|| {
            (
                DrivingPath { times: Vec::clone(times), values: Vec::clone(values), kappa, seed: 0 },
                Trace { vertices: Vec::clone(vertices), times: Vec::clone(times) },
            )
        }),
    };

    if observer.segment(tip, tip) == Flow::Stop {
        return Ok(outcome(&steps, t, false, 0, &rec_times, &rec_values, &rec_vertices));
    }

    let mut images = if sim.probe_factor > 0.0 { observer.probes() } else { Vec::new() };
    // Swallowed probes can no longer be approached and are dropped.
    let mut alive = vec![true; images.len()];
    let swallow = sim.blowup.max(4.0 * sim.probe_factor * sim.dt_min.sqrt());
    // Largest step the probes allow with driver value `w`.
    let probe_dt = |images: &[Complex64], alive: &[bool], obs: &O, w: f64| {
        images
            .iter()
            .enumerate()
            .filter(|(k, _)| alive[*k] && obs.probe_active(*k))
            .map(|(_, g)| {
                let h = (g - w).norm() / (2.0 * sim.probe_factor);
                h * h
            })
            .fold(f64::INFINITY, f64::min)
    };

    // Vertex displacement per step is about (2 + sqrt(kappa) |xi|) sqrt(dt).
    let first = observer.spacing(tip) / (2.0 + 2.0 * sqrt_kappa);
    let mut dt_next = (first * first).min(0.5 * probe_dt(&images, &alive, observer, v)).max(sim.dt_min);

    loop {
        if steps.len() >= sim.max_steps {
            return Err(SleError::StepBudgetExceeded(sim.max_steps));
        }
        let target = observer.spacing(tip);
        let (t1, v1) = match knots.pop() {
            Some(knot) => knot,
            None => {
                let dt = dt_next.max(sim.dt_min);
                let xi: f64 = rng.sample(StandardNormal);
                (t + dt, v + (kappa * dt).sqrt() * xi)
            }
        };
        let dt = t1 - t;
        let splittable = dt > 2.0 * sim.dt_min;
        let coarse = splittable && dt > probe_dt(&images, &alive, observer, v1);
        let (cand, disp) = if coarse {
            (tip, f64::INFINITY)
        } else {
            let cand = pull_back(&steps, v1, dt);
            (cand, (cand - tip).norm())
        };
        if coarse || (disp > target && splittable) {
            // Split with a Brownian bridge midpoint; the far knot is revisited next.
            let xi: f64 = rng.sample(StandardNormal);
            let mid = (t + 0.5 * dt, 0.5 * (v + v1) + 0.5 * (kappa * dt).sqrt() * xi);
            knots.push((t1, v1));
            knots.push(mid);
            rejected += 1;
            continue;
        }
        if cand.im < -1e-12 * (1.0 + cand.norm()) || !cand.re.is_finite() {
            return Err(SleError::BranchViolation { index: steps.len() + 1, im: cand.im });
        }
        for (k, g) in images.iter_mut().enumerate() {
            if alive[k] && observer.probe_active(k) {
                *g = forward_slit(*g, v1, dt);
                alive[k] = (*g - v1).norm() > swallow;
            }
        }
        steps.push((v1, dt));
        t = t1;
        v = v1;
        let flow = observer.segment(tip, cand);
        tip = cand;
        if record {
            rec_times.push(t);
            rec_values.push(v);
            rec_vertices.push(tip);
        }
        if flow == Flow::Stop {
            break;
        }
        if tip.norm() >= r_esc {
            exited = true;
            break;
        }
        let next_target = observer.spacing(tip);
        let ratio = if disp > 0.0 { (0.7 * next_target / disp).powi(2) } else { 4.0 };
        dt_next = (dt * ratio.clamp(1.0 / 16.0, 4.0)).min(0.5 * probe_dt(&images, &alive, observer, v));
    }
    Ok(outcome(&steps, t, exited, rejected, &rec_times, &rec_values, &rec_vertices))
}

/// Spacing request that only tracks the global scale of the trace.
pub fn global_spacing(tip: Complex64, scale: f64, far_factor: f64) -> f64 {
    tip.norm().max(scale) / far_factor
}

/// Spacing away from any target: a fraction of the distance to the origin
/// and of the height above the real line, the latter never below `floor`.
pub fn background_spacing(tip: Complex64, scale: f64, far_factor: f64, floor: f64) -> f64 {
    global_spacing(tip, scale, far_factor).min((tip.im / far_factor).max(floor))
}
