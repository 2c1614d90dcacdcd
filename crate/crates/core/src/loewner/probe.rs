use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::driver::DrivingPath;
use super::maps::upper_sqrt;
use crate::error::{Result, SleError};
use crate::scalar::Real;

/// Default distance to the singularity at which a point counts as swallowed.
pub const DEFAULT_BLOWUP: f64 = 1e-8;

/// Forward Loewner flow of a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullProbe<T> {
    pub z: Complex<T>,
    /// `None` when the point survives the whole path.
    pub blow_up_time: Option<T>,
    /// `g_T(z)` when the point survives.
    pub g_t_z: Option<Complex<T>>,
    /// `g_T(z) - z`, accumulated without cancellation.
    pub displacement: Option<Complex<T>>,
}

/// Integrates `dg/dt = 2 / (g - V_t)` through the path with the exact
/// per-step maps. Blow-up is declared as soon as `|g_t(z) - V_t|` drops below
/// `blowup` at any time inside a step.
pub fn forward_probe<T: Real>(path: &DrivingPath<T>, z: Complex<T>, blowup: T) -> Result<HullProbe<T>> {
    if !(z.im > T::zero()) {
        return Err(SleError::NotInterior(format!("probe point {z}")));
    }
    let four = T::lit(4.0);
    let mut g = z;
    let mut disp = Complex::new(T::zero(), T::zero());
    for (k, w) in path.times.windows(2).enumerate() {
        let (t0, dt) = (w[0], w[1] - w[0]);
        let drive = path.values[k + 1];
        let u = g - drive;
        let q = u * u;
        // |g_s - W|^2 = |u^2 + 4s| on the step; find its minimum over s in [0, dt].
        let s_star = (-q.re / four).max(T::zero()).min(dt);
        let closest = (q + four * s_star).norm().sqrt();
        if closest < blowup {
            return Ok(HullProbe { z, blow_up_time: Some(t0 + s_star), g_t_z: None, displacement: None });
        }
        if dt > T::zero() {
            let s = upper_sqrt(q + four * dt, u);
            let step = Complex::new(four * dt, T::zero()) / (u + s);
            g = g + step;
            disp = disp + step;
        }
    }
    Ok(HullProbe { z, blow_up_time: None, g_t_z: Some(g), displacement: Some(disp) })
}

/// Half-plane capacity of the hull generated by `path`, read off the
/// expansion `g(z) = z + c/z + ...` at four far probe points placed
/// symmetrically so that the `1/z^2` and `1/z^3` terms cancel in the real part.
pub fn hcap_estimate<T: Real>(path: &DrivingPath<T>) -> Result<T> {
    let horizon = path.horizon();
    if horizon == T::zero() {
        return Ok(T::zero());
    }
    let radius = T::lit(1e3) * (horizon.sqrt() + path.max_abs()).max(T::one());
    let eighth = T::PI() / T::lit(8.0);
    let mut acc = T::zero();
    for m in [1.0, 3.0, 5.0, 7.0] {
        let z = Complex::from_polar(radius, eighth * T::lit(m));
        let probe = forward_probe(path, z, T::lit(DEFAULT_BLOWUP))?;
        let disp = probe
            .displacement
            .ok_or_else(|| SleError::InvalidInput("far probe point was swallowed".into()))?;
        acc = acc + (z * disp).re;
    }
    Ok(acc / T::lit(4.0))
}
