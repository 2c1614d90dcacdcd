use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::driver::DrivingPath;
use super::maps::pull_back;
use crate::error::{Result, SleError};
use crate::scalar::Real;

/// Polyline through `gamma(t_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace<T> {
    pub vertices: Vec<Complex<T>>,
    pub times: Vec<T>,
}

impl<T: Real> Trace<T> {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Writes `t,re,im` rows with round-trip precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,re,im")?;
        for (t, z) in self.times.iter().zip(&self.vertices) {
            writeln!(out, "{},{},{}", t.as_f64(), z.re.as_f64(), z.im.as_f64())?;
        }
        Ok(())
    }
}

/// Vertices tolerated below the real line before the trace is rejected.
const BRANCH_TOLERANCE: f64 = 1e-12;

/// Trace of the piecewise-constant driver: vertex `k` is the tip of step `k`
/// pulled back through the inverse maps of steps `k-1, .., 1`.
pub fn trace_from_driver<T: Real>(path: &DrivingPath<T>) -> Result<Trace<T>> {
    let steps = path.increments();
    let mut vertices = Vec::with_capacity(steps.len() + 1);
    vertices.push(Complex::new(T::zero(), T::zero()));
    let tol = T::lit(BRANCH_TOLERANCE);
    for (k, &(w, dt)) in steps.iter().enumerate() {
        let z = pull_back(&steps[..k], w, dt);
        if z.im < -tol * (T::one() + z.norm()) || !z.re.is_finite() {
            return Err(SleError::BranchViolation { index: k + 1, im: z.im.as_f64() });
        }
        vertices.push(z);
    }
    Ok(Trace { vertices, times: path.times.clone() })
}

/// Distance from `z` to the segment `[a, b]`.
#[inline]
pub fn point_segment_distance<T: Real>(z: Complex<T>, a: Complex<T>, b: Complex<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == T::zero() {
        return (z - a).norm();
    }
    let az = z - a;
    let s = ((az.re * ab.re + az.im * ab.im) / len2).max(T::zero()).min(T::one());
    (z - (a + ab * s)).norm()
}

/// Exact distance from `z` to the polyline.
pub fn dist_to_trace<T: Real>(trace: &Trace<T>, z: Complex<T>) -> Result<T> {
    match trace.vertices.as_slice() {
        [] => Err(SleError::InvalidInput("trace is empty".into())),
        [only] => Ok((z - only).norm()),
        vs => Ok(vs
            .windows(2)
            .map(|w| point_segment_distance(z, w[0], w[1]))
            .fold(T::infinity(), T::min)),
    }
}
