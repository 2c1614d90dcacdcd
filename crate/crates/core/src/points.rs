//! Marked points in the closed upper half-plane.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SleError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlanePoint<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> HalfPlanePoint<T> {
    pub fn new(re: T, im: T) -> Result<Self> {
        if !(im >= T::zero()) || !re.is_finite() || !im.is_finite() {
            return Err(SleError::InvalidInput(format!(
                "({re}, {im}) is not a finite point of the closed upper half-plane"
            )));
        }
        Ok(Self { re, im })
    }

    pub fn from_complex(z: Complex<T>) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn to_complex(self) -> Complex<T> {
        Complex::new(self.re, self.im)
    }

    pub fn is_boundary(&self) -> bool {
        self.im == T::zero()
    }

    pub fn abs(&self) -> T {
        self.re.hypot(self.im)
    }

    pub fn dist(&self, other: &Self) -> T {
        (self.re - other.re).hypot(self.im - other.im)
    }
}

/// Points `z_1..z_n`, radii `r_1..r_n` and the gaps
/// `l_k = dist(z_k, {0, z_1, .., z_{k-1}})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig<T> {
    points: Vec<HalfPlanePoint<T>>,
    radii: Vec<T>,
    gaps: Vec<T>,
}

impl<T: Real> PointConfig<T> {
    pub fn new(points: Vec<HalfPlanePoint<T>>, radii: Vec<T>) -> Result<Self> {
        if points.len() != radii.len() {
            return Err(SleError::DegenerateConfig(format!(
                "{} points but {} radii",
                points.len(),
                radii.len()
            )));
        }
        for (k, z) in points.iter().enumerate() {
            if !(z.im >= T::zero()) {
                return Err(SleError::BelowRealLine(k));
            }
        }
        for (k, &r) in radii.iter().enumerate() {
            if !(r > T::zero()) || !r.is_finite() {
                return Err(SleError::DegenerateConfig(format!("radius {k} is {r}")));
            }
        }
        let gaps = gaps_of(&points)?;
        Ok(Self { points, radii, gaps })
    }

    /// Builds a configuration from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(T, T)], radii: &[T]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(re, im)| HalfPlanePoint::new(re, im))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, radii.to_vec())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[HalfPlanePoint<T>] {
        &self.points
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn gaps(&self) -> &[T] {
        &self.gaps
    }

    /// Same points with new radii.
    pub fn with_radii(&self, radii: Vec<T>) -> Result<Self> {
        Self::new(self.points.clone(), radii)
    }

    /// Multiplies every point and radius by `lambda > 0`.
    pub fn scaled(&self, lambda: T) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|z| HalfPlanePoint { re: z.re * lambda, im: z.im * lambda })
            .collect();
        Self::new(points, self.radii.iter().map(|&r| r * lambda).collect())
    }
}

fn gaps_of<T: Real>(points: &[HalfPlanePoint<T>]) -> Result<Vec<T>> {
    let origin = HalfPlanePoint { re: T::zero(), im: T::zero() };
    let mut gaps = Vec::with_capacity(points.len());
    for (k, z) in points.iter().enumerate() {
        let mut l = z.dist(&origin);
        for prev in &points[..k] {
            l = l.min(z.dist(prev));
        }
        if !(l > T::zero()) {
            return Err(SleError::DegenerateConfig(format!(
                "point {k} coincides with the origin or an earlier point"
            )));
        }
        gaps.push(l);
    }
    Ok(gaps)
}
