//! One-point Green's function in the half-plane and its conformal covariance
//! under half-plane automorphisms. The kappa-dependent constant is set to 1.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SleError};
use crate::params::SleParams;
use crate::points::HalfPlanePoint;
use crate::scalar::Real;

/// `Im(z)^(d-2) sin^alpha(arg z)` for `z` in the open upper half-plane.
pub fn green_halfplane<T: Real>(z: HalfPlanePoint<T>, p: &SleParams<T>) -> Result<T> {
    if !(z.im > T::zero()) {
        return Err(SleError::NotInterior(format!("({}, {})", z.re, z.im)));
    }
    Ok(green_unchecked(z.to_complex(), p))
}

pub(crate) fn green_unchecked<T: Real>(z: Complex<T>, p: &SleParams<T>) -> T {
    // arg z in (0, pi), so sin(arg z) = Im z / |z|.
    let sin_arg = z.im / z.norm();
    z.im.powf(p.d() - T::lit(2.0)) * sin_arg.powf(p.alpha())
}

/// `w -> (a w + b) / (c w + d)` with real coefficients and `ad - bc > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap<T> {
    a: T,
    b: T,
    c: T,
    d: T,
}

impl<T: Real> MobiusMap<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > T::zero()) {
            return Err(SleError::DegenerateMap(det.as_f64()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        Self { a: T::one(), b: T::zero(), c: T::zero(), d: T::one() }
    }

    pub fn dilation(lambda: T) -> Result<Self> {
        Self::new(lambda, T::zero(), T::zero(), T::one())
    }

    pub fn translation(shift: T) -> Self {
        Self { a: T::one(), b: shift, c: T::zero(), d: T::one() }
    }

    pub fn determinant(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, w: Complex<T>) -> Complex<T> {
        (w * self.a + self.b) / (w * self.c + self.d)
    }

    pub fn derivative(&self, w: Complex<T>) -> Complex<T> {
        let den = w * self.c + self.d;
        Complex::new(self.determinant(), T::zero()) / (den * den)
    }

    pub fn inverse(&self) -> Self {
        // Determinant is unchanged, so the inverse is again an automorphism.
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }
}

/// Green's function of `(F(H); F(0), F(inf))` at `z`:
/// `|(F^-1)'(z)|^(2-d) G(F^-1(z))`.
pub fn green_domain<T: Real>(z: HalfPlanePoint<T>, map: &MobiusMap<T>, p: &SleParams<T>) -> Result<T> {
    if map.determinant() <= T::zero() {
        return Err(SleError::DegenerateMap(map.determinant().as_f64()));
    }
    if !(z.im > T::zero()) {
        return Err(SleError::NotInterior(format!("({}, {})", z.re, z.im)));
    }
    let inv = map.inverse();
    let zc = z.to_complex();
    let pulled = inv.apply(zc);
    if !(pulled.im > T::zero()) || !pulled.re.is_finite() {
        return Err(SleError::NotInterior(format!("preimage ({}, {})", pulled.re, pulled.im)));
    }
    let scale = inv.derivative(zc).norm();
    Ok(scale.powf(p.interior_exponent()) * green_unchecked(pulled, p))
}
