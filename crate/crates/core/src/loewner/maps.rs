//! Exact incremental maps for a piecewise-constant driving function.
//!
//! On a step of length `dt` with constant driver `w`, the Loewner flow is
//! `g -> w + sqrt((g - w)^2 + 4 dt)` and its inverse is
//! `g -> w + sqrt((g - w)^2 - 4 dt)`; the hull added by the step is the
//! vertical slit from `w` to `w + 2i sqrt(dt)`. Both maps are evaluated as
//! `g ± 4 dt / (u + s)` with `u = g - w` and `s` the square root, which avoids
//! cancellation when `|u|` is large.

use num_complex::Complex;

use crate::scalar::Real;

/// Square root of `q` on the branch that maps the upper half-plane to itself:
/// `Im s >= 0`, and for real roots the sign follows `hint`.
#[inline]
pub fn upper_sqrt<T: Real>(q: Complex<T>, hint: Complex<T>) -> Complex<T> {
    let (a, b) = (q.re, q.im);
    let zero = T::zero();
    let half = T::lit(0.5);
    let mut m = (a * a + b * b).sqrt();
    if !m.is_finite() {
        m = a.hypot(b);
    }
    if b == zero {
        return if a >= zero {
            let t = a.sqrt();
            Complex::new(if hint.re < zero { -t } else { t }, zero)
        } else {
            Complex::new(zero, (-a).sqrt())
        };
    }
    if a >= zero {
        let t = ((m + a) * half).sqrt();
        Complex::new(t.copysign(b), b.abs() / (t + t))
    } else {
        let t = ((m - a) * half).sqrt();
        Complex::new(b / (t + t), t)
    }
}

/// Forward map of one step: `w + sqrt((z - w)^2 + 4 dt)`.
#[inline]
pub fn forward_slit<T: Real>(z: Complex<T>, w: T, dt: T) -> Complex<T> {
    let four_dt = T::lit(4.0) * dt;
    if four_dt == T::zero() {
        return z;
    }
    let u = z - w;
    let s = upper_sqrt(u * u + four_dt, u);
    z + Complex::new(four_dt, T::zero()) / (u + s)
}

/// Inverse map of one step: `w + sqrt((z - w)^2 - 4 dt)`.
#[inline]
pub fn inverse_slit<T: Real>(z: Complex<T>, w: T, dt: T) -> Complex<T> {
    let four_dt = T::lit(4.0) * dt;
    if four_dt == T::zero() {
        return z;
    }
    let u = z - w;
    let s = upper_sqrt(u * u - four_dt, u);
    z - Complex::new(four_dt, T::zero()) / (u + s)
}

/// Tip of the slit added by a step: `w + 2i sqrt(dt)`.
#[inline]
pub fn slit_tip<T: Real>(w: T, dt: T) -> Complex<T> {
    Complex::new(w, T::lit(2.0) * dt.sqrt())
}

/// Trace point produced by a new step `(w, dt)` appended to `steps`: the slit
/// tip pulled back through every earlier inverse map.
pub fn pull_back<T: Real>(steps: &[(T, T)], w: T, dt: T) -> Complex<T> {
    steps
        .iter()
        .rev()
        .fold(slit_tip(w, dt), |p, &(wj, dtj)| inverse_slit(p, wj, dtj))
}
