//! The two-regime scaling function `P_y` and the ratios built from it.
//!
//! `P_y(x) = y^(alpha-(2-d)) x^(2-d)` for `x <= y` and `x^alpha` for `x >= y`.
//! The interior exponent `2-d` governs scales below the distance to the real
//! line, the boundary exponent `alpha` governs scales above it.

use crate::error::{Result, SleError};
use crate::params::SleParams;
use crate::scalar::Real;

fn check_non_negative<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value >= T::zero() {
        Ok(())
    } else {
        Err(SleError::Negative { name, value: value.as_f64() })
    }
}

fn check_positive<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() {
        Ok(())
    } else {
        Err(SleError::NonPositive { name, value: value.as_f64() })
    }
}

/// `P_y(x)`; `P_y(0) = 0` for every `y`.
pub fn p_scaling<T: Real>(y: T, x: T, p: &SleParams<T>) -> Result<T> {
    check_non_negative("y", y)?;
    check_non_negative("x", x)?;
    Ok(p_scaling_unchecked(y, x, p))
}

pub(crate) fn p_scaling_unchecked<T: Real>(y: T, x: T, p: &SleParams<T>) -> T {
    if x == T::zero() {
        return T::zero();
    }
    if x <= y {
        let beta = p.interior_exponent();
        y.powf(p.alpha() - beta) * x.powf(beta)
    } else {
        x.powf(p.alpha())
    }
}

/// `P_y(r ∧ l) / P_y(l)`, always in `(0, 1]`.
pub fn p_ratio<T: Real>(y: T, r: T, l: T, p: &SleParams<T>) -> Result<T> {
    check_non_negative("y", y)?;
    check_positive("r", r)?;
    check_positive("l", l)?;
    Ok(p_ratio_unchecked(y, r, l, p))
}

pub(crate) fn p_ratio_unchecked<T: Real>(y: T, r: T, l: T, p: &SleParams<T>) -> T {
    if r >= l {
        return T::one();
    }
    // Evaluated branch-wise so that the y-prefactor cancels exactly.
    let beta = p.interior_exponent();
    let alpha = p.alpha();
    if l <= y {
        (r / l).powf(beta)
    } else if r >= y {
        (r / l).powf(alpha)
    } else {
        // r < y < l
        y.powf(alpha - beta) * r.powf(beta) / l.powf(alpha)
    }
}
