//! SLE parameter and the exponents derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SleError};
use crate::scalar::Real;

/// `kappa` together with the fractal dimension `d = 1 + kappa/8` and the
/// boundary exponent `alpha = 8/kappa - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SleParams<T> {
    kappa: T,
    d: T,
    alpha: T,
}

impl<T: Real> SleParams<T> {
    pub fn new(kappa: T) -> Result<Self> {
        if !(kappa > T::zero() && kappa < T::lit(8.0)) {
            return Err(SleError::InvalidKappa(kappa.as_f64()));
        }
        let eight = T::lit(8.0);
        let d = T::one() + kappa / eight;
        let alpha = eight / kappa - T::one();
        debug_assert!(alpha >= T::lit(2.0) - d);
        Ok(Self { kappa, d, alpha })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    /// Hausdorff dimension of the trace.
    pub fn d(&self) -> T {
        self.d
    }

    /// Boundary hitting exponent.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Interior hitting exponent `2 - d`.
    pub fn interior_exponent(&self) -> T {
        T::lit(2.0) - self.d
    }
}

/// Free-function form of [`SleParams::new`].
pub fn derive_params<T: Real>(kappa: T) -> Result<SleParams<T>> {
    SleParams::new(kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kappa_two() {
        let p = derive_params(2.0_f64).unwrap();
        assert_eq!(p.d(), 1.25);
        assert_eq!(p.alpha(), 3.0);
    }

    #[test]
    fn kappa_eight_thirds() {
        let p = derive_params(8.0_f64 / 3.0).unwrap();
        assert_relative_eq!(p.d(), 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(p.alpha(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn approaching_eight() {
        let p = derive_params(8.0_f64 - 1e-9).unwrap();
        assert!((p.d() - 2.0).abs() < 1e-9);
        assert!(p.alpha() < 1e-9 && p.alpha() > 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        for k in [0.0, -1.0, 8.0, 9.0, f64::NAN] {
            assert!(matches!(derive_params(k), Err(SleError::InvalidKappa(_))));
        }
    }

    #[test]
    fn single_precision() {
        let p = derive_params(2.0_f32).unwrap();
        assert_eq!(p.d(), 1.25_f32);
        assert_eq!(p.alpha(), 3.0_f32);
    }

    #[test]
    fn alpha_dominates_interior_exponent() {
        for i in 1..800 {
            let p = derive_params(i as f64 * 0.01).unwrap();
            assert!(p.alpha() >= p.interior_exponent());
            assert!(p.d() > 1.0 && p.d() < 2.0);
        }
    }
}
