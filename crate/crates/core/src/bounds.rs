//! Structural upper-bound products for multi-point hitting probabilities and
//! Green's functions. The unknown constants `C_n` are omitted (taken as 1);
//! comparisons against simulation are made through exponents and ratios.

use crate::error::{Result, SleError};
use crate::params::SleParams;
use crate::points::PointConfig;
use crate::scalar::Real;
use crate::scaling::{p_ratio_unchecked, p_scaling_unchecked};

/// `prod_k P_{y_k}(r_k ∧ l_k) / P_{y_k}(l_k)`, a number in `(0, 1]`.
pub fn multipoint_interior_bound<T: Real>(cfg: &PointConfig<T>, p: &SleParams<T>) -> T {
    cfg.points()
        .iter()
        .zip(cfg.radii())
        .zip(cfg.gaps())
        .fold(T::one(), |acc, ((z, &r), &l)| acc * p_ratio_unchecked(z.im, r, l, p))
}

/// `4^(alpha n^2)` times [`multipoint_interior_bound`], the ceiling for the
/// circle-family product of an `n`-point configuration.
pub fn family_product_ceiling<T: Real>(cfg: &PointConfig<T>, p: &SleParams<T>) -> T {
    let n = T::from_usize(cfg.len()).expect("point count");
    T::lit(4.0).powf(p.alpha() * n * n) * multipoint_interior_bound(cfg, p)
}

/// `prod_k y_k^(alpha-(2-d)) / P_{y_k}(l_k)`; every point must be interior.
pub fn multipoint_green_upper<T: Real>(cfg: &PointConfig<T>, p: &SleParams<T>) -> Result<T> {
    let shift = p.alpha() - p.interior_exponent();
    let mut acc = T::one();
    for (k, (z, &l)) in cfg.points().iter().zip(cfg.gaps()).enumerate() {
        if z.im <= T::zero() {
            return Err(SleError::BoundaryPointPresent(k));
        }
        acc = acc * z.im.powf(shift) / p_scaling_unchecked(z.im, l, p);
    }
    Ok(acc)
}

/// `prod_k l_k^(-alpha)` with `l_k = min_{0 <= j < k} |x_k - x_j|`, `x_0 = 0`.
pub fn boundary_green_upper<T: Real>(xs: &[T], p: &SleParams<T>) -> Result<T> {
    let mut acc = T::one();
    for (k, &x) in xs.iter().enumerate() {
        if !x.is_finite() {
            return Err(SleError::InvalidInput(format!("coordinate {k} is {x}")));
        }
        let l = xs[..k].iter().fold(x.abs(), |m, &prev| m.min((x - prev).abs()));
        if l == T::zero() {
            return Err(SleError::DegenerateConfig(format!(
                "boundary coordinate {k} is zero or repeated"
            )));
        }
        acc = acc * l.powf(-p.alpha());
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cfg(pairs: &[(f64, f64)], radii: &[f64]) -> PointConfig<f64> {
        PointConfig::from_pairs(pairs, radii).unwrap()
    }

    #[test]
    fn interior_bound_examples() {
        let p = derive_params(2.0).unwrap();
        assert_eq!(multipoint_interior_bound(&cfg(&[(0.0, 1.0)], &[2.0]), &p), 1.0);
        assert_relative_eq!(
            multipoint_interior_bound(&cfg(&[(1.0, 0.0)], &[0.1]), &p),
            0.1f64.powf(3.0),
            max_relative = 1e-12
        );
        // l_1 = l_2 = 1, both interior branches: 0.1^0.75 * 0.1^0.75
        assert_relative_eq!(
            multipoint_interior_bound(&cfg(&[(0.0, 1.0), (0.0, 2.0)], &[0.1, 0.1]), &p),
            10f64.powf(-1.5),
            max_relative = 1e-12
        );
    }

    #[test]
    fn green_upper_examples() {
        let p = derive_params(2.0).unwrap();
        assert_relative_eq!(multipoint_green_upper(&cfg(&[(0.0, 1.0)], &[1.0]), &p).unwrap(), 1.0);
        assert_relative_eq!(
            multipoint_green_upper(&cfg(&[(0.0, 1.0), (0.0, 2.0)], &[1.0, 1.0]), &p).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        for y in [0.3, 2.5] {
            assert_relative_eq!(
                multipoint_green_upper(&cfg(&[(0.0, y)], &[1.0]), &p).unwrap(),
                y.powf(p.d() - 2.0),
                max_relative = 1e-12
            );
        }
        assert!(matches!(
            multipoint_green_upper(&cfg(&[(0.0, 1.0), (1.0, 0.0)], &[1.0, 1.0]), &p),
            Err(SleError::BoundaryPointPresent(1))
        ));
    }

    #[test]
    fn boundary_upper_examples() {
        let p2 = derive_params(2.0).unwrap();
        let p83 = derive_params(8.0 / 3.0).unwrap();
        assert_eq!(boundary_green_upper(&[1.0], &p2).unwrap(), 1.0);
        assert_relative_eq!(boundary_green_upper(&[2.0], &p83).unwrap(), 0.25, max_relative = 1e-12);
        let l2: f64 = 1.1 - 1.0;
        assert_relative_eq!(
            boundary_green_upper(&[1.0, 1.1], &p2).unwrap(),
            l2.powf(-3.0),
            max_relative = 1e-12
        );
        assert!(boundary_green_upper(&[0.0], &p2).is_err());
        assert!(boundary_green_upper(&[1.0, 1.0], &p2).is_err());
    }

    proptest! {
        #[test]
        fn scale_invariance(
            k in 0.3f64..7.7,
            pts in proptest::collection::vec((-3.0f64..3.0, 0.0f64..3.0, 1e-3f64..2.0), 1..5),
            lambda in 0.01f64..100.0,
        ) {
            let pairs: Vec<_> = pts.iter().map(|&(x, y, _)| (x, y)).collect();
            let radii: Vec<_> = pts.iter().map(|&(_, _, r)| r).collect();
            let Ok(c) = PointConfig::from_pairs(&pairs, &radii) else { return Ok(()) };
            let p = derive_params(k).unwrap();
            let a = multipoint_interior_bound(&c, &p);
            let b = multipoint_interior_bound(&c.scaled(lambda).unwrap(), &p);
            prop_assert!((a - b).abs() <= 1e-10 * a);
        }

        #[test]
        fn monotone_and_clamped_in_radius(
            k in 0.3f64..7.7,
            pts in proptest::collection::vec((-3.0f64..3.0, 0.0f64..3.0, 1e-3f64..2.0), 1..5),
            which in 0usize..4,
            grow in 1.0f64..10.0,
        ) {
            let pairs: Vec<_> = pts.iter().map(|&(x, y, _)| (x, y)).collect();
            let radii: Vec<_> = pts.iter().map(|&(_, _, r)| r).collect();
            let Ok(c) = PointConfig::from_pairs(&pairs, &radii) else { return Ok(()) };
            let p = derive_params(k).unwrap();
            let base = multipoint_interior_bound(&c, &p);
            let j = which % c.len();
            let mut bigger = radii.clone();
            bigger[j] *= grow;
            prop_assert!(multipoint_interior_bound(&c.with_radii(bigger).unwrap(), &p) >= base);
            let clamped: Vec<_> = radii.iter().zip(c.gaps()).map(|(&r, &l)| r.min(l)).collect();
            let v = multipoint_interior_bound(&c.with_radii(clamped).unwrap(), &p);
            prop_assert!((v - base).abs() <= 1e-14 * base);
        }
    }
}
