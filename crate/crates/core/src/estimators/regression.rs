use serde::{Deserialize, Serialize};

use super::stats::EstimateResult;
use crate::error::{Result, SleError};

/// Power-law fit `p = exp(intercept) * r^slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub radii: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Least-squares line through `(ln r, ln p)`.
///
/// Points are weighted by the inverse variance of `ln p`, `(p / stderr)^2`.
/// If any estimate has zero stderr the fit is unweighted and the slope error
/// comes from the residuals instead.
pub fn exponent_fit(radii: &[f64], estimates: &[EstimateResult]) -> Result<ExponentFit> {
    if radii.len() != estimates.len() {
        return Err(SleError::InvalidInput(format!("{} radii but {} estimates", radii.len(), estimates.len())));
    }
    if radii.len() < 3 {
        return Err(SleError::TooFewRadii(radii.len()));
    }
    for (r, e) in radii.iter().zip(estimates) {
        if !(*r > 0.0) {
            return Err(SleError::NonPositive { name: "radius", value: *r });
        }
        if !(e.mean > 0.0) {
            return Err(SleError::ZeroEstimate(*r));
        }
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = estimates.iter().map(|e| e.mean.ln()).collect();
    let weighted = estimates.iter().all(|e| e.stderr > 0.0);
    let ws: Vec<f64> = if weighted {
        estimates.iter().map(|e| (e.mean / e.stderr).powi(2)).collect()
    } else {
        vec![1.0; xs.len()]
    };
    let s: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(&ws).map(|(x, w)| w * x).sum::<f64>() / s;
    let ybar = ys.iter().zip(&ws).map(|(y, w)| w * y).sum::<f64>() / s;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - xbar).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(SleError::InvalidInput("radii must not all coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).zip(&ws).map(|((x, y), w)| w * (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let slope_stderr = if weighted {
        (1.0 / sxx).sqrt()
    } else {
        let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (xs.len() as f64 - 2.0) / sxx).sqrt()
    };
    Ok(ExponentFit {
        slope,
        slope_stderr,
        intercept,
        radii: radii.to_vec(),
        probs: estimates.iter().map(|e| e.mean).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn est(mean: f64, stderr: f64) -> EstimateResult {
        EstimateResult { mean, stderr, n_samples: 100, config_hash: String::new() }
    }

    #[test]
    fn exact_power_law() {
        let radii = [0.4, 0.2, 0.1, 0.05];
        let es: Vec<_> = radii.iter().map(|r: &f64| est(r.powf(0.75), 0.0)).collect();
        let fit = exponent_fit(&radii, &es).unwrap();
        assert_relative_eq!(fit.slope, 0.75, max_relative = 1e-12);
        assert!(fit.slope_stderr < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
    }

    #[test]
    fn noisy_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let radii = [0.4, 0.2, 0.1, 0.05, 0.025];
        let mut pulls = Vec::new();
        for _ in 0..200 {
            let es: Vec<_> = radii
                .iter()
                .map(|r: &f64| {
                    let p = 3.0 * r * r;
                    let se = 0.05 * p;
                    est(p * (1.0 + 0.05 * (rng.random::<f64>() - 0.5) * 12f64.sqrt()), se)
                })
                .collect();
            let fit = exponent_fit(&radii, &es).unwrap();
            pulls.push((fit.slope - 2.0) / fit.slope_stderr);
        }
        let within = pulls.iter().filter(|z| z.abs() < 3.0).count();
        assert!(within >= 195, "{within}");
        let mean = pulls.iter().sum::<f64>() / pulls.len() as f64;
        assert!(mean.abs() < 0.3);
    }

    #[test]
    fn weights_follow_relative_error() {
        // The middle point is off the line but very uncertain.
        let radii = [1.0, 0.5, 0.25];
        let es = [est(1.0, 1e-6), est(0.9, 10.0), est(0.0625, 1e-7)];
        let fit = exponent_fit(&radii, &es).unwrap();
        assert_relative_eq!(fit.slope, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn errors() {
        assert!(matches!(exponent_fit(&[0.1, 0.2], &[est(0.1, 0.01), est(0.2, 0.01)]), Err(SleError::TooFewRadii(2))));
        let es = [est(0.1, 0.01), est(0.0, 0.0), est(0.3, 0.01)];
        assert!(matches!(exponent_fit(&[0.1, 0.2, 0.3], &es), Err(SleError::ZeroEstimate(_))));
    }
}
