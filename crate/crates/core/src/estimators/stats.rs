use serde::{Deserialize, Serialize};

/// Monte Carlo estimate of a single scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_samples)`.
    pub stderr: f64,
    pub n_samples: u64,
    pub config_hash: String,
}

/// Running sums for a fixed-width vector of per-sample outcomes.
///
/// Pushing samples in index order makes the state a pure function of the
/// outcomes, so a run extended in two passes matches a single pass exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub n: u64,
    pub sums: Vec<f64>,
    pub sums_sq: Vec<f64>,
}

impl Accumulator {
    pub fn new(width: usize) -> Self {
        Self { n: 0, sums: vec![0.0; width], sums_sq: vec![0.0; width] }
    }

    pub fn width(&self) -> usize {
        self.sums.len()
    }

    pub fn push(&mut self, outcome: &[f64]) {
        debug_assert_eq!(outcome.len(), self.width());
        self.n += 1;
        for ((s, q), &x) in self.sums.iter_mut().zip(&mut self.sums_sq).zip(outcome) {
            *s += x;
            *q += x * x;
        }
    }

    pub fn merge(mut self, other: &Accumulator) -> Self {
        self.n += other.n;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for (a, b) in self.sums_sq.iter_mut().zip(&other.sums_sq) {
            *a += b;
        }
        self
    }

    pub fn mean(&self, i: usize) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sums[i] / self.n as f64
    }

    pub fn stderr(&self, i: usize) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let mean = self.sums[i] / n;
        let var = ((self.sums_sq[i] - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    pub fn estimate(&self, i: usize, config_hash: &str) -> EstimateResult {
        EstimateResult {
            mean: self.mean(i),
            stderr: self.stderr(i),
            n_samples: self.n,
            config_hash: config_hash.to_string(),
        }
    }

    pub fn estimates(&self, config_hash: &str) -> Vec<EstimateResult> {
        (0..self.width()).map(|i| self.estimate(i, config_hash)).collect()
    }
}

/// Combined standard error of a difference of two estimates.
pub fn combined_stderr(a: &EstimateResult, b: &EstimateResult) -> f64 {
    a.stderr.hypot(b.stderr)
}

/// Ratio of two estimates with first-order error propagation.
pub fn ratio(a: &EstimateResult, b: &EstimateResult) -> (f64, f64) {
    let q = a.mean / b.mean;
    let rel = (a.stderr / a.mean).hypot(b.stderr / b.mean);
    (q, q.abs() * rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bernoulli_stderr() {
        let mut acc = Accumulator::new(1);
        for k in 0..100 {
            acc.push(&[if k < 30 { 1.0 } else { 0.0 }]);
        }
        let e = acc.estimate(0, "h");
        assert_relative_eq!(e.mean, 0.3);
        // sample variance with n - 1: 100 * 0.21 / 99
        assert_relative_eq!(e.stderr, (0.21_f64 / 99.0).sqrt(), max_relative = 1e-12);
        assert_eq!(e.n_samples, 100);
    }

    #[test]
    fn split_pushes_match() {
        let xs: Vec<f64> = (0..50).map(|k| (k as f64).sin()).collect();
        let mut one = Accumulator::new(1);
        xs.iter().for_each(|x| one.push(&[*x]));
        let mut two = Accumulator::new(1);
        xs[..20].iter().for_each(|x| two.push(&[*x]));
        let mut two = two.clone();
        xs[20..].iter().for_each(|x| two.push(&[*x]));
        assert_eq!(one, two);
        let mut left = Accumulator::new(1);
        let mut right = Accumulator::new(1);
        xs[..20].iter().for_each(|x| left.push(&[*x]));
        xs[20..].iter().for_each(|x| right.push(&[*x]));
        let merged = left.merge(&right);
        assert_relative_eq!(merged.mean(0), one.mean(0), max_relative = 1e-12);
    }

    #[test]
    fn single_sample_has_no_spread() {
        let mut acc = Accumulator::new(2);
        acc.push(&[1.0, 2.0]);
        assert_eq!(acc.stderr(1), 0.0);
    }
}
