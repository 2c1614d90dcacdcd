//! Monte Carlo evaluation of the gap-product integral over `D^n`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::minkowski::Rect;
use super::stats::EstimateResult;
use super::{run_task, SampleSpec, SampleTask, INTEGRAL_STREAM};
use crate::digest::sha256_json;
use crate::error::{Result, SleError};
use crate::params::SleParams;
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Region {
    Rect(Rect),
    /// `{|z| < radius, Im z > 0}`
    HalfDisk { radius: f64 },
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Rect(r) => r.validate(),
            Region::HalfDisk { radius } if *radius > 0.0 && radius.is_finite() => Ok(()),
            Region::HalfDisk { radius } => Err(SleError::NonPositive { name: "radius", value: *radius }),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Region::Rect(r) => r.area(),
            Region::HalfDisk { radius } => std::f64::consts::FRAC_PI_2 * radius * radius,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Complex64 {
        match self {
            Region::Rect(r) => Complex64::new(
                r.x0 + r.width() * rng.random::<f64>(),
                r.y0 + r.height() * rng.random::<f64>(),
            ),
            Region::HalfDisk { radius } => {
                let rho = radius * rng.random::<f64>().sqrt();
                Complex64::from_polar(rho, std::f64::consts::PI * rng.random::<f64>())
            }
        }
    }
}

/// `prod_k l_k^(d-2)` with `l_k` the distance from `z_k` to the origin and
/// the earlier points.
pub fn gap_product(zs: &[Complex64], d: f64) -> f64 {
    let mut prod = 1.0;
    for (k, z) in zs.iter().enumerate() {
        let l = zs[..k].iter().map(|w| (z - w).norm()).fold(z.norm(), f64::min);
        prod *= l.powf(d - 2.0);
    }
    prod
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralTask {
    pub region: Region,
    pub n: usize,
    pub d: f64,
}

impl SampleTask for IntegralTask {
    fn width(&self) -> usize {
        1
    }

    fn outcome(&self, seed: u64, index: u64) -> Result<Vec<f64>> {
        let mut rng = substream(seed, index);
        let zs: Vec<Complex64> = (0..self.n).map(|_| self.region.sample(&mut rng)).collect();
        Ok(vec![self.region.area().powi(self.n as i32) * gap_product(&zs, self.d)])
    }
}

/// Estimates `int_{D^n} prod_k l_k^(d-2) dA^n` by uniform sampling of `D^n`,
/// one draw of `n` points per Monte Carlo point.
pub fn integral_lk_bound(region: &Region, n: usize, spec: &SampleSpec, p: &SleParams<f64>) -> Result<EstimateResult> {
    region.validate()?;
    if !(1..=4).contains(&n) {
        return Err(SleError::InvalidInput(format!("n must be in 1..=4, got {n}")));
    }
    let task = IntegralTask { region: *region, n, d: p.d() };
    let acc = run_task(&task, spec, INTEGRAL_STREAM)?;
    Ok(acc.estimate(0, &sha256_json(&task)?))
}

/// `int_D G dA` for the half-plane Green's function by the midpoint rule on
/// an `nodes x nodes` grid. `D` must stay off the real line.
pub fn green_integral(rect: &Rect, p: &SleParams<f64>, nodes: usize) -> Result<f64> {
    rect.validate()?;
    if !(rect.y0 > 0.0) {
        return Err(SleError::InvalidInput("rectangle touches the real line".into()));
    }
    let n = nodes.max(1);
    let (hx, hy) = (rect.width() / n as f64, rect.height() / n as f64);
    let mut sum = 0.0;
    for j in 0..n {
        let y = rect.y0 + (j as f64 + 0.5) * hy;
        for i in 0..n {
            let x = rect.x0 + (i as f64 + 0.5) * hx;
            sum += crate::green::green_unchecked(Complex64::new(x, y), p);
        }
    }
    Ok(sum * hx * hy)
}
