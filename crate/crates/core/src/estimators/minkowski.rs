//! Minkowski content of the trace inside a rectangle, by grid counting.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stats::EstimateResult;
use super::{run_task, SampleSpec, SampleTask, SIM_STREAM};
use crate::digest::sha256_json;
use crate::error::{Result, SleError};
use crate::loewner::adaptive::{background_spacing, simulate, Flow, SimConfig, TraceObserver};
use crate::loewner::trace::{point_segment_distance, Trace};
use crate::params::SleParams;
use crate::rng::substream;

/// Closed axis-aligned rectangle `[x0, x1] x [y0, y1]` in the closed upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let r = Self { x0, x1, y0, y1 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite());
        if !finite || self.x1 < self.x0 || self.y1 < self.y0 {
            return Err(SleError::InvalidInput(format!("malformed rectangle {self:?}")));
        }
        if self.y0 < 0.0 {
            return Err(SleError::InvalidInput(format!("rectangle {self:?} leaves the upper half-plane")));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.x0..=self.x1).contains(&z.re) && (self.y0..=self.y1).contains(&z.im)
    }

    /// Euclidean distance from `z` to the rectangle (zero inside).
    pub fn distance(&self, z: Complex64) -> f64 {
        let dx = (self.x0 - z.re).max(z.re - self.x1).max(0.0);
        let dy = (self.y0 - z.im).max(z.im - self.y1).max(0.0);
        dx.hypot(dy)
    }

    /// Largest distance from the origin to a point of the rectangle.
    pub fn reach(&self) -> f64 {
        let x = self.x0.abs().max(self.x1.abs());
        let y = self.y0.abs().max(self.y1.abs());
        x.hypot(y)
    }
}

/// Cells tiling a rectangle, marked when their center lies within `r` of
/// a segment fed to the grid.
#[derive(Debug, Clone)]
pub struct ContentGrid {
    rect: Rect,
    r: f64,
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    marked: Vec<bool>,
    count: usize,
}

impl ContentGrid {
    pub fn new(rect: Rect, r: f64, grid_step: f64) -> Result<Self> {
        rect.validate()?;
        if !(r > 0.0) {
            return Err(SleError::NonPositive { name: "r", value: r });
        }
        if !(grid_step > 0.0) {
            return Err(SleError::NonPositive { name: "grid_step", value: grid_step });
        }
        if grid_step > r / 4.0 {
            return Err(SleError::InvalidInput(format!("grid_step {grid_step} is coarser than r/4 = {}", r / 4.0)));
        }
        if rect.width() < grid_step || rect.height() < grid_step {
            return Err(SleError::InvalidInput(format!("domain {rect:?} is smaller than one grid cell")));
        }
        let nx = (rect.width() / grid_step).ceil() as usize;
        let ny = (rect.height() / grid_step).ceil() as usize;
        Ok(Self {
            rect,
            r,
            nx,
            ny,
            hx: rect.width() / nx as f64,
            hy: rect.height() / ny as f64,
            marked: vec![false; nx * ny],
            count: 0,
        })
    }

    pub fn add_segment(&mut self, a: Complex64, b: Complex64) {
        let r = self.r;
        let lo_x = a.re.min(b.re) - r;
        let hi_x = a.re.max(b.re) + r;
        let lo_y = a.im.min(b.im) - r;
        let hi_y = a.im.max(b.im) + r;
        if hi_x < self.rect.x0 || lo_x > self.rect.x1 || hi_y < self.rect.y0 || lo_y > self.rect.y1 {
            return;
        }
        let (i0, i1) = cell_span(lo_x, hi_x, self.rect.x0, self.hx, self.nx);
        let (j0, j1) = cell_span(lo_y, hi_y, self.rect.y0, self.hy, self.ny);
        for j in j0..j1 {
            let y = self.rect.y0 + (j as f64 + 0.5) * self.hy;
            for i in i0..i1 {
                let cell = j * self.nx + i;
                if self.marked[cell] {
                    continue;
                }
                let x = self.rect.x0 + (i as f64 + 0.5) * self.hx;
                if point_segment_distance(Complex64::new(x, y), a, b) <= r {
                    self.marked[cell] = true;
                    self.count += 1;
                }
            }
        }
    }

    pub fn area(&self) -> f64 {
        self.count as f64 * self.hx * self.hy
    }

    /// `r^(d-2)` times the marked area.
    pub fn content(&self, d: f64) -> f64 {
        self.r.powf(d - 2.0) * self.area()
    }
}

/// Cells `i0..i1` whose centers `origin + (i + 1/2) h` lie in `[lo, hi]`.
fn cell_span(lo: f64, hi: f64, origin: f64, h: f64, n: usize) -> (usize, usize) {
    let first = ((lo - origin) / h - 0.5).ceil().clamp(0.0, n as f64);
    let end = (((hi - origin) / h - 0.5).floor() + 1.0).clamp(0.0, n as f64);
    (first as usize, (end as usize).max(first as usize))
}

/// `r^(d-2) * Area{z in domain : dist(z, trace) <= r}` by counting grid cells
/// whose centers are within `r` of the polyline.
pub fn minkowski_content(tr: &Trace<f64>, domain: &Rect, r: f64, grid_step: f64, p: &SleParams<f64>) -> Result<f64> {
    let mut grid = ContentGrid::new(*domain, r, grid_step)?;
    match tr.vertices.as_slice() {
        [] => return Err(SleError::InvalidInput("trace is empty".into())),
        [only] => grid.add_segment(*only, *only),
        vs => vs.windows(2).for_each(|w| grid.add_segment(w[0], w[1])),
    }
    Ok(grid.content(p.d()))
}

/// Feeds segments near the domains to one grid per domain and radius, and
/// refines the trace while it is within reach of any domain.
pub struct ContentObserver<'a> {
    domains: Vec<Rect>,
    r_max: f64,
    spacing_near: f64,
    sim: &'a SimConfig,
    scale: f64,
    /// Domain-major; `None` for domains of zero area.
    pub grids: Vec<Option<ContentGrid>>,
}

impl<'a> ContentObserver<'a> {
    pub fn new(domains: &[Rect], radii: &[f64], grid_factor: f64, sim: &'a SimConfig) -> Result<Self> {
        let r_min = radii.iter().cloned().fold(f64::INFINITY, f64::min);
        let r_max = radii.iter().cloned().fold(0.0, f64::max);
        let mut grids = Vec::with_capacity(domains.len() * radii.len());
        for d in domains {
            for &r in radii {
                grids.push(if d.area() > 0.0 { Some(ContentGrid::new(*d, r, r / grid_factor)?) } else { None });
            }
        }
        let origin = Complex64::new(0.0, 0.0);
        let scale = domains.iter().map(|d| d.distance(origin)).fold(f64::INFINITY, f64::min).max(r_min);
        let live = domains.iter().filter(|d| d.area() > 0.0).copied().collect();
        Ok(Self { domains: live, r_max, spacing_near: sim.near_spacing(r_min), sim, scale, grids })
    }

    /// Content of every grid, zero for empty domains.
    pub fn contents(&self, d: f64) -> Vec<f64> {
        self.grids.iter().map(|g| g.as_ref().map_or(0.0, |g| g.content(d))).collect()
    }
}

impl TraceObserver for ContentObserver<'_> {
    fn spacing(&self, tip: Complex64) -> f64 {
        let mut s = background_spacing(tip, self.scale, self.sim.far_factor, self.spacing_near);
        for d in &self.domains {
            let far = (d.distance(tip) - self.r_max) / self.sim.far_factor;
            s = s.min(far.max(self.spacing_near));
        }
        s
    }

    fn segment(&mut self, a: Complex64, b: Complex64) -> Flow {
        for g in self.grids.iter_mut().flatten() {
            g.add_segment(a, b);
        }
        Flow::Continue
    }
}

/// `E[Cont(trace in D; r)^m]` for each domain, radius and `m = 1..n_max`,
/// all read off one trace per sample.
#[derive(Debug, Clone, Serialize)]
pub struct MinkowskiExperiment {
    pub kappa: f64,
    pub domains: Vec<Rect>,
    pub radii: Vec<f64>,
    pub n_max: usize,
    pub grid_factor: f64,
    pub sim: SimConfig,
    #[serde(skip)]
    params: Option<SleParams<f64>>,
}

impl MinkowskiExperiment {
    pub fn new(
        p: &SleParams<f64>,
        domains: Vec<Rect>,
        radii: Vec<f64>,
        n_max: usize,
        grid_factor: f64,
        sim: SimConfig,
    ) -> Result<Self> {
        sim.validate()?;
        if domains.is_empty() {
            return Err(SleError::InvalidInput("no domain given".into()));
        }
        for d in &domains {
            d.validate()?;
        }
        if radii.is_empty() {
            return Err(SleError::InvalidInput("no radii given".into()));
        }
        if !(grid_factor >= 4.0) {
            return Err(SleError::InvalidInput(format!("grid_factor must be at least 4, got {grid_factor}")));
        }
        for &r in &radii {
            sim.check_radius(r)?;
        }
        Ok(Self { kappa: p.kappa(), domains, radii, n_max, grid_factor, sim, params: Some(*p) })
    }

    pub fn escape_radius(&self) -> f64 {
        let r_max = self.radii.iter().cloned().fold(0.0, f64::max);
        let reach = self.domains.iter().map(|d| d.reach()).fold(0.0, f64::max);
        self.sim.r_esc_factor * (reach + r_max)
    }

    fn observe(&self, seed: u64, index: u64, record: bool) -> Result<(ContentObserver<'_>, Option<Trace<f64>>)> {
        let p = self.params.as_ref().expect("constructed through new");
        let mut obs = ContentObserver::new(&self.domains, &self.radii, self.grid_factor, &self.sim)?;
        if obs.domains.is_empty() {
            return Ok((obs, None));
        }
        let out = simulate(p, &self.sim, self.escape_radius(), &mut substream(seed, index), &mut obs, record)?;
        Ok((obs, out.recorded.map(|r| r.1)))
    }

    pub fn trace(&self, seed: u64, index: u64) -> Result<Trace<f64>> {
        let (_, trace) = self.observe(seed, index, true)?;
        Ok(trace.unwrap_or(Trace { vertices: vec![Complex64::new(0.0, 0.0)], times: vec![0.0] }))
    }

    /// Contents for every domain and radius (domain-major) of one trace.
    pub fn contents(&self, seed: u64, index: u64) -> Result<Vec<f64>> {
        let (obs, _) = self.observe(seed, index, false)?;
        Ok(obs.contents(self.params.as_ref().expect("constructed through new").d()))
    }
}

impl SampleTask for MinkowskiExperiment {
    fn width(&self) -> usize {
        self.domains.len() * self.radii.len() * self.n_max
    }

    fn outcome(&self, seed: u64, index: u64) -> Result<Vec<f64>> {
        let cs = self.contents(seed, index)?;
        Ok(cs.iter().flat_map(|c| (1..=self.n_max as i32).map(move |m| c.powi(m))).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub domain: Rect,
    pub radii: Vec<f64>,
    /// `moments[i][m - 1]` estimates `E[Cont(r_i)^m]`.
    pub moments: Vec<Vec<EstimateResult>>,
}

impl MomentTable {
    pub fn moment(&self, i: usize, m: usize) -> f64 {
        if m == 0 {
            1.0
        } else {
            self.moments[i][m - 1].mean
        }
    }

    /// Ratios `E[Cont(r_{i+1})^m] / E[Cont(r_i)^m]` for each refinement step.
    pub fn refinement_ratios(&self, m: usize) -> Vec<f64> {
        (1..self.radii.len()).map(|i| self.moment(i, m) / self.moment(i - 1, m)).collect()
    }
}

/// One table per domain.
pub fn moment_tables(exp: &MinkowskiExperiment, acc: &super::stats::Accumulator, hash: &str) -> Vec<MomentTable> {
    let flat = acc.estimates(hash);
    let per_domain = exp.radii.len() * exp.n_max;
    exp.domains
        .iter()
        .enumerate()
        .map(|(k, d)| MomentTable {
            domain: *d,
            radii: exp.radii.clone(),
            moments: flat[k * per_domain..(k + 1) * per_domain].chunks(exp.n_max.max(1)).map(|c| c.to_vec()).collect(),
        })
        .collect()
}

/// Moments of the content of one trace ensemble at every radius.
pub fn content_moments(
    p: &SleParams<f64>,
    domain: &Rect,
    r_list: &[f64],
    n_max: usize,
    spec: &SampleSpec,
    sim: &SimConfig,
    grid_factor: f64,
) -> Result<MomentTable> {
    let exp = MinkowskiExperiment::new(p, vec![*domain], r_list.to_vec(), n_max, grid_factor, *sim)?;
    let hash = sha256_json(&exp)?;
    if n_max == 0 {
        spec.validate()?;
        return Ok(MomentTable { domain: *domain, radii: r_list.to_vec(), moments: vec![Vec::new(); r_list.len()] });
    }
    let acc = run_task(&exp, spec, SIM_STREAM)?;
    Ok(moment_tables(&exp, &acc, &hash).remove(0))
}
