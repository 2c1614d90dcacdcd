//! Circle families around marked points.
//!
//! Around each `z_j` we place circles of radius `l_j / 4^s`, `1 <= s <= h_j`.
//! Circles of an earlier point that meet the disk `D_k = {|z - z_k| <= l_k/4}`
//! of a later point are discarded, which leaves a pairwise disjoint family.
//! The survivors around each point are grouped into runs of consecutive
//! levels whose connecting annuli contain no circle of another point; each
//! run contributes one factor `P_y(r_e) / P_y(R_e)` to the bound product.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SleError};
use crate::params::SleParams;
use crate::points::{HalfPlanePoint, PointConfig};
use crate::scalar::Real;
use crate::scaling::p_scaling_unchecked;

const MAX_LEVEL: u32 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle<T> {
    pub center: HalfPlanePoint<T>,
    pub radius: T,
    /// Zero-based index of the marked point the circle surrounds.
    pub owner: usize,
    /// `s >= 1`, with `radius = l_owner / 4^s`.
    pub level: u32,
}

impl<T: Real> Circle<T> {
    /// Closed intersection test between two circles.
    pub fn meets(&self, other: &Circle<T>) -> bool {
        let d = self.center.dist(&other.center);
        (self.radius - other.radius).abs() <= d && d <= self.radius + other.radius
    }

    /// Whether the circle meets the closed disk of radius `rho` about `c`.
    pub fn meets_disk(&self, c: &HalfPlanePoint<T>, rho: T) -> bool {
        (self.center.dist(c) - self.radius).abs() <= rho
    }

    /// Whether the circle meets the open annulus `inner < |z - c| < outer`.
    pub fn meets_open_annulus(&self, c: &HalfPlanePoint<T>, inner: T, outer: T) -> bool {
        let d = self.center.dist(c);
        (d - self.radius).abs() < outer && d + self.radius > inner
    }
}

/// A maximal chain of concentric circles with radii in ratio 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Run<T> {
    pub id: usize,
    pub owner: usize,
    pub center: HalfPlanePoint<T>,
    /// Largest radius `R_e`.
    pub outer_radius: T,
    /// Smallest radius `r_e`.
    pub inner_radius: T,
    pub first_level: u32,
    pub last_level: u32,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleFamily<T> {
    pub n_points: usize,
    pub circles: Vec<Circle<T>>,
    /// Run id of each circle in `circles`.
    pub circle_run: Vec<usize>,
    pub runs: Vec<Run<T>>,
}

impl<T: Real> CircleFamily<T> {
    pub fn runs_of(&self, owner: usize) -> impl Iterator<Item = &Run<T>> {
        self.runs.iter().filter(move |r| r.owner == owner)
    }

    /// Number of levels `s in 1..=h_j` whose annulus `l_j/4^s <= |z - z_j| <= l_j/4^(s-1)`
    /// is not covered by a run of owner `j`.
    pub fn skipped_annuli(&self, owner: usize, level_count: u32) -> u32 {
        let covered: u32 = self.runs_of(owner).map(|r| r.last_level - r.first_level).sum();
        level_count - covered
    }

    /// Flat record list for serialization.
    pub fn dump(&self) -> Vec<CircleRecord> {
        self.circles
            .iter()
            .zip(&self.circle_run)
            .map(|(c, &run)| CircleRecord {
                owner: c.owner,
                level: c.level,
                center: [c.center.re.as_f64(), c.center.im.as_f64()],
                radius: c.radius.as_f64(),
                run,
            })
            .collect()
    }
}

/// One circle as written to the family JSON dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleRecord {
    pub owner: usize,
    pub level: u32,
    pub center: [f64; 2],
    pub radius: f64,
    pub run: usize,
}

/// Smallest `h >= 1` with `l / 4^h <= r` for each point.
pub fn quantize_radii<T: Real>(cfg: &PointConfig<T>) -> Result<Vec<u32>> {
    let four = T::lit(4.0);
    let slack = T::one() + T::epsilon() * T::lit(64.0);
    cfg.radii()
        .iter()
        .zip(cfg.gaps())
        .map(|(&r, &l)| {
            let mut h = 1u32;
            let mut rho = l / four;
            while rho > r * slack {
                h += 1;
                rho = rho / four;
                if h > MAX_LEVEL {
                    return Err(SleError::InvalidInput(format!("radius {r} is too small relative to gap {l}")));
                }
            }
            Ok(h)
        })
        .collect()
}

/// The configuration with `r_j` replaced by `l_j / 4^(h_j)`.
pub fn quantized_config<T: Real>(cfg: &PointConfig<T>, levels: &[u32]) -> Result<PointConfig<T>> {
    let radii = cfg
        .gaps()
        .iter()
        .zip(levels)
        .map(|(&l, &h)| l / T::lit(4.0).powi(h as i32))
        .collect();
    cfg.with_radii(radii)
}

pub fn build_circles<T: Real>(cfg: &PointConfig<T>, levels: &[u32]) -> Vec<Circle<T>> {
    let four = T::lit(4.0);
    let mut out = Vec::new();
    for (owner, ((z, &l), &h)) in cfg.points().iter().zip(cfg.gaps()).zip(levels).enumerate() {
        let mut radius = l;
        for level in 1..=h {
            radius = radius / four;
            out.push(Circle { center: *z, radius, owner, level });
        }
    }
    out
}

/// Circles of owner `j` meeting `D_k`, for every `j < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictSet {
    pub j: usize,
    pub k: usize,
    pub levels: Vec<u32>,
}

pub fn conflict_sets<T: Real>(circles: &[Circle<T>], cfg: &PointConfig<T>) -> Vec<ConflictSet> {
    let n = cfg.len();
    let mut sets = Vec::new();
    for k in 0..n {
        let zk = cfg.points()[k];
        let rho = cfg.gaps()[k] / T::lit(4.0);
        for j in 0..k {
            let levels: Vec<u32> = circles
                .iter()
                .filter(|c| c.owner == j && c.meets_disk(&zk, rho))
                .map(|c| c.level)
                .collect();
            sets.push(ConflictSet { j, k, levels });
        }
    }
    sets
}

/// Removes every circle in some conflict set. Fails if a conflict set holds
/// more than one circle, which cannot happen for a consistent configuration.
pub fn prune_conflicts<T: Real>(circles: &[Circle<T>], cfg: &PointConfig<T>) -> Result<Vec<Circle<T>>> {
    let sets = conflict_sets(circles, cfg);
    if let Some(bad) = sets.iter().find(|s| s.levels.len() > 1) {
        return Err(SleError::GeometryInvariant(format!(
            "conflict set I({}, {}) has {} circles",
            bad.j + 1,
            bad.k + 1,
            bad.levels.len()
        )));
    }
    Ok(circles
        .iter()
        .filter(|c| !sets.iter().any(|s| s.j == c.owner && s.levels.contains(&c.level)))
        .copied()
        .collect())
}

pub fn partition_runs<T: Real>(pruned: &[Circle<T>], cfg: &PointConfig<T>) -> Result<CircleFamily<T>> {
    let n = cfg.len();
    let four = T::lit(4.0);
    let mut circles = Vec::with_capacity(pruned.len());
    let mut circle_run = Vec::with_capacity(pruned.len());
    let mut runs: Vec<Run<T>> = Vec::new();

    for owner in 0..n {
        let mut own: Vec<Circle<T>> = pruned.iter().filter(|c| c.owner == owner).copied().collect();
        own.sort_by_key(|c| c.level);
        let center = cfg.points()[owner];
        let owner_runs_start = runs.len();
        for (i, c) in own.iter().enumerate() {
            let linked = i > 0 && {
                let prev = &own[i - 1];
                prev.level + 1 == c.level
                    && !pruned.iter().any(|o| {
                        o.owner != owner && o.meets_open_annulus(&center, c.radius, c.radius * four)
                    })
            };
            if linked {
                let run = runs.last_mut().expect("linked circle has a run");
                run.inner_radius = c.radius;
                run.last_level = c.level;
                run.count += 1;
            } else {
                runs.push(Run {
                    id: runs.len(),
                    owner,
                    center,
                    outer_radius: c.radius,
                    inner_radius: c.radius,
                    first_level: c.level,
                    last_level: c.level,
                    count: 1,
                });
            }
            circles.push(*c);
            circle_run.push(runs.len() - 1);
        }
        let owner_runs = runs.len() - owner_runs_start;
        let limit = 1 + 3 * (n - 1 - owner);
        if owner_runs > limit {
            return Err(SleError::GeometryInvariant(format!(
                "point {} has {owner_runs} runs, more than {limit}",
                owner + 1
            )));
        }
    }
    Ok(CircleFamily { n_points: n, circles, circle_run, runs })
}

/// `prod_e P_{y_e}(r_e) / P_{y_e}(R_e)` over all runs.
pub fn family_bound_product<T: Real>(fam: &CircleFamily<T>, p: &SleParams<T>) -> T {
    fam.runs.iter().fold(T::one(), |acc, run| {
        let y = run.center.im;
        acc * p_scaling_unchecked(y, run.inner_radius, p) / p_scaling_unchecked(y, run.outer_radius, p)
    })
}

/// Quantize, build, prune and partition in one go.
pub fn build_family<T: Real>(cfg: &PointConfig<T>) -> Result<(Vec<u32>, CircleFamily<T>)> {
    let levels = quantize_radii(cfg)?;
    let circles = build_circles(cfg, &levels);
    let pruned = prune_conflicts(&circles, cfg)?;
    let fam = partition_runs(&pruned, cfg)?;
    Ok((levels, fam))
}

/// Whether any two circles of the family meet.
pub fn circles_pairwise_disjoint<T: Real>(circles: &[Circle<T>]) -> bool {
    circles
        .iter()
        .enumerate()
        .all(|(i, a)| circles[i + 1..].iter().all(|b| !a.meets(b)))
}

/// Whether the closed annuli `r_e <= |z - z_e| <= R_e` of distinct runs are disjoint.
pub fn run_annuli_disjoint<T: Real>(fam: &CircleFamily<T>) -> bool {
    let runs = &fam.runs;
    runs.iter().enumerate().all(|(i, a)| {
        runs[i + 1..].iter().all(|b| {
            let d = a.center.dist(&b.center);
            let gap = (a.inner_radius - b.outer_radius).max(b.inner_radius - a.outer_radius).max(T::zero());
            let meet = if d == T::zero() {
                gap == T::zero()
            } else {
                gap <= d && d <= a.outer_radius + b.outer_radius
            };
            !meet
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_params;
    use crate::scaling::p_ratio;
    use approx::assert_relative_eq;

    fn cfg(pairs: &[(f64, f64)], radii: &[f64]) -> PointConfig<f64> {
        PointConfig::from_pairs(pairs, radii).unwrap()
    }

    #[test]
    fn quantization_levels() {
        let c = cfg(&[(0.0, 1.0)], &[1.0 / 16.0]);
        assert_eq!(quantize_radii(&c).unwrap(), vec![2]);
        let c = cfg(&[(0.0, 1.0)], &[0.1]);
        assert_eq!(quantize_radii(&c).unwrap(), vec![2]);
        let c = cfg(&[(0.0, 1.0)], &[3.0]);
        assert_eq!(quantize_radii(&c).unwrap(), vec![1]);
        // l = 5 and r = 5/64 exactly
        let c = cfg(&[(3.0, 4.0)], &[5.0 / 64.0]);
        assert_eq!(quantize_radii(&c).unwrap(), vec![3]);
    }

    #[test]
    fn quantization_rounds_down_within_factor_four() {
        for r in [0.3, 0.07, 0.0123, 1e-5] {
            let c = cfg(&[(0.5, 0.7)], &[r]);
            let h = quantize_radii(&c).unwrap()[0];
            let q = c.gaps()[0] / 4f64.powi(h as i32);
            assert!(q <= r * (1.0 + 1e-12));
            if r < c.gaps()[0] / 4.0 {
                assert!(4.0 * q > r);
            }
        }
    }

    #[test]
    fn single_point_circles() {
        let c = cfg(&[(0.0, 1.0)], &[1.0 / 16.0]);
        let circles = build_circles(&c, &[2]);
        assert_eq!(circles.len(), 2);
        assert_eq!(circles[0].radius, 0.25);
        assert_eq!(circles[1].radius, 1.0 / 16.0);
    }

    #[test]
    fn two_point_circles_use_gaps() {
        let c = cfg(&[(0.0, 1.0), (0.5, 1.0)], &[1.0, 1.0]);
        let circles = build_circles(&c, &[1, 1]);
        assert_eq!(circles[0].radius, 0.25);
        assert_eq!(circles[1].radius, 0.125);
        assert!(build_circles(&cfg(&[], &[]), &[]).is_empty());
    }

    #[test]
    fn far_points_prune_nothing() {
        let c = cfg(&[(0.0, 1.0), (20.0, 1.0)], &[1e-3, 1e-3]);
        let levels = quantize_radii(&c).unwrap();
        let circles = build_circles(&c, &levels);
        assert_eq!(prune_conflicts(&circles, &c).unwrap().len(), circles.len());
    }

    #[test]
    fn near_point_prunes_one_circle() {
        // |z1 - z2| = 0.3, D_2 has radius 0.075: 0.225 <= 0.25 <= 0.375.
        let c = cfg(&[(0.0, 1.0), (0.3, 1.0)], &[1.0 / 256.0, 0.3 / 16.0]);
        let levels = quantize_radii(&c).unwrap();
        assert_eq!(levels, vec![4, 2]);
        let circles = build_circles(&c, &levels);
        let sets = conflict_sets(&circles, &c);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].levels, vec![1]);
        let pruned = prune_conflicts(&circles, &c).unwrap();
        assert_eq!(pruned.len(), circles.len() - 1);
        assert!(circles_pairwise_disjoint(&pruned));

        let fam = partition_runs(&pruned, &c).unwrap();
        // Owner 1 keeps levels 2..4; the 1/16 circle lies inside D_2's reach?
        let owner0: Vec<_> = fam.runs_of(0).collect();
        assert!(!owner0.is_empty() && owner0.len() <= 4);
        assert!(fam.runs_of(1).count() <= 1);
        assert!(run_annuli_disjoint(&fam));
    }

    #[test]
    fn single_owner_is_one_run() {
        let c = cfg(&[(0.0, 1.0)], &[1.0 / 256.0]);
        let (levels, fam) = build_family(&c).unwrap();
        assert_eq!(levels, vec![4]);
        assert_eq!(fam.runs.len(), 1);
        assert_eq!(fam.runs[0].count, 4);
        let p = derive_params(2.0).unwrap();
        assert_relative_eq!(
            family_bound_product(&fam, &p),
            p_ratio(1.0, 1.0 / 256.0, 0.25, &p).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn removed_middle_circle_splits_chain() {
        let c = cfg(&[(0.0, 1.0)], &[1.0 / 256.0]);
        let mut circles = build_circles(&c, &[4]);
        circles.retain(|c| c.level != 2);
        // One point may own a single run; a hole in its chain breaks that.
        let err = partition_runs(&circles, &c).unwrap_err();
        assert!(matches!(err, SleError::GeometryInvariant(_)));
    }

    #[test]
    fn two_run_product_dominates_full_chain() {
        // radii 1/4..1/16 and 1/64..1/256 around i
        let c = cfg(&[(0.0, 1.0)], &[1.0 / 256.0]);
        let p = derive_params(2.0).unwrap();
        let circles: Vec<_> = build_circles(&c, &[4]).into_iter().collect();
        let fam = partition_runs(&circles, &c).unwrap();
        let mut split = fam.clone();
        split.runs = vec![
            Run { outer_radius: 0.25, inner_radius: 1.0 / 16.0, first_level: 1, last_level: 2, count: 2, ..fam.runs[0] },
            Run { id: 1, outer_radius: 1.0 / 64.0, inner_radius: 1.0 / 256.0, first_level: 3, last_level: 4, count: 2, ..fam.runs[0] },
        ];
        let two = family_bound_product(&split, &p);
        let expected = p_ratio(1.0, 1.0 / 16.0, 0.25, &p).unwrap() * p_ratio(1.0, 1.0 / 256.0, 1.0 / 64.0, &p).unwrap();
        assert_relative_eq!(two, expected, max_relative = 1e-12);
        assert!(two >= family_bound_product(&fam, &p));
    }

    #[test]
    fn single_circle_run_has_unit_factor() {
        let c = cfg(&[(0.0, 1.0)], &[0.9]);
        let (_, fam) = build_family(&c).unwrap();
        let p = derive_params(4.0).unwrap();
        assert_eq!(fam.runs.len(), 1);
        assert_eq!(family_bound_product(&fam, &p), 1.0);
    }

    #[test]
    fn dump_records_runs() {
        let c = cfg(&[(0.0, 1.0), (0.3, 1.0)], &[0.01, 0.01]);
        let (_, fam) = build_family(&c).unwrap();
        let dump = fam.dump();
        assert_eq!(dump.len(), fam.circles.len());
        let json = serde_json::to_string(&dump).unwrap();
        assert!(json.contains("\"run\""));
    }
}
