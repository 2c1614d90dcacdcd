//! Bounded worker pool for independent per-sample tasks.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Result, SleError};
use crate::estimators::stats::Accumulator;

/// Folds per-sample outcomes for `indices` into `acc`.
///
/// In reproducible mode outcomes are computed in parallel but pushed in index
/// order, so the result does not depend on `workers`. Throughput mode merges
/// per-worker partial sums, which agree only to rounding.
pub fn accumulate<F>(
    acc: Accumulator,
    indices: Range<u64>,
    workers: usize,
    reproducible: bool,
    task: F,
) -> Result<Accumulator>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync + Send,
{
    let width = acc.width();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SleError::InvalidInput(format!("worker pool: {e}")))?;
    pool.install(|| {
        if reproducible {
            let outcomes: Vec<Vec<f64>> = indices.into_par_iter().map(&task).collect::<Result<_>>()?;
            let mut acc = acc;
            for o in &outcomes {
                check_width(o, width)?;
                acc.push(o);
            }
            Ok(acc)
        } else {
            let part = indices
                .into_par_iter()
                .try_fold(
                    || Accumulator::new(width),
                    |mut a, i| {
                        let o = task(i)?;
                        check_width(&o, width)?;
                        a.push(&o);
                        Ok::<_, SleError>(a)
                    },
                )
                .try_reduce(|| Accumulator::new(width), |a, b| Ok(a.merge(&b)))?;
            Ok(acc.merge(&part))
        }
    })
}

fn check_width(o: &[f64], width: usize) -> Result<()> {
    if o.len() != width {
        return Err(SleError::InvalidInput(format!("sample produced {} outcomes, expected {width}", o.len())));
    }
    Ok(())
}
