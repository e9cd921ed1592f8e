//! Box-constrained grid search over (h, D) for any bound formula.

use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Parameter box from the published mathematical program:
/// `1.5 < h <= 86`, `28 <= D <= 125` (feet).
pub const H_MIN_EXCLUSIVE: f64 = 1.5;
pub const H_MAX: f64 = 86.0;
pub const D_MIN: f64 = 28.0;
pub const D_MAX: f64 = 125.0;

/// Default grid steps: fine enough that halving them moves the optimum by
/// less than 0.1%.
pub const DEFAULT_H_STEP: f64 = 0.5;
pub const DEFAULT_D_STEP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptResult {
    pub objective_value: f64,
    pub arg_h_ft: f64,
    pub arg_d_ft: f64,
    pub objective_sense: Sense,
    pub grid_steps: (f64, f64),
}

fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    // inclusive of the end point up to floating slack
    let mut v = Vec::new();
    let n = ((end - start) / step + 1e-9).floor() as usize;
    for i in 0..=n {
        let x = start + i as f64 * step;
        if x <= end + 1e-9 {
            v.push(x.min(end));
        }
    }
    v
}

/// Exhaustive grid search of `bound(h, d)` over the box
/// `h_range x d_range`. The lower h edge is treated as open: the grid
/// starts at `h_range.0 + h_step` when `h_range.0` equals the published
/// strict lower limit. Ties break toward smaller (h, D) lexicographically,
/// identically under serial and parallel evaluation.
///
/// `unsafe_box` permits ranges outside the published box.
pub fn optimize_bound<F>(
    bound: F,
    sense: Sense,
    h_range: (f64, f64),
    d_range: (f64, f64),
    h_step: f64,
    d_step: f64,
    unsafe_box: bool,
) -> Result<OptResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if !(h_step > 0.0 && d_step > 0.0) {
        return Err(Error::Parameter(format!(
            "grid steps must be > 0, got ({h_step}, {d_step})"
        )));
    }
    if !unsafe_box {
        let inside = h_range.0 >= H_MIN_EXCLUSIVE - 1e-9
            && h_range.1 <= H_MAX + 1e-9
            && d_range.0 >= D_MIN - 1e-9
            && d_range.1 <= D_MAX + 1e-9;
        if !inside {
            return Err(Error::Constraint(format!(
                "ranges h={h_range:?} D={d_range:?} leave the box \
                 ({H_MIN_EXCLUSIVE}, {H_MAX}] x [{D_MIN}, {D_MAX}]; \
                 pass unsafe_box to override"
            )));
        }
    }
    // open lower h edge: shift the first sample off the strict limit
    let h_start = if (h_range.0 - H_MIN_EXCLUSIVE).abs() < 1e-12 {
        h_range.0 + h_step
    } else {
        h_range.0
    };
    let hs = grid(h_start, h_range.1, h_step);
    let ds = grid(d_range.0, d_range.1, d_step);
    if hs.is_empty() || ds.is_empty() {
        return Err(Error::Parameter(format!(
            "empty grid: h over [{h_start}, {}] step {h_step}, D over {d_range:?} step {d_step}",
            h_range.1
        )));
    }

    // (value, h, d) ordered so that min-reduction realizes the
    // lexicographic tie-break toward smaller (h, d)
    let better = |a: &(f64, f64, f64), b: &(f64, f64, f64)| -> bool {
        let cmp = match sense {
            Sense::Min => a.0 < b.0,
            Sense::Max => a.0 > b.0,
        };
        cmp || (a.0 == b.0 && (a.1, a.2) < (b.1, b.2))
    };

    let best = hs
        .par_iter()
        .map(|&h| {
            let mut local: Option<(f64, f64, f64)> = None;
            for &d in &ds {
                let cand = (bound(h, d), h, d);
                if local.as_ref().map_or(true, |cur| better(&cand, cur)) {
                    local = Some(cand);
                }
            }
            local.unwrap()
        })
        .reduce_with(|a, b| if better(&a, &b) { a } else { b })
        .unwrap();

    Ok(OptResult {
        objective_value: best.0,
        arg_h_ft: best.1,
        arg_d_ft: best.2,
        objective_sense: sense,
        grid_steps: (h_step, d_step),
    })
}

/// Full published box with default steps.
pub fn optimize_bound_default<F>(bound: F, sense: Sense) -> Result<OptResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    optimize_bound(
        bound,
        sense,
        (H_MIN_EXCLUSIVE, H_MAX),
        (D_MIN, D_MAX),
        DEFAULT_H_STEP,
        DEFAULT_D_STEP,
        false,
    )
}
