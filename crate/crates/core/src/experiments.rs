//! Desk-scale experiment harness: parameter sweeps, MAPE validation of
//! the closed forms against exact summation, the receiver-offset study,
//! and least-squares refits of the regression coefficients.

use crate::geometry::IntersectionGeometry;
use crate::interference::{
    exact_interference, exact_interference_at, fitted_bound, per_arm_finite_sums,
    asymptotic_bound, BoundMode, DistanceModel, Mode, BOUND_COEFFICIENTS, FIT_RATIO_RANGE,
    LOG_FIT_COEF_ORTHOGONAL, LOG_FIT_OFFSET_ORTHOGONAL, POWER_FIT_COEF, POWER_FIT_EXP,
};
use crate::range::{transmission_range_bound, RadioParams};
use crate::specfun::{digamma, trigamma};
use crate::traffic::{classify_los, derive_seed, Arm, PlacementScenario, MIN_GAP_FT};
use crate::{fmt_sig12, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    H,
    D,
    Alpha,
}

impl std::fmt::Display for SweepParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SweepParam::H => "h",
            SweepParam::D => "D",
            SweepParam::Alpha => "alpha",
        };
        write!(f, "{s}")
    }
}

/// One-dimensional parameter sweep over a set of computation modes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub swept: SweepParam,
    pub values: Vec<f64>,
    /// Fixed (h, D, alpha); the swept entry is ignored.
    pub fixed_h: f64,
    pub fixed_d: f64,
    pub fixed_alpha: f64,
    pub modes: Vec<Mode>,
    pub beta: f64,
    /// Vehicles per arm for the exact and finite-sum modes.
    pub n_per_arm: usize,
}

impl SweepSpec {
    pub fn new(swept: SweepParam, values: Vec<f64>, fixed_h: f64, fixed_d: f64, fixed_alpha: f64) -> Self {
        Self {
            swept,
            values,
            fixed_h,
            fixed_d,
            fixed_alpha,
            modes: vec![Mode::Exact, Mode::FiniteClosedForm, Mode::BoundDerived],
            beta: RadioParams::default().beta,
            n_per_arm: 200,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Parameter("sweep values empty".into()));
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter(
                "sweep values must be strictly increasing".into(),
            ));
        }
        if self.modes.is_empty() {
            return Err(Error::Parameter("no computation modes selected".into()));
        }
        if self.modes.contains(&Mode::BoundFitted) {
            let alphas: Vec<f64> = match self.swept {
                SweepParam::Alpha => self.values.clone(),
                _ => vec![self.fixed_alpha],
            };
            for a in alphas {
                if !BOUND_COEFFICIENTS.iter().any(|c| (c.alpha_deg - a).abs() < 1e-9) {
                    return Err(Error::UnsupportedAngle(a));
                }
            }
        }
        Ok(())
    }

    fn point(&self, value: f64) -> (f64, f64, f64) {
        match self.swept {
            SweepParam::H => (value, self.fixed_d, self.fixed_alpha),
            SweepParam::D => (self.fixed_h, value, self.fixed_alpha),
            SweepParam::Alpha => (self.fixed_h, self.fixed_d, value),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub mode: Mode,
    pub lambda_ft_neg2: f64,
    pub r_b_ft: f64,
    pub los: String,
}

/// Interference for one (h, D, alpha, mode) point, identical to the
/// corresponding single-point operation call.
pub fn sweep_lambda(h: f64, d: f64, alpha: f64, mode: Mode, n_per_arm: usize) -> Result<f64> {
    let geom = IntersectionGeometry::new(d, alpha)?;
    let counts: BTreeMap<Arm, usize> = Arm::ALL.into_iter().map(|a| (a, n_per_arm)).collect();
    match mode {
        Mode::Exact => {
            let s = PlacementScenario::uniform(geom, RadioParams::default(), h, &counts)?;
            Ok(exact_interference(&s, DistanceModel::Coordinate)?.total)
        }
        Mode::FiniteClosedForm => Ok(per_arm_finite_sums(h, &geom, &counts)?.total),
        Mode::BoundPrinted => Ok(asymptotic_bound(h, &geom, BoundMode::Printed)?.total),
        Mode::BoundDerived => Ok(asymptotic_bound(h, &geom, BoundMode::Derived)?.total),
        Mode::BoundFitted => Ok(fitted_bound(h, d, alpha)?.value),
    }
}

/// Evaluate a sweep into rows, one per (value, mode) in order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len() * spec.modes.len());
    for &value in &spec.values {
        let (h, d, alpha) = spec.point(value);
        for &mode in &spec.modes {
            let lambda = sweep_lambda(h, d, alpha, mode, spec.n_per_arm)?;
            let r_b = transmission_range_bound(spec.beta, lambda)?.r_b_ft;
            rows.push(SweepRow {
                param: spec.swept,
                value,
                mode,
                lambda_ft_neg2: lambda,
                r_b_ft: r_b,
                los: classify_los(h).to_string(),
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("param,value,mode,lambda_ft_neg2,r_b_ft,los\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.param,
            fmt_sig12(r.value),
            r.mode,
            fmt_sig12(r.lambda_ft_neg2),
            fmt_sig12(r.r_b_ft),
            r.los
        ));
    }
    out
}

/// Published sweep defaults: h over {15, 20, ..., 175}, D over
/// {30, 40, ..., 120}, alpha over the supported fitted set.
pub fn default_h_values() -> Vec<f64> {
    (0..=32).map(|i| 15.0 + 5.0 * i as f64).collect()
}

pub fn default_d_values() -> Vec<f64> {
    (0..=9).map(|i| 30.0 + 10.0 * i as f64).collect()
}

pub fn default_alpha_values() -> Vec<f64> {
    vec![60.0, 65.0, 70.0, 75.0, 78.0, 80.0, 85.0, 88.0, 90.0]
}

// ---------------------------------------------------------------------------
// MAPE
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapeReport {
    pub mape_percent: f64,
    pub timestep_count: usize,
    pub series_truth: Vec<f64>,
    pub series_model: Vec<f64>,
}

/// Mean absolute percentage error:
/// `(1/T) sum |model_t - truth_t| / truth_t * 100`.
pub fn mape(truth: &[f64], model: &[f64]) -> Result<MapeReport> {
    if truth.is_empty() || truth.len() != model.len() {
        return Err(Error::Parameter(format!(
            "series lengths must match and be nonzero, got {} and {}",
            truth.len(),
            model.len()
        )));
    }
    if truth.iter().any(|&t| t == 0.0) {
        return Err(Error::Domain(
            "MAPE undefined: ground-truth series contains a zero".into(),
        ));
    }
    let t_count = truth.len();
    let sum: f64 = truth
        .iter()
        .zip(model)
        .map(|(&t, &m)| ((m - t) / t).abs())
        .sum();
    Ok(MapeReport {
        mape_percent: sum / t_count as f64 * 100.0,
        timestep_count: t_count,
        series_truth: truth.to_vec(),
        series_model: model.to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Ground-truth experiment
// ---------------------------------------------------------------------------

/// The two intersection presets of the validation testbeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Testbed {
    Orthogonal,
    NonOrthogonal,
}

pub fn testbed_geometry(testbed: Testbed) -> IntersectionGeometry {
    match testbed {
        Testbed::Orthogonal => IntersectionGeometry::new(40.0, 90.0).unwrap(),
        Testbed::NonOrthogonal => IntersectionGeometry::new(60.0, 60.0).unwrap(),
    }
}

/// Default configured mean spacing for the stochastic snapshots, feet.
pub const GROUND_TRUTH_MEAN_SPACING_FT: f64 = 50.0;
const GROUND_TRUTH_VEHICLES_PER_ARM: usize = 200;

/// Synthetic validation pipeline: i.i.d. stochastic placement snapshots
/// on a testbed geometry; truth is the exact coordinate-model summation,
/// the model is the closed-form finite sums fed the snapshot's realized
/// mean spacing. Bit-reproducible for a fixed seed.
pub fn ground_truth_experiment(testbed: Testbed, timesteps: usize, seed: u64) -> Result<MapeReport> {
    ground_truth_experiment_with(testbed, timesteps, seed, GROUND_TRUTH_MEAN_SPACING_FT)
}

pub fn ground_truth_experiment_with(
    testbed: Testbed,
    timesteps: usize,
    seed: u64,
    mean_spacing_ft: f64,
) -> Result<MapeReport> {
    if timesteps < 1 {
        return Err(Error::Parameter("timesteps must be >= 1".into()));
    }
    let geom = testbed_geometry(testbed);
    let counts: BTreeMap<Arm, usize> = Arm::ALL
        .into_iter()
        .map(|a| (a, GROUND_TRUTH_VEHICLES_PER_ARM))
        .collect();
    let pairs: Vec<(f64, f64)> = (0..timesteps)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let snapshot_seed = derive_seed(seed, t as u64);
            let scenario = PlacementScenario::stochastic(
                geom,
                RadioParams::default(),
                mean_spacing_ft,
                MIN_GAP_FT,
                &counts,
                snapshot_seed,
            )?;
            let truth = exact_interference(&scenario, DistanceModel::Coordinate)?.total;
            let realized_h = scenario
                .realized_mean_spacing_ft()
                .ok_or_else(|| Error::Parameter("snapshot has no gaps".into()))?;
            let model = per_arm_finite_sums(realized_h, &geom, &counts)?.total;
            Ok((truth, model))
        })
        .collect::<Result<Vec<_>>>()?;
    let truth: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let model: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    mape(&truth, &model)
}

// ---------------------------------------------------------------------------
// Receiver-offset study
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct OffsetRow {
    pub offset_ft: f64,
    pub lambda_ft_neg2: f64,
    pub r_b_ft: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OffsetStudy {
    pub rows: Vec<OffsetRow>,
    /// Whether the recorded interference sequence was non-increasing in
    /// the offset, as the further-from-the-intersection argument
    /// predicts. Recorded, not presumed.
    pub nonincreasing: bool,
}

/// Re-evaluate exact coordinate-model interference with the receiver
/// vehicle displaced upstream by each offset; interferer positions are
/// unchanged and the receiver's original slot is vacated. When an offset
/// lands exactly on another vehicle of the receiver arm, the receiver
/// takes that slot (the coincident vehicle is not double-counted).
pub fn receiver_offset_study(scenario: &PlacementScenario, offsets_ft: &[f64]) -> Result<OffsetStudy> {
    scenario.validate()?;
    let (arm, idx) = scenario.receiver;
    let base_pos = scenario.arms[&arm].positions_ft[idx];
    let beta = scenario.radio.beta;
    let mut rows = Vec::with_capacity(offsets_ft.len());
    for &offset in offsets_ft {
        if offset < 0.0 {
            return Err(Error::Parameter(format!(
                "offsets must be >= 0, got {offset}"
            )));
        }
        let pos = base_pos + offset;
        if pos > scenario.geometry.arm_length_ft {
            return Err(Error::Parameter(format!(
                "offset {offset} ft puts the receiver past the arm end \
                 ({} ft)",
                scenario.geometry.arm_length_ft
            )));
        }
        let mut displaced = scenario.clone();
        let positions = &mut displaced.arms.get_mut(&arm).unwrap().positions_ft;
        positions.remove(idx);
        positions.retain(|&p| (p - pos).abs() > 1e-9);
        let lambda =
            exact_interference_at(&displaced, DistanceModel::Coordinate, arm, pos, None)?.total;
        let r_b = transmission_range_bound(beta, lambda)?.r_b_ft;
        rows.push(OffsetRow {
            offset_ft: offset,
            lambda_ft_neg2: lambda,
            r_b_ft: r_b,
        });
    }
    let nonincreasing = rows
        .windows(2)
        .all(|w| w[1].lambda_ft_neg2 <= w[0].lambda_ft_neg2 + 1e-15);
    Ok(OffsetStudy { rows, nonincreasing })
}

pub fn offset_csv(study: &OffsetStudy) -> String {
    let mut out = String::from("offset_ft,lambda_ft_neg2,r_b_ft\n");
    for r in &study.rows {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_sig12(r.offset_ft),
            fmt_sig12(r.lambda_ft_neg2),
            fmt_sig12(r.r_b_ft)
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Regression refits
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AlphaLogFit {
    pub alpha_deg: f64,
    pub log_coef: f64,
    pub log_offset: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub grid_len: usize,
    /// Power fit `a r^b` to the trigamma function over the ratio grid,
    /// fitted in log-log space.
    pub power_coef: f64,
    pub power_exp: f64,
    pub power_r_squared: f64,
    pub power_coef_gap: f64,
    pub power_exp_gap: f64,
    /// Log fit `c ln r + d` to the digamma function over the ratio grid.
    pub log_coef: f64,
    pub log_offset: f64,
    pub log_r_squared: f64,
    pub log_coef_gap: f64,
    pub log_offset_gap: f64,
    /// The same log fit repeated over the angle-scaled arguments.
    pub per_alpha: Vec<AlphaLogFit>,
}

/// Ordinary least squares for `y = m x + b`; returns (m, b, R^2).
fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|&v| (v - my) * (v - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Parameter(
            "degenerate regression grid (no variance)".into(),
        ));
    }
    let m = sxy / sxx;
    let b = my - m * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &v)| {
            let e = v - (m * a + b);
            e * e
        })
        .sum();
    Ok((m, b, 1.0 - ss_res / syy))
}

/// Uniform log-spaced grid of 200 points over the published fit range.
pub fn default_ratio_grid() -> Vec<f64> {
    let (lo, hi) = FIT_RATIO_RANGE;
    let n = 200usize;
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn log_fit_over(points: &[f64]) -> Result<(f64, f64, f64)> {
    let x: Vec<f64> = points.iter().map(|&r| r.ln()).collect();
    let y: Vec<f64> = points
        .iter()
        .map(|&r| digamma(r).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    linear_fit(&x, &y)
}

/// Refit the power approximation to trigamma and the log approximation
/// to digamma on a ratio grid, reporting coefficient gaps against the
/// published regression values and R^2 in the regression space.
pub fn refit_approximations(ratio_grid: &[f64]) -> Result<FitReport> {
    if ratio_grid.len() < 50 {
        return Err(Error::Parameter(format!(
            "refit grid needs >= 50 points, got {}",
            ratio_grid.len()
        )));
    }
    let (lo, hi) = FIT_RATIO_RANGE;
    if ratio_grid.iter().any(|&r| r < lo - 1e-9 || r > hi + 1e-9) {
        return Err(Error::Parameter(format!(
            "refit grid must lie in [{lo}, {hi}]"
        )));
    }

    // power fit in log-log space: ln psi_1 = ln a + b ln r
    let lx: Vec<f64> = ratio_grid.iter().map(|&r| r.ln()).collect();
    let ly: Vec<f64> = ratio_grid
        .iter()
        .map(|&r| trigamma(r).map(|v| v.value.ln()))
        .collect::<Result<Vec<_>>>()?;
    let (b, ln_a, power_r2) = linear_fit(&lx, &ly)?;
    let a = ln_a.exp();

    let (c, d, log_r2) = log_fit_over(ratio_grid)?;

    let mut per_alpha = Vec::new();
    for coef in BOUND_COEFFICIENTS.iter() {
        let omc = 1.0 - coef.alpha_deg.to_radians().cos();
        let scaled: Vec<f64> = ratio_grid.iter().map(|&r| r * omc).collect();
        let (ca, da, r2a) = log_fit_over(&scaled)?;
        per_alpha.push(AlphaLogFit {
            alpha_deg: coef.alpha_deg,
            log_coef: ca,
            log_offset: da,
            r_squared: r2a,
        });
    }

    Ok(FitReport {
        grid_len: ratio_grid.len(),
        power_coef: a,
        power_exp: b,
        power_r_squared: power_r2,
        power_coef_gap: a - POWER_FIT_COEF,
        power_exp_gap: b - POWER_FIT_EXP,
        log_coef: c,
        log_offset: d,
        log_r_squared: log_r2,
        log_coef_gap: c - LOG_FIT_COEF_ORTHOGONAL,
        log_offset_gap: d - LOG_FIT_OFFSET_ORTHOGONAL,
        per_alpha,
    })
}
