//! SINR success evaluation and the conservative transmission-range bound.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Radio parameters of the SINR model. All vehicles share the same
/// transmit power; the interference surrogate assumes a free-space decay
/// exponent of 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    /// Normalized transmit power P.
    pub power: f64,
    /// Path-loss exponent gamma, typically in [2, 6].
    pub pathloss_exp: f64,
    /// Background noise N (white Gaussian with mean approximately 0).
    pub noise: f64,
    /// SINR success threshold beta.
    pub beta: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            power: 1.0,
            pathloss_exp: 2.0,
            noise: 0.0,
            beta: 0.15,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.power > 0.0) {
            return Err(Error::Parameter(format!(
                "power must be > 0, got {}",
                self.power
            )));
        }
        if !(2.0..=6.0).contains(&self.pathloss_exp) {
            return Err(Error::Parameter(format!(
                "pathloss_exp must lie in [2, 6], got {}",
                self.pathloss_exp
            )));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Parameter(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        if self.noise < 0.0 {
            return Err(Error::Parameter(format!(
                "noise must be >= 0, got {}",
                self.noise
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrOutcome {
    pub sinr: f64,
    pub success: bool,
    /// True when noise and interference are both zero and the SINR is
    /// unbounded.
    pub unbounded: bool,
}

/// SINR check: `sinr = P x^-gamma / (N + P * interference_sum)` with the
/// same power applied to all interferers; success iff `sinr >= beta`.
pub fn sinr_check(radio: &RadioParams, tx_distance_ft: f64, interference: f64) -> Result<SinrOutcome> {
    radio.validate()?;
    if !(tx_distance_ft > 0.0) {
        return Err(Error::Domain(format!(
            "tx_distance must be > 0, got {tx_distance_ft}"
        )));
    }
    if interference < 0.0 {
        return Err(Error::Domain(format!(
            "interference must be >= 0, got {interference}"
        )));
    }
    let signal = radio.power * tx_distance_ft.powf(-radio.pathloss_exp);
    let denom = radio.noise + radio.power * interference;
    if denom == 0.0 {
        return Ok(SinrOutcome {
            sinr: f64::INFINITY,
            success: true,
            unbounded: true,
        });
    }
    let sinr = signal / denom;
    Ok(SinrOutcome {
        sinr,
        success: sinr >= radio.beta,
        unbounded: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizationSense {
    Min,
    Max,
    Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeResult {
    pub r_b_ft: f64,
    pub lambda_used: f64,
    pub beta_used: f64,
    pub optimization_sense: OptimizationSense,
    /// Set when lambda = 0 leaves the range unbounded.
    pub unbounded: bool,
}

/// Conservative transmission-range bound, as published:
/// `r_b = sqrt(((beta + 1) / beta) * (1 / lambda))`.
pub fn transmission_range_bound(beta: f64, lambda: f64) -> Result<RangeResult> {
    transmission_range_bound_with_sense(beta, lambda, OptimizationSense::Point)
}

pub fn transmission_range_bound_with_sense(
    beta: f64,
    lambda: f64,
    sense: OptimizationSense,
) -> Result<RangeResult> {
    if !(beta > 0.0) {
        return Err(Error::Parameter(format!("beta must be > 0, got {beta}")));
    }
    if lambda < 0.0 {
        return Err(Error::Parameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(RangeResult {
            r_b_ft: f64::INFINITY,
            lambda_used: 0.0,
            beta_used: beta,
            optimization_sense: sense,
            unbounded: true,
        });
    }
    Ok(RangeResult {
        r_b_ft: ((beta + 1.0) / beta / lambda).sqrt(),
        lambda_used: lambda,
        beta_used: beta,
        optimization_sense: sense,
        unbounded: false,
    })
}

/// The radius the SINR inequality alone would give with N = 0:
/// `r <= (beta * lambda)^(-1/2)`. The published bound carries an extra
/// `sqrt(1 + beta)` factor; both are reported side by side.
pub fn naive_range(beta: f64, lambda: f64) -> Result<f64> {
    if !(beta > 0.0 && lambda > 0.0) {
        return Err(Error::Parameter(format!(
            "beta and lambda must be > 0, got beta={beta} lambda={lambda}"
        )));
    }
    Ok(1.0 / (beta * lambda).sqrt())
}
