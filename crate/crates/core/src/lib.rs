//! Worst-case V2V signal interference at four-arm road intersections.
//!
//! Computes the interference surrogate (sum of inverse-squared distances
//! from all flooding transmitters to a receiver at the stop line) from
//! macroscopic traffic parameters — mean spacing `h`, intersection
//! diameter `D`, and intersection angle `alpha` — and derives conservative
//! SINR-based transmission-range bounds.
//!
//! The closed-form bound family is evaluated in two modes everywhere it
//! matters: `Printed` keeps each published formula verbatim (including its
//! dimensional quirks and the 4-digit Euler-Mascheroni constant), while
//! `Derived` re-derives the same chain in a dimensionally consistent way.
//! Gaps between the two are surfaced through a machine-readable
//! discrepancy report instead of being silently patched.

pub mod cli;
pub mod experiments;
pub mod geometry;
pub mod interference;
pub mod optimize;
pub mod range;
pub mod specfun;
pub mod traffic;

use thiserror::Error;

/// Crate-wide error type. The CLI maps `Parameter`/config problems to
/// exit code 2 and everything else (domain and constraint violations)
/// to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("constraint error: {0}")]
    Constraint(String),
    #[error("unsupported intersection angle {0} deg; supported fitted angles: 60, 65, 70, 75, 78, 80, 85, 88, 90")]
    UnsupportedAngle(f64),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),
    #[error("singularity: {0}")]
    Singularity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Format a value with 12 significant digits, the contract for all CLI
/// numeric output.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_sig12;

    #[test]
    fn sig12_round_trips_to_1e9_relative() {
        for &x in &[1.0, 7.666666666667, 3.125e-4, 1.23456789e15, -42.5] {
            let s = fmt_sig12(x);
            let back: f64 = s.parse().unwrap();
            assert!((back - x).abs() <= 1e-9 * x.abs(), "{x} -> {s} -> {back}");
        }
    }

    #[test]
    fn sig12_examples() {
        assert_eq!(fmt_sig12(1.0), "1.00000000000");
        assert_eq!(fmt_sig12(0.0), "0.00000000000");
    }
}
