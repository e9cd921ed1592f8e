//! Intersection and sight-triangle geometry.
//!
//! Two distance models coexist:
//! - the published trigonometric formulas (law of cosines for cross arms,
//!   a `D^2 + (D + jh)^2` form for the opposing arm), and
//! - a coordinate model: intersection center at the origin, the receiver
//!   arm ray along +y, adjacent arms rotated by +/- alpha, the opposing
//!   arm along -y, and every stop line at distance D/2 from the center.
//!
//! Cross-arm distances agree between the two models by construction. The
//! opposing-arm formulas disagree (straight-across distance `D + jh`
//! versus the published `sqrt(D^2 + (D + jh)^2)`); both are exposed and
//! their gap lands in the discrepancy report.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_LANE_WIDTH_FT: f64 = 12.0;
pub const DEFAULT_ARM_LENGTH_FT: f64 = 2000.0;

/// Validity box the published fits and experiments cover.
pub const VALIDATED_D_RANGE: (f64, f64) = (28.0, 125.0);
pub const VALIDATED_ALPHA_RANGE: (f64, f64) = (60.0, 90.0);

/// Four-arm intersection geometry. Angles cross the API boundary in
/// degrees and are converted to radians internally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionGeometry {
    pub diameter_ft: f64,
    pub alpha_deg: f64,
    pub lanes_per_arm: u32,
    pub lane_width_ft: f64,
    pub arm_length_ft: f64,
}

impl IntersectionGeometry {
    pub fn new(diameter_ft: f64, alpha_deg: f64) -> Result<Self> {
        Self::with_lanes(
            diameter_ft,
            alpha_deg,
            1,
            DEFAULT_LANE_WIDTH_FT,
            DEFAULT_ARM_LENGTH_FT,
        )
    }

    pub fn with_lanes(
        diameter_ft: f64,
        alpha_deg: f64,
        lanes_per_arm: u32,
        lane_width_ft: f64,
        arm_length_ft: f64,
    ) -> Result<Self> {
        let geom = Self {
            diameter_ft,
            alpha_deg,
            lanes_per_arm,
            lane_width_ft,
            arm_length_ft,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diameter_ft > 0.0) {
            return Err(Error::Parameter(format!(
                "diameter_ft must be > 0, got {}",
                self.diameter_ft
            )));
        }
        if !(self.alpha_deg > 0.0 && self.alpha_deg < 180.0) {
            return Err(Error::DegenerateGeometry(format!(
                "alpha_deg must lie in (0, 180), got {}",
                self.alpha_deg
            )));
        }
        if self.lanes_per_arm < 1 {
            return Err(Error::Parameter("lanes_per_arm must be >= 1".into()));
        }
        if !(self.lane_width_ft > 0.0) {
            return Err(Error::Parameter("lane_width_ft must be > 0".into()));
        }
        if !(self.arm_length_ft > 0.0) {
            return Err(Error::Parameter("arm_length_ft must be > 0".into()));
        }
        Ok(())
    }

    pub fn alpha_rad(&self) -> f64 {
        self.alpha_deg.to_radians()
    }

    /// True iff (D, alpha) lie inside the box the published fits were
    /// produced for: D in [28, 125] ft, alpha in [60, 90] deg.
    pub fn within_validated_range(&self) -> bool {
        self.diameter_ft >= VALIDATED_D_RANGE.0
            && self.diameter_ft <= VALIDATED_D_RANGE.1
            && self.alpha_deg >= VALIDATED_ALPHA_RANGE.0
            && self.alpha_deg <= VALIDATED_ALPHA_RANGE.1
    }
}

/// Squared receiver-to-interferer distance for a vehicle `j` spacings up
/// a cross (east/west) arm: `D^2/4 + (D/2 + jh)^2 - 2 (D/2)(D/2 + jh) cos(alpha)`.
pub fn cross_arm_distance_sq(j: u32, h: f64, geom: &IntersectionGeometry) -> f64 {
    cross_arm_distance_sq_at(j as f64 * h, geom)
}

/// Same law-of-cosines form with an arbitrary upstream position in feet.
pub fn cross_arm_distance_sq_at(upstream_ft: f64, geom: &IntersectionGeometry) -> f64 {
    let half = geom.diameter_ft / 2.0;
    let leg = half + upstream_ft;
    half * half + leg * leg - 2.0 * half * leg * geom.alpha_rad().cos()
}

/// Squared distance for a vehicle `j` spacings up the opposing arm,
/// exactly as published: `D^2 + (D + jh)^2`.
pub fn opposing_arm_distance_sq(j: u32, h: f64, geom: &IntersectionGeometry) -> f64 {
    opposing_arm_distance_sq_at(j as f64 * h, geom)
}

pub fn opposing_arm_distance_sq_at(upstream_ft: f64, geom: &IntersectionGeometry) -> f64 {
    let d = geom.diameter_ft;
    let leg = d + upstream_ft;
    d * d + leg * leg
}

/// Coordinate-model layout. Ray directions are unit vectors from the
/// intersection center; a vehicle `s` feet upstream of its stop line sits
/// at distance `D/2 + s` along its arm's ray.
pub mod coords {
    use super::IntersectionGeometry;
    use crate::traffic::Arm;

    pub fn arm_direction(arm: Arm, alpha_rad: f64) -> (f64, f64) {
        match arm {
            Arm::N => (0.0, 1.0),
            Arm::S => (0.0, -1.0),
            Arm::W => (-alpha_rad.sin(), alpha_rad.cos()),
            Arm::E => (alpha_rad.sin(), alpha_rad.cos()),
        }
    }

    pub fn position(arm: Arm, upstream_ft: f64, geom: &IntersectionGeometry) -> (f64, f64) {
        let r = geom.diameter_ft / 2.0 + upstream_ft;
        let (dx, dy) = arm_direction(arm, geom.alpha_rad());
        (r * dx, r * dy)
    }

    /// Squared Euclidean distance between two vehicles in the coordinate
    /// model.
    pub fn distance_sq(
        arm_a: Arm,
        upstream_a: f64,
        arm_b: Arm,
        upstream_b: f64,
        geom: &IntersectionGeometry,
    ) -> f64 {
        if arm_a == arm_b {
            let d = upstream_a - upstream_b;
            return d * d;
        }
        let (xa, ya) = position(arm_a, upstream_a, geom);
        let (xb, yb) = position(arm_b, upstream_b, geom);
        let dx = xa - xb;
        let dy = ya - yb;
        dx * dx + dy * dy
    }
}

/// Horizontal angle of each lane centerline as seen from the receiver:
/// `theta_m = atan(lateral_offset_m / reference_distance)` with
/// `lateral_offset_m = (m - reference_index) * lane_width`. The reference
/// lane has theta = 0 (its own baseline).
pub fn lane_horizontal_angles(
    geom: &IntersectionGeometry,
    reference_distance_ft: f64,
    reference_index: usize,
) -> Result<Vec<f64>> {
    if !(reference_distance_ft > 0.0) {
        return Err(Error::Domain(format!(
            "reference_distance_ft must be > 0, got {reference_distance_ft}"
        )));
    }
    if reference_index >= geom.lanes_per_arm as usize {
        return Err(Error::Parameter(format!(
            "reference_index {reference_index} out of range for {} lanes",
            geom.lanes_per_arm
        )));
    }
    Ok((0..geom.lanes_per_arm as usize)
        .map(|m| {
            let offset = (m as f64 - reference_index as f64) * geom.lane_width_ft;
            (offset / reference_distance_ft).atan()
        })
        .collect())
}

/// Default reference lane. Convention: lanes are numbered 1..k right to
/// left with lane k-1 as the reference, i.e. zero-based index `lanes - 2`
/// (0 for single-lane arms).
pub fn default_reference_index(lanes_per_arm: u32) -> usize {
    (lanes_per_arm as usize).saturating_sub(2)
}

/// AASHTO sight-triangle leg: `a (or b) = 1.47 * V_posted * t_g`.
pub fn sight_leg_length(posted_speed_mph: f64, gap_time_s: f64) -> Result<f64> {
    if !(posted_speed_mph > 0.0) {
        return Err(Error::Parameter(format!(
            "posted speed must be > 0, got {posted_speed_mph}"
        )));
    }
    if gap_time_s < 3.0 {
        return Err(Error::Constraint(format!(
            "t_g >= 3 sec is the time gap to enter the other road; got {gap_time_s}"
        )));
    }
    Ok(1.47 * posted_speed_mph * gap_time_s)
}

/// Intersection angle from sight-triangle legs via the law of cosines:
/// `alpha = arccos((a^2 + b^2 - c^2) / (2ab))`, in degrees.
pub fn angle_from_legs(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(Error::Parameter("all legs must be > 0".into()));
    }
    let num = a * a + b * b - c * c;
    let den = 2.0 * a * b;
    if num.abs() > den {
        return Err(Error::InfeasibleGeometry(format!(
            "legs a={a}, b={b}, c={c} violate the triangle inequality"
        )));
    }
    Ok((num / den).acos().to_degrees())
}

/// AASHTO sight triangle with posted speed and entry time gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SightTriangle {
    pub leg_a_ft: f64,
    pub leg_b_ft: f64,
    pub leg_c_ft: f64,
    pub posted_speed_mph: f64,
    pub gap_time_s: f64,
}

impl SightTriangle {
    pub fn new(
        posted_speed_mph: f64,
        gap_time_s: f64,
        leg_c_ft: f64,
    ) -> Result<Self> {
        let leg = sight_leg_length(posted_speed_mph, gap_time_s)?;
        if !(leg_c_ft > 0.0) {
            return Err(Error::Parameter("leg_c_ft must be > 0".into()));
        }
        Ok(Self {
            leg_a_ft: leg,
            leg_b_ft: leg,
            leg_c_ft,
            posted_speed_mph,
            gap_time_s,
        })
    }

    pub fn angle_deg(&self) -> Result<f64> {
        angle_from_legs(self.leg_a_ft, self.leg_b_ft, self.leg_c_ft)
    }
}

/// One row of the AASHTO corner-sight-distance table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Row {
    pub speed_mph: f64,
    pub c_ft: f64,
    pub alpha_deg: f64,
}

/// The published corner sight distances and intersection angles per
/// posted speed. Treated as authoritative data: the angles are not
/// reproducible from the leg formula with t_g = 3 s (c would exceed
/// a + b), so `implied_gap_time_s` reports the per-row t_g that makes
/// a = b legs consistent with (c, alpha).
pub fn table1_data() -> Vec<Table1Row> {
    [
        (25.0, 280.0, 60.0),
        (30.0, 355.0, 65.0),
        (35.0, 415.0, 70.0),
        (40.0, 470.0, 75.0),
        (45.0, 530.0, 78.0),
        (50.0, 590.0, 80.0),
        (55.0, 645.0, 85.0),
        (60.0, 705.0, 88.0),
    ]
    .into_iter()
    .map(|(speed_mph, c_ft, alpha_deg)| Table1Row {
        speed_mph,
        c_ft,
        alpha_deg,
    })
    .collect()
}

/// Diagnostic: the gap time implied by a row when both approach legs are
/// equal, from `c^2 = 2 a^2 (1 - cos alpha)` and `a = 1.47 V t_g`.
pub fn implied_gap_time_s(row: &Table1Row) -> f64 {
    let one_minus_cos = 1.0 - row.alpha_deg.to_radians().cos();
    let a = row.c_ft / (2.0 * one_minus_cos).sqrt();
    a / (1.47 * row.speed_mph)
}
