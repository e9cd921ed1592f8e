//! Vehicle placement generation and congestion-level classification.
//!
//! Placements are lists of upstream positions per arm (position 0 = the
//! stop line). The stochastic generator draws shifted-exponential gaps
//! and is fully determined by its seed, so parallel and serial sweeps
//! produce identical scenarios.

use crate::geometry::IntersectionGeometry;
use crate::range::RadioParams;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Minimum bumper-to-bumper gap in very congested traffic, feet.
pub const MIN_GAP_FT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Arm {
    N,
    S,
    E,
    W,
}

impl Arm {
    pub const ALL: [Arm; 4] = [Arm::N, Arm::S, Arm::E, Arm::W];

    pub fn opposite(self) -> Arm {
        match self {
            Arm::N => Arm::S,
            Arm::S => Arm::N,
            Arm::E => Arm::W,
            Arm::W => Arm::E,
        }
    }
}

impl std::fmt::Display for Arm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Ordered vehicle positions on one arm, in feet upstream of the stop line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmPlacement {
    pub arm: Arm,
    pub positions_ft: Vec<f64>,
}

impl ArmPlacement {
    pub fn len(&self) -> usize {
        self.positions_ft.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions_ft.is_empty()
    }
}

/// Evenly spaced vehicles: `[0, h, 2h, ..., (n-1) h]`.
pub fn uniform_placement(arm: Arm, h: f64, n: usize) -> Result<ArmPlacement> {
    if !(h > 0.0) {
        return Err(Error::Parameter(format!("spacing h must be > 0, got {h}")));
    }
    Ok(ArmPlacement {
        arm,
        positions_ft: (0..n).map(|j| j as f64 * h).collect(),
    })
}

/// Stochastic headways: first vehicle at the stop line, then i.i.d. gaps
/// from a shifted exponential with floor `min_gap` and mean `mean_h`.
pub fn stochastic_placement(
    arm: Arm,
    mean_h: f64,
    min_gap: f64,
    n: usize,
    seed: u64,
) -> Result<ArmPlacement> {
    if !(min_gap > 0.0) {
        return Err(Error::Parameter(format!(
            "min_gap must be > 0, got {min_gap}"
        )));
    }
    if !(mean_h > min_gap) {
        return Err(Error::Parameter(format!(
            "mean_h ({mean_h}) must exceed min_gap ({min_gap})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = mean_h - min_gap;
    let mut positions = Vec::with_capacity(n);
    let mut pos = 0.0;
    for j in 0..n {
        if j > 0 {
            let u: f64 = rng.gen::<f64>();
            // inverse-CDF exponential; 1 - u in (0, 1]
            pos += min_gap - scale * (1.0 - u).ln();
        }
        positions.push(pos);
    }
    Ok(ArmPlacement {
        arm,
        positions_ft: positions,
    })
}

/// Congestion band by mean spacing, per the level-of-service mapping:
/// sparse above 100 ft, mild on the closed interval [50, 100] ft, dense
/// below 50 ft.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Los {
    SparseAB,
    MildCD,
    DenseEF,
}

impl std::fmt::Display for Los {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Los::SparseAB => "A-B",
            Los::MildCD => "C-D",
            Los::DenseEF => "E-F",
        };
        write!(f, "{s}")
    }
}

pub fn classify_los(h: f64) -> Los {
    if h > 100.0 {
        Los::SparseAB
    } else if h >= 50.0 {
        Los::MildCD
    } else {
        Los::DenseEF
    }
}

/// Full interference scenario: geometry, per-arm placements, the receiver
/// slot, and radio parameters. Every non-receiver vehicle transmits
/// (flooding), fixed by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementScenario {
    pub geometry: IntersectionGeometry,
    pub arms: BTreeMap<Arm, ArmPlacement>,
    pub receiver: (Arm, usize),
    pub radio: RadioParams,
    pub mean_spacing_ft: f64,
}

impl PlacementScenario {
    /// Uniform spacing on every arm with the given per-arm vehicle counts.
    /// The receiver is vehicle 0 on the north arm.
    pub fn uniform(
        geometry: IntersectionGeometry,
        radio: RadioParams,
        h: f64,
        n_per_arm: &BTreeMap<Arm, usize>,
    ) -> Result<Self> {
        let mut arms = BTreeMap::new();
        for arm in Arm::ALL {
            let n = n_per_arm.get(&arm).copied().unwrap_or(0);
            arms.insert(arm, uniform_placement(arm, h, n)?);
        }
        let scenario = Self {
            geometry,
            arms,
            receiver: (Arm::N, 0),
            radio,
            mean_spacing_ft: h,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Stochastic placements on every arm; each arm draws from a seed
    /// derived deterministically from the master seed.
    pub fn stochastic(
        geometry: IntersectionGeometry,
        radio: RadioParams,
        mean_h: f64,
        min_gap: f64,
        n_per_arm: &BTreeMap<Arm, usize>,
        seed: u64,
    ) -> Result<Self> {
        let mut arms = BTreeMap::new();
        for (idx, arm) in Arm::ALL.into_iter().enumerate() {
            let n = n_per_arm.get(&arm).copied().unwrap_or(0);
            let arm_seed = derive_seed(seed, idx as u64);
            arms.insert(arm, stochastic_placement(arm, mean_h, min_gap, n, arm_seed)?);
        }
        let scenario = Self {
            geometry,
            arms,
            receiver: (Arm::N, 0),
            radio,
            mean_spacing_ft: mean_h,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.radio.validate()?;
        let (arm, idx) = self.receiver;
        let placement = self
            .arms
            .get(&arm)
            .ok_or_else(|| Error::Parameter(format!("receiver arm {arm} missing")))?;
        if idx >= placement.len() {
            return Err(Error::Parameter(format!(
                "receiver index {idx} out of range on arm {arm} ({} vehicles)",
                placement.len()
            )));
        }
        for placement in self.arms.values() {
            for w in placement.positions_ft.windows(2) {
                if !(w[1] > w[0]) {
                    return Err(Error::Parameter(format!(
                        "positions on arm {} not strictly increasing",
                        placement.arm
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn receiver_position_ft(&self) -> f64 {
        let (arm, idx) = self.receiver;
        self.arms[&arm].positions_ft[idx]
    }

    /// Mean of all realized consecutive gaps across arms.
    pub fn realized_mean_spacing_ft(&self) -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0usize;
        for placement in self.arms.values() {
            for w in placement.positions_ft.windows(2) {
                sum += w[1] - w[0];
                count += 1;
            }
        }
        (count > 0).then(|| sum / count as f64)
    }
}

/// SplitMix64 step, used to derive independent per-arm and per-snapshot
/// seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15_u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
