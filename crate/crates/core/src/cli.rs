//! Command-line front end: every computation is reachable through a
//! subcommand; numeric output always carries 12 significant digits.
//!
//! Exit codes: 0 success, 2 invalid arguments or config, 3 domain or
//! constraint errors.

use crate::experiments::{
    default_alpha_values, default_d_values, default_h_values, default_ratio_grid,
    ground_truth_experiment_with, offset_csv, receiver_offset_study, refit_approximations,
    run_sweep, sweep_csv, SweepParam, SweepSpec, Testbed, GROUND_TRUTH_MEAN_SPACING_FT,
};
use crate::geometry::{
    default_reference_index, implied_gap_time_s, lane_horizontal_angles, table1_data,
    IntersectionGeometry, DEFAULT_ARM_LENGTH_FT, DEFAULT_LANE_WIDTH_FT,
};
use crate::interference::{
    discrepancy_csv, discrepancy_report, exact_interference, fitted_bound, multilane_factor,
    asymptotic_bound, BoundMode, CosineForm, DistanceModel, InterferenceBreakdown, Mode,
};
use crate::optimize::{optimize_bound, OptResult, Sense, DEFAULT_D_STEP, DEFAULT_H_STEP, D_MAX, D_MIN, H_MAX, H_MIN_EXCLUSIVE};
use crate::range::{transmission_range_bound, RadioParams};
use crate::traffic::{Arm, PlacementScenario, MIN_GAP_FT};
use crate::{fmt_sig12, Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Parser, Debug)]
#[command(
    name = "v2vint",
    version,
    about = "Worst-case V2V interference and transmission-range bounds at road intersections"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaMode {
    Printed,
    Derived,
    Fitted,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelArg {
    Published,
    Coordinate,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SenseArg {
    Min,
    Max,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamArg {
    H,
    D,
    Alpha,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestbedArg {
    Orthogonal,
    Nonorthogonal,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepModeArg {
    Exact,
    Finite,
    Printed,
    Derived,
    Fitted,
}

impl From<SweepModeArg> for Mode {
    fn from(m: SweepModeArg) -> Mode {
        match m {
            SweepModeArg::Exact => Mode::Exact,
            SweepModeArg::Finite => Mode::FiniteClosedForm,
            SweepModeArg::Printed => Mode::BoundPrinted,
            SweepModeArg::Derived => Mode::BoundDerived,
            SweepModeArg::Fitted => Mode::BoundFitted,
        }
    }
}

#[derive(Args, Debug)]
pub struct GeometryArgs {
    /// Intersection diameter D, feet.
    #[arg(long = "D", visible_alias = "diameter")]
    pub d: f64,
    /// Intersection angle alpha, degrees.
    #[arg(long, default_value_t = 90.0)]
    pub alpha: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form interference bound at one (h, D, alpha) point.
    Bound {
        /// Mean vehicle spacing h, feet.
        #[arg(long)]
        h: f64,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, value_enum, default_value_t = FormulaMode::Derived)]
        mode: FormulaMode,
        #[arg(long, default_value_t = 0.15)]
        beta: f64,
        #[arg(long)]
        json: bool,
    },
    /// Exact interference over an explicit vehicle placement.
    Exact {
        /// JSON scenario file; omit to build a uniform scenario from flags.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value_t = 50.0)]
        h: f64,
        #[arg(long = "D", default_value_t = 40.0)]
        d: f64,
        #[arg(long, default_value_t = 90.0)]
        alpha: f64,
        /// Vehicles per arm for the uniform fallback.
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Coordinate)]
        model: ModelArg,
        /// Override the scenario's stochastic seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Transmission-range bound from beta and an interference value.
    Range {
        #[arg(long, default_value_t = 0.15)]
        beta: f64,
        /// Interference value lambda, 1/ft^2.
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        json: bool,
    },
    /// Grid-search the fitted bound over the (h, D) box.
    Mp {
        #[arg(long, value_enum, default_value_t = SenseArg::Min)]
        sense: SenseArg,
        #[arg(long, default_value_t = 90.0)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = FormulaMode::Fitted)]
        mode: FormulaMode,
        #[arg(long, default_value_t = H_MIN_EXCLUSIVE)]
        h_min: f64,
        #[arg(long, default_value_t = H_MAX)]
        h_max: f64,
        #[arg(long, default_value_t = D_MIN)]
        d_min: f64,
        #[arg(long, default_value_t = D_MAX)]
        d_max: f64,
        #[arg(long, default_value_t = DEFAULT_H_STEP)]
        h_step: f64,
        #[arg(long, default_value_t = DEFAULT_D_STEP)]
        d_step: f64,
        /// Allow ranges outside the validated parameter box.
        #[arg(long)]
        unsafe_box: bool,
        #[arg(long, default_value_t = 0.15)]
        beta: f64,
        #[arg(long)]
        json: bool,
    },
    /// One-dimensional parameter sweep, CSV output.
    Sweep {
        #[arg(long, value_enum)]
        param: ParamArg,
        /// Comma-separated swept values; defaults to the standard grid.
        #[arg(long)]
        values: Option<String>,
        #[arg(long, default_value_t = 50.0)]
        fixed_h: f64,
        #[arg(long, default_value_t = 40.0)]
        fixed_d: f64,
        #[arg(long, default_value_t = 90.0)]
        fixed_alpha: f64,
        /// Comma-separated modes (exact,finite,printed,derived,fitted).
        #[arg(long, default_value = "exact,finite,derived")]
        modes: String,
        #[arg(long, default_value_t = 0.15)]
        beta: f64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
    /// Synthetic ground-truth MAPE pipeline over stochastic snapshots.
    Mape {
        #[arg(long, value_enum, default_value_t = TestbedArg::Orthogonal)]
        testbed: TestbedArg,
        #[arg(long, default_value_t = 2000)]
        timesteps: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = GROUND_TRUTH_MEAN_SPACING_FT)]
        mean_h: f64,
        #[arg(long)]
        json: bool,
    },
    /// Multi-lane amplification of a single-lane interference value.
    Multilane {
        /// Single-lane interference value, 1/ft^2.
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 4)]
        lanes: u32,
        #[arg(long, default_value_t = DEFAULT_LANE_WIDTH_FT)]
        lane_width: f64,
        /// Receiver-to-arm reference distance used for the lane angles.
        #[arg(long, default_value_t = 40.0)]
        reference_distance: f64,
        /// Zero-based reference lane; defaults to lanes - 2.
        #[arg(long)]
        reference_index: Option<usize>,
        /// Use the 1 - theta^2 small-angle form instead of 2 - theta^2.
        #[arg(long)]
        legacy_cosine: bool,
        #[arg(long)]
        json: bool,
    },
    /// Corner sight distance table with implied gap times, CSV.
    Table1,
    /// Refit the regression approximations; JSON fit report.
    Fit {
        /// Number of log-spaced ratio grid points.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Receiver-offset interference study, CSV output.
    Offset {
        /// JSON scenario file; omit to build a uniform scenario from flags.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value_t = 50.0)]
        h: f64,
        #[arg(long = "D", default_value_t = 40.0)]
        d: f64,
        #[arg(long, default_value_t = 90.0)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Comma-separated offsets in feet.
        #[arg(long, default_value = "0,50,100")]
        offsets: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Known formula tensions with numeric gaps, CSV output.
    Report {
        #[arg(long, default_value_t = 30.0)]
        h: f64,
        #[arg(long = "D", default_value_t = 60.0)]
        d: f64,
        #[arg(long, default_value_t = 0.15)]
        beta: f64,
    },
}

// ---------------------------------------------------------------------------
// JSON scenario schema
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    geometry: GeometryJson,
    traffic: TrafficJson,
    #[serde(default)]
    radio: RadioJson,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryJson {
    diameter_ft: f64,
    alpha_deg: f64,
    #[serde(default = "one")]
    lanes_per_arm: u32,
    #[serde(default = "default_lane_width")]
    lane_width_ft: f64,
    #[serde(default = "default_arm_length")]
    arm_length_ft: f64,
}

fn one() -> u32 {
    1
}
fn default_lane_width() -> f64 {
    DEFAULT_LANE_WIDTH_FT
}
fn default_arm_length() -> f64 {
    DEFAULT_ARM_LENGTH_FT
}
fn default_min_gap() -> f64 {
    MIN_GAP_FT
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrafficJson {
    mode: String,
    mean_spacing_ft: f64,
    #[serde(default = "default_min_gap")]
    min_gap_ft: f64,
    #[serde(default)]
    seed: u64,
    vehicles_per_arm: VehiclesJson,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct VehiclesJson {
    N: usize,
    S: usize,
    E: usize,
    W: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadioJson {
    #[serde(default = "default_beta")]
    beta: f64,
    #[serde(default = "default_gamma")]
    gamma: f64,
    #[serde(default = "default_power")]
    power: f64,
    #[serde(default)]
    noise: f64,
}

fn default_beta() -> f64 {
    RadioParams::default().beta
}
fn default_gamma() -> f64 {
    RadioParams::default().pathloss_exp
}
fn default_power() -> f64 {
    RadioParams::default().power
}

impl Default for RadioJson {
    fn default() -> Self {
        Self {
            beta: default_beta(),
            gamma: default_gamma(),
            power: default_power(),
            noise: 0.0,
        }
    }
}

/// Parse a JSON scenario file into a placement scenario.
pub fn load_scenario(path: &str, seed_override: Option<u64>) -> Result<PlacementScenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parameter(format!("cannot read scenario file {path}: {e}")))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parameter(format!("invalid scenario JSON in {path}: {e}")))?;
    let geom = IntersectionGeometry::with_lanes(
        file.geometry.diameter_ft,
        file.geometry.alpha_deg,
        file.geometry.lanes_per_arm,
        file.geometry.lane_width_ft,
        file.geometry.arm_length_ft,
    )?;
    let radio = RadioParams {
        power: file.radio.power,
        pathloss_exp: file.radio.gamma,
        noise: file.radio.noise,
        beta: file.radio.beta,
    };
    radio.validate()?;
    let counts: BTreeMap<Arm, usize> = [
        (Arm::N, file.traffic.vehicles_per_arm.N),
        (Arm::S, file.traffic.vehicles_per_arm.S),
        (Arm::E, file.traffic.vehicles_per_arm.E),
        (Arm::W, file.traffic.vehicles_per_arm.W),
    ]
    .into_iter()
    .collect();
    match file.traffic.mode.as_str() {
        "uniform" => {
            PlacementScenario::uniform(geom, radio, file.traffic.mean_spacing_ft, &counts)
        }
        "stochastic" => PlacementScenario::stochastic(
            geom,
            radio,
            file.traffic.mean_spacing_ft,
            file.traffic.min_gap_ft,
            &counts,
            seed_override.unwrap_or(file.traffic.seed),
        ),
        other => Err(Error::Parameter(format!(
            "traffic mode must be \"uniform\" or \"stochastic\", got \"{other}\""
        ))),
    }
}

fn uniform_scenario(h: f64, d: f64, alpha: f64, n: usize) -> Result<PlacementScenario> {
    let geom = IntersectionGeometry::new(d, alpha)?;
    let counts: BTreeMap<Arm, usize> = Arm::ALL.into_iter().map(|a| (a, n)).collect();
    PlacementScenario::uniform(geom, RadioParams::default(), h, &counts)
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parameter(format!("cannot parse \"{s}\" as a number: {e}")))
        })
        .collect()
}

fn breakdown_text(b: &InterferenceBreakdown) -> String {
    format!(
        "mode = {}\nnorth = {}\nsouth = {}\neast = {}\nwest = {}\nlambda_ft_neg2 = {}\n",
        b.mode,
        fmt_sig12(b.north),
        fmt_sig12(b.south),
        fmt_sig12(b.east),
        fmt_sig12(b.west),
        fmt_sig12(b.total)
    )
}

fn json_out<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Parameter(format!("serialization failed: {e}")))
}

fn opt_text(r: &OptResult, beta: f64) -> Result<String> {
    let rb = transmission_range_bound(beta, r.objective_value)?.r_b_ft;
    Ok(format!(
        "sense = {:?}\nobjective_lambda_ft_neg2 = {}\narg_h_ft = {}\narg_D_ft = {}\nr_b_ft = {}\n",
        r.objective_sense,
        fmt_sig12(r.objective_value),
        fmt_sig12(r.arg_h_ft),
        fmt_sig12(r.arg_d_ft),
        fmt_sig12(rb)
    ))
}

/// Run one parsed invocation, returning the text to print on stdout.
pub fn dispatch(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Bound { h, geometry, mode, beta, json } => {
            let (lambda, mode_tag, fit_note) = match mode {
                FormulaMode::Printed | FormulaMode::Derived => {
                    let geom = IntersectionGeometry::new(geometry.d, geometry.alpha)?;
                    let bm = if *mode == FormulaMode::Printed {
                        BoundMode::Printed
                    } else {
                        BoundMode::Derived
                    };
                    let b = asymptotic_bound(*h, &geom, bm)?;
                    (b.total, b.mode, None)
                }
                FormulaMode::Fitted => {
                    let f = fitted_bound(*h, geometry.d, geometry.alpha)?;
                    (f.value, Mode::BoundFitted, Some(f.within_fit_range))
                }
            };
            let rb = transmission_range_bound(*beta, lambda)?.r_b_ft;
            if *json {
                return json_out(&serde_json::json!({
                    "mode": format!("{mode_tag}"),
                    "h_ft": h,
                    "D_ft": geometry.d,
                    "alpha_deg": geometry.alpha,
                    "lambda_ft_neg2": lambda,
                    "r_b_ft": rb,
                    "within_fit_range": fit_note,
                }));
            }
            let mut out = format!(
                "mode = {mode_tag}\nlambda_ft_neg2 = {}\nr_b_ft = {}\n",
                fmt_sig12(lambda),
                fmt_sig12(rb)
            );
            if fit_note == Some(false) {
                out.push_str("warning: D/h outside the fitted ratio range [0.33, 83.33]\n");
            }
            Ok(out)
        }
        Command::Exact { scenario, h, d, alpha, n, model, seed, json } => {
            let s = match scenario {
                Some(path) => load_scenario(path, *seed)?,
                None => uniform_scenario(*h, *d, *alpha, *n)?,
            };
            let dm = match model {
                ModelArg::Published => DistanceModel::Published,
                ModelArg::Coordinate => DistanceModel::Coordinate,
            };
            let b = exact_interference(&s, dm)?;
            let rb = transmission_range_bound(s.radio.beta, b.total)?.r_b_ft;
            if *json {
                return json_out(&serde_json::json!({
                    "breakdown": b,
                    "r_b_ft": rb,
                }));
            }
            Ok(format!("{}r_b_ft = {}\n", breakdown_text(&b), fmt_sig12(rb)))
        }
        Command::Range { beta, lambda, json } => {
            let r = transmission_range_bound(*beta, *lambda)?;
            if *json {
                return json_out(&r);
            }
            Ok(format!("r_b_ft = {}\n", fmt_sig12(r.r_b_ft)))
        }
        Command::Mp {
            sense, alpha, mode, h_min, h_max, d_min, d_max, h_step, d_step, unsafe_box, beta, json,
        } => {
            let objective: Box<dyn Fn(f64, f64) -> f64 + Sync> = match mode {
                FormulaMode::Fitted => {
                    // fail fast on unsupported angles before the search
                    fitted_bound(50.0, 60.0, *alpha)?;
                    let a = *alpha;
                    Box::new(move |h, d| fitted_bound(h, d, a).expect("box-valid point").value)
                }
                FormulaMode::Printed | FormulaMode::Derived => {
                    let bm = if *mode == FormulaMode::Printed {
                        BoundMode::Printed
                    } else {
                        BoundMode::Derived
                    };
                    let geom_alpha = *alpha;
                    Box::new(move |h, d| {
                        let geom = IntersectionGeometry::new(d, geom_alpha)
                            .expect("box-valid geometry");
                        asymptotic_bound(h, &geom, bm)
                            .expect("box-valid point")
                            .total
                    })
                }
            };
            let wanted = match sense {
                SenseArg::Min => Sense::Min,
                SenseArg::Max => Sense::Max,
            };
            let run = |s: Sense| {
                optimize_bound(
                    &objective,
                    s,
                    (*h_min, *h_max),
                    (*d_min, *d_max),
                    *h_step,
                    *d_step,
                    *unsafe_box,
                )
            };
            let primary = run(wanted)?;
            let other = run(match wanted {
                Sense::Min => Sense::Max,
                Sense::Max => Sense::Min,
            })?;
            if *json {
                return json_out(&serde_json::json!({
                    "requested": primary,
                    "opposite_sense": other,
                    "r_b_ft_requested": transmission_range_bound(*beta, primary.objective_value)?.r_b_ft,
                    "r_b_ft_opposite": transmission_range_bound(*beta, other.objective_value)?.r_b_ft,
                }));
            }
            // both senses are reported: the minimum gives the largest
            // range, the maximum gives the most conservative one
            Ok(format!(
                "{}--- opposite sense ---\n{}",
                opt_text(&primary, *beta)?,
                opt_text(&other, *beta)?
            ))
        }
        Command::Sweep { param, values, fixed_h, fixed_d, fixed_alpha, modes, beta, out } => {
            let swept = match param {
                ParamArg::H => SweepParam::H,
                ParamArg::D => SweepParam::D,
                ParamArg::Alpha => SweepParam::Alpha,
            };
            let values = match values {
                Some(v) => parse_f64_list(v)?,
                None => match swept {
                    SweepParam::H => default_h_values(),
                    SweepParam::D => default_d_values(),
                    SweepParam::Alpha => default_alpha_values(),
                },
            };
            let mode_list: Vec<Mode> = modes
                .split(',')
                .map(|m| match m.trim() {
                    "exact" => Ok(Mode::Exact),
                    "finite" => Ok(Mode::FiniteClosedForm),
                    "printed" => Ok(Mode::BoundPrinted),
                    "derived" => Ok(Mode::BoundDerived),
                    "fitted" => Ok(Mode::BoundFitted),
                    other => Err(Error::Parameter(format!("unknown mode \"{other}\""))),
                })
                .collect::<Result<_>>()?;
            let mut spec = SweepSpec::new(swept, values, *fixed_h, *fixed_d, *fixed_alpha);
            spec.modes = mode_list;
            spec.beta = *beta;
            let csv = sweep_csv(&run_sweep(&spec)?);
            match out {
                Some(path) => {
                    std::fs::write(path, &csv).map_err(|e| {
                        Error::Parameter(format!("cannot write {path}: {e}"))
                    })?;
                    Ok(format!("wrote {} bytes to {path}\n", csv.len()))
                }
                None => Ok(csv),
            }
        }
        Command::Mape { testbed, timesteps, seed, mean_h, json } => {
            let tb = match testbed {
                TestbedArg::Orthogonal => Testbed::Orthogonal,
                TestbedArg::Nonorthogonal => Testbed::NonOrthogonal,
            };
            let report = ground_truth_experiment_with(tb, *timesteps, *seed, *mean_h)?;
            let context = match tb {
                Testbed::Orthogonal => 6.2,
                Testbed::NonOrthogonal => 5.4,
            };
            if *json {
                return json_out(&serde_json::json!({
                    "mape_percent": report.mape_percent,
                    "timestep_count": report.timestep_count,
                    "reference_microsimulation_mape_percent": context,
                }));
            }
            Ok(format!(
                "mape_percent = {}\ntimestep_count = {}\nreference_microsimulation_mape_percent = {} (context only)\n",
                fmt_sig12(report.mape_percent),
                report.timestep_count,
                context
            ))
        }
        Command::Multilane {
            lambda, lanes, lane_width, reference_distance, reference_index, legacy_cosine, json,
        } => {
            let geom = IntersectionGeometry::with_lanes(
                40.0,
                90.0,
                *lanes,
                *lane_width,
                DEFAULT_ARM_LENGTH_FT,
            )?;
            let ref_idx = reference_index.unwrap_or_else(|| default_reference_index(*lanes));
            let thetas = lane_horizontal_angles(&geom, *reference_distance, ref_idx)?;
            let form = if *legacy_cosine {
                CosineForm::OneMinusThetaSq
            } else {
                CosineForm::TwoMinusThetaSq
            };
            let factor = multilane_factor(&thetas, ref_idx, form)?;
            let overall = lambda * factor;
            if *json {
                return json_out(&serde_json::json!({
                    "factor": factor,
                    "lambda_overall_ft_neg2": overall,
                    "thetas_rad": thetas,
                    "reference_index": ref_idx,
                }));
            }
            Ok(format!(
                "factor = {}\nlambda_overall_ft_neg2 = {}\n",
                fmt_sig12(factor),
                fmt_sig12(overall)
            ))
        }
        Command::Table1 => {
            let mut out = String::from("speed_mph,c_ft,alpha_deg,implied_gap_time_s\n");
            for row in table1_data() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_sig12(row.speed_mph),
                    fmt_sig12(row.c_ft),
                    fmt_sig12(row.alpha_deg),
                    fmt_sig12(implied_gap_time_s(&row))
                ));
            }
            Ok(out)
        }
        Command::Fit { points } => {
            let grid = if *points == 200 {
                default_ratio_grid()
            } else {
                let (lo, hi) = crate::interference::FIT_RATIO_RANGE;
                if *points < 2 {
                    return Err(Error::Parameter("need at least 2 grid points".into()));
                }
                (0..*points)
                    .map(|i| lo * (hi / lo).powf(i as f64 / (*points - 1) as f64))
                    .collect()
            };
            json_out(&refit_approximations(&grid)?)
        }
        Command::Offset { scenario, h, d, alpha, n, offsets, seed } => {
            let s = match scenario {
                Some(path) => load_scenario(path, *seed)?,
                None => uniform_scenario(*h, *d, *alpha, *n)?,
            };
            let offsets = parse_f64_list(offsets)?;
            let study = receiver_offset_study(&s, &offsets)?;
            let mut out = offset_csv(&study);
            out.push_str(&format!("# nonincreasing = {}\n", study.nonincreasing));
            Ok(out)
        }
        Command::Report { h, d, beta } => {
            Ok(discrepancy_csv(&discrepancy_report(*h, *d, *beta)?))
        }
    }
}

/// Exit-code mapping for library errors.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Parameter(_) => 2,
        _ => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    fn run(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(args).expect("parse");
        dispatch(&cli)
    }

    #[test]
    fn range_cancellation_prints_one() {
        let out = run(&["v2vint", "range", "--beta", "0.15", "--lambda", "7.666666666667"])
            .unwrap();
        assert!(out.contains("r_b_ft = 1.0000000000"), "{out}");
    }

    #[test]
    fn bound_fitted_matches_library() {
        let out = run(&[
            "v2vint", "bound", "--h", "30", "--D", "60", "--alpha", "75", "--mode", "fitted",
        ])
        .unwrap();
        let expected = fitted_bound(30.0, 60.0, 75.0).unwrap().value;
        assert!(out.contains(&fmt_sig12(expected)), "{out}");
    }

    #[test]
    fn bound_unsupported_fitted_angle_maps_to_exit_3() {
        let cli = Cli::try_parse_from([
            "v2vint", "bound", "--h", "30", "--D", "60", "--alpha", "59", "--mode", "fitted",
        ])
        .unwrap();
        let err = dispatch(&cli).unwrap_err();
        assert_eq!(exit_code_for(&err), 3);
    }

    #[test]
    fn numeric_output_round_trips() {
        let out = run(&["v2vint", "bound", "--h", "30", "--D", "60", "--mode", "derived"])
            .unwrap();
        let lambda_line = out.lines().find(|l| l.starts_with("lambda_ft_neg2")).unwrap();
        let lambda: f64 = lambda_line.split(" = ").nth(1).unwrap().parse().unwrap();
        let rb_line = out.lines().find(|l| l.starts_with("r_b_ft")).unwrap();
        let rb: f64 = rb_line.split(" = ").nth(1).unwrap().parse().unwrap();
        let recomputed = transmission_range_bound(0.15, lambda).unwrap().r_b_ft;
        assert!((recomputed - rb).abs() <= 1e-9 * rb);
    }

    #[test]
    fn scenario_schema_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        std::fs::write(
            &path,
            r#"{"geometry": {"diameter_ft": 40, "alpha_deg": 90, "bogus": 1},
                "traffic": {"mode": "uniform", "mean_spacing_ft": 50,
                            "vehicles_per_arm": {"N": 5, "S": 5, "E": 5, "W": 5}}}"#,
        )
        .unwrap();
        let err = load_scenario(path.to_str().unwrap(), None).unwrap_err();
        assert_eq!(exit_code_for(&err), 2);
    }

    #[test]
    fn scenario_loads_and_evaluates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        std::fs::write(
            &path,
            r#"{"geometry": {"diameter_ft": 40, "alpha_deg": 90},
                "traffic": {"mode": "stochastic", "mean_spacing_ft": 50,
                            "min_gap_ft": 1.5, "seed": 7,
                            "vehicles_per_arm": {"N": 50, "S": 50, "E": 50, "W": 50}},
                "radio": {"beta": 0.15, "gamma": 2.0, "power": 1.0, "noise": 0.0}}"#,
        )
        .unwrap();
        let a = load_scenario(path.to_str().unwrap(), None).unwrap();
        let b = load_scenario(path.to_str().unwrap(), None).unwrap();
        assert_eq!(a, b);
        let out = run(&["v2vint", "exact", "--scenario", path.to_str().unwrap()]).unwrap();
        assert!(out.contains("lambda_ft_neg2 = "));
    }

    #[test]
    fn sweep_csv_header() {
        let out = run(&[
            "v2vint", "sweep", "--param", "h", "--values", "15,20,25", "--modes", "derived",
        ])
        .unwrap();
        assert!(out.starts_with("param,value,mode,lambda_ft_neg2,r_b_ft,los\n"));
        assert_eq!(out.lines().count(), 4);
    }

    #[test]
    fn report_csv_header() {
        let out = run(&["v2vint", "report"]).unwrap();
        assert!(out.starts_with("formula_a,formula_b,h,D,alpha_deg,value_a,value_b,rel_gap\n"));
    }

    #[test]
    fn mp_single_point() {
        let out = run(&[
            "v2vint", "mp", "--h-min", "50", "--h-max", "50", "--d-min", "60", "--d-max", "60",
        ])
        .unwrap();
        assert!(out.contains("arg_h_ft = 50.0000000000"), "{out}");
        assert!(out.contains("arg_D_ft = 60.0000000000"), "{out}");
    }
}
