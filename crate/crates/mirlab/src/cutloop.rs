//! The iterative cutting loop: solve the LP relaxation, separate the
//! fractional point, add every pool cut as a new `>=` row, re-solve, and
//! repeat until the point is integral, separation comes up empty, the
//! point stops moving, or a budget runs out.
//!
//! Separation always runs over the original rows only; cut rows are never
//! aggregated, so every cut is rank-1. With a classifier attached, each
//! round featurizes the original rows and restricts the separation to the
//! predicted useful subset.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{compute_features, FeatureError, FeatureVector};
use crate::learning::{label_round, GbtModel, LabeledSample, LABEL_EPSILON, PREDICT_THRESHOLD};
use crate::mirsep::{separate, SepError, SeparationConfig};
use crate::model::{MipInstance, ModelError, Point, INT_TOL};
use crate::oracle::{brute_force_optimum, EnumerationBox};
use crate::solver::{solve_lp, LpStatus};

#[derive(Debug, Error)]
pub enum LoopError {
    #[error("root LP relaxation is {0:?}")]
    RootLp(LpStatus),
    #[error("LP after adding cuts is {0:?}")]
    CutLp(LpStatus),
    #[error("gap contract violated: {0}")]
    ContractViolation(String),
    #[error(transparent)]
    Separation(#[from] SepError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Why the loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TerminationReason {
    IntegralPoint,
    NoCutFound,
    SamePoint,
    TimeLimit,
    MaxRounds,
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TerminationReason::IntegralPoint => "integral_point",
            TerminationReason::NoCutFound => "no_cut_found",
            TerminationReason::SamePoint => "same_point",
            TerminationReason::TimeLimit => "time_limit",
            TerminationReason::MaxRounds => "max_rounds",
        };
        f.write_str(s)
    }
}

/// Gap closed by the cuts added so far.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GapValue {
    /// `100 (z - z_lp) / (z_i - z_lp)`, clamped to `[0, 100]`.
    Percent(f64),
    /// The instance has no integrality gap (`z_i == z_lp`).
    Degenerate,
    /// No integer optimum is available (oracle out of reach, none given).
    Unknown,
}

impl GapValue {
    pub fn as_percent(&self) -> Option<f64> {
        match self {
            GapValue::Percent(p) => Some(*p),
            _ => None,
        }
    }
}

/// Percentage of the integrality gap closed by reaching objective `z`.
///
/// `z` may stray outside `[z_lp, z_i]` by at most 1e-6 (clamped); beyond
/// that the contract is violated. Gaps below 1e-9 are degenerate.
pub fn gap_closed(z: f64, z_lp: f64, z_i: f64) -> Result<GapValue, LoopError> {
    if (z_i - z_lp).abs() <= 1e-9 {
        return Ok(GapValue::Degenerate);
    }
    let tol = 1e-6;
    if z < z_lp - tol || z > z_i + tol {
        return Err(LoopError::ContractViolation(format!(
            "objective {z} outside [{z_lp}, {z_i}]"
        )));
    }
    let pct = 100.0 * (z - z_lp) / (z_i - z_lp);
    Ok(GapValue::Percent(pct.clamp(0.0, 100.0)))
}

/// Selects the rows worth separating over, given this round's features.
pub trait ConstraintClassifier {
    fn select_rows(&self, features: &[FeatureVector]) -> BTreeSet<usize>;
}

/// Classifier that accepts every row (true) or none (false).
#[derive(Clone, Copy, Debug)]
pub struct ConstantClassifier(pub bool);

impl ConstraintClassifier for ConstantClassifier {
    fn select_rows(&self, features: &[FeatureVector]) -> BTreeSet<usize> {
        if self.0 {
            features.iter().map(|fv| fv.row_index).collect()
        } else {
            BTreeSet::new()
        }
    }
}

/// A trained model plus its probability threshold.
pub struct GbtClassifier {
    pub model: GbtModel,
    pub threshold: f64,
}

impl GbtClassifier {
    pub fn new(model: GbtModel) -> Self {
        GbtClassifier {
            model,
            threshold: PREDICT_THRESHOLD,
        }
    }
}

impl ConstraintClassifier for GbtClassifier {
    fn select_rows(&self, features: &[FeatureVector]) -> BTreeSet<usize> {
        crate::learning::predict_useful(&self.model, features, self.threshold)
            .expect("classifier and feature schema agree")
    }
}

#[derive(Clone, Debug)]
pub struct LoopConfig {
    /// Budget for the whole loop.
    pub max_wall_time: Duration,
    /// Per-round separation settings (the separation time limit lives
    /// here).
    pub separation: SeparationConfig,
    pub max_rounds: usize,
    /// Infinity-norm tolerance of the same-point termination check.
    pub same_point_tol: f64,
    /// Known integer optimum; when absent the enumeration oracle is used.
    pub z_integer: Option<f64>,
    /// Box cap handed to the oracle for unbounded integer columns.
    pub oracle_box_cap: u64,
    /// Collect per-round features and labels for training datasets.
    pub collect_training_data: bool,
    /// Cap on cuts added per round; `None` adds the whole pool.
    pub max_cuts_per_round: Option<usize>,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            max_wall_time: Duration::from_secs(3 * 3600),
            separation: SeparationConfig::default(),
            max_rounds: usize::MAX,
            same_point_tol: 1e-9,
            z_integer: None,
            oracle_box_cap: 10,
            collect_training_data: false,
            max_cuts_per_round: None,
        }
    }
}

/// One row of the per-round log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundTrace {
    /// 1-based, contiguous.
    pub round: usize,
    /// The fractional point that was separated (original columns).
    pub point: Point,
    pub cuts_added: usize,
    /// Number of rows the separation was allowed to aggregate.
    pub lambda_rows: usize,
    /// LP objective after adding this round's cuts.
    pub lp_objective: f64,
    pub gap_closed: GapValue,
    pub separation_wall: Duration,
    /// Set on the final round only.
    pub termination: Option<TerminationReason>,
}

/// Everything a loop run produced.
#[derive(Clone, Debug)]
pub struct LoopRun {
    pub traces: Vec<RoundTrace>,
    /// Labeled observations, when collection was enabled.
    pub samples: Vec<LabeledSample>,
    pub z_lp: f64,
    pub z_integer: Option<f64>,
}

impl LoopRun {
    pub fn final_gap(&self) -> GapValue {
        self.traces.last().map(|t| t.gap_closed).unwrap_or(GapValue::Unknown)
    }

    pub fn termination(&self) -> Option<TerminationReason> {
        self.traces.last().and_then(|t| t.termination)
    }
}

/// Runs the cutting loop on an instance, optionally with a classifier.
pub fn run_cutting_loop(
    instance: &MipInstance,
    config: &LoopConfig,
    classifier: Option<&dyn ConstraintClassifier>,
) -> Result<LoopRun, LoopError> {
    let start = Instant::now();
    let root = solve_lp(instance);
    if root.status != LpStatus::Optimal {
        return Err(LoopError::RootLp(root.status));
    }
    let z_lp = root.objective;
    let z_integer = match config.z_integer {
        Some(z) => Some(z),
        None => {
            let bbox = EnumerationBox::from_instance(instance, config.oracle_box_cap);
            match brute_force_optimum(instance, &bbox) {
                Ok((z, _)) => Some(z),
                Err(_) => None,
            }
        }
    };
    let gap_of = |z: f64| -> Result<GapValue, LoopError> {
        match z_integer {
            Some(z_i) => gap_closed(z, z_lp, z_i),
            None => Ok(GapValue::Unknown),
        }
    };

    let num_rows = instance.num_rows();
    let mut working = instance.clone();
    let mut current_point = Point::from_flat(&root.point, instance.num_int());
    let mut current_duals = root.duals;
    let mut current_obj = z_lp;
    let mut traces: Vec<RoundTrace> = Vec::new();
    let mut samples: Vec<LabeledSample> = Vec::new();
    let mut total_cuts = 0usize;
    let mut round = 1usize;

    loop {
        let orig_point = Point {
            x: current_point.x.clone(),
            v: current_point.v[..instance.num_cont()].to_vec(),
        };
        let mut trace = RoundTrace {
            round,
            point: orig_point.clone(),
            cuts_added: 0,
            lambda_rows: 0,
            lp_objective: current_obj,
            gap_closed: gap_of(current_obj)?,
            separation_wall: Duration::ZERO,
            termination: None,
        };

        if start.elapsed() > config.max_wall_time {
            trace.termination = Some(TerminationReason::TimeLimit);
            traces.push(trace);
            break;
        }
        if orig_point.is_integral(INT_TOL) {
            trace.termination = Some(TerminationReason::IntegralPoint);
            traces.push(trace);
            break;
        }

        // features over the original rows (classifier input and dataset)
        let features: Option<Vec<FeatureVector>> =
            if classifier.is_some() || config.collect_training_data {
                let mut all = Vec::with_capacity(num_rows);
                for row in 0..num_rows {
                    all.push(compute_features(
                        instance,
                        &orig_point,
                        &current_duals,
                        row,
                        round,
                        &instance.name,
                    )?);
                }
                Some(all)
            } else {
                None
            };

        let allowed: Option<BTreeSet<usize>> = classifier
            .map(|zeta| zeta.select_rows(features.as_deref().unwrap_or(&[])));
        trace.lambda_rows = allowed.as_ref().map_or(num_rows, |rows| rows.len());
        let sep_config = SeparationConfig {
            allowed_rows: allowed,
            ..config.separation.clone()
        };

        let sep_start = Instant::now();
        let outcome = separate(instance, &orig_point, &sep_config, round)?;
        trace.separation_wall = sep_start.elapsed();

        if let Some(features) = features {
            if config.collect_training_data {
                let labels = label_round(&outcome.solutions, num_rows, LABEL_EPSILON);
                samples.extend(features.into_iter().zip(&labels).map(|(fv, &label)| {
                    LabeledSample { features: fv, label }
                }));
            }
        }

        if outcome.cuts.is_empty() {
            trace.termination = Some(TerminationReason::NoCutFound);
            traces.push(trace);
            break;
        }

        let keep = config.max_cuts_per_round.unwrap_or(usize::MAX);
        for cut in outcome.cuts.iter().take(keep) {
            total_cuts += 1;
            let mut coeffs = cut.flat_coeffs();
            coeffs.resize(working.num_cols(), 0.0);
            working.append_ge_row(format!("cut_{total_cuts}"), &coeffs, cut.rhs);
            trace.cuts_added += 1;
        }

        let lp = solve_lp(&working);
        if lp.status != LpStatus::Optimal {
            return Err(LoopError::CutLp(lp.status));
        }
        let new_point = Point::from_flat(&lp.point, instance.num_int());
        trace.lp_objective = lp.objective;
        trace.gap_closed = gap_of(lp.objective)?;

        let same = {
            let dx = orig_point
                .x
                .iter()
                .zip(&new_point.x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let dv = orig_point
                .v
                .iter()
                .zip(new_point.v.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            dx.max(dv) <= config.same_point_tol
        };

        if same {
            trace.termination = Some(TerminationReason::SamePoint);
            traces.push(trace);
            break;
        }
        if round >= config.max_rounds {
            trace.termination = Some(TerminationReason::MaxRounds);
            traces.push(trace);
            break;
        }
        traces.push(trace);
        current_point = new_point;
        current_duals = lp.duals;
        current_obj = lp.objective;
        round += 1;
    }

    Ok(LoopRun {
        traces,
        samples,
        z_lp,
        z_integer,
    })
}
