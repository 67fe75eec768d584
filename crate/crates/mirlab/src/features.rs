//! Per-constraint features for the row classifier.
//!
//! Each original (pre-slack) row of an instance, together with a
//! fractional point and the LP duals, maps to a fixed vector of 54
//! features. The layout is frozen under [`FEATURE_SCHEMA_VERSION`]:
//!
//! | group                  | count |
//! |------------------------|-------|
//! | rhs (raw, nonzero)     | 2     |
//! | slack (raw, nonzero)   | 2     |
//! | dual                   | 1     |
//! | degree (all/nz/zero)   | 3     |
//! | sense one-hot          | 2     |
//! | coefficient stats      | 16    |
//! | coefficient/rhs stats  | 16    |
//! | euclidean distance     | 1     |
//! | relative violation     | 1     |
//! | adjusted distance      | 1     |
//! | objective parallelism  | 1     |
//! | cost stats             | 4     |
//! | top-cost counts        | 4     |
//!
//! The four stats subsets are: all row variables, variables nonzero at the
//! point, variables zero at the point, and variables at their finite upper
//! bound at the point. Stats are mean/std/min/max with the empty-subset
//! convention of all zeros. Degenerate divisions (zero rhs, zero norms)
//! map to zero so every feature is finite.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{MipInstance, ModelError, Point, Sense};

pub const FEATURE_COUNT: usize = 54;
pub const FEATURE_SCHEMA_VERSION: &str = "mir-constraint-features-v1";

/// Value threshold for "nonzero at the point".
const POINT_NONZERO_TOL: f64 = 1e-9;
/// Tolerance for "at its upper bound at the point".
const AT_BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("features are defined on original rows only; row {0} is a cut")]
    CutRow(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A featurized (instance, point, row) observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub row_index: usize,
    pub round: usize,
    pub instance_id: String,
}

/// Column names in the frozen feature order, used by CSV exports.
pub fn feature_names() -> Vec<String> {
    let mut names = vec![
        "rhs_raw".to_string(),
        "rhs_nonzero".to_string(),
        "slack_raw".to_string(),
        "slack_nonzero".to_string(),
        "dual".to_string(),
        "degree_all".to_string(),
        "degree_nonzero_at_point".to_string(),
        "degree_zero_at_point".to_string(),
        "sense_le".to_string(),
        "sense_ge".to_string(),
    ];
    let subsets = ["all", "nzpt", "zeropt", "atub"];
    let stats = ["mean", "std", "min", "max"];
    for subset in subsets {
        for stat in stats {
            names.push(format!("coef_{subset}_{stat}"));
        }
    }
    for subset in subsets {
        for stat in stats {
            names.push(format!("ratio_{subset}_{stat}"));
        }
    }
    names.push("euclidean_distance".to_string());
    names.push("relative_violation".to_string());
    names.push("adjusted_distance".to_string());
    names.push("objective_parallelism".to_string());
    for stat in stats {
        names.push(format!("cost_{stat}"));
    }
    for pct in [1, 5, 10, 20] {
        names.push(format!("top_cost_{pct}pct"));
    }
    debug_assert_eq!(names.len(), FEATURE_COUNT);
    names
}

fn stats_of(values: &[f64]) -> [f64; 4] {
    if values.is_empty() {
        return [0.0; 4];
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    [mean, var.sqrt(), min, max]
}

/// Nearest-rank quantile of ascending-sorted data at fraction `p`.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() as f64) * p).ceil() as usize;
    sorted[idx.clamp(1, sorted.len()) - 1]
}

/// Computes the 54 features of one original row at a point.
///
/// `duals` must hold one LP dual per instance row (extra entries from cut
/// rows of an extended LP are fine; only `duals[row]` is read).
pub fn compute_features(
    instance: &MipInstance,
    point: &Point,
    duals: &[f64],
    row: usize,
    round: usize,
    instance_id: &str,
) -> Result<FeatureVector, FeatureError> {
    if row >= instance.num_rows() {
        return Err(FeatureError::ShapeError(format!(
            "row {row} out of {} rows",
            instance.num_rows()
        )));
    }
    if instance.row_meta()[row].is_cut {
        return Err(FeatureError::CutRow(row));
    }
    if duals.len() < instance.num_rows() {
        return Err(FeatureError::ShapeError(format!(
            "{} duals for {} rows",
            duals.len(),
            instance.num_rows()
        )));
    }
    let view = instance.evaluate_row(row, point, Some(duals[row]))?;

    // the row over original columns: (global column, coefficient, value)
    let mut entries: Vec<(usize, f64, f64)> = Vec::new();
    for &(col, coeff) in &view.int_coeffs {
        entries.push((col, coeff, point.x[col]));
    }
    for &(cont_idx, coeff) in &view.cont_coeffs {
        entries.push((instance.num_int() + cont_idx, coeff, point.v[cont_idx]));
    }

    let ubs = instance.var_upper_bounds();
    let nonzero_at: Vec<bool> = entries
        .iter()
        .map(|&(_, _, val)| val.abs() > POINT_NONZERO_TOL)
        .collect();
    let at_ub: Vec<bool> = entries
        .iter()
        .map(|&(col, _, val)| matches!(ubs[col], Some(ub) if (val - ub).abs() <= AT_BOUND_TOL))
        .collect();

    let mut values = Vec::with_capacity(FEATURE_COUNT);
    let rhs = view.rhs;
    values.push(rhs);
    values.push(if rhs != 0.0 { 1.0 } else { 0.0 });
    values.push(view.slack);
    values.push(if view.slack.abs() > POINT_NONZERO_TOL { 1.0 } else { 0.0 });
    values.push(duals[row]);
    // degrees
    let deg_all = entries.len() as f64;
    let deg_nz = nonzero_at.iter().filter(|&&b| b).count() as f64;
    values.push(deg_all);
    values.push(deg_nz);
    values.push(deg_all - deg_nz);
    // sense one-hot; equalities encode as both
    let (le, ge) = match view.sense {
        Sense::Le => (1.0, 0.0),
        Sense::Ge => (0.0, 1.0),
        Sense::Eq => (1.0, 1.0),
    };
    values.push(le);
    values.push(ge);

    // coefficient stats over the four subsets
    let subset_coeffs = |pred: &dyn Fn(usize) -> bool| -> Vec<f64> {
        entries
            .iter()
            .enumerate()
            .filter(|(i, _)| pred(*i))
            .map(|(_, &(_, coeff, _))| coeff)
            .collect()
    };
    let all_coeffs = subset_coeffs(&|_| true);
    let nz_coeffs = subset_coeffs(&|i| nonzero_at[i]);
    let zero_coeffs = subset_coeffs(&|i| !nonzero_at[i]);
    let ub_coeffs = subset_coeffs(&|i| at_ub[i]);
    for coeffs in [&all_coeffs, &nz_coeffs, &zero_coeffs, &ub_coeffs] {
        values.extend(stats_of(coeffs));
    }
    // ratio stats: coefficient over rhs, zero rhs degenerates to zero
    for coeffs in [&all_coeffs, &nz_coeffs, &zero_coeffs, &ub_coeffs] {
        if rhs == 0.0 {
            values.extend([0.0; 4]);
        } else {
            let ratios: Vec<f64> = coeffs.iter().map(|c| c / rhs).collect();
            values.extend(stats_of(&ratios));
        }
    }

    let norm_all: f64 = entries.iter().map(|&(_, c, _)| c * c).sum::<f64>().sqrt();
    let gap = view.activity - rhs;
    values.push(if norm_all > 0.0 { gap.abs() / norm_all } else { 0.0 });
    // relative violation, signed by the original sense
    let rel = if rhs == 0.0 {
        0.0
    } else {
        match view.sense {
            Sense::Le => gap / rhs.abs(),
            Sense::Ge => -gap / rhs.abs(),
            Sense::Eq => gap.abs() / rhs.abs(),
        }
    };
    values.push(rel);
    // adjusted distance: only integer-column coefficients in the norm
    let norm_int: f64 = view.int_coeffs.iter().map(|&(_, c)| c * c).sum::<f64>().sqrt();
    values.push(if norm_int > 0.0 { gap.abs() / norm_int } else { 0.0 });

    // objective parallelism against the full original cost vector
    let orig_cols: Vec<usize> = (0..instance.num_cols())
        .filter(|&col| {
            col < instance.num_int() || !instance.is_slack_cont_col(col - instance.num_int())
        })
        .collect();
    let cost_norm: f64 = orig_cols
        .iter()
        .map(|&col| instance.cost(col) * instance.cost(col))
        .sum::<f64>()
        .sqrt();
    let dot: f64 = entries
        .iter()
        .map(|&(col, coeff, _)| coeff * instance.cost(col))
        .sum();
    values.push(if cost_norm > 0.0 && norm_all > 0.0 {
        (dot.abs() / (cost_norm * norm_all)).min(1.0)
    } else {
        0.0
    });

    // cost stats over the row's variables
    let row_costs: Vec<f64> = entries.iter().map(|&(col, _, _)| instance.cost(col)).collect();
    values.extend(stats_of(&row_costs));

    // top-cost counts over normalized |cost|
    let abs_costs: Vec<f64> = orig_cols.iter().map(|&col| instance.cost(col).abs()).collect();
    let max_cost = abs_costs.iter().cloned().fold(0.0f64, f64::max);
    if max_cost > 0.0 {
        let normalized: Vec<f64> = abs_costs.iter().map(|c| c / max_cost).collect();
        let mut sorted = normalized.clone();
        sorted.sort_by(f64::total_cmp);
        let col_pos: std::collections::HashMap<usize, usize> = orig_cols
            .iter()
            .enumerate()
            .map(|(pos, &col)| (col, pos))
            .collect();
        for q in [0.01, 0.05, 0.10, 0.20] {
            let threshold = quantile(&sorted, 1.0 - q);
            let count = entries
                .iter()
                .filter(|&&(col, _, _)| normalized[col_pos[&col]] >= threshold)
                .count();
            values.push(count as f64);
        }
    } else {
        values.extend([0.0; 4]);
    }

    debug_assert_eq!(values.len(), FEATURE_COUNT);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FeatureError::ShapeError(format!(
            "non-finite feature for row {row}"
        )));
    }
    Ok(FeatureVector {
        values,
        row_index: row,
        round,
        instance_id: instance_id.to_string(),
    })
}
