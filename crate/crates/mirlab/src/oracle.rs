//! Exact enumeration oracles for tiny instances.
//!
//! These are deliberately brute force and share no code with the simplex
//! or branch-and-bound paths they are used to check: integer assignments
//! are enumerated over a finite box and the continuous restriction
//! `{v >= 0 : Cv = b - Ax}` is handled by enumerating its vertices
//! (basic solutions over column subsets).
//!
//! The continuous costs must make every restriction bounded below;
//! `g >= 0` suffices and holds for all instances built here (slack costs
//! are zero).

use crate::model::{MipInstance, ModelError, Point};

/// Hard cap on enumerated integer lattice points.
pub const LATTICE_CAP: u128 = 1_000_000;
/// Hard cap on basis subsets tried per continuous restriction.
pub const SUBSET_CAP: u128 = 2_000_000;
/// Most integer variables the oracles will accept.
pub const MAX_ENUM_VARS: usize = 20;

const FEAS_TOL: f64 = 1e-7;

/// Inclusive per-variable integer upper bounds for enumeration.
#[derive(Clone, Debug)]
pub struct EnumerationBox(pub Vec<u64>);

impl EnumerationBox {
    pub fn uniform(num_vars: usize, cap: u64) -> Self {
        EnumerationBox(vec![cap; num_vars])
    }

    /// Uses the variable-bound rows of the instance where present and
    /// `default_cap` for integer columns without one.
    pub fn from_instance(instance: &MipInstance, default_cap: u64) -> Self {
        let ubs = instance.var_upper_bounds();
        let bounds = (0..instance.num_int())
            .map(|col| match ubs[col] {
                Some(ub) if ub >= 0.0 => ub.floor() as u64,
                _ => default_cap,
            })
            .collect();
        EnumerationBox(bounds)
    }

    pub fn lattice_points(&self) -> u128 {
        self.0
            .iter()
            .fold(1u128, |acc, &ub| acc.saturating_mul(ub as u128 + 1))
    }
}

fn check_caps(instance: &MipInstance, bbox: &EnumerationBox) -> Result<(), ModelError> {
    if bbox.0.len() != instance.num_int() {
        return Err(ModelError::ShapeError(format!(
            "box length {} does not match {} integer columns",
            bbox.0.len(),
            instance.num_int()
        )));
    }
    if instance.num_int() > MAX_ENUM_VARS {
        return Err(ModelError::EnumerationTooLarge(
            instance.num_int() as u128,
            MAX_ENUM_VARS as u128,
        ));
    }
    let points = bbox.lattice_points();
    if points > LATTICE_CAP {
        return Err(ModelError::EnumerationTooLarge(points, LATTICE_CAP));
    }
    Ok(())
}

fn for_each_assignment(bbox: &EnumerationBox, mut visit: impl FnMut(&[f64])) {
    let n = bbox.0.len();
    let mut counter = vec![0u64; n];
    let mut x = vec![0.0; n];
    loop {
        for i in 0..n {
            x[i] = counter[i] as f64;
        }
        visit(&x);
        let mut pos = 0;
        loop {
            if pos == n {
                return;
            }
            counter[pos] += 1;
            if counter[pos] <= bbox.0[pos] {
                break;
            }
            counter[pos] = 0;
            pos += 1;
        }
    }
}

/// Solves `cols * w = d` for a column subset by Gaussian elimination.
/// Returns `None` when the subset is dependent or the system inconsistent.
fn solve_subset(c_cols: &[Vec<f64>], subset: &[usize], d: &[f64]) -> Option<Vec<f64>> {
    let m = d.len();
    let k = subset.len();
    let mut aug = vec![0.0; m * (k + 1)];
    for (j, &col) in subset.iter().enumerate() {
        for i in 0..m {
            aug[i * (k + 1) + j] = c_cols[col][i];
        }
    }
    for i in 0..m {
        aug[i * (k + 1) + k] = d[i];
    }

    let mut pivot_row_of_col = vec![usize::MAX; k];
    let mut rank = 0;
    for col in 0..k {
        let mut best = rank;
        let mut best_val = 0.0;
        for row in rank..m {
            let val = aug[row * (k + 1) + col].abs();
            if val > best_val {
                best_val = val;
                best = row;
            }
        }
        if best_val <= 1e-10 {
            return None; // dependent columns
        }
        if best != rank {
            for j in 0..=k {
                aug.swap(rank * (k + 1) + j, best * (k + 1) + j);
            }
        }
        let pivot = aug[rank * (k + 1) + col];
        for row in 0..m {
            if row == rank {
                continue;
            }
            let factor = aug[row * (k + 1) + col] / pivot;
            if factor != 0.0 {
                for j in col..=k {
                    aug[row * (k + 1) + j] -= factor * aug[rank * (k + 1) + j];
                }
            }
        }
        pivot_row_of_col[col] = rank;
        rank += 1;
    }
    // consistency of the remaining rows
    for row in rank..m {
        if aug[row * (k + 1) + k].abs() > FEAS_TOL {
            return None;
        }
    }
    let mut w = vec![0.0; k];
    for col in 0..k {
        let row = pivot_row_of_col[col];
        w[col] = aug[row * (k + 1) + k] / aug[row * (k + 1) + col];
    }
    Some(w)
}

fn count_subsets(p: usize, k_max: usize) -> u128 {
    let mut total = 0u128;
    for k in 0..=k_max {
        let mut c = 1u128;
        for i in 0..k {
            c = c.saturating_mul((p - i) as u128) / (i as u128 + 1);
        }
        total = total.saturating_add(c);
    }
    total
}

/// All vertices of `{v >= 0 : Cv = d}` (empty when infeasible).
fn vertex_completions(c_cols: &[Vec<f64>], d: &[f64]) -> Vec<Vec<f64>> {
    let p = c_cols.len();
    let m = d.len();
    let k_max = m.min(p);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut keys: std::collections::HashSet<Vec<i64>> = std::collections::HashSet::new();

    let mut subset = Vec::with_capacity(k_max);
    fn recurse(
        c_cols: &[Vec<f64>],
        d: &[f64],
        start: usize,
        k: usize,
        subset: &mut Vec<usize>,
        found: &mut Vec<Vec<f64>>,
        keys: &mut std::collections::HashSet<Vec<i64>>,
    ) {
        if subset.len() == k {
            if let Some(w) = solve_subset(c_cols, subset, d) {
                if w.iter().all(|&wi| wi >= -1e-9) {
                    let mut v = vec![0.0; c_cols.len()];
                    for (j, &col) in subset.iter().enumerate() {
                        v[col] = w[j].max(0.0);
                    }
                    let key: Vec<i64> = v.iter().map(|&t| (t * 1e9).round() as i64).collect();
                    if keys.insert(key) {
                        found.push(v);
                    }
                }
            }
            return;
        }
        for col in start..c_cols.len() {
            subset.push(col);
            recurse(c_cols, d, col + 1, k, subset, found, keys);
            subset.pop();
        }
    }

    for k in 0..=k_max {
        recurse(c_cols, d, 0, k, &mut subset, &mut found, &mut keys);
    }
    found
}

fn cont_columns(instance: &MipInstance) -> Vec<Vec<f64>> {
    let m = instance.num_rows();
    (0..instance.num_cont())
        .map(|j| (0..m).map(|i| instance.c_row(i)[j]).collect())
        .collect()
}

fn residual(instance: &MipInstance, x: &[f64]) -> Vec<f64> {
    (0..instance.num_rows())
        .map(|row| {
            let ax: f64 = instance.a_row(row).iter().zip(x).map(|(c, v)| c * v).sum();
            instance.rhs()[row] - ax
        })
        .collect()
}

/// Exact mixed-integer optimum by full enumeration.
///
/// Enumerates every integer assignment inside the box and minimizes the
/// continuous part over the vertices of the induced restriction.
pub fn brute_force_optimum(
    instance: &MipInstance,
    bbox: &EnumerationBox,
) -> Result<(f64, Point), ModelError> {
    check_caps(instance, bbox)?;
    let subsets = count_subsets(instance.num_cont(), instance.num_rows().min(instance.num_cont()));
    if subsets > SUBSET_CAP {
        return Err(ModelError::EnumerationTooLarge(subsets, SUBSET_CAP));
    }
    let c_cols = cont_columns(instance);
    let g = instance.cont_costs();
    let f = instance.int_costs();

    let mut best: Option<(f64, Point)> = None;
    for_each_assignment(bbox, |x| {
        let d = residual(instance, x);
        if instance.num_cont() == 0 {
            if d.iter().all(|&r| r.abs() <= FEAS_TOL) {
                let fx: f64 = f.iter().zip(x).map(|(c, v)| c * v).sum();
                if best.as_ref().map_or(true, |(z, _)| fx < *z) {
                    best = Some((fx, Point::new(x.to_vec(), vec![])));
                }
            }
            return;
        }
        for v in vertex_completions(&c_cols, &d) {
            let z: f64 = f.iter().zip(x).map(|(c, t)| c * t).sum::<f64>()
                + g.iter().zip(&v).map(|(c, t)| c * t).sum::<f64>();
            if best.as_ref().map_or(true, |(zb, _)| z < *zb) {
                best = Some((z, Point::new(x.to_vec(), v)));
            }
        }
    });
    best.ok_or(ModelError::Infeasible)
}

/// Every feasible mixed point with integer part inside the box; continuous
/// parts are all vertex completions of the induced restriction.
pub fn enumerate_feasible_points(
    instance: &MipInstance,
    bbox: &EnumerationBox,
) -> Result<Vec<Point>, ModelError> {
    check_caps(instance, bbox)?;
    let subsets = count_subsets(instance.num_cont(), instance.num_rows().min(instance.num_cont()));
    if subsets > SUBSET_CAP {
        return Err(ModelError::EnumerationTooLarge(subsets, SUBSET_CAP));
    }
    let c_cols = cont_columns(instance);
    let mut points = Vec::new();
    for_each_assignment(bbox, |x| {
        let d = residual(instance, x);
        if instance.num_cont() == 0 {
            if d.iter().all(|&r| r.abs() <= FEAS_TOL) {
                points.push(Point::new(x.to_vec(), vec![]));
            }
            return;
        }
        for v in vertex_completions(&c_cols, &d) {
            points.push(Point::new(x.to_vec(), v));
        }
    });
    Ok(points)
}
