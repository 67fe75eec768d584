//! MIP instances in the equality standard form and conversion from
//! general (inequality) form.
//!
//! The standard form is `min f'x + g'v  s.t.  Ax + Cv = b, x,v >= 0` with
//! `x` integer and `v` continuous. Inequality rows are converted by adding
//! one continuous slack column per row, and finite variable upper bounds
//! become explicit rows of the constraint matrix. `row_meta` records the
//! pre-conversion shape of every row so that features and cut recovery can
//! work on the original rows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used everywhere a value is tested for integrality.
pub const INT_TOL: f64 = 1e-6;

/// Errors from instance construction and evaluation.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    ShapeError(String),
    #[error("unsupported variable domain: {0}")]
    UnsupportedVariableDomain(String),
    #[error("non-finite data: {0}")]
    NonFiniteData(String),
    #[error("enumeration box too large: {0} lattice points exceed cap {1}")]
    EnumerationTooLarge(u128, u128),
    #[error("instance is infeasible")]
    Infeasible,
}

/// Sense of a constraint row before conversion to equality form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// A variable of a general-form MIP. Lower bounds other than zero are not
/// representable on purpose; the standard form assumes `x, v >= 0`.
#[derive(Clone, Debug)]
pub struct VarSpec {
    pub name: String,
    pub cost: f64,
    pub integer: bool,
    /// Finite upper bound, converted to a row by [`to_standard_form`].
    pub upper: Option<f64>,
    /// Lower bound; anything other than exactly 0 is rejected.
    pub lower: f64,
}

/// A row of a general-form MIP with sparse coefficients over its variables.
#[derive(Clone, Debug)]
pub struct GeneralRow {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A MIP in general form: variables with optional upper bounds and rows of
/// any sense. This is what the MPS reader produces.
#[derive(Clone, Debug, Default)]
pub struct GeneralMip {
    pub name: String,
    pub vars: Vec<VarSpec>,
    pub rows: Vec<GeneralRow>,
}

impl GeneralMip {
    pub fn new(name: impl Into<String>) -> Self {
        GeneralMip {
            name: name.into(),
            vars: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Adds a variable and returns its index.
    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        cost: f64,
        integer: bool,
        upper: Option<f64>,
    ) -> usize {
        self.vars.push(VarSpec {
            name: name.into(),
            cost,
            integer,
            upper,
            lower: 0.0,
        });
        self.vars.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        self.rows.push(GeneralRow {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
    }
}

/// Per-row origin record kept through the standard-form conversion.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowMeta {
    pub name: String,
    /// Sense of the row before conversion (`Eq` rows stay as they were).
    pub sense: Sense,
    /// Set when this row encodes a variable upper bound; holds the global
    /// column index of the bounded variable.
    pub bound_col: Option<usize>,
    /// Continuous-block index of the slack column added for this row.
    pub slack_col: Option<usize>,
    /// True for rows appended by the cutting loop; such rows are never
    /// featurized or aggregated.
    pub is_cut: bool,
}

/// A MIP in the equality standard form.
///
/// Columns are addressed globally: `0..num_int` are the integer columns
/// (matrix `A`), `num_int..num_int+num_cont` the continuous ones
/// (matrix `C`, including conversion slacks). All variables are bounded
/// below by zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MipInstance {
    pub name: String,
    num_int: usize,
    num_cont: usize,
    /// Dense row-major m x num_int.
    a: Vec<f64>,
    /// Dense row-major m x num_cont.
    c: Vec<f64>,
    b: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    row_meta: Vec<RowMeta>,
    col_names: Vec<String>,
}

impl MipInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        num_int: usize,
        num_cont: usize,
        a: Vec<f64>,
        c: Vec<f64>,
        b: Vec<f64>,
        f: Vec<f64>,
        g: Vec<f64>,
        row_meta: Vec<RowMeta>,
        col_names: Vec<String>,
    ) -> Result<Self, ModelError> {
        let m = b.len();
        if a.len() != m * num_int || c.len() != m * num_cont {
            return Err(ModelError::ShapeError(format!(
                "matrix sizes {}x{} / {}x{} do not match {} rows",
                a.len(),
                num_int,
                c.len(),
                num_cont,
                m
            )));
        }
        if f.len() != num_int || g.len() != num_cont {
            return Err(ModelError::ShapeError(format!(
                "cost vector lengths {}/{} do not match {}/{} columns",
                f.len(),
                g.len(),
                num_int,
                num_cont
            )));
        }
        if row_meta.len() != m {
            return Err(ModelError::ShapeError(format!(
                "row_meta length {} does not match {} rows",
                row_meta.len(),
                m
            )));
        }
        if col_names.len() != num_int + num_cont {
            return Err(ModelError::ShapeError(format!(
                "col_names length {} does not match {} columns",
                col_names.len(),
                num_int + num_cont
            )));
        }
        let all_finite = a.iter().chain(&c).chain(&b).chain(&f).chain(&g).all(|x| x.is_finite());
        if !all_finite {
            return Err(ModelError::NonFiniteData("instance data".into()));
        }
        Ok(MipInstance {
            name: name.into(),
            num_int,
            num_cont,
            a,
            c,
            b,
            f,
            g,
            row_meta,
            col_names,
        })
    }

    pub fn num_int(&self) -> usize {
        self.num_int
    }

    pub fn num_cont(&self) -> usize {
        self.num_cont
    }

    pub fn num_cols(&self) -> usize {
        self.num_int + self.num_cont
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn int_costs(&self) -> &[f64] {
        &self.f
    }

    pub fn cont_costs(&self) -> &[f64] {
        &self.g
    }

    pub fn row_meta(&self) -> &[RowMeta] {
        &self.row_meta
    }

    pub fn col_names(&self) -> &[String] {
        &self.col_names
    }

    /// Coefficient of global column `col` in row `row`.
    pub fn coeff(&self, row: usize, col: usize) -> f64 {
        if col < self.num_int {
            self.a[row * self.num_int + col]
        } else {
            self.c[row * self.num_cont + (col - self.num_int)]
        }
    }

    /// Objective coefficient of global column `col`.
    pub fn cost(&self, col: usize) -> f64 {
        if col < self.num_int {
            self.f[col]
        } else {
            self.g[col - self.num_int]
        }
    }

    pub fn is_integer_col(&self, col: usize) -> bool {
        col < self.num_int
    }

    /// Nonzero coefficients of a row over global column indices.
    pub fn row_nonzeros(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.num_cols();
        (0..n).filter_map(move |col| {
            let val = self.coeff(row, col);
            (val != 0.0).then_some((col, val))
        })
    }

    /// Integer-block row slice (length `num_int`).
    pub fn a_row(&self, row: usize) -> &[f64] {
        &self.a[row * self.num_int..(row + 1) * self.num_int]
    }

    /// Continuous-block row slice (length `num_cont`).
    pub fn c_row(&self, row: usize) -> &[f64] {
        &self.c[row * self.num_cont..(row + 1) * self.num_cont]
    }

    /// True when the continuous column (block index) is a conversion slack.
    pub fn is_slack_cont_col(&self, cont_idx: usize) -> bool {
        self.row_meta.iter().any(|meta| meta.slack_col == Some(cont_idx))
    }

    /// Replaces the objective; lengths must match the column blocks.
    pub fn set_costs(&mut self, int_costs: Vec<f64>, cont_costs: Vec<f64>) {
        assert_eq!(int_costs.len(), self.num_int, "integer cost length");
        assert_eq!(cont_costs.len(), self.num_cont, "continuous cost length");
        self.f = int_costs;
        self.g = cont_costs;
    }

    /// Per-global-column finite upper bounds recovered from bound rows.
    pub fn var_upper_bounds(&self) -> Vec<Option<f64>> {
        let mut ubs = vec![None; self.num_cols()];
        for (row, meta) in self.row_meta.iter().enumerate() {
            if let Some(col) = meta.bound_col {
                let ub = self.b[row];
                match ubs[col] {
                    Some(prev) if prev <= ub => {}
                    _ => ubs[col] = Some(ub),
                }
            }
        }
        ubs
    }

    /// Appends a `>=` cut row (coefficients over the current columns) as an
    /// equality row with a fresh surplus column. Used by the cutting loop;
    /// cut rows are never marked as original rows.
    pub fn append_ge_row(&mut self, name: impl Into<String>, coeffs: &[f64], rhs: f64) {
        assert_eq!(coeffs.len(), self.num_cols(), "cut length mismatch");
        let m = self.num_rows();
        // widen the continuous block by one column
        let new_p = self.num_cont + 1;
        let mut c = Vec::with_capacity((m + 1) * new_p);
        for row in 0..m {
            c.extend_from_slice(self.c_row(row));
            c.push(0.0);
        }
        self.c = c;
        self.num_cont = new_p;
        self.g.push(0.0);
        let name = name.into();
        self.col_names.push(format!("SRP_{name}"));
        // new row
        self.a.extend_from_slice(&coeffs[..self.num_int]);
        for cont in 0..new_p - 1 {
            self.c.push(coeffs[self.num_int + cont]);
        }
        self.c.push(-1.0);
        self.b.push(rhs);
        self.row_meta.push(RowMeta {
            name,
            sense: Sense::Ge,
            bound_col: None,
            slack_col: Some(new_p - 1),
            is_cut: true,
        });
    }

    /// Evaluates a row at a point over the original (pre-slack) columns.
    ///
    /// `dual` is the LP dual of the row when the caller has one.
    pub fn evaluate_row(
        &self,
        row: usize,
        point: &Point,
        dual: Option<f64>,
    ) -> Result<RowView, ModelError> {
        if row >= self.num_rows() {
            return Err(ModelError::ShapeError(format!(
                "row {} out of {} rows",
                row,
                self.num_rows()
            )));
        }
        point.check_dims(self)?;
        let meta = &self.row_meta[row];
        let mut activity = 0.0;
        let mut int_coeffs = Vec::new();
        let mut cont_coeffs = Vec::new();
        for (col, coeff) in self.row_nonzeros(row) {
            if col < self.num_int {
                int_coeffs.push((col, coeff));
                activity += coeff * point.x[col];
            } else {
                let cont_idx = col - self.num_int;
                if self.is_slack_cont_col(cont_idx) {
                    continue;
                }
                cont_coeffs.push((cont_idx, coeff));
                activity += coeff * point.v[cont_idx];
            }
        }
        let rhs = self.b[row];
        let slack = match meta.sense {
            Sense::Le | Sense::Eq => rhs - activity,
            Sense::Ge => activity - rhs,
        };
        Ok(RowView {
            row_index: row,
            int_coeffs,
            cont_coeffs,
            rhs,
            sense: meta.sense,
            activity,
            slack,
            dual,
        })
    }

    /// Objective value of a point.
    pub fn objective_value(&self, point: &Point) -> f64 {
        let fx: f64 = self.f.iter().zip(&point.x).map(|(c, v)| c * v).sum();
        let gv: f64 = self.g.iter().zip(&point.v).map(|(c, v)| c * v).sum();
        fx + gv
    }

    /// Row activity over all columns (slacks included).
    pub fn full_activity(&self, row: usize, point: &Point) -> f64 {
        let ax: f64 = self.a_row(row).iter().zip(&point.x).map(|(c, v)| c * v).sum();
        let cv: f64 = self.c_row(row).iter().zip(&point.v).map(|(c, v)| c * v).sum();
        ax + cv
    }
}

/// A mixed solution candidate: integer part `x`, continuous part `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        Point { x, v }
    }

    pub fn zeros(instance: &MipInstance) -> Self {
        Point {
            x: vec![0.0; instance.num_int()],
            v: vec![0.0; instance.num_cont()],
        }
    }

    pub fn check_dims(&self, instance: &MipInstance) -> Result<(), ModelError> {
        if self.x.len() != instance.num_int() || self.v.len() != instance.num_cont() {
            return Err(ModelError::ShapeError(format!(
                "point dims {}/{} do not match instance {}/{}",
                self.x.len(),
                self.v.len(),
                instance.num_int(),
                instance.num_cont()
            )));
        }
        if !self.x.iter().chain(&self.v).all(|t| t.is_finite()) {
            return Err(ModelError::NonFiniteData("point".into()));
        }
        Ok(())
    }

    /// Value of a global column.
    pub fn value(&self, col: usize) -> f64 {
        if col < self.x.len() {
            self.x[col]
        } else {
            self.v[col - self.x.len()]
        }
    }

    /// Splits a flat column vector into integer and continuous parts.
    pub fn from_flat(flat: &[f64], num_int: usize) -> Self {
        Point {
            x: flat[..num_int].to_vec(),
            v: flat[num_int..].to_vec(),
        }
    }

    /// True when every integer coordinate is within `tol` of an integer.
    pub fn is_integral(&self, tol: f64) -> bool {
        self.x.iter().all(|&t| (t - t.round()).abs() <= tol)
    }
}

/// A row seen through its pre-conversion (original) form at a point.
#[derive(Clone, Debug)]
pub struct RowView {
    pub row_index: usize,
    /// Nonzero coefficients over integer columns.
    pub int_coeffs: Vec<(usize, f64)>,
    /// Nonzero coefficients over original continuous columns (block index).
    pub cont_coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub sense: Sense,
    pub activity: f64,
    /// `rhs - activity` for `<=`/`=` rows, `activity - rhs` for `>=` rows.
    pub slack: f64,
    pub dual: Option<f64>,
}

/// Global column index each general variable receives in standard form:
/// integer variables first in declaration order, then continuous ones.
pub fn standard_column_order(general: &GeneralMip) -> Vec<usize> {
    let num_int = general.vars.iter().filter(|v| v.integer).count();
    let mut order = vec![0usize; general.vars.len()];
    let mut next_int = 0;
    let mut next_cont = num_int;
    for (idx, var) in general.vars.iter().enumerate() {
        if var.integer {
            order[idx] = next_int;
            next_int += 1;
        } else {
            order[idx] = next_cont;
            next_cont += 1;
        }
    }
    order
}

/// Converts a general-form MIP to the equality standard form.
///
/// One continuous slack column is added per inequality row and one row
/// (plus slack) per finite variable upper bound. The optimal value is
/// unchanged by construction. Variables that are unbounded below, or with
/// any nonzero lower bound, are rejected.
pub fn to_standard_form(general: &GeneralMip) -> Result<MipInstance, ModelError> {
    for var in &general.vars {
        if var.lower != 0.0 || !var.lower.is_finite() {
            return Err(ModelError::UnsupportedVariableDomain(format!(
                "variable {} has lower bound {}; only 0 is supported",
                var.name, var.lower
            )));
        }
        if let Some(ub) = var.upper {
            if ub.is_nan() || ub < 0.0 {
                return Err(ModelError::UnsupportedVariableDomain(format!(
                    "variable {} has upper bound {}",
                    var.name, ub
                )));
            }
        }
        if !var.cost.is_finite() {
            return Err(ModelError::NonFiniteData(format!("cost of {}", var.name)));
        }
    }
    for row in &general.rows {
        if !row.rhs.is_finite() || row.coeffs.iter().any(|(_, c)| !c.is_finite()) {
            return Err(ModelError::NonFiniteData(format!("row {}", row.name)));
        }
        if let Some(&(idx, _)) = row.coeffs.iter().find(|(idx, _)| *idx >= general.vars.len()) {
            return Err(ModelError::ShapeError(format!(
                "row {} references variable {} of {}",
                row.name,
                idx,
                general.vars.len()
            )));
        }
    }

    // integer columns first, then continuous, then slacks
    let global_of_var = standard_column_order(general);
    let num_int = general.vars.iter().filter(|v| v.integer).count();
    let num_orig_cont = general.vars.len() - num_int;

    struct PendingRow {
        name: String,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
        bound_col: Option<usize>,
    }
    let mut pending: Vec<PendingRow> = general
        .rows
        .iter()
        .map(|row| PendingRow {
            name: row.name.clone(),
            coeffs: row
                .coeffs
                .iter()
                .map(|&(idx, coeff)| (global_of_var[idx], coeff))
                .collect(),
            sense: row.sense,
            rhs: row.rhs,
            bound_col: None,
        })
        .collect();
    for (idx, var) in general.vars.iter().enumerate() {
        if let Some(ub) = var.upper {
            if ub.is_infinite() {
                continue;
            }
            pending.push(PendingRow {
                name: format!("UB_{}", var.name),
                coeffs: vec![(global_of_var[idx], 1.0)],
                sense: Sense::Le,
                rhs: ub,
                bound_col: Some(global_of_var[idx]),
            });
        }
    }

    let m = pending.len();
    let num_slacks = pending.iter().filter(|r| r.sense != Sense::Eq).count();
    let num_cont = num_orig_cont + num_slacks;

    let mut a = vec![0.0; m * num_int];
    let mut c = vec![0.0; m * num_cont];
    let mut b = vec![0.0; m];
    let mut f = vec![0.0; num_int];
    let mut g = vec![0.0; num_cont];
    let mut col_names = vec![String::new(); num_int + num_cont];
    for (idx, var) in general.vars.iter().enumerate() {
        let col = global_of_var[idx];
        col_names[col] = var.name.clone();
        if var.integer {
            f[col] = var.cost;
        } else {
            g[col - num_int] = var.cost;
        }
    }

    let mut row_meta = Vec::with_capacity(m);
    let mut next_slack = num_orig_cont;
    for (row_idx, row) in pending.iter().enumerate() {
        for &(col, coeff) in &row.coeffs {
            if col < num_int {
                a[row_idx * num_int + col] += coeff;
            } else {
                c[row_idx * num_cont + (col - num_int)] += coeff;
            }
        }
        b[row_idx] = row.rhs;
        let slack_col = match row.sense {
            Sense::Eq => None,
            Sense::Le | Sense::Ge => {
                let slack = next_slack;
                next_slack += 1;
                let sign = if row.sense == Sense::Le { 1.0 } else { -1.0 };
                c[row_idx * num_cont + slack] = sign;
                col_names[num_int + slack] = format!("SLK_{}", row.name);
                Some(slack)
            }
        };
        row_meta.push(RowMeta {
            name: row.name.clone(),
            sense: row.sense,
            bound_col: row.bound_col,
            slack_col,
            is_cut: false,
        });
    }

    MipInstance::new(
        general.name.clone(),
        num_int,
        num_cont,
        a,
        c,
        b,
        f,
        g,
        row_meta,
        col_names,
    )
}
