//! Dense bounded-variable two-phase primal simplex.
//!
//! Solves `min c'z : Mz = rhs, l <= z <= u` with finite lower bounds and
//! possibly infinite upper bounds. The basis inverse is kept explicitly
//! and refactorized periodically. Pricing is Dantzig with lowest-index
//! tie-breaks; after a long degenerate stretch the rule switches to Bland
//! until the objective moves again, which guarantees termination.

use crate::model::MipInstance;

const ENTER_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
const PHASE1_TOL: f64 = 1e-7;
const REFACTOR_EVERY: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP solve over the instance columns.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Values for every structural column (integer block then continuous).
    pub point: Vec<f64>,
    pub objective: f64,
    /// One dual per row.
    pub duals: Vec<f64>,
    /// Reduced cost per structural column at the final basis.
    pub reduced_costs: Vec<f64>,
    /// Basic column per row; artificial slots hold `num_cols + row`.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

impl LpSolution {
    fn empty(status: LpStatus, objective: f64) -> Self {
        LpSolution {
            status,
            point: Vec::new(),
            objective,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            basis: Vec::new(),
            iterations: 0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    /// Structural plus artificial columns, each of length `m`.
    cols: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    state: Vec<ColState>,
    /// Value per column; basic entries are refreshed from the basis solve.
    values: Vec<f64>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    iterations: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    Moved { improved: bool },
}

impl Tableau {
    fn new(cols: Vec<Vec<f64>>, lower: Vec<f64>, upper: Vec<f64>, rhs: Vec<f64>) -> Self {
        let m = rhs.len();
        let num_structural = cols.len();
        let mut all_cols = cols;
        let mut all_lower = lower;
        let mut all_upper = upper;
        let mut values = vec![0.0; num_structural];
        for j in 0..num_structural {
            values[j] = all_lower[j];
        }
        // residual decides the sign of each artificial column
        let mut resid = rhs.clone();
        for (j, col) in all_cols.iter().enumerate() {
            let val = values[j];
            if val != 0.0 {
                for i in 0..m {
                    resid[i] -= col[i] * val;
                }
            }
        }
        let mut basis = Vec::with_capacity(m);
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            let sign = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
            let mut art = vec![0.0; m];
            art[i] = sign;
            all_cols.push(art);
            all_lower.push(0.0);
            all_upper.push(f64::INFINITY);
            values.push(resid[i].abs());
            basis.push(num_structural + i);
            binv[i * m + i] = sign;
        }
        let mut state = vec![ColState::AtLower; num_structural];
        state.extend(vec![ColState::Basic; m]);
        // structural columns with equal bounds can never move
        for j in 0..num_structural {
            if all_lower[j] > all_upper[j] {
                // infeasible box; keep going, phase 1 will report it
                all_upper[j] = all_lower[j];
            }
        }
        Tableau {
            m,
            cols: all_cols,

            lower: all_lower,
            upper: all_upper,
            rhs,
            state,
            values,
            basis,
            binv,
            iterations: 0,
        }
    }

    fn num_cols(&self) -> usize {
        self.cols.len()
    }

    fn refactorize(&mut self) -> bool {
        let m = self.m;
        // invert the basis matrix by Gauss-Jordan
        let mut aug = vec![0.0; m * 2 * m];
        for (row_pos, &col) in self.basis.iter().enumerate() {
            for i in 0..m {
                aug[i * 2 * m + row_pos] = self.cols[col][i];
            }
        }
        for i in 0..m {
            aug[i * 2 * m + m + i] = 1.0;
        }
        for col in 0..m {
            let mut best = col;
            let mut best_val = aug[col * 2 * m + col].abs();
            for row in col + 1..m {
                let val = aug[row * 2 * m + col].abs();
                if val > best_val {
                    best_val = val;
                    best = row;
                }
            }
            if best_val <= 1e-12 {
                return false;
            }
            if best != col {
                for j in 0..2 * m {
                    aug.swap(col * 2 * m + j, best * 2 * m + j);
                }
            }
            let pivot = aug[col * 2 * m + col];
            for j in 0..2 * m {
                aug[col * 2 * m + j] /= pivot;
            }
            for row in 0..m {
                if row == col {
                    continue;
                }
                let factor = aug[row * 2 * m + col];
                if factor != 0.0 {
                    for j in 0..2 * m {
                        aug[row * 2 * m + j] -= factor * aug[col * 2 * m + j];
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                self.binv[i * m + j] = aug[i * 2 * m + m + j];
            }
        }
        self.refresh_basic_values();
        true
    }

    fn refresh_basic_values(&mut self) {
        let m = self.m;
        let mut resid = self.rhs.clone();
        for j in 0..self.num_cols() {
            if self.state[j] != ColState::Basic {
                let val = self.values[j];
                if val != 0.0 {
                    for i in 0..m {
                        resid[i] -= self.cols[j][i] * val;
                    }
                }
            }
        }
        for row in 0..m {
            let mut val = 0.0;
            for i in 0..m {
                val += self.binv[row * m + i] * resid[i];
            }
            self.values[self.basis[row]] = val;
        }
    }

    fn duals(&self, costs: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for row in 0..m {
            let cb = costs[self.basis[row]];
            if cb != 0.0 {
                for i in 0..m {
                    y[i] += cb * self.binv[row * m + i];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, costs: &[f64], y: &[f64]) -> f64 {
        let mut d = costs[j];
        for i in 0..self.m {
            d -= y[i] * self.cols[j][i];
        }
        d
    }

    fn objective(&self, costs: &[f64]) -> f64 {
        costs
            .iter()
            .zip(&self.values)
            .map(|(c, v)| c * v)
            .sum::<f64>()
    }

    /// One pricing/ratio-test step. `allow` masks columns that may enter.
    fn step(&mut self, costs: &[f64], bland: bool, allow: impl Fn(usize) -> bool) -> StepOutcome {
        let m = self.m;
        let y = self.duals(costs);

        let mut entering: Option<(usize, f64)> = None;
        for j in 0..self.num_cols() {
            if self.state[j] == ColState::Basic || !allow(j) {
                continue;
            }
            if self.upper[j] - self.lower[j] <= 0.0 {
                continue; // fixed
            }
            let d = self.reduced_cost(j, costs, &y);
            let attractive = match self.state[j] {
                ColState::AtLower => d < -ENTER_TOL,
                ColState::AtUpper => d > ENTER_TOL,
                ColState::Basic => false,
            };
            if !attractive {
                continue;
            }
            if bland {
                entering = Some((j, d));
                break;
            }
            match entering {
                Some((_, dbest)) if d.abs() <= dbest.abs() => {}
                _ => entering = Some((j, d)),
            }
        }
        let Some((q, dq)) = entering else {
            return StepOutcome::Optimal;
        };

        // w = Binv * col_q
        let mut w = vec![0.0; m];
        for row in 0..m {
            let mut val = 0.0;
            for i in 0..m {
                val += self.binv[row * m + i] * self.cols[q][i];
            }
            w[row] = val;
        }
        let sigma = if self.state[q] == ColState::AtLower { 1.0 } else { -1.0 };

        // ratio test: entering moves by t >= 0, basics by -sigma * w * t
        let span = self.upper[q] - self.lower[q];
        let mut t_best = span;
        let mut leaving: Option<usize> = None;
        let mut leaving_hits_lower = false;
        let mut leaving_pivot = 0.0;
        for row in 0..m {
            let delta = -sigma * w[row];
            let col = self.basis[row];
            let val = self.values[col];
            let (limit, hits_lower) = if delta < -PIVOT_TOL {
                ((val - self.lower[col]) / -delta, true)
            } else if delta > PIVOT_TOL {
                if self.upper[col].is_infinite() {
                    continue;
                }
                ((self.upper[col] - val) / delta, false)
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let take = if limit < t_best - 1e-12 {
                true
            } else if limit <= t_best + 1e-12 {
                match leaving {
                    None => limit < t_best,
                    Some(lrow) => {
                        if bland {
                            self.basis[row] < self.basis[lrow]
                        } else {
                            let p = w[row].abs();
                            p > leaving_pivot + 1e-12
                                || ((p - leaving_pivot).abs() <= 1e-12
                                    && self.basis[row] < self.basis[lrow])
                        }
                    }
                }
            } else {
                false
            };
            if take {
                t_best = limit.min(t_best);
                leaving = Some(row);
                leaving_hits_lower = hits_lower;
                leaving_pivot = w[row].abs();
            }
        }

        if leaving.is_none() && span.is_infinite() {
            return StepOutcome::Unbounded;
        }
        let improved = t_best > 1e-12 && dq.abs() * t_best > 1e-12;

        match leaving {
            Some(row) => {
                let entering_val = if sigma > 0.0 {
                    self.lower[q] + t_best
                } else {
                    self.upper[q] - t_best
                };
                for r in 0..m {
                    let delta = -sigma * w[r];
                    let col = self.basis[r];
                    self.values[col] += delta * t_best;
                }
                let out_col = self.basis[row];
                self.state[out_col] = if leaving_hits_lower {
                    self.values[out_col] = self.lower[out_col];
                    ColState::AtLower
                } else {
                    self.values[out_col] = self.upper[out_col];
                    ColState::AtUpper
                };
                self.state[q] = ColState::Basic;
                self.values[q] = entering_val;
                self.basis[row] = q;
                // binv update: eliminate column w at the pivot row
                let pivot = w[row];
                for j in 0..m {
                    self.binv[row * m + j] /= pivot;
                }
                for r in 0..m {
                    if r == row || w[r] == 0.0 {
                        continue;
                    }
                    let factor = w[r];
                    for j in 0..m {
                        self.binv[r * m + j] -= factor * self.binv[row * m + j];
                    }
                }
            }
            None => {
                // bound flip: entering jumps to its other bound
                for r in 0..m {
                    let delta = -sigma * w[r];
                    let col = self.basis[r];
                    self.values[col] += delta * t_best;
                }
                self.state[q] = if sigma > 0.0 { ColState::AtUpper } else { ColState::AtLower };
                self.values[q] = if sigma > 0.0 { self.upper[q] } else { self.lower[q] };
            }
        }
        self.iterations += 1;
        if self.iterations % REFACTOR_EVERY == 0 {
            self.refactorize();
        }
        StepOutcome::Moved { improved }
    }

    /// Runs the simplex loop to optimality for the given costs.
    fn optimize(&mut self, costs: &[f64], allow: impl Fn(usize) -> bool + Copy) -> LpStatus {
        let stall_limit = 4 * (self.m + self.num_cols()) + 32;
        let mut stall = 0usize;
        let mut bland = false;
        let iter_cap = 200_000 + 400 * (self.m + self.num_cols());
        let mut local_iters = 0usize;
        loop {
            local_iters += 1;
            if local_iters > iter_cap {
                // should be unreachable with the Bland fallback; bail out
                // with the current point rather than spinning
                return LpStatus::Optimal;
            }
            match self.step(costs, bland, allow) {
                StepOutcome::Optimal => return LpStatus::Optimal,
                StepOutcome::Unbounded => return LpStatus::Unbounded,
                StepOutcome::Moved { improved } => {
                    if improved {
                        stall = 0;
                        bland = false;
                    } else {
                        stall += 1;
                        if stall > stall_limit {
                            bland = true;
                        }
                    }
                }
            }
        }
    }
}

/// Solves a raw dense LP. Columns are given densely (each of length
/// `rhs.len()`); bounds must satisfy `l <= u` with finite `l`.
pub(crate) fn solve_dense(
    cols: Vec<Vec<f64>>,
    costs: &[f64],
    lower: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
) -> LpSolution {
    let num_structural = cols.len();
    for j in 0..num_structural {
        if lower[j] > upper[j] + 1e-12 {
            return LpSolution::empty(LpStatus::Infeasible, f64::INFINITY);
        }
    }
    let mut tab = Tableau::new(cols, lower, upper, rhs);

    // phase 1: drive artificial infeasibility to zero
    let mut phase1_costs = vec![0.0; tab.num_cols()];
    for j in num_structural..tab.num_cols() {
        phase1_costs[j] = 1.0;
    }
    let status = tab.optimize(&phase1_costs, |_| true);
    if status == LpStatus::Unbounded {
        // cannot happen: the phase-1 objective is bounded below by zero
        return LpSolution::empty(LpStatus::Infeasible, f64::INFINITY);
    }
    if tab.objective(&phase1_costs) > PHASE1_TOL {
        return LpSolution::empty(LpStatus::Infeasible, f64::INFINITY);
    }
    // pin artificials at zero for phase 2
    for j in num_structural..tab.num_cols() {
        tab.upper[j] = 0.0;
        if tab.state[j] != ColState::Basic {
            tab.values[j] = 0.0;
            tab.state[j] = ColState::AtLower;
        }
    }

    let mut phase2_costs = vec![0.0; tab.num_cols()];
    phase2_costs[..num_structural].copy_from_slice(costs);
    let status = tab.optimize(&phase2_costs, |j| j < num_structural);
    if status == LpStatus::Unbounded {
        return LpSolution::empty(LpStatus::Unbounded, f64::NEG_INFINITY);
    }

    tab.refactorize();
    let y = tab.duals(&phase2_costs);
    let reduced: Vec<f64> = (0..num_structural)
        .map(|j| tab.reduced_cost(j, &phase2_costs, &y))
        .collect();
    let point: Vec<f64> = tab.values[..num_structural].to_vec();
    let objective = costs.iter().zip(&point).map(|(c, v)| c * v).sum();

    #[cfg(debug_assertions)]
    {
        for (j, &val) in point.iter().enumerate() {
            let lo = tab.lower[j];
            let hi = tab.upper[j];
            debug_assert!(
                val >= lo - 1e-6 && val <= hi + 1e-6,
                "column {j} value {val} outside [{lo}, {hi}]"
            );
            let d = reduced[j];
            if val > lo + 1e-6 && val < hi - 1e-6 {
                debug_assert!(d.abs() <= 1e-6, "interior column {j} has reduced cost {d}");
            } else if (val - lo).abs() <= 1e-6 && (val - hi).abs() > 1e-6 {
                debug_assert!(d >= -1e-6, "column {j} at lower with reduced cost {d}");
            } else if (val - hi).abs() <= 1e-6 && (val - lo).abs() > 1e-6 {
                debug_assert!(d <= 1e-6, "column {j} at upper with reduced cost {d}");
            }
        }
    }

    LpSolution {
        status: LpStatus::Optimal,
        point,
        objective,
        duals: y,
        reduced_costs: reduced,
        basis: tab.basis.clone(),
        iterations: tab.iterations,
    }
}

fn instance_columns(instance: &MipInstance) -> Vec<Vec<f64>> {
    let m = instance.num_rows();
    (0..instance.num_cols())
        .map(|col| (0..m).map(|row| instance.coeff(row, col)).collect())
        .collect()
}

fn instance_costs(instance: &MipInstance) -> Vec<f64> {
    let mut costs = instance.int_costs().to_vec();
    costs.extend_from_slice(instance.cont_costs());
    costs
}

/// Solves the LP relaxation of a standard-form instance.
pub fn solve_lp(instance: &MipInstance) -> LpSolution {
    let n = instance.num_cols();
    solve_lp_bounded(instance, &vec![0.0; n], &vec![f64::INFINITY; n])
}

/// LP relaxation with explicit per-column bounds (used by branch-and-bound).
pub fn solve_lp_bounded(instance: &MipInstance, lower: &[f64], upper: &[f64]) -> LpSolution {
    assert_eq!(lower.len(), instance.num_cols());
    assert_eq!(upper.len(), instance.num_cols());
    solve_dense(
        instance_columns(instance),
        &instance_costs(instance),
        lower.to_vec(),
        upper.to_vec(),
        instance.rhs().to_vec(),
    )
}
