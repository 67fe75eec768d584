//! Exact MIR cut separation.
//!
//! Given an instance `min f'x + g'v : Ax + Cv = b, x,v >= 0` and a
//! fractional point `(x*, v*)`, the separation MIP searches for an
//! aggregation vector `lambda` and rounding data such that the cut
//!
//! ```text
//! c+ v + alpha_hat x + beta_hat * alpha_bar x >= beta_hat (beta_bar + 1)
//! ```
//!
//! is valid and (approximately) maximally violated at the point. The
//! violation is underestimated through a binary-expansion device: the
//! objective rewards `sum_k eps_k Delta_k` with `eps_k = 2^-k`, each
//! `Delta_k` capped by both the rounding gap `Delta` and an indicator
//! `pi_k` that spends `eps_k` of `beta_hat`.
//!
//! The separation MIP is itself expressed in the equality standard form so
//! the in-crate branch-and-bound can solve it. Sign-free quantities are
//! shifted into nonnegative ranges; every shift lives in the model layout
//! and is undone on extraction. Every improving incumbent of the solve
//! becomes one cut in the pool.

use std::collections::BTreeSet;
use std::time::Duration;

use thiserror::Error;

use crate::model::{
    standard_column_order, to_standard_form, GeneralMip, MipInstance, ModelError, Point, Sense,
};
use crate::oracle::{enumerate_feasible_points, EnumerationBox};
use crate::solver::{solve_mip, MipStatus, SolveError, SolverConfig};

/// Residual tolerance when accepting a separation solution.
pub const SOLUTION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SepError {
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("invalid separation config: {0}")]
    ConfigError(String),
    #[error("solution violates the separation model: {0}")]
    InfeasibleSolution(String),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Configuration of one separation solve.
#[derive(Clone, Debug)]
pub struct SeparationConfig {
    /// Number of binary-expansion bits; weights are `2^-k` for `k=1..=K`.
    pub num_eps: usize,
    /// Symmetric bound `L` on every aggregation multiplier.
    pub lambda_bound: f64,
    pub time_limit: Duration,
    pub node_limit: u64,
    /// Incumbents with approximate violation at or below this are dropped.
    pub violation_cutoff: f64,
    /// Rows allowed to carry a nonzero multiplier; `None` means all.
    pub allowed_rows: Option<BTreeSet<usize>>,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig {
            num_eps: 6,
            lambda_bound: 1.0,
            time_limit: Duration::from_secs(600),
            node_limit: 1_000_000,
            violation_cutoff: 1e-4,
            allowed_rows: None,
        }
    }
}

impl SeparationConfig {
    pub fn epsilon_weights(&self) -> Vec<f64> {
        (1..=self.num_eps).map(|k| 0.5f64.powi(k as i32)).collect()
    }

    pub fn validate(&self) -> Result<(), SepError> {
        if self.num_eps == 0 {
            return Err(SepError::ConfigError("need at least one epsilon bit".into()));
        }
        if !(self.lambda_bound > 0.0) || !self.lambda_bound.is_finite() {
            return Err(SepError::ConfigError("lambda bound must be positive".into()));
        }
        if self.violation_cutoff < 0.0 {
            return Err(SepError::ConfigError("violation cutoff must be >= 0".into()));
        }
        Ok(())
    }

    pub fn with_allowed_rows(mut self, rows: BTreeSet<usize>) -> Self {
        self.allowed_rows = Some(rows);
        self
    }
}

/// A feasible point of the separation MIP, in unshifted coordinates.
#[derive(Clone, Debug)]
pub struct SeparationSolution {
    pub lambda: Vec<f64>,
    pub c_plus: Vec<f64>,
    pub alpha_hat: Vec<f64>,
    pub alpha_bar: Vec<i64>,
    pub beta_hat: f64,
    pub beta_bar: i64,
    pub pi: Vec<bool>,
    pub delta: f64,
    pub delta_k: Vec<f64>,
    /// Approximate violation: `sum_k eps_k Delta_k - (c+ v* + alpha_hat x*)`.
    pub objective: f64,
}

impl SeparationSolution {
    /// The all-zero solution (always feasible, objective zero).
    pub fn zero(num_rows: usize, num_int: usize, num_cont: usize, num_eps: usize) -> Self {
        SeparationSolution {
            lambda: vec![0.0; num_rows],
            c_plus: vec![0.0; num_cont],
            alpha_hat: vec![0.0; num_int],
            alpha_bar: vec![0; num_int],
            beta_hat: 0.0,
            beta_bar: 0,
            pi: vec![false; num_eps],
            delta: 1.0,
            delta_k: vec![0.0; num_eps],
            objective: 0.0,
        }
    }

    /// Rows with a multiplier above the threshold in absolute value.
    pub fn lambda_support(&self, eps: f64) -> BTreeSet<usize> {
        self.lambda
            .iter()
            .enumerate()
            .filter(|(_, l)| l.abs() > eps)
            .map(|(j, _)| j)
            .collect()
    }
}

/// A MIR cut over the columns of the originating instance, sense `>=`.
#[derive(Clone, Debug)]
pub struct MirCut {
    /// Coefficients of the continuous columns (`c+`).
    pub coeff_v: Vec<f64>,
    /// Coefficients of the integer columns (`alpha_hat + beta_hat alpha_bar`).
    pub coeff_x: Vec<f64>,
    /// Right-hand side (`beta_hat (beta_bar + 1)`).
    pub rhs: f64,
    /// Aggregation vector the cut came from.
    pub lambda: Vec<f64>,
    /// Separation round the cut was found in.
    pub round: usize,
}

impl MirCut {
    /// Flat coefficient vector over all instance columns.
    pub fn flat_coeffs(&self) -> Vec<f64> {
        let mut flat = self.coeff_x.clone();
        flat.extend_from_slice(&self.coeff_v);
        flat
    }

    fn dedup_key(&self) -> Vec<i64> {
        let mut vals = self.flat_coeffs();
        vals.push(self.rhs);
        let max_abs = self
            .flat_coeffs()
            .iter()
            .fold(0.0f64, |acc, &c| acc.max(c.abs()));
        let scale = if max_abs > 1e-12 { max_abs } else { 1.0 };
        vals.iter().map(|&v| (v / scale * 1e9).round() as i64).collect()
    }
}

/// Violation of a cut at a point: positive means the point is cut off.
pub fn true_violation(cut: &MirCut, point: &Point) -> Result<f64, SepError> {
    if cut.coeff_x.len() != point.x.len() || cut.coeff_v.len() != point.v.len() {
        return Err(SepError::ShapeError(format!(
            "cut over {}/{} columns vs point {}/{}",
            cut.coeff_x.len(),
            cut.coeff_v.len(),
            point.x.len(),
            point.v.len()
        )));
    }
    let lhs: f64 = cut.coeff_x.iter().zip(&point.x).map(|(c, x)| c * x).sum::<f64>()
        + cut.coeff_v.iter().zip(&point.v).map(|(c, v)| c * v).sum::<f64>();
    Ok(cut.rhs - lhs)
}

/// Column layout of the separation MIP in its standard form.
#[derive(Clone, Debug)]
struct Layout {
    lambda: Vec<usize>,
    c_plus: Vec<usize>,
    alpha_hat: Vec<usize>,
    alpha_bar: Vec<usize>,
    beta_hat: usize,
    beta_bar: usize,
    pi: Vec<usize>,
    delta: usize,
    delta_k: Vec<usize>,
}

/// The separation MIP for one (instance, point, config) triple.
#[derive(Clone, Debug)]
pub struct SeparationModel {
    mip: MipInstance,
    layout: Layout,
    orig: MipInstance,
    point: Point,
    eps: Vec<f64>,
    lambda_bound: f64,
    shift_alpha: Vec<f64>,
    shift_beta: f64,
    shift_delta: f64,
    /// Approximate violation = `-solver_objective + objective_offset`.
    objective_offset: f64,
    structural_cols: usize,
}

impl SeparationModel {
    /// The standard-form MIP to hand to the solver.
    pub fn mip(&self) -> &MipInstance {
        &self.mip
    }

    /// Structural (non-slack) column count of the model.
    pub fn structural_columns(&self) -> usize {
        self.structural_cols
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    /// Approximate violation encoded by a solver objective value.
    pub fn violation_of_objective(&self, solver_objective: f64) -> f64 {
        -solver_objective + self.objective_offset
    }

    /// Maps a solver point on the model back to unshifted quantities.
    pub fn extract_solution(&self, point: &Point) -> Result<SeparationSolution, SepError> {
        point.check_dims(&self.mip).map_err(SepError::Model)?;
        let val = |col: usize| point.value(col);
        let lambda: Vec<f64> = self
            .layout
            .lambda
            .iter()
            .map(|&c| val(c) - self.lambda_bound)
            .collect();
        let c_plus: Vec<f64> = self.layout.c_plus.iter().map(|&c| val(c)).collect();
        let alpha_hat: Vec<f64> = self.layout.alpha_hat.iter().map(|&c| val(c)).collect();
        let alpha_bar: Vec<i64> = self
            .layout
            .alpha_bar
            .iter()
            .zip(&self.shift_alpha)
            .map(|(&c, &shift)| (val(c) - shift).round() as i64)
            .collect();
        let beta_hat = val(self.layout.beta_hat);
        let beta_bar = (val(self.layout.beta_bar) - self.shift_beta).round() as i64;
        let pi: Vec<bool> = self.layout.pi.iter().map(|&c| val(c).round() >= 1.0).collect();
        let delta = val(self.layout.delta) - self.shift_delta;
        let delta_k: Vec<f64> = self
            .layout
            .delta_k
            .iter()
            .map(|&c| val(c) - self.shift_delta)
            .collect();

        let eps_term: f64 = self.eps.iter().zip(&delta_k).map(|(e, d)| e * d).sum();
        let cost_term: f64 = c_plus.iter().zip(&self.point.v).map(|(c, v)| c * v).sum::<f64>()
            + alpha_hat.iter().zip(&self.point.x).map(|(a, x)| a * x).sum::<f64>();
        Ok(SeparationSolution {
            lambda,
            c_plus,
            alpha_hat,
            alpha_bar,
            beta_hat,
            beta_bar,
            pi,
            delta,
            delta_k,
            objective: eps_term - cost_term,
        })
    }

    /// Residuals of the separation constraints for a candidate solution.
    /// Returns the worst violation together with a description.
    fn worst_residual(&self, sol: &SeparationSolution) -> (f64, String) {
        let m = self.orig.num_rows();
        let n = self.orig.num_int();
        let p = self.orig.num_cont();
        let mut worst = (0.0f64, String::from("feasible"));
        let mut bump = |value: f64, what: String| {
            if value > worst.0 {
                worst = (value, what);
            }
        };

        let mut lam_a = vec![0.0; n];
        let mut lam_c = vec![0.0; p];
        let mut lam_b = 0.0;
        for row in 0..m {
            let l = sol.lambda[row];
            if l == 0.0 {
                continue;
            }
            for (j, item) in lam_a.iter_mut().enumerate() {
                *item += l * self.orig.a_row(row)[j];
            }
            for (j, item) in lam_c.iter_mut().enumerate() {
                *item += l * self.orig.c_row(row)[j];
            }
            lam_b += l * self.orig.rhs()[row];
        }

        for j in 0..p {
            bump(lam_c[j] - sol.c_plus[j], format!("c+[{j}] >= lambda C"));
            bump(-sol.c_plus[j], format!("c+[{j}] >= 0"));
        }
        for i in 0..n {
            bump(
                lam_a[i] - (sol.alpha_hat[i] + sol.alpha_bar[i] as f64),
                format!("alpha_hat[{i}] + alpha_bar[{i}] >= lambda A"),
            );
            bump(-sol.alpha_hat[i], format!("alpha_hat[{i}] >= 0"));
            bump(sol.alpha_hat[i] - 1.0, format!("alpha_hat[{i}] <= 1"));
        }
        bump(
            (sol.beta_hat + sol.beta_bar as f64) - lam_b,
            "beta_hat + beta_bar <= lambda b".into(),
        );
        bump(-sol.beta_hat, "beta_hat >= 0".into());
        bump(sol.beta_hat - 1.0, "beta_hat <= 1".into());
        let eps_pi: f64 = self
            .eps
            .iter()
            .zip(&sol.pi)
            .map(|(e, &p)| if p { *e } else { 0.0 })
            .sum();
        bump(eps_pi - sol.beta_hat, "beta_hat >= sum eps_k pi_k".into());
        let alpha_x: f64 = sol
            .alpha_bar
            .iter()
            .zip(&self.point.x)
            .map(|(&a, x)| a as f64 * x)
            .sum();
        let delta_def = (sol.beta_bar as f64 + 1.0) - alpha_x;
        bump((sol.delta - delta_def).abs(), "Delta definition".into());
        for k in 0..self.eps.len() {
            bump(sol.delta_k[k] - sol.delta, format!("Delta_{k} <= Delta"));
            let pi_val = if sol.pi[k] { 1.0 } else { 0.0 };
            bump(sol.delta_k[k] - pi_val, format!("Delta_{k} <= pi_{k}"));
        }
        worst
    }

    /// Turns a feasible separation solution into the MIR cut it encodes.
    pub fn recover_cut(&self, sol: &SeparationSolution, round: usize) -> Result<MirCut, SepError> {
        let (residual, what) = self.worst_residual(sol);
        if residual > SOLUTION_TOL {
            return Err(SepError::InfeasibleSolution(format!(
                "{what} violated by {residual:.3e}"
            )));
        }
        let coeff_x: Vec<f64> = sol
            .alpha_hat
            .iter()
            .zip(&sol.alpha_bar)
            .map(|(hat, &bar)| hat + sol.beta_hat * bar as f64)
            .collect();
        Ok(MirCut {
            coeff_v: sol.c_plus.clone(),
            coeff_x,
            rhs: sol.beta_hat * (sol.beta_bar as f64 + 1.0),
            lambda: sol.lambda.clone(),
            round,
        })
    }
}

/// Builds the separation MIP for an instance and a fractional point.
pub fn build_separation_model(
    instance: &MipInstance,
    point: &Point,
    config: &SeparationConfig,
) -> Result<SeparationModel, SepError> {
    config.validate()?;
    point.check_dims(instance).map_err(SepError::Model)?;
    if let Some(allowed) = &config.allowed_rows {
        if let Some(&row) = allowed.iter().find(|&&r| r >= instance.num_rows()) {
            return Err(SepError::ShapeError(format!(
                "allowed row {row} out of {} rows",
                instance.num_rows()
            )));
        }
    }

    let m = instance.num_rows();
    let n = instance.num_int();
    let p = instance.num_cont();
    let eps = config.epsilon_weights();
    let num_eps = eps.len();
    let lam_bound = config.lambda_bound;

    // box constants for the shifted integer quantities
    let shift_alpha: Vec<f64> = (0..n)
        .map(|i| {
            let col_abs: f64 = (0..m).map(|row| instance.a_row(row)[i].abs()).sum();
            (lam_bound * col_abs).ceil() + 1.0
        })
        .collect();
    let b_abs: f64 = instance.rhs().iter().map(|b| b.abs()).sum();
    let shift_beta = (lam_bound * b_abs).ceil() + 1.0;
    let alpha_x: f64 = shift_alpha.iter().zip(&point.x).map(|(s, x)| s * x).sum();
    let shift_delta = (shift_beta + 1.0 + alpha_x).ceil() + 1.0;

    let mut gen = GeneralMip::new(format!("mirsep_{}", instance.name));
    // variable groups, declared in the order of the formulation
    let lambda: Vec<usize> = (0..m)
        .map(|j| gen.add_var(format!("lam{j}"), 0.0, false, Some(2.0 * lam_bound)))
        .collect();
    let c_plus: Vec<usize> = (0..p)
        .map(|i| gen.add_var(format!("cp{i}"), point.v[i], false, None))
        .collect();
    let alpha_hat: Vec<usize> = (0..n)
        .map(|i| gen.add_var(format!("ah{i}"), point.x[i], false, Some(1.0)))
        .collect();
    let alpha_bar: Vec<usize> = (0..n)
        .map(|i| gen.add_var(format!("ab{i}"), 0.0, true, Some(2.0 * shift_alpha[i])))
        .collect();
    let beta_hat = gen.add_var("bh", 0.0, false, Some(1.0));
    let beta_bar = gen.add_var("bb", 0.0, true, Some(2.0 * shift_beta));
    let pi: Vec<usize> = (0..num_eps)
        .map(|k| gen.add_var(format!("pi{k}"), 0.0, true, Some(1.0)))
        .collect();
    let delta = gen.add_var("dl", 0.0, false, None);
    let delta_k: Vec<usize> = (0..num_eps)
        .map(|k| gen.add_var(format!("dk{k}"), -eps[k], false, None))
        .collect();
    let structural_cols = gen.vars.len();

    // cut coefficient domination: c+ >= lambda C, in shifted multipliers
    for i in 0..p {
        let mut coeffs = vec![(c_plus[i], 1.0)];
        let mut colsum = 0.0;
        for row in 0..m {
            let c = instance.c_row(row)[i];
            if c != 0.0 {
                coeffs.push((lambda[row], -c));
                colsum += c;
            }
        }
        gen.add_row(format!("dom_c{i}"), coeffs, Sense::Ge, -lam_bound * colsum);
    }
    // rounding cover: alpha_hat + alpha_bar >= lambda A
    for i in 0..n {
        let mut coeffs = vec![(alpha_hat[i], 1.0), (alpha_bar[i], 1.0)];
        let mut colsum = 0.0;
        for row in 0..m {
            let a = instance.a_row(row)[i];
            if a != 0.0 {
                coeffs.push((lambda[row], -a));
                colsum += a;
            }
        }
        gen.add_row(
            format!("dom_a{i}"),
            coeffs,
            Sense::Ge,
            shift_alpha[i] - lam_bound * colsum,
        );
    }
    // rhs rounding: beta_hat + beta_bar <= lambda b
    {
        let mut coeffs = vec![(beta_hat, 1.0), (beta_bar, 1.0)];
        let mut bsum = 0.0;
        for row in 0..m {
            let b = instance.rhs()[row];
            if b != 0.0 {
                coeffs.push((lambda[row], -b));
                bsum += b;
            }
        }
        gen.add_row("dom_b", coeffs, Sense::Le, shift_beta - lam_bound * bsum);
    }
    // beta_hat pays for the bits it uses
    {
        let mut coeffs = vec![(beta_hat, 1.0)];
        for k in 0..num_eps {
            coeffs.push((pi[k], -eps[k]));
        }
        gen.add_row("bits", coeffs, Sense::Ge, 0.0);
    }
    // rounding gap: Delta = (beta_bar + 1) - alpha_bar x*
    {
        let mut coeffs = vec![(delta, 1.0), (beta_bar, -1.0)];
        for i in 0..n {
            if point.x[i] != 0.0 {
                coeffs.push((alpha_bar[i], point.x[i]));
            }
        }
        let rhs = shift_delta - shift_beta + 1.0 + alpha_x;
        gen.add_row("gap", coeffs, Sense::Eq, rhs);
    }
    // each bit is capped by the gap and by its indicator
    for k in 0..num_eps {
        gen.add_row(
            format!("cap_gap{k}"),
            vec![(delta_k[k], 1.0), (delta, -1.0)],
            Sense::Le,
            0.0,
        );
        gen.add_row(
            format!("cap_bit{k}"),
            vec![(delta_k[k], 1.0), (pi[k], -1.0)],
            Sense::Le,
            shift_delta,
        );
    }
    // rows outside the allowed set have their multiplier pinned to zero
    if let Some(allowed) = &config.allowed_rows {
        for j in 0..m {
            if !allowed.contains(&j) {
                gen.add_row(format!("pin{j}"), vec![(lambda[j], 1.0)], Sense::Eq, lam_bound);
            }
        }
    }

    let mip = to_standard_form(&gen).map_err(SepError::Model)?;
    let order = standard_column_order(&gen);
    let eps_total: f64 = eps.iter().sum();
    let layout = Layout {
        lambda: lambda.iter().map(|&v| order[v]).collect(),
        c_plus: c_plus.iter().map(|&v| order[v]).collect(),
        alpha_hat: alpha_hat.iter().map(|&v| order[v]).collect(),
        alpha_bar: alpha_bar.iter().map(|&v| order[v]).collect(),
        beta_hat: order[beta_hat],
        beta_bar: order[beta_bar],
        pi: pi.iter().map(|&v| order[v]).collect(),
        delta: order[delta],
        delta_k: delta_k.iter().map(|&v| order[v]).collect(),
    };
    Ok(SeparationModel {
        mip,
        layout,
        orig: instance.clone(),
        point: point.clone(),
        eps,
        lambda_bound: lam_bound,
        shift_alpha,
        shift_beta,
        shift_delta,
        objective_offset: -shift_delta * eps_total,
        structural_cols,
    })
}

/// Everything one separation solve produced.
#[derive(Clone, Debug)]
pub struct SeparationOutcome {
    /// Deduplicated cut pool, one entry per kept incumbent.
    pub cuts: Vec<MirCut>,
    /// The separation solutions behind `cuts`, index-aligned.
    pub solutions: Vec<SeparationSolution>,
    pub solver_status: Option<MipStatus>,
    pub node_count: u64,
}

impl SeparationOutcome {
    fn empty() -> Self {
        SeparationOutcome {
            cuts: Vec::new(),
            solutions: Vec::new(),
            solver_status: None,
            node_count: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// The pool entry with the largest approximate violation.
    pub fn best(&self) -> Option<(&MirCut, &SeparationSolution)> {
        self.solutions
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.objective.total_cmp(&b.objective))
            .map(|(idx, sol)| (&self.cuts[idx], sol))
    }
}

/// Runs one separation solve and maps the incumbent pool to cuts.
///
/// Returns an empty outcome when the point is already integral, when no
/// row may carry a multiplier, or when no incumbent clears the violation
/// cutoff.
pub fn separate(
    instance: &MipInstance,
    point: &Point,
    config: &SeparationConfig,
    round: usize,
) -> Result<SeparationOutcome, SepError> {
    point.check_dims(instance).map_err(SepError::Model)?;
    if point.is_integral(crate::model::INT_TOL) {
        return Ok(SeparationOutcome::empty());
    }
    if matches!(&config.allowed_rows, Some(rows) if rows.is_empty()) {
        return Ok(SeparationOutcome::empty());
    }

    let model = build_separation_model(instance, point, config)?;
    let solver_config = SolverConfig {
        time_limit: config.time_limit,
        node_limit: config.node_limit,
        objective_cutoff: Some(model.objective_offset() - config.violation_cutoff),
        ..SolverConfig::default()
    };
    let result = solve_mip(model.mip(), &solver_config, None)?;

    let mut outcome = SeparationOutcome {
        cuts: Vec::new(),
        solutions: Vec::new(),
        solver_status: Some(result.status),
        node_count: result.node_count,
    };
    // identical cuts can appear under several solutions that differ only in
    // the approximation bits; keep the best-objective representative
    let mut seen: std::collections::BTreeMap<Vec<i64>, usize> = std::collections::BTreeMap::new();
    for incumbent in &result.pool {
        let sol = model.extract_solution(&incumbent.point)?;
        if sol.objective <= config.violation_cutoff {
            continue;
        }
        let cut = model.recover_cut(&sol, round)?;
        match seen.get(&cut.dedup_key()) {
            Some(&idx) => {
                if sol.objective > outcome.solutions[idx].objective {
                    outcome.cuts[idx] = cut;
                    outcome.solutions[idx] = sol;
                }
            }
            None => {
                seen.insert(cut.dedup_key(), outcome.cuts.len());
                outcome.cuts.push(cut);
                outcome.solutions.push(sol);
            }
        }
    }
    Ok(outcome)
}

/// Oracle validity check: does every enumerated feasible point of the
/// instance satisfy the cut?
pub fn validate_cut(
    cut: &MirCut,
    instance: &MipInstance,
    bbox: &EnumerationBox,
) -> Result<bool, ModelError> {
    let points = enumerate_feasible_points(instance, bbox)?;
    for point in &points {
        let lhs: f64 = cut.coeff_x.iter().zip(&point.x).map(|(c, x)| c * x).sum::<f64>()
            + cut.coeff_v.iter().zip(&point.v).map(|(c, v)| c * v).sum::<f64>();
        if lhs < cut.rhs - SOLUTION_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
