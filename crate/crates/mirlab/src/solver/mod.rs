//! Desk-scale LP and MIP solving.
//!
//! The LP path is a dense bounded-variable two-phase simplex with Dantzig
//! pricing and a Bland fallback on degeneracy; the MIP path is
//! branch-and-bound with best-bound node selection and most-fractional
//! branching. Everything is deterministic: ties are broken by lowest
//! index, so two runs with the same inputs produce identical node counts
//! and solution pools.

mod branch_bound;
mod simplex;

pub use branch_bound::{solve_mip, Incumbent, MipSolveResult, MipStatus};
pub use simplex::{solve_lp, solve_lp_bounded, LpSolution, LpStatus};

use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    ConfigError(String),
    #[error("LP relaxation is unbounded")]
    Unbounded,
    #[error("shape mismatch: {0}")]
    ShapeError(String),
}

/// Knobs for [`solve_mip`]. The defaults mirror a ten-minute separation
/// budget; tests and the CLI override them.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub time_limit: Duration,
    pub feasibility_tol: f64,
    pub integrality_tol: f64,
    /// Nodes whose LP bound is within this of the incumbent are pruned.
    pub optimality_gap: f64,
    pub node_limit: u64,
    /// Seed reserved for tie-breaking; the default rules are already
    /// deterministic, so this only matters for alternative strategies.
    pub seed: u64,
    /// Minimization cutoff: only solutions strictly below this value are
    /// recorded as incumbents, and nodes that cannot beat it are pruned.
    pub objective_cutoff: Option<f64>,
    /// Branching box for integer columns without a variable-bound row.
    pub default_box_cap: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            time_limit: Duration::from_secs(600),
            feasibility_tol: 1e-7,
            integrality_tol: 1e-6,
            optimality_gap: 1e-9,
            node_limit: 1_000_000,
            seed: 0,
            objective_cutoff: None,
            default_box_cap: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.time_limit.is_zero() {
            return Err(SolveError::ConfigError("time limit must be positive".into()));
        }
        for (name, tol) in [
            ("feasibility_tol", self.feasibility_tol),
            ("integrality_tol", self.integrality_tol),
            ("optimality_gap", self.optimality_gap),
        ] {
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(SolveError::ConfigError(format!("{name} must be positive")));
            }
        }
        if self.node_limit == 0 {
            return Err(SolveError::ConfigError("node limit must be positive".into()));
        }
        Ok(())
    }
}
