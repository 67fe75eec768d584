//! Branch-and-bound over the integer columns of a standard-form instance.
//!
//! Best-bound node selection, most-fractional branching with lowest-index
//! ties, floor/ceil bound splits. Every integer-feasible LP solution that
//! strictly improves on the best known objective is appended to the
//! solution pool, so a truncated search still yields usable solutions.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::time::{Duration, Instant};

use super::simplex::{solve_lp_bounded, LpStatus};
use super::{SolveError, SolverConfig};
use crate::model::{MipInstance, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MipStatus {
    /// Search completed; the last pool entry is optimal (subject to the
    /// objective cutoff when one was set).
    Optimal,
    /// Node limit reached with at least one incumbent.
    Feasible,
    /// Search completed without finding any feasible point below the
    /// cutoff.
    Infeasible,
    /// Wall-clock limit reached (or node limit with an empty pool).
    TimeLimit,
}

/// One pool entry: an integer-feasible point and its objective.
#[derive(Clone, Debug)]
pub struct Incumbent {
    pub objective: f64,
    pub point: Point,
}

#[derive(Clone, Debug)]
pub struct MipSolveResult {
    pub status: MipStatus,
    /// All incumbents in discovery order, each strictly better than the
    /// previous one. The best point is the last entry.
    pub pool: Vec<Incumbent>,
    pub node_count: u64,
    pub elapsed: Duration,
}

impl MipSolveResult {
    pub fn best(&self) -> Option<&Incumbent> {
        self.pool.last()
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.pool.last().map(|inc| inc.objective)
    }
}

struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
    bound: f64,
    id: u64,
}

struct HeapEntry {
    node: Box<Node>,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.node.bound == other.node.bound && self.node.id == other.node.id
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want lowest bound first,
        // then lowest id
        other
            .node
            .bound
            .partial_cmp(&self.node.bound)
            .unwrap_or(Ordering::Equal)
            .then(other.node.id.cmp(&self.node.id))
    }
}

/// Branch-and-bound solve. `fixings` forces the listed global columns to
/// zero throughout the search.
pub fn solve_mip(
    instance: &MipInstance,
    config: &SolverConfig,
    fixings: Option<&BTreeSet<usize>>,
) -> Result<MipSolveResult, SolveError> {
    config.validate()?;
    let start = Instant::now();
    let ncols = instance.num_cols();

    let mut lower = vec![0.0; ncols];
    let mut upper = vec![f64::INFINITY; ncols];
    let var_ubs = instance.var_upper_bounds();
    for col in 0..ncols {
        if let Some(ub) = var_ubs[col] {
            upper[col] = ub;
        } else if instance.is_integer_col(col) {
            upper[col] = config.default_box_cap as f64;
        }
    }
    if let Some(fixed) = fixings {
        for &col in fixed {
            if col >= ncols {
                return Err(SolveError::ShapeError(format!(
                    "fixed column {col} out of {ncols} columns"
                )));
            }
            lower[col] = 0.0;
            upper[col] = 0.0;
        }
    }

    let mut pool: Vec<Incumbent> = Vec::new();
    let mut best_obj = config.objective_cutoff.unwrap_or(f64::INFINITY);
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let mut next_id = 0u64;
    let push = |heap: &mut BinaryHeap<HeapEntry>,
                next_id: &mut u64,
                lower: Vec<f64>,
                upper: Vec<f64>,
                bound: f64| {
        let id = *next_id;
        *next_id += 1;
        heap.push(HeapEntry {
            node: Box::new(Node { lower, upper, bound, id }),
        });
    };
    push(&mut heap, &mut next_id, lower, upper, f64::NEG_INFINITY);

    let mut node_count = 0u64;
    let mut status = MipStatus::Infeasible;
    while let Some(HeapEntry { node }) = heap.pop() {
        if node.bound >= best_obj - config.optimality_gap {
            // best-bound order: nothing left can improve
            break;
        }
        if start.elapsed() > config.time_limit {
            status = MipStatus::TimeLimit;
            break;
        }
        if node_count >= config.node_limit {
            status = if pool.is_empty() { MipStatus::TimeLimit } else { MipStatus::Feasible };
            break;
        }
        node_count += 1;

        let lp = solve_lp_bounded(instance, &node.lower, &node.upper);
        match lp.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if node.id == 0 {
                    return Err(SolveError::Unbounded);
                }
                // a restriction of a bounded relaxation cannot be unbounded
                continue;
            }
            LpStatus::Optimal => {}
        }
        if lp.objective >= best_obj - config.optimality_gap {
            continue;
        }

        // most fractional integer column, ties by lowest index
        let mut branch_col = None;
        let mut worst_frac = config.integrality_tol;
        for col in 0..instance.num_int() {
            let val = lp.point[col];
            let frac = (val - val.round()).abs();
            if frac > worst_frac {
                worst_frac = frac;
                branch_col = Some(col);
            }
        }

        match branch_col {
            None => {
                // integer feasible: record an incumbent with snapped x
                let mut flat = lp.point.clone();
                for item in flat.iter_mut().take(instance.num_int()) {
                    *item = item.round();
                }
                let point = Point::from_flat(&flat, instance.num_int());
                let objective = lp.objective;
                if objective < best_obj - config.optimality_gap {
                    best_obj = objective;
                    pool.push(Incumbent { objective, point });
                }
            }
            Some(col) => {
                let val = lp.point[col];
                let floor = val.floor();
                let ceil = val.ceil();
                if floor >= node.lower[col] - 1e-9 {
                    let mut upper = node.upper.clone();
                    upper[col] = floor;
                    push(&mut heap, &mut next_id, node.lower.clone(), upper, lp.objective);
                }
                if ceil <= node.upper[col] + 1e-9 {
                    let mut lower = node.lower.clone();
                    lower[col] = ceil;
                    push(&mut heap, &mut next_id, lower, node.upper.clone(), lp.objective);
                }
            }
        }
    }

    if status == MipStatus::Infeasible && !pool.is_empty() {
        status = MipStatus::Optimal;
    }
    Ok(MipSolveResult {
        status,
        pool,
        node_count,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{to_standard_form, GeneralMip, Sense};
    use crate::oracle::{brute_force_optimum, EnumerationBox};

    fn knapsack() -> MipInstance {
        // min -x1 - x2 : 2x1 + 2x2 <= 3 (integer columns capped by the box)
        let mut gen = GeneralMip::new("knap");
        let x1 = gen.add_var("x1", -1.0, true, None);
        let x2 = gen.add_var("x2", -1.0, true, None);
        gen.add_row("cap", vec![(x1, 2.0), (x2, 2.0)], Sense::Le, 3.0);
        to_standard_form(&gen).unwrap()
    }

    #[test]
    fn knapsack_matches_oracle() {
        let inst = knapsack();
        let result = solve_mip(&inst, &SolverConfig::default(), None).unwrap();
        assert_eq!(result.status, MipStatus::Optimal);
        let best = result.best().unwrap();
        assert!((best.objective - -1.0).abs() < 1e-6);
        assert!((best.point.x[0] + best.point.x[1] - 1.0).abs() < 1e-6);
        let (z, _) = brute_force_optimum(&inst, &EnumerationBox::uniform(2, 10)).unwrap();
        assert!((best.objective - z).abs() < 1e-6);
    }

    #[test]
    fn integral_relaxation_solved_at_root() {
        // min -x : x + s = 2 has an integral LP vertex
        let mut gen = GeneralMip::new("root");
        let x = gen.add_var("x", -1.0, true, None);
        gen.add_row("cap", vec![(x, 1.0)], Sense::Le, 2.0);
        let inst = to_standard_form(&gen).unwrap();
        let result = solve_mip(&inst, &SolverConfig::default(), None).unwrap();
        assert_eq!(result.status, MipStatus::Optimal);
        assert_eq!(result.pool.len(), 1);
        assert_eq!(result.node_count, 1);
        assert!((result.best_objective().unwrap() - -2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_mip() {
        let mut gen = GeneralMip::new("inf");
        let x = gen.add_var("x", 0.0, true, None);
        gen.add_row("r", vec![(x, 1.0)], Sense::Le, -2.0);
        let inst = to_standard_form(&gen).unwrap();
        let result = solve_mip(&inst, &SolverConfig::default(), None).unwrap();
        assert_eq!(result.status, MipStatus::Infeasible);
        assert!(result.pool.is_empty());
    }

    #[test]
    fn fixings_restrict_to_continuous_part() {
        // min -x1 - 0.5 v : x1 + v + s = 2 with x1 fixed to 0
        let mut gen = GeneralMip::new("fix");
        let x1 = gen.add_var("x1", -1.0, true, None);
        let v = gen.add_var("v", -0.5, false, None);
        gen.add_row("r", vec![(x1, 1.0), (v, 1.0)], Sense::Le, 2.0);
        let inst = to_standard_form(&gen).unwrap();
        let fixed: BTreeSet<usize> = [0usize].into_iter().collect();
        let result = solve_mip(&inst, &SolverConfig::default(), Some(&fixed)).unwrap();
        let best = result.best().unwrap();
        assert!(best.point.x[0].abs() < 1e-9);
        assert!((best.objective - -1.0).abs() < 1e-9);
        // matches the LP on the restricted instance
        let mut upper = vec![f64::INFINITY; inst.num_cols()];
        upper[0] = 0.0;
        let lp = solve_lp_bounded(&inst, &vec![0.0; inst.num_cols()], &upper);
        assert!((best.objective - lp.objective).abs() < 1e-9);
    }

    #[test]
    fn pool_objectives_strictly_improve() {
        // several incumbents on the way to the optimum
        let mut gen = GeneralMip::new("pool");
        let mut cols = Vec::new();
        for i in 0..4 {
            cols.push(gen.add_var(format!("x{i}"), -(i as f64 + 1.0), true, Some(1.0)));
        }
        let coeffs: Vec<(usize, f64)> = cols.iter().map(|&c| (c, 3.0)).collect();
        gen.add_row("cap", coeffs, Sense::Le, 7.0);
        let inst = to_standard_form(&gen).unwrap();
        let result = solve_mip(&inst, &SolverConfig::default(), None).unwrap();
        assert_eq!(result.status, MipStatus::Optimal);
        for pair in result.pool.windows(2) {
            assert!(pair[1].objective < pair[0].objective);
        }
    }

    #[test]
    fn objective_cutoff_limits_pool() {
        let inst = knapsack();
        let config = SolverConfig {
            objective_cutoff: Some(-1.5),
            ..SolverConfig::default()
        };
        let result = solve_mip(&inst, &config, None).unwrap();
        // optimum is -1, which does not beat the cutoff
        assert_eq!(result.status, MipStatus::Infeasible);
        assert!(result.pool.is_empty());
    }

    #[test]
    fn deterministic_reruns() {
        let inst = knapsack();
        let a = solve_mip(&inst, &SolverConfig::default(), None).unwrap();
        let b = solve_mip(&inst, &SolverConfig::default(), None).unwrap();
        assert_eq!(a.node_count, b.node_count);
        assert_eq!(a.pool.len(), b.pool.len());
        for (ia, ib) in a.pool.iter().zip(&b.pool) {
            assert_eq!(ia.objective, ib.objective);
            assert_eq!(ia.point, ib.point);
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let inst = knapsack();
        let config = SolverConfig {
            integrality_tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_mip(&inst, &config, None),
            Err(SolveError::ConfigError(_))
        ));
    }
}
