//! Separation properties on a randomized corpus: every pool cut is valid
//! for the enumerated feasible set, the model objective underestimates the
//! true violation, and restricting the row set behaves monotonically.

mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use mirlab::mirsep::{
    build_separation_model, separate, true_violation, validate_cut, SeparationConfig,
};
use mirlab::model::Point;
use mirlab::oracle::EnumerationBox;
use mirlab::solver::{solve_lp, solve_mip, MipStatus, SolverConfig};

fn corpus_config() -> SeparationConfig {
    SeparationConfig {
        time_limit: Duration::from_secs(2),
        node_limit: 20_000,
        ..SeparationConfig::default()
    }
}

/// Config small enough that micro-instance separations reach optimality.
fn exact_config() -> SeparationConfig {
    SeparationConfig {
        num_eps: 4,
        time_limit: Duration::from_secs(20),
        node_limit: 400_000,
        ..SeparationConfig::default()
    }
}

type Case = (mirlab::model::MipInstance, Point);

/// Fractional LP vertices of random instances, paired with their instance.
fn fractional_cases(seed: u64, want: usize, micro: bool) -> Vec<Case> {
    let mut rng = common::rng(seed);
    let mut cases = Vec::new();
    let mut tag = 0;
    while cases.len() < want && tag < want * 20 {
        let inst = if micro {
            common::random_micro_instance(&mut rng, tag)
        } else {
            common::random_tiny_instance(&mut rng, tag)
        };
        tag += 1;
        let lp = solve_lp(&inst);
        if !lp.is_optimal() {
            continue;
        }
        let point = Point::from_flat(&lp.point, inst.num_int());
        if point.is_integral(1e-6) {
            continue;
        }
        cases.push((inst, point));
    }
    assert!(
        cases.len() >= want,
        "could not build {want} fractional cases, got {}",
        cases.len()
    );
    cases
}

#[test]
fn pool_cuts_are_valid_and_underestimated_on_corpus() {
    let config = corpus_config();
    let mut with_cuts = 0;
    let mut total_cuts = 0;
    for (inst, point) in fractional_cases(0x51AB, 50, false) {
        let outcome = separate(&inst, &point, &config, 1).unwrap();
        if outcome.is_empty() {
            continue;
        }
        with_cuts += 1;
        let bbox = EnumerationBox::from_instance(&inst, 10);
        for (cut, sol) in outcome.cuts.iter().zip(&outcome.solutions) {
            total_cuts += 1;
            // validity against the enumeration oracle
            assert!(
                validate_cut(cut, &inst, &bbox).unwrap(),
                "invalid cut on {}: lambda {:?}",
                inst.name,
                cut.lambda
            );
            // underestimation: approximate objective <= true violation
            let viol = true_violation(cut, &point).unwrap();
            assert!(
                sol.objective <= viol + 1e-6,
                "{}: objective {} exceeds violation {}",
                inst.name,
                sol.objective,
                viol
            );
            // soundness: positive approximation implies a separating cut
            assert!(sol.objective > 0.0);
            assert!(viol > 0.0, "{}: non-separating pool cut", inst.name);
        }
    }
    println!("checked {total_cuts} cuts from {with_cuts} separable instances");
    assert!(with_cuts >= 20, "corpus too easy: only {with_cuts} separable");
}

#[test]
fn reduced_model_keeps_optimal_support_objective() {
    // fixing the multipliers that are already zero in an optimal incumbent
    // leaves that incumbent feasible, so the reduced optimum cannot drop
    let config = exact_config();
    let mut checked = 0;
    for (inst, point) in fractional_cases(0xF17, 20, true) {
        let outcome = separate(&inst, &point, &config, 1).unwrap();
        if outcome.solver_status != Some(MipStatus::Optimal) {
            continue;
        }
        let Some((_, best)) = outcome.best() else { continue };
        let support = best.lambda_support(1e-6);
        let reduced_config = SeparationConfig {
            allowed_rows: Some(support.clone()),
            ..config.clone()
        };
        let reduced = separate(&inst, &point, &reduced_config, 1).unwrap();
        if reduced.solver_status != Some(MipStatus::Optimal) {
            continue;
        }
        let reduced_best = reduced
            .solutions
            .iter()
            .map(|s| s.objective)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            reduced_best >= best.objective - 1e-6,
            "{}: support-restricted optimum {} below incumbent {}",
            inst.name,
            reduced_best,
            best.objective
        );
        checked += 1;
    }
    assert!(checked >= 8, "only {checked} reduction cases solved to optimality");
}

#[test]
fn enlarging_allowed_rows_never_decreases_optimum() {
    let config = exact_config();
    let mut checked = 0;
    for (inst, point) in fractional_cases(0x300, 10, true) {
        if inst.num_rows() < 2 {
            continue;
        }
        // nested row sets: first half vs all rows
        let half: BTreeSet<usize> = (0..inst.num_rows() / 2).collect();
        let all: BTreeSet<usize> = (0..inst.num_rows()).collect();
        let obj_of = |rows: BTreeSet<usize>| -> Option<f64> {
            let cfg = SeparationConfig {
                allowed_rows: Some(rows),
                ..config.clone()
            };
            let model = build_separation_model(&inst, &point, &cfg).unwrap();
            let solver_cfg = SolverConfig {
                time_limit: cfg.time_limit,
                node_limit: cfg.node_limit,
                ..SolverConfig::default()
            };
            let result = solve_mip(model.mip(), &solver_cfg, None).unwrap();
            (result.status == MipStatus::Optimal)
                .then(|| {
                    result
                        .best_objective()
                        .map(|obj| model.violation_of_objective(obj))
                        .unwrap_or(0.0)
                })
        };
        let (Some(small), Some(large)) = (obj_of(half), obj_of(all)) else {
            continue;
        };
        assert!(
            large >= small - 1e-6,
            "{}: optimum dropped from {small} to {large} on a larger row set",
            inst.name
        );
        checked += 1;
    }
    assert!(checked >= 5, "only {checked} monotonicity cases solved to optimality");
}

#[test]
fn grid_oracle_confirms_knapsack_separation() {
    // the coarse-grid oracle must already find a violated cut, and the
    // exact separator must do at least as well as the grid's best cut
    let inst = common::bounded_knapsack();
    let lp = solve_lp(&inst);
    let point = Point::from_flat(&lp.point, inst.num_int());
    let all_rows: Vec<usize> = (0..inst.num_rows()).collect();
    let grid = common::grid_mir_oracle(
        &inst,
        &point,
        &all_rows,
        &[-1.0, -0.5, 0.0, 0.5, 1.0],
        6,
    )
    .expect("grid oracle found no cut");
    assert!(
        grid.true_violation > 1e-4,
        "grid oracle found no violated cut: {}",
        grid.true_violation
    );

    let outcome = separate(&inst, &point, &corpus_config(), 1).unwrap();
    assert!(!outcome.is_empty());
    let best = outcome
        .cuts
        .iter()
        .map(|cut| true_violation(cut, &point).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        best >= grid.approx_violation - 1e-6,
        "exact separator ({best}) lost to the grid oracle ({})",
        grid.approx_violation
    );
}

#[test]
fn grid_oracle_embeddings_are_underestimates_on_corpus() {
    // for every grid cut, the embedded approximate objective must stay
    // below the true violation; this pins the approximation semantics
    // independently of the model implementation
    for (inst, point) in fractional_cases(0xA11, 10, false) {
        let rows: Vec<usize> = (0..inst.num_rows()).collect();
        if rows.len() > 3 {
            continue; // keep the grid enumeration small
        }
        if let Some(grid) = common::grid_mir_oracle(&inst, &point, &rows, &[-0.5, 0.0, 0.5], 6) {
            assert!(
                grid.approx_violation <= grid.true_violation + 1e-9,
                "{}: grid approx {} above true {}",
                inst.name,
                grid.approx_violation,
                grid.true_violation
            );
        }
    }
}
