//! Instance families from random objective perturbations.
//!
//! A family shares the constraint data of its base instance; only the
//! cost vector varies. Positive cost entries are redrawn from a normal
//! distribution fitted to the positive pool and clipped at zero from
//! below; negative entries mirror that with the negative pool. Zero
//! entries (slacks included) stay zero, so every variation keeps the
//! sign structure of the base objective.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutloop::{run_cutting_loop, GapValue, LoopConfig, LoopError, LoopRun};
use crate::model::{MipInstance, Point};
use crate::solver::{solve_lp, LpStatus};

/// Fingerprint granularity for LP optima.
const FINGERPRINT_GRID: f64 = 1e-7;
/// Draw budget per requested variation.
const DRAW_FACTOR: usize = 100;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("draw cap exhausted: {got} distinct variations out of {wanted} after {draws} draws")]
    ExhaustedDraws { wanted: usize, got: usize, draws: usize },
    #[error("base LP relaxation is {0:?}")]
    BaseLp(LpStatus),
    #[error(transparent)]
    Loop(#[from] LoopError),
}

/// How to redraw the objective coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub seed: u64,
    pub count: usize,
    /// Moments for the positive pool; `None` uses the pool's empirical
    /// mean and standard deviation.
    pub pos_mean: Option<f64>,
    pub pos_std: Option<f64>,
    pub neg_mean: Option<f64>,
    pub neg_std: Option<f64>,
}

impl PerturbationConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        PerturbationConfig {
            seed,
            count,
            pos_mean: None,
            pos_std: None,
            neg_mean: None,
            neg_std: None,
        }
    }
}

/// One member of a family: an objective vector plus the fingerprint of
/// its LP optimum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Variation {
    pub id: usize,
    pub int_costs: Vec<f64>,
    pub cont_costs: Vec<f64>,
    pub fingerprint: u64,
}

/// A base instance with objective-perturbed variations. All variations
/// share the constraint matrices bitwise.
#[derive(Clone, Debug)]
pub struct InstanceFamily {
    pub base: MipInstance,
    pub variations: Vec<Variation>,
}

impl InstanceFamily {
    /// The base instance with a variation's objective installed.
    pub fn instantiate(&self, variation: &Variation) -> MipInstance {
        let mut inst = self.base.clone();
        inst.set_costs(variation.int_costs.clone(), variation.cont_costs.clone());
        inst.name = format!("{}_v{}", self.base.name, variation.id);
        inst
    }
}

fn pool_moments(pool: &[f64]) -> (f64, f64) {
    if pool.is_empty() {
        return (0.0, 0.0);
    }
    let n = pool.len() as f64;
    let mean = pool.iter().sum::<f64>() / n;
    let var = pool.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn draw(rng: &mut ChaCha8Rng, mean: f64, std: f64) -> f64 {
    if std <= 0.0 {
        return mean;
    }
    Normal::new(mean, std).expect("valid normal").sample(rng)
}

/// Redraws the full cost vector for one variation.
///
/// Entries are visited in column order (integer block then continuous),
/// one normal draw per nonzero entry, on a stream derived from the seed
/// and the draw index, so draws can run in any order or in parallel and
/// still merge deterministically.
pub fn perturb_objective(
    base: &MipInstance,
    config: &PerturbationConfig,
    draw_index: u64,
) -> (Vec<f64>, Vec<f64>) {
    let full: Vec<f64> = base
        .int_costs()
        .iter()
        .chain(base.cont_costs())
        .copied()
        .collect();
    let positives: Vec<f64> = full.iter().copied().filter(|&d| d > 0.0).collect();
    let negatives: Vec<f64> = full.iter().copied().filter(|&d| d < 0.0).collect();
    let (emp_pos_mean, emp_pos_std) = pool_moments(&positives);
    let (emp_neg_mean, emp_neg_std) = pool_moments(&negatives);
    let pos_mean = config.pos_mean.unwrap_or(emp_pos_mean);
    let pos_std = config.pos_std.unwrap_or(emp_pos_std);
    let neg_mean = config.neg_mean.unwrap_or(emp_neg_mean);
    let neg_std = config.neg_std.unwrap_or(emp_neg_std);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(draw_index + 1);
    let perturbed: Vec<f64> = full
        .iter()
        .map(|&d| {
            if d > 0.0 {
                draw(&mut rng, pos_mean, pos_std).max(0.0)
            } else if d < 0.0 {
                draw(&mut rng, neg_mean, neg_std).min(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let (int_costs, cont_costs) = perturbed.split_at(base.num_int());
    (int_costs.to_vec(), cont_costs.to_vec())
}

fn fingerprint_of(point: &[f64]) -> (Vec<i64>, u64) {
    let quantized: Vec<i64> = point
        .iter()
        .map(|&v| (v / FINGERPRINT_GRID).round() as i64)
        .collect();
    // FNV-1a over the quantized entries; stable across platforms
    let mut hash: u64 = 0xcbf29ce484222325;
    for q in &quantized {
        for byte in q.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    (quantized, hash)
}

/// Draws variations until `count` are collected. With
/// `require_distinct_lp` every kept variation must have a fresh LP
/// optimum fingerprint; the draw cap is `100 * count`.
pub fn generate_family(
    base: &MipInstance,
    config: &PerturbationConfig,
    require_distinct_lp: bool,
) -> Result<InstanceFamily, GenError> {
    let root = solve_lp(base);
    if root.status != LpStatus::Optimal {
        return Err(GenError::BaseLp(root.status));
    }
    let mut family = InstanceFamily {
        base: base.clone(),
        variations: Vec::with_capacity(config.count),
    };
    let mut seen = std::collections::HashSet::new();
    let cap = DRAW_FACTOR.max(1) * config.count.max(1);
    let mut draws = 0;
    while family.variations.len() < config.count && draws < cap {
        let draw_index = draws as u64;
        draws += 1;
        let (int_costs, cont_costs) = perturb_objective(base, config, draw_index);
        let mut candidate = base.clone();
        candidate.set_costs(int_costs.clone(), cont_costs.clone());
        let lp = solve_lp(&candidate);
        if lp.status != LpStatus::Optimal {
            continue;
        }
        let (key, fingerprint) = fingerprint_of(&lp.point);
        if require_distinct_lp && !seen.insert(key) {
            continue;
        }
        family.variations.push(Variation {
            id: family.variations.len(),
            int_costs,
            cont_costs,
            fingerprint,
        });
    }
    if family.variations.len() < config.count {
        return Err(GenError::ExhaustedDraws {
            wanted: config.count,
            got: family.variations.len(),
            draws,
        });
    }
    Ok(family)
}

/// Kept/discarded split of full-separator runs by final gap closed.
#[derive(Debug)]
pub struct FilterOutcome {
    pub kept: Vec<usize>,
    pub discarded: Vec<usize>,
    /// One loop run per variation, aligned with `family.variations`.
    pub runs: Vec<LoopRun>,
}

/// True when a final gap meets the keep threshold (`>=`, so a boundary
/// value is kept). Degenerate and unknown gaps are discarded.
pub fn gap_keeps(gap: GapValue, min_gap_pct: f64) -> bool {
    matches!(gap, GapValue::Percent(p) if p >= min_gap_pct)
}

/// Runs the full separator on every variation and partitions the family
/// by final-round gap closed.
pub fn filter_by_gap(
    family: &InstanceFamily,
    loop_config: &LoopConfig,
    min_gap_pct: f64,
) -> Result<FilterOutcome, GenError> {
    let mut outcome = FilterOutcome {
        kept: Vec::new(),
        discarded: Vec::new(),
        runs: Vec::with_capacity(family.variations.len()),
    };
    for variation in &family.variations {
        let inst = family.instantiate(variation);
        let run = run_cutting_loop(&inst, loop_config, None)?;
        if gap_keeps(run.final_gap(), min_gap_pct) {
            outcome.kept.push(variation.id);
        } else {
            outcome.discarded.push(variation.id);
        }
        outcome.runs.push(run);
    }
    Ok(outcome)
}

/// LP optimum fingerprint of a point, exposed for manifest checks.
pub fn lp_fingerprint(point: &Point) -> u64 {
    let flat: Vec<f64> = point.x.iter().chain(&point.v).copied().collect();
    fingerprint_of(&flat).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{to_standard_form, GeneralMip, Sense};

    fn knapsack_base() -> MipInstance {
        let mut gen = GeneralMip::new("base");
        let x1 = gen.add_var("x1", -1.0, true, Some(1.0));
        let x2 = gen.add_var("x2", -2.0, true, Some(1.0));
        gen.add_row("cap", vec![(x1, 2.0), (x2, 2.0)], Sense::Le, 3.0);
        to_standard_form(&gen).unwrap()
    }

    /// A base with enough LP vertices for distinct-optimum families.
    fn wide_base() -> MipInstance {
        let mut gen = GeneralMip::new("wide");
        let x1 = gen.add_var("x1", -3.0, true, Some(2.0));
        let x2 = gen.add_var("x2", -2.0, true, Some(2.0));
        let x3 = gen.add_var("x3", -1.0, true, Some(2.0));
        gen.add_row("r0", vec![(x1, 2.0), (x2, 2.0), (x3, 1.0)], Sense::Le, 3.0);
        gen.add_row("r1", vec![(x1, 1.0), (x3, 2.0)], Sense::Le, 2.0);
        to_standard_form(&gen).unwrap()
    }

    #[test]
    fn zero_objective_stays_zero() {
        let mut gen = GeneralMip::new("z");
        let x = gen.add_var("x", 0.0, true, Some(1.0));
        gen.add_row("r", vec![(x, 1.0)], Sense::Le, 1.0);
        let base = to_standard_form(&gen).unwrap();
        let (f, g) = perturb_objective(&base, &PerturbationConfig::new(1, 1), 0);
        assert!(f.iter().all(|&c| c == 0.0));
        assert!(g.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn degenerate_std_pins_to_means() {
        let base = knapsack_base();
        let config = PerturbationConfig {
            pos_mean: Some(4.0),
            pos_std: Some(0.0),
            neg_mean: Some(-3.0),
            neg_std: Some(0.0),
            ..PerturbationConfig::new(9, 1)
        };
        let (f, _) = perturb_objective(&base, &config, 0);
        assert_eq!(f, vec![-3.0, -3.0]);
    }

    #[test]
    fn draws_replay_deterministically() {
        // replay the stream by hand: entries are drawn in column order
        let base = knapsack_base();
        let config = PerturbationConfig::new(0xCAFE, 1);
        let (f, g) = perturb_objective(&base, &config, 3);
        let (f2, g2) = perturb_objective(&base, &config, 3);
        assert_eq!(f, f2);
        assert_eq!(g, g2);

        // negative pool of the base is (-1, -2): mean -1.5, std 0.5
        let mut rng = ChaCha8Rng::seed_from_u64(0xCAFE);
        rng.set_stream(4);
        let normal = Normal::new(-1.5, 0.5).unwrap();
        let expect_x1: f64 = normal.sample(&mut rng);
        let expect_x2: f64 = normal.sample(&mut rng);
        assert_eq!(f[0], expect_x1.min(0.0));
        assert_eq!(f[1], expect_x2.min(0.0));
        assert!(g.iter().all(|&c| c == 0.0)); // slack costs untouched
    }

    #[test]
    fn signs_never_flip() {
        let base = knapsack_base();
        let config = PerturbationConfig::new(7, 1);
        for draw_index in 0..50 {
            let (f, g) = perturb_objective(&base, &config, draw_index);
            for (new, old) in f.iter().chain(&g).zip(
                base.int_costs().iter().chain(base.cont_costs()),
            ) {
                if *old > 0.0 {
                    assert!(*new >= 0.0);
                } else if *old < 0.0 {
                    assert!(*new <= 0.0);
                } else {
                    assert_eq!(*new, 0.0);
                }
            }
        }
    }

    #[test]
    fn family_of_one_is_trivially_distinct() {
        let base = knapsack_base();
        let family = generate_family(&base, &PerturbationConfig::new(5, 1), true).unwrap();
        assert_eq!(family.variations.len(), 1);
    }

    #[test]
    fn distinct_fingerprints_on_wide_base() {
        let base = wide_base();
        let family = generate_family(&base, &PerturbationConfig::new(11, 4), true).unwrap();
        assert_eq!(family.variations.len(), 4);
        let mut prints: Vec<u64> = family.variations.iter().map(|v| v.fingerprint).collect();
        prints.sort_unstable();
        prints.dedup();
        assert_eq!(prints.len(), 4);
        // constraint data is shared bitwise
        for variation in &family.variations {
            let inst = family.instantiate(variation);
            assert_eq!(inst.rhs(), base.rhs());
            for row in 0..base.num_rows() {
                assert_eq!(inst.a_row(row), base.a_row(row));
                assert_eq!(inst.c_row(row), base.c_row(row));
            }
        }
    }

    #[test]
    fn single_vertex_instance_exhausts_draws() {
        // x + s = 0 has the origin as its only feasible point, so every
        // perturbation shares one LP optimum
        let mut gen = GeneralMip::new("fixed");
        let x = gen.add_var("x", 2.0, true, None);
        gen.add_row("r", vec![(x, 1.0)], Sense::Le, 0.0);
        let base = to_standard_form(&gen).unwrap();
        let result = generate_family(&base, &PerturbationConfig::new(3, 2), true);
        assert!(matches!(result, Err(GenError::ExhaustedDraws { got: 1, .. })));
    }

    #[test]
    fn same_seed_reproduces_family() {
        let base = wide_base();
        let a = generate_family(&base, &PerturbationConfig::new(21, 4), true).unwrap();
        let b = generate_family(&base, &PerturbationConfig::new(21, 4), true).unwrap();
        for (va, vb) in a.variations.iter().zip(&b.variations) {
            assert_eq!(va.int_costs, vb.int_costs);
            assert_eq!(va.cont_costs, vb.cont_costs);
            assert_eq!(va.fingerprint, vb.fingerprint);
        }
    }

    #[test]
    fn gap_partition_boundary() {
        assert!(gap_keeps(GapValue::Percent(100.0), 5.0));
        assert!(gap_keeps(GapValue::Percent(5.0), 5.0));
        assert!(!gap_keeps(GapValue::Percent(0.0), 5.0));
        assert!(!gap_keeps(GapValue::Degenerate, 5.0));
        assert!(!gap_keeps(GapValue::Unknown, 5.0));
    }
}
