//! Shared helpers for integration tests: seeded random tiny instances and
//! an exhaustive coarse-grid MIR oracle that is independent of the
//! separation model implementation.

#![allow(dead_code)]

use mirlab::model::{to_standard_form, GeneralMip, MipInstance, Point, Sense};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random bounded tiny MIP: at most 8 integer columns and 6 rows before
/// conversion. Every integer variable carries a finite upper bound so the
/// enumeration oracles stay cheap; continuous costs are nonnegative so
/// every continuous restriction is bounded below.
pub fn random_tiny_instance(rng: &mut ChaCha8Rng, tag: usize) -> MipInstance {
    let num_int = rng.gen_range(1..=4usize);
    let num_cont = rng.gen_range(0..=2usize);
    let num_rows = rng.gen_range(1..=3usize);

    let mut gen = GeneralMip::new(format!("rand{tag}"));
    let mut cols = Vec::new();
    for i in 0..num_int {
        let cost = rng.gen_range(-5..=5) as f64;
        let ub = rng.gen_range(1..=3) as f64;
        cols.push(gen.add_var(format!("x{i}"), cost, true, Some(ub)));
    }
    for i in 0..num_cont {
        let cost = rng.gen_range(0..=3) as f64;
        cols.push(gen.add_var(format!("v{i}"), cost, false, None));
    }

    for r in 0..num_rows {
        let mut coeffs = Vec::new();
        for &col in &cols {
            if rng.gen_bool(0.7) {
                let c = rng.gen_range(-3..=3);
                if c != 0 {
                    coeffs.push((col, c as f64));
                }
            }
        }
        if coeffs.is_empty() {
            coeffs.push((cols[0], 1.0));
        }
        let sense = if rng.gen_bool(0.8) { Sense::Le } else { Sense::Ge };
        let rhs = match sense {
            Sense::Le => rng.gen_range(1..=8) as f64,
            _ => rng.gen_range(-4..=1) as f64,
        };
        gen.add_row(format!("r{r}"), coeffs, sense, rhs);
    }
    to_standard_form(&gen).unwrap()
}

/// An even smaller random MIP for properties that need the separation
/// MIP solved to proven optimality: one or two rows, two or three integer
/// columns, coefficients in `-2..=2`.
pub fn random_micro_instance(rng: &mut ChaCha8Rng, tag: usize) -> MipInstance {
    let num_int = rng.gen_range(2..=3usize);
    let num_rows = rng.gen_range(1..=2usize);

    let mut gen = GeneralMip::new(format!("micro{tag}"));
    let mut cols = Vec::new();
    for i in 0..num_int {
        let cost = rng.gen_range(-3..=-1) as f64;
        cols.push(gen.add_var(format!("x{i}"), cost, true, Some(rng.gen_range(1..=2) as f64)));
    }
    for r in 0..num_rows {
        let mut coeffs = Vec::new();
        for &col in &cols {
            let c = rng.gen_range(0..=2);
            if c != 0 {
                coeffs.push((col, c as f64));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((cols[0], 1.0));
        }
        gen.add_row(format!("r{r}"), coeffs, Sense::Le, rng.gen_range(1..=4) as f64);
    }
    to_standard_form(&gen).unwrap()
}

/// The two-variable knapsack used across the suite:
/// `min -x1 - x2 : 2x1 + 2x2 <= 3, 0 <= x <= 1 integer`.
/// Its LP optimum is -1.5 and the integer optimum is -1.
pub fn bounded_knapsack() -> MipInstance {
    let mut gen = GeneralMip::new("knapsack");
    let x1 = gen.add_var("x1", -1.0, true, Some(1.0));
    let x2 = gen.add_var("x2", -1.0, true, Some(1.0));
    gen.add_row("cap", vec![(x1, 2.0), (x2, 2.0)], Sense::Le, 3.0);
    to_standard_form(&gen).unwrap()
}

/// A cut produced by the classical MIR rounding of an aggregation vector.
pub struct GridCut {
    pub lambda: Vec<f64>,
    pub coeff_v: Vec<f64>,
    pub coeff_x: Vec<f64>,
    pub rhs: f64,
    pub true_violation: f64,
    pub approx_violation: f64,
}

/// Exhaustive coarse-grid MIR oracle.
///
/// For every aggregation vector with entries from `levels` on the rows in
/// `allowed_rows` (zero elsewhere), forms the canonical MIR cut
/// (`beta_bar = floor(lambda b)`, fractional parts as the hat variables)
/// and returns the one with the largest true violation at the point.
/// `approx_violation` is the epsilon-representable objective of the same
/// solution: the best completion over `pi` and `Delta_k` given `K` bits.
pub fn grid_mir_oracle(
    instance: &MipInstance,
    point: &Point,
    allowed_rows: &[usize],
    levels: &[f64],
    num_eps: usize,
) -> Option<GridCut> {
    let m = instance.num_rows();
    let n = instance.num_int();
    let p = instance.num_cont();
    let mut best: Option<GridCut> = None;

    let mut counter = vec![0usize; allowed_rows.len()];
    loop {
        let mut lambda = vec![0.0; m];
        for (slot, &row) in allowed_rows.iter().enumerate() {
            lambda[row] = levels[counter[slot]];
        }

        let mut lam_a = vec![0.0; n];
        let mut lam_c = vec![0.0; p];
        let mut lam_b = 0.0;
        for row in 0..m {
            let l = lambda[row];
            if l == 0.0 {
                continue;
            }
            for (j, item) in lam_a.iter_mut().enumerate() {
                *item += l * instance.a_row(row)[j];
            }
            for (j, item) in lam_c.iter_mut().enumerate() {
                *item += l * instance.c_row(row)[j];
            }
            lam_b += l * instance.rhs()[row];
        }

        let beta_bar = lam_b.floor();
        let beta_hat = lam_b - beta_bar;
        let alpha_bar: Vec<f64> = lam_a.iter().map(|&a| a.floor()).collect();
        let alpha_hat: Vec<f64> = lam_a.iter().zip(&alpha_bar).map(|(a, fl)| a - fl).collect();
        let coeff_v: Vec<f64> = lam_c.iter().map(|&c| c.max(0.0)).collect();
        let coeff_x: Vec<f64> = alpha_hat
            .iter()
            .zip(&alpha_bar)
            .map(|(hat, bar)| hat + beta_hat * bar)
            .collect();
        let rhs = beta_hat * (beta_bar + 1.0);

        let cv: f64 = coeff_v.iter().zip(&point.v).map(|(c, v)| c * v).sum();
        let cx: f64 = coeff_x.iter().zip(&point.x).map(|(c, x)| c * x).sum();
        let true_violation = rhs - (cv + cx);

        // best epsilon-representable objective for this solution
        let delta = (beta_bar + 1.0)
            - alpha_bar.iter().zip(&point.x).map(|(a, x)| a * x).sum::<f64>();
        let eps_total: f64 = (1..=num_eps).map(|k| 0.5f64.powi(k as i32)).sum();
        let eps_term = if delta >= 0.0 {
            // greedy binary expansion of beta_hat over the available bits
            let mut remaining = beta_hat;
            let mut eps_sum = 0.0;
            for k in 1..=num_eps {
                let eps = 0.5f64.powi(k as i32);
                if eps <= remaining + 1e-12 {
                    remaining -= eps;
                    eps_sum += eps;
                }
            }
            eps_sum * delta.min(1.0)
        } else {
            eps_total * delta
        };
        let base_cost = cv
            + alpha_hat.iter().zip(&point.x).map(|(a, x)| a * x).sum::<f64>();
        let approx_violation = eps_term - base_cost;

        let candidate = GridCut {
            lambda,
            coeff_v,
            coeff_x,
            rhs,
            true_violation,
            approx_violation,
        };
        match &best {
            Some(b) if b.true_violation >= candidate.true_violation => {}
            _ => best = Some(candidate),
        }

        // advance the mixed-radix counter
        let mut pos = 0;
        loop {
            if pos == counter.len() {
                return best;
            }
            counter[pos] += 1;
            if counter[pos] < levels.len() {
                break;
            }
            counter[pos] = 0;
            pos += 1;
        }
    }
}
