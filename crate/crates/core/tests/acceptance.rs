//! Acceptance gates for the workspace, numbered 1-10. Each test prints a
//! single `criterion NN: PASS/FAIL` line with measured evidence, then asserts.
//!
//! The checks cover: solver exactness against an independent brute-force
//! oracle (1), agreement with the single-packet closed form (2), activation
//! thresholds (3), the relaxed code-design problem (4), learner regret in the
//! bounded and logarithmic regimes (5-7), the UCB/TS comparison (8),
//! bit-exact parallel reproducibility (9), and the oracle baseline (10).

use std::sync::OnceLock;
use std::time::Instant;

use dlcode_core::analysis::{
    block_length_residual, continuous_optimum, critical_point, delay_tolerant_policy,
    ContinuousOptimum,
};
use dlcode_core::{
    bound_overlay, curve_to_csv, run_experiment, run_experiment_with_workers, run_replication,
    solve_policy, ArrivalDistribution, Belief, ExperimentConfig, LearnerKind, RegretCurve,
    SystemParams, TransitionMode,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n:02}: {verdict} - {detail}");
    assert!(pass, "criterion {n} failed: {detail}");
}

// ---------------------------------------------------------------------------
// 1. Brute-force policy-tree oracle
// ---------------------------------------------------------------------------

/// All decisions available with `queue` pending packets and `cap` channels.
fn choices(queue: u32, cap: u32) -> Vec<(u32, u32)> {
    let mut v = vec![(0u32, 0u32)];
    for m in 1..=cap {
        for x in 1..=m.min(queue) {
            v.push((m, x));
        }
    }
    v
}

/// Success probability of an (m, x) code, from scratch: sum the upper tail of
/// a Binomial(m, mu) via Pascal's-triangle coefficients.
fn tail_from_scratch(m: u32, x: u32, mu: f64) -> f64 {
    let mut row = vec![1.0f64];
    for _ in 0..m {
        let mut next = vec![1.0];
        for i in 1..row.len() {
            next.push(row[i - 1] + row[i]);
        }
        next.push(1.0);
        row = next;
    }
    (x..=m)
        .map(|k| row[k as usize] * mu.powi(k as i32) * (1.0 - mu).powi((m - k) as i32))
        .sum()
}

/// Expected value of playing (m, x) in the last slot from `queue`, including
/// the terminal backlog penalty. Bookkeeping is deliberately the plain
/// slot-revenue form rather than the solver's folded one.
fn last_slot_value(queue: u32, m: u32, x: u32, mu: f64, d: f64, lambda: f64) -> f64 {
    if x == 0 {
        return -d * m as f64 - lambda * queue as f64;
    }
    let p = tail_from_scratch(m, x, mu);
    -d * m as f64 + p * (x as f64 - lambda * (queue - x) as f64) + (1.0 - p) * (-lambda * queue as f64)
}

/// Best achievable expected value from (slots, queue) by exhaustively
/// enumerating every decision tree (root decision plus one decision per
/// reachable branch), not by backward induction.
fn best_tree_value(slots: u32, queue: u32, mu: f64, d: f64, lambda: f64, cap: u32) -> f64 {
    assert!(slots <= 2, "oracle only enumerates one- and two-slot trees");
    if slots == 0 {
        return -lambda * queue as f64;
    }
    let mut best = f64::NEG_INFINITY;
    if slots == 1 {
        for (m, x) in choices(queue, cap) {
            best = best.max(last_slot_value(queue, m, x, mu, d, lambda));
        }
        return best;
    }
    for (m2, x2) in choices(queue, cap) {
        if x2 == 0 {
            let cost = -d * m2 as f64;
            for (m1, x1) in choices(queue, cap) {
                best = best.max(cost + last_slot_value(queue, m1, x1, mu, d, lambda));
            }
            continue;
        }
        let p = tail_from_scratch(m2, x2, mu);
        for (ms, xs) in choices(queue - x2, cap) {
            let on_success =
                x2 as f64 + last_slot_value(queue - x2, ms, xs, mu, d, lambda);
            for (mf, xf) in choices(queue, cap) {
                let on_failure = last_slot_value(queue, mf, xf, mu, d, lambda);
                let v = -d * m2 as f64 + p * on_success + (1.0 - p) * on_failure;
                best = best.max(v);
            }
        }
    }
    best
}

#[test]
fn c01_solver_matches_exhaustive_tree_enumeration() {
    let start = Instant::now();
    let mut compared = 0u32;
    let mut worst: f64 = 0.0;
    for (d, lambda) in [(0.25, 1.0), (0.2, 0.0), (0.45, 0.6)] {
        for t in [1u32, 2] {
            for a_max in [1u32, 2, 3] {
                let params = SystemParams::new(t, d, lambda, a_max, Some(6)).unwrap();
                for i in 0..=20 {
                    let mu = i as f64 / 20.0;
                    let table = solve_policy(Belief::new(mu), &params);
                    for q in 0..=a_max {
                        let oracle = best_tree_value(t, q, mu, d, lambda, 6);
                        let gap = (oracle - table.value(t, q)).abs();
                        worst = worst.max(gap);
                        compared += 1;
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        1,
        worst <= 1e-9 && elapsed.as_secs_f64() < 10.0,
        &format!(
            "{compared} solver values vs tree enumeration, max gap {worst:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. Single-packet closed form
// ---------------------------------------------------------------------------

#[test]
fn c02_closed_form_reproduces_solver_decisions() {
    let params = SystemParams::new(4, 0.25, 1.0, 1, None).unwrap();
    let mut all_exact = true;
    let mut idle_ok = true;
    let mut monotone_ok = true;
    for i in 0..=100 {
        let mu = Belief::new(i as f64 / 100.0);
        let closed = delay_tolerant_policy(mu, &params).unwrap();
        let table = solve_policy(mu, &params);
        for s in 1..=4 {
            let dec = table.decision(s, 1);
            let m = closed.code_length(s);
            let x = u32::from(m > 0);
            all_exact &= dec.m == m && dec.x == x;
        }
        if mu.get() < 0.125 {
            idle_ok &= (1..=4).all(|s| closed.code_length(s) == 0);
        }
        // Fewer slots left must never shorten the code.
        monotone_ok &= (2..=4).all(|s| closed.code_length(s) <= closed.code_length(s - 1));
    }
    check(
        2,
        all_exact && idle_ok && monotone_ok,
        &format!(
            "101 beliefs: decisions exact={all_exact}, idle below 0.125={idle_ok}, \
             code length monotone={monotone_ok}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. Activation threshold
// ---------------------------------------------------------------------------

#[test]
fn c03_activation_threshold_matches_analytic_values() {
    let mut single_worst: f64 = 0.0;
    for di in 1..=10 {
        let d = di as f64 * 0.05;
        for lambda in [0.0, 0.25, 0.5, 1.0, 2.0] {
            let params = SystemParams::new(3, d, lambda, 1, None).unwrap();
            let zeta = critical_point(&params).unwrap();
            single_worst = single_worst.max((zeta - d / (1.0 + lambda)).abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut bracket_ok = true;
    for _ in 0..20 {
        let a_max = rng.random_range(2..=5);
        let t = rng.random_range(1..=4);
        let d = rng.random_range(0.05..0.6);
        let lambda = rng.random_range(0.0..2.0);
        let params = SystemParams::new(t, d, lambda, a_max, None).unwrap();
        let zeta = critical_point(&params).unwrap();
        let lo = d / (1.0 + lambda);
        let hi = (2.0 * d / (1.0 + lambda)).min(1.0);
        bracket_ok &= zeta >= lo - 1e-9 && zeta <= hi + 1e-9;
    }
    check(
        3,
        single_worst <= 1e-6 && bracket_ok,
        &format!(
            "single-packet max |zeta - d/(1+lambda)| = {single_worst:.2e}; \
             20 random multi-packet systems inside [lo, min(1, 2*lo)]={bracket_ok}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 4. Relaxed code-design problem
// ---------------------------------------------------------------------------

#[test]
fn c04_relaxed_optimum_rate_word_length_and_stationarity() {
    let start = Instant::now();
    let (a, d, lambda) = (6u32, 0.25, 1.0);
    let mut rate_ok = true;
    let mut word_ok = true;
    let mut worst_residual: f64 = 0.0;
    for i in 25..=100 {
        let mu = i as f64 / 100.0;
        match continuous_optimum(a, Belief::new(mu), d, lambda).unwrap() {
            ContinuousOptimum::Idle => {
                rate_ok = false;
            }
            ContinuousOptimum::Code { m, x, rate } => {
                rate_ok &= rate < mu + 1e-6;
                if mu >= 0.5 {
                    word_ok &= (x - 6.0).abs() <= 1e-6;
                }
                // The stationarity test needs a nondegenerate channel.
                if mu < 1.0 {
                    let r = block_length_residual(m, x, Belief::new(mu), d, lambda)
                        .unwrap()
                        .abs();
                    worst_residual = worst_residual.max(r);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        4,
        rate_ok && word_ok && worst_residual <= 1e-8 && elapsed.as_secs_f64() < 5.0,
        &format!(
            "rate<mu={rate_ok}, full word above 0.5={word_ok}, \
             max stationarity residual {worst_residual:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

// ---------------------------------------------------------------------------
// 5-7. Learner regimes (two shared 200-replication experiments)
// ---------------------------------------------------------------------------

fn tolerant_config(mu_star: f64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        params: SystemParams::new(4, 0.25, 1.0, 1, None).unwrap(),
        arrivals: ArrivalDistribution::point(1),
        mu_star: Belief::new(mu_star),
        learner: LearnerKind::Ucb { beta: 4.0 },
        horizon: 10_000,
        replications: 200,
        base_seed: seed,
        transition_mode: TransitionMode::Realized,
    }
}

fn bounded_regime() -> &'static (RegretCurve, Vec<f64>, f64) {
    static CELL: OnceLock<(RegretCurve, Vec<f64>, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = tolerant_config(0.7, 707);
        let start = Instant::now();
        let curve = run_experiment(&cfg).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let bound = bound_overlay(&cfg).unwrap();
        (curve, bound, secs)
    })
}

fn log_regime() -> &'static (RegretCurve, Vec<f64>) {
    static CELL: OnceLock<(RegretCurve, Vec<f64>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = tolerant_config(0.05, 505);
        let curve = run_experiment(&cfg).unwrap();
        let bound = bound_overlay(&cfg).unwrap();
        (curve, bound)
    })
}

#[test]
fn c05_high_connectivity_regret_flattens_under_constant_bound() {
    let (curve, bound, secs) = bounded_regime();
    let mean = curve.mean_cum_regret();
    let se = curve.se_cum_regret();
    let diff = (mean[9_999] - mean[4_999]).abs();
    let combined = (se[9_999].powi(2) + se[4_999].powi(2)).sqrt();
    let flat = diff < 3.0 * combined;
    let dominated = mean.iter().zip(bound).all(|(m, b)| b >= m);
    let constant = bound[0] == bound[bound.len() - 1];
    check(
        5,
        flat && dominated && constant && *secs < 120.0,
        &format!(
            "|regret(1e4)-regret(5e3)|={diff:.3} vs 3*combined SE={:.3}; \
             constant bound {:.1} dominates all frames={dominated}; run took {secs:.1}s",
            3.0 * combined,
            bound[0]
        ),
    );
}

#[test]
fn c06_low_connectivity_regret_grows_logarithmically() {
    let (curve, bound) = log_regime();
    let mean = curve.mean_cum_regret();

    // Least squares of cumulative regret against ln n over n in [100, 10000].
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy, mut k) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for n in 100..=10_000usize {
        let x = (n as f64).ln();
        let y = mean[n - 1];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        k += 1.0;
    }
    let cov = sxy - sx * sy / k;
    let var_x = sxx - sx * sx / k;
    let var_y = syy - sy * sy / k;
    let r2 = cov * cov / (var_x * var_y);
    let dominated = mean.iter().zip(bound).all(|(m, b)| b >= m);
    check(
        6,
        r2 >= 0.95 && dominated,
        &format!("R^2 of regret vs ln n on [1e2, 1e4] = {r2:.4}; log bound dominates={dominated}"),
    );
}

#[test]
fn c07_throughput_approaches_the_feasible_limit() {
    let (high, _, _) = bounded_regime();
    let (low, _) = log_regime();
    let n = high.len();
    let final_thru = high.mean_throughput()[n - 1];

    // Per-frame throughput over the last 10% of a run whose optimum is idle.
    let cum = |c: &RegretCurve, i: usize| c.mean_throughput()[i] * (i + 1) as f64;
    let tail = (cum(low, n - 1) - cum(low, n - 1 - 1_000)) / 1_000.0;
    check(
        7,
        final_thru >= 0.95 && tail <= 0.05,
        &format!("high-connectivity throughput at 1e4 = {final_thru:.4}; idle-regime tail rate = {tail:.5}"),
    );
}

// ---------------------------------------------------------------------------
// 8. UCB vs TS comparison on the two-packet single-slot system
// ---------------------------------------------------------------------------

fn crossover_config(mu_star: f64, learner: LearnerKind) -> ExperimentConfig {
    ExperimentConfig {
        params: SystemParams::new(1, 0.2, 0.0, 2, Some(2)).unwrap(),
        arrivals: ArrivalDistribution::point(2),
        mu_star: Belief::new(mu_star),
        learner,
        horizon: 10_000,
        replications: 200,
        base_seed: 1212,
        transition_mode: TransitionMode::Realized,
    }
}

fn final_stats(cfg: &ExperimentConfig) -> (f64, f64) {
    let curve = run_experiment(cfg).unwrap();
    let last = curve.len() - 1;
    (curve.mean_cum_regret()[last], curve.se_cum_regret()[last])
}

#[test]
fn c08_ucb_and_ts_split_the_connectivity_range() {
    let ucb = LearnerKind::Ucb { beta: 4.0 };
    let mut detail = String::new();
    let mut ucb_wins_above = false;
    for mu in [0.22, 0.25, 0.3] {
        let (mu_u, se_u) = final_stats(&crossover_config(mu, ucb));
        let (mu_t, se_t) = final_stats(&crossover_config(mu, LearnerKind::Ts));
        let combined = (se_u * se_u + se_t * se_t).sqrt();
        ucb_wins_above |= mu_t - mu_u >= 2.0 * combined;
        detail.push_str(&format!("mu={mu}: UCB {mu_u:.1} TS {mu_t:.1} (2SE={:.1}); ", 2.0 * combined));
    }
    let (mu_u, se_u) = final_stats(&crossover_config(0.15, ucb));
    let (mu_t, se_t) = final_stats(&crossover_config(0.15, LearnerKind::Ts));
    let ts_wins_below = mu_u - mu_t >= 2.0 * (se_u * se_u + se_t * se_t).sqrt();
    detail.push_str(&format!(
        "mu=0.15: UCB {mu_u:.1} TS {mu_t:.1}; UCB better somewhere above 0.2={ucb_wins_above}, \
         TS better below={ts_wins_below}"
    ));
    check(8, ucb_wins_above && ts_wins_below, &detail);
}

// ---------------------------------------------------------------------------
// 9. Bit-exact reproducibility across worker counts
// ---------------------------------------------------------------------------

#[test]
fn c09_worker_count_never_changes_the_output() {
    let mut all_equal = true;
    for learner in [LearnerKind::Ucb { beta: 4.0 }, LearnerKind::Ts] {
        let mut cfg = crossover_config(0.25, learner);
        cfg.horizon = 500;
        cfg.replications = 8;
        let reference = curve_to_csv(&run_experiment_with_workers(&cfg, 1).unwrap(), None);
        for workers in [0usize, 2, 4] {
            let csv = curve_to_csv(&run_experiment_with_workers(&cfg, workers).unwrap(), None);
            all_equal &= csv == reference;
        }
    }
    check(
        9,
        all_equal,
        "UCB and TS curves byte-identical for 1, 2, 4, and default worker pools",
    );
}

// ---------------------------------------------------------------------------
// 10. Oracle baseline
// ---------------------------------------------------------------------------

#[test]
fn c10_oracle_learner_accrues_exactly_zero_regret() {
    let mut cfg = crossover_config(0.37, LearnerKind::Genie);
    cfg.horizon = 2_000;
    cfg.replications = 5;
    let mut exact = true;
    for r in 0..cfg.replications {
        for frame in run_replication(&cfg, r).unwrap() {
            exact &= frame.regret_increment == 0.0;
        }
    }
    let curve = run_experiment(&cfg).unwrap();
    exact &= curve.mean_cum_regret().iter().all(|&v| v == 0.0);
    exact &= curve.se_cum_regret().iter().all(|&v| v == 0.0);
    check(
        10,
        exact,
        "every frame increment and every curve point is exactly 0.0",
    );
}
