//! Exact finite-horizon solver for the per-frame coding problem and exact
//! policy evaluation under a known connectivity.
//!
//! State: `(s, q)` where `s` counts the slots still remaining in the frame
//! (so `s = t` at the frame start and `s = 1` in the final slot) and `q` is
//! the number of undelivered packets. The stage value satisfies
//!
//! ```text
//! J_s(q) = max_{x <= q, m} { -d*m + P_{m,x}(mu) * (x + J_{s-1}(q-x) - J_{s-1}(q)) } + J_{s-1}(q)
//! J_0(q) = -lambda * q
//! ```
//!
//! with `P_{m,x}` the slot success probability. A decision is only profitable
//! while `m < x * (1 + lambda) / d` (beyond that the channel spend exceeds the
//! largest possible gain), which bounds the search over `m` per word length.

use crate::model::{binomial_tail, Belief, CodeDecision, SystemParams};

/// Two stage values closer than this are treated as an exact tie and resolved
/// toward the smaller `(m, x)` pair.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// The optimal contingency plan for one belief: a decision and a stage value
/// for every (remaining slots, queue length) state.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyTable {
    belief: Belief,
    params: SystemParams,
    /// Flattened `(t + 1) x (a_max + 1)`; row `s` holds stage `s`.
    decisions: Vec<CodeDecision>,
    values: Vec<f64>,
}

impl PolicyTable {
    fn idx(&self, s: u32, q: u32) -> usize {
        debug_assert!(s <= self.params.t() && q <= self.params.a_max());
        s as usize * (self.params.a_max() as usize + 1) + q as usize
    }

    /// Decision with `s >= 1` slots remaining and `q` packets queued.
    pub fn decision(&self, s: u32, q: u32) -> CodeDecision {
        assert!(s >= 1, "stage index counts remaining slots, starting at 1");
        self.decisions[self.idx(s, q)]
    }

    /// Stage value `J_s(q)`; `s = 0` gives the terminal penalty `-lambda * q`.
    pub fn value(&self, s: u32, q: u32) -> f64 {
        self.values[self.idx(s, q)]
    }

    /// Expected frame revenue `J_t(a)` when `a` packets arrive.
    pub fn value_at_start(&self, a: u32) -> f64 {
        self.value(self.params.t(), a)
    }

    pub fn belief(&self) -> Belief {
        self.belief
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// True if the policy never activates a channel from any reachable state.
    pub fn is_all_idle(&self) -> bool {
        let cols = self.params.a_max() as usize + 1;
        self.decisions[cols..].iter().all(|d| d.is_idle())
    }

    /// True if both tables prescribe identical decisions from every state
    /// reachable with at most `a` packets.
    pub fn same_decisions_up_to(&self, other: &PolicyTable, a: u32) -> bool {
        debug_assert_eq!(self.params, other.params);
        let a = a.min(self.params.a_max());
        (1..=self.params.t())
            .all(|s| (0..=a).all(|q| self.decision(s, q) == other.decision(s, q)))
    }
}

/// Search cap on `m` for word length `x`: spend at most the largest possible
/// gain `x * (1 + lambda)`, times a safety multiplier (see `solve_policy`).
fn heuristic_cap(params: &SystemParams, x: u32, mult: u64) -> u64 {
    if params.d() == 0.0 {
        return u64::MAX;
    }
    let base = (x as f64 * (1.0 + params.lambda()) / params.d()).ceil() as u64;
    base.saturating_mul(mult)
}

fn effective_cap(params: &SystemParams, x: u32, mult: u64) -> u64 {
    let h = heuristic_cap(params, x, mult);
    match params.channel_cap() {
        Some(k) => h.min(k as u64),
        None => h,
    }
}

/// Solve the frame problem exactly for one belief.
///
/// Ties (stage values within `1e-12` of the maximum) resolve to the smallest
/// `m`, then the smallest `x`; in particular a tie with idling idles. The
/// profitability argument guarantees the heuristic search cap on `m` is never
/// the argmax; should numerical noise ever make it bind, the cap is doubled
/// and the solve repeated rather than silently truncating the search.
pub fn solve_policy(belief: Belief, params: &SystemParams) -> PolicyTable {
    let mut mult = 1u64;
    loop {
        match try_solve(belief, params, mult) {
            Ok(table) => return table,
            Err(()) => mult = mult.checked_mul(2).expect("search cap overflow"),
        }
    }
}

fn try_solve(belief: Belief, params: &SystemParams, mult: u64) -> Result<PolicyTable, ()> {
    let t = params.t();
    let a_max = params.a_max();
    let cols = a_max as usize + 1;
    let d = params.d();
    let lambda = params.lambda();

    // Slot success probabilities, shared by all stages: tails[x][m].
    let tails: Vec<Vec<f64>> = (0..=a_max)
        .map(|x| {
            if x == 0 {
                Vec::new()
            } else {
                let cap = effective_cap(params, x, mult);
                (0..=cap).map(|m| binomial_tail(m as u32, x, belief)).collect()
            }
        })
        .collect();

    let mut decisions = vec![CodeDecision::IDLE; (t as usize + 1) * cols];
    let mut values = vec![0.0f64; (t as usize + 1) * cols];
    for q in 0..=a_max {
        values[q as usize] = -lambda * q as f64;
    }

    for s in 1..=t {
        let (prev_rows, cur_rows) = values.split_at_mut(s as usize * cols);
        let prev = &prev_rows[(s as usize - 1) * cols..];
        let cur = &mut cur_rows[..cols];
        for q in 0..=a_max {
            // Candidates beyond the idle baseline: x >= 1 packets over
            // m >= x channels (fewer channels than packets cannot succeed,
            // and x = 0 with m >= 1 is pure spend; both lose to idling).
            let mut vmax = 0.0f64;
            for x in 1..=q {
                let gain = x as f64 + prev[(q - x) as usize] - prev[q as usize];
                let cap = effective_cap(params, x, mult);
                for m in x as u64..=cap {
                    let v = -d * m as f64 + tails[x as usize][m as usize] * gain;
                    if v > vmax {
                        vmax = v;
                    }
                }
            }

            let mut best = CodeDecision::IDLE;
            if vmax > TIE_TOL {
                // Smallest (m, x) among the tied argmaxes, scanning m-major.
                let max_cap = (1..=q)
                    .map(|x| effective_cap(params, x, mult))
                    .max()
                    .unwrap_or(0);
                'scan: for m in 1..=max_cap {
                    for x in 1..=(q as u64).min(m) {
                        let x = x as u32;
                        if m > effective_cap(params, x, mult) {
                            continue;
                        }
                        let gain = x as f64 + prev[(q - x) as usize] - prev[q as usize];
                        let v = -d * m as f64 + tails[x as usize][m as usize] * gain;
                        if v >= vmax - TIE_TOL {
                            best = CodeDecision { m: m as u32, x };
                            break 'scan;
                        }
                    }
                }
                debug_assert!(!best.is_idle(), "positive gain must yield a decision");

                // The argmax landing exactly on the heuristic cap would mean
                // the profitability bound was violated numerically: widen.
                let heuristic_binds = match params.channel_cap() {
                    Some(k) => heuristic_cap(params, best.x, mult) < k as u64,
                    None => true,
                };
                if heuristic_binds && best.m as u64 == effective_cap(params, best.x, mult) {
                    return Err(());
                }
            }

            cur[q as usize] = prev[q as usize] + vmax;
            decisions[s as usize * cols + q as usize] = best;
        }
    }

    Ok(PolicyTable {
        belief,
        params: *params,
        decisions,
        values,
    })
}

/// Expected frame revenue of a fixed plan under the true connectivity,
/// indexed by arrival count.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyEvaluation {
    expected_revenue: Vec<f64>,
}

impl PolicyEvaluation {
    /// `E[frame revenue | a packets arrive]` for the evaluated plan.
    pub fn revenue(&self, a: u32) -> f64 {
        self.expected_revenue[a as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.expected_revenue
    }
}

/// Evaluate a solved plan exactly under connectivity `mu_star` (which may
/// differ from the belief the plan was solved for).
///
/// Same backward recursion as the solver, but the decision is read from the
/// table instead of maximized, and success probabilities use `mu_star`.
pub fn evaluate_policy(table: &PolicyTable, mu_star: Belief) -> PolicyEvaluation {
    let params = table.params();
    let a_max = params.a_max();
    let cols = a_max as usize + 1;
    let d = params.d();

    let mut prev: Vec<f64> = (0..=a_max).map(|q| -params.lambda() * q as f64).collect();
    let mut cur = vec![0.0f64; cols];
    for s in 1..=params.t() {
        for q in 0..=a_max {
            let dec = table.decision(s, q);
            let p = binomial_tail(dec.m, dec.x, mu_star);
            cur[q as usize] = -d * dec.m as f64
                + p * (dec.x as f64 + prev[(q - dec.x) as usize])
                + (1.0 - p) * prev[q as usize];
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    PolicyEvaluation {
        expected_revenue: prev,
    }
}

/// Best achievable expected frame revenue per arrival count when the true
/// connectivity is known.
pub fn genie_values(mu_star: Belief, params: &SystemParams) -> Vec<f64> {
    let table = solve_policy(mu_star, params);
    (0..=params.a_max()).map(|a| table.value_at_start(a)).collect()
}

/// Exact expected one-frame regret of acting on `belief` while the channels
/// follow `mu_star`: the genie's value minus the value of the belief-optimal
/// plan, both evaluated under `mu_star`. Zero when the belief is exact.
pub fn pseudo_regret_increment(
    arrival: u32,
    belief: Belief,
    mu_star: Belief,
    params: &SystemParams,
) -> f64 {
    if belief.get() == mu_star.get() {
        return 0.0;
    }
    let genie = solve_policy(mu_star, params);
    let played = solve_policy(belief, params);
    let actual = evaluate_policy(&played, mu_star);
    genie.value_at_start(arrival) - actual.revenue(arrival)
}
