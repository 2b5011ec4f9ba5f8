//! Structural analysis of the optimal policy: the activation threshold, the
//! single-packet closed form, a Gaussian continuous relaxation of the slot
//! revenue with its optimal block length, and regret upper-bound curves for
//! the optimistic learner.

use crate::dp::{genie_values, solve_policy, TIE_TOL};
use crate::error::Error;
use crate::model::{ArrivalDistribution, Belief, SystemParams};
use crate::Result;
use std::f64::consts::{PI, SQRT_2};

/// Default belief grid step for [`zeta_interval`] scans; decision tables in
/// this model change on much coarser scales.
pub const DEFAULT_GRID_STEP: f64 = 1e-3;

fn normal_cdf(z: f64) -> f64 {
    // erfc keeps full precision in the left tail, where 1 + erf cancels.
    0.5 * libm::erfc(-z / SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Belief threshold below which the optimal policy idles from every state.
///
/// Located by bisecting the all-idle predicate of the solved table over the
/// bracket `[d/(1+lambda), 2d/(1+lambda)]` (the policy provably idles at the
/// lower end and activates at the upper), to absolute tolerance `1e-6`.
/// When the bracket is clipped by the belief range and the policy still
/// idles at belief 1 (e.g. `d = 1`, `lambda = 0`), the threshold is 1.
pub fn critical_point(params: &SystemParams) -> Result<f64> {
    if params.d() == 0.0 {
        return Err(Error::NoIdleRegion);
    }
    let all_idle = |mu: f64| solve_policy(Belief::new(mu), params).is_all_idle();

    let lo0 = params.d() / (1.0 + params.lambda());
    debug_assert!(all_idle(lo0), "policy must idle at the lower bracket end");
    let mut lo = lo0;
    let mut hi = (2.0 * lo0).min(1.0);
    while all_idle(hi) {
        if hi >= 1.0 {
            return Ok(1.0);
        }
        lo = hi;
        hi = (2.0 * hi).min(1.0);
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if all_idle(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The single-packet optimal policy in closed form: one code length per
/// remaining-slots count plus the stage values `J_s(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DelayTolerantPolicy {
    code_lengths: Vec<u32>,
    values: Vec<f64>,
}

impl DelayTolerantPolicy {
    /// Channels used with `s >= 1` slots remaining (0 = idle).
    pub fn code_length(&self, s: u32) -> u32 {
        self.code_lengths[s as usize - 1]
    }

    /// Code lengths indexed by remaining slots minus one.
    pub fn code_lengths(&self) -> &[u32] {
        &self.code_lengths
    }

    /// `J_s(1)`; `s = 0` is the terminal penalty `-lambda`.
    pub fn value(&self, s: u32) -> f64 {
        self.values[s as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Closed-form solve of the single-packet model (`a_max = 1`).
///
/// With one packet the only word length is `x = 1` and the stage problem
/// reduces to choosing how many channels to spend on it. Channel `k`'s
/// marginal contribution is `(1-mu)^(k-1) * mu * (1 + J_{s-1}(0) - J_{s-1}(1)) - d`,
/// decreasing in `k`, so channels are added greedily while the contribution
/// is strictly positive (a zero contribution is a tie, resolved by not
/// spending, exactly as the full solver resolves it).
pub fn delay_tolerant_policy(mu: Belief, params: &SystemParams) -> Result<DelayTolerantPolicy> {
    if params.a_max() != 1 {
        return Err(Error::NotSinglePacket(params.a_max()));
    }
    let d = params.d();
    let p = mu.get();
    let cap = params.channel_cap().map_or(u64::MAX, u64::from);

    let t = params.t() as usize;
    let mut values = Vec::with_capacity(t + 1);
    values.push(-params.lambda());
    let mut code_lengths = Vec::with_capacity(t);
    for s in 1..=t {
        let gain = 1.0 - values[s - 1];
        let mut m = 0u64;
        let mut geo = 1.0f64; // (1 - p)^m
        while m < cap {
            if geo * p * gain - d <= TIE_TOL {
                break;
            }
            m += 1;
            geo *= 1.0 - p;
        }
        values.push(-d * m as f64 + (1.0 - geo) * gain + values[s - 1]);
        assert!(m <= u64::from(u32::MAX));
        code_lengths.push(m as u32);
    }

    Ok(DelayTolerantPolicy {
        code_lengths,
        values,
    })
}

/// Sign convention for the Gaussian argument in [`nu_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NuConvention {
    /// `Phi((m*mu - x)/sigma)`: the central-limit estimate of the probability
    /// that at least `x` of `m` channels connect. Grows with `m`, giving the
    /// revenue proxy an interior maximum. This is the default.
    SuccessProbability,
    /// `Phi((x - m*mu)/sigma)`: the mirrored argument, estimating the
    /// probability of a shortfall instead. It vanishes as `m` grows, so the
    /// proxy only decreases in `m`; kept selectable so the difference between
    /// the two readings can be demonstrated.
    ShortfallProbability,
}

fn validate_continuous(m: f64, x: f64, mu: Belief) -> Result<f64> {
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "block length must be positive and finite, got {m}"
        )));
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "word length must be positive and finite, got {x}"
        )));
    }
    let p = mu.get();
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::InvalidParams(format!(
            "connectivity must lie strictly inside (0, 1), got {p}"
        )));
    }
    Ok(p)
}

/// Gaussian proxy for the expected slot profit of a continuous `(m, x)` code:
/// `nu(m, x) = -d*m + x * (1 + lambda) * Phi((m*mu - x) / sqrt(m*mu*(1-mu)))`.
pub fn nu(m: f64, x: f64, mu: Belief, d: f64, lambda: f64) -> Result<f64> {
    nu_with(NuConvention::SuccessProbability, m, x, mu, d, lambda)
}

/// [`nu`] with an explicit sign convention for the Gaussian argument.
pub fn nu_with(
    convention: NuConvention,
    m: f64,
    x: f64,
    mu: Belief,
    d: f64,
    lambda: f64,
) -> Result<f64> {
    let p = validate_continuous(m, x, mu)?;
    let sigma = (m * p * (1.0 - p)).sqrt();
    let z = match convention {
        NuConvention::SuccessProbability => (m * p - x) / sigma,
        NuConvention::ShortfallProbability => (x - m * p) / sigma,
    };
    Ok(-d * m + x * (1.0 + lambda) * normal_cdf(z))
}

/// First-order stationarity residual of the block-length problem:
/// `(1+lambda) * x * phi(z) / sqrt(m*mu*(1-mu)) - 2d / (x/m + mu)` with
/// `z = (m*mu - x)/sqrt(m*mu*(1-mu))`. Zero exactly at interior extrema of
/// `nu(., x)`; it is the derivative of `nu` rescaled by `2m / (x + m*mu)`.
pub fn block_length_residual(m: f64, x: f64, mu: Belief, d: f64, lambda: f64) -> Result<f64> {
    let p = validate_continuous(m, x, mu)?;
    let sigma = (m * p * (1.0 - p)).sqrt();
    let z = (m * p - x) / sigma;
    Ok((1.0 + lambda) * x * normal_pdf(z) / sigma - 2.0 * d / (x / m + p))
}

/// The block length maximizing `nu(., x)`.
///
/// A geometric sweep around the median point `m = x/mu` locates the peak,
/// golden-section narrows it, and bisection on the sign of
/// [`block_length_residual`] polishes it until the residual magnitude is at
/// most `1e-8`. When the best achievable proxy value is nonpositive there is
/// no profitable block length and [`Error::IdleOptimal`] is returned.
pub fn optimal_block_length(x: f64, mu: Belief, d: f64, lambda: f64) -> Result<f64> {
    let p = validate_continuous(1.0, x, mu)?;
    let value = |m: f64| {
        let sigma = (m * p * (1.0 - p)).sqrt();
        -d * m + x * (1.0 + lambda) * normal_cdf((m * p - x) / sigma)
    };

    // Coarse geometric sweep over eight decades either side of the median
    // point. The peak's relative width shrinks like 1/sqrt(x), so the step
    // factor shrinks with x to keep at least a few samples on the peak.
    let m0 = x / p;
    let factor = 1.0 + (0.4 / (x + 1.0).sqrt()).min(0.1);
    let half_steps = (8.0 * std::f64::consts::LN_10 / factor.ln()).ceil() as i32;
    let mut best_j = 0;
    let mut best_v = f64::NEG_INFINITY;
    for j in -half_steps..=half_steps {
        let v = value(m0 * factor.powi(j));
        if v > best_v {
            best_v = v;
            best_j = j;
        }
    }

    // Golden-section on the bracketing pair of coarse steps.
    const INV_GOLD: f64 = 0.618_033_988_749_894_9;
    let mut a = m0 * factor.powi(best_j - 1);
    let mut b = m0 * factor.powi(best_j + 1);
    let mut c = b - INV_GOLD * (b - a);
    let mut e = a + INV_GOLD * (b - a);
    let mut fc = value(c);
    let mut fe = value(e);
    for _ in 0..300 {
        if b - a <= 1e-12 * b {
            break;
        }
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - INV_GOLD * (b - a);
            fc = value(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + INV_GOLD * (b - a);
            fe = value(e);
        }
    }
    let m_hat = 0.5 * (a + b);
    if value(m_hat) <= 0.0 {
        return Err(Error::IdleOptimal);
    }

    // Polish: bisect the stationarity residual across the peak.
    let res = |m: f64| block_length_residual(m, x, mu, d, lambda).expect("inputs validated");
    let mut l = m_hat * (1.0 - 1e-3);
    let mut r = m_hat * (1.0 + 1e-3);
    let mut widen = 0;
    while res(l) <= 0.0 {
        l *= 0.99;
        widen += 1;
        assert!(widen < 2000, "no positive-residual point left of the peak");
    }
    while res(r) >= 0.0 {
        r *= 1.01;
        widen += 1;
        assert!(widen < 4000, "no negative-residual point right of the peak");
    }
    let mut mid = 0.5 * (l + r);
    for _ in 0..200 {
        mid = 0.5 * (l + r);
        let rm = res(mid);
        if rm.abs() <= 1e-8 {
            break;
        }
        if rm > 0.0 {
            l = mid;
        } else {
            r = mid;
        }
    }
    assert!(
        res(mid).abs() <= 1e-8,
        "stationarity residual did not converge"
    );
    Ok(mid)
}

/// Result of the joint continuous relaxation over word length and block
/// length for one frame's arrivals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ContinuousOptimum {
    /// No profitable continuous code: every `(m, x)` has nonpositive proxy
    /// value.
    Idle,
    /// The maximizing continuous code and its rate `x / m`.
    Code { m: f64, x: f64, rate: f64 },
}

/// Maximize the Gaussian proxy jointly over word lengths `x` in `[1, a]` and
/// block lengths `m > 0`: golden-section over `x` (the profile in `x` is
/// unimodal) with [`optimal_block_length`] solving the inner problem.
///
/// The relaxation interpolates between integer word counts, so word lengths
/// below a single packet are excluded: as `x -> 0` with `m` proportional the
/// proxy degenerates to `x (-d m/x + (1+lambda)/2)`, which is positive at any
/// connectivity and would make idling impossible to detect.
///
/// Degenerate channels get their exact limits, which the proxy itself cannot
/// represent because its variance vanishes: never-connecting channels make
/// every activation pure cost, and certain channels need no redundancy, so
/// the whole queue goes out uncoded whenever a channel use pays for itself.
pub fn continuous_optimum(a: u32, mu: Belief, d: f64, lambda: f64) -> Result<ContinuousOptimum> {
    if a == 0 || mu.get() == 0.0 {
        return Ok(ContinuousOptimum::Idle);
    }
    if mu.get() == 1.0 {
        return Ok(if a as f64 * (1.0 + lambda - d) > TIE_TOL {
            ContinuousOptimum::Code {
                m: a as f64,
                x: a as f64,
                rate: 1.0,
            }
        } else {
            ContinuousOptimum::Idle
        });
    }
    validate_continuous(1.0, 1.0, mu)?;

    // Inner solve: best proxy value at word length x, with idling worth 0.
    let inner = |x: f64| -> (f64, f64) {
        match optimal_block_length(x, mu, d, lambda) {
            Ok(m) => (nu(m, x, mu, d, lambda).expect("inputs validated"), m),
            Err(Error::IdleOptimal) => (0.0, f64::NAN),
            Err(e) => unreachable!("validated inputs cannot fail: {e}"),
        }
    };

    const INV_GOLD: f64 = 0.618_033_988_749_894_9;
    let mut lo = 1.0;
    let mut hi = a as f64;
    let mut c = hi - INV_GOLD * (hi - lo);
    let mut e = lo + INV_GOLD * (hi - lo);
    let mut fc = inner(c).0;
    let mut fe = inner(e).0;
    while hi - lo > 1e-8 {
        if fc >= fe {
            hi = e;
            e = c;
            fe = fc;
            c = hi - INV_GOLD * (hi - lo);
            fc = inner(c).0;
        } else {
            lo = c;
            c = e;
            fc = fe;
            e = lo + INV_GOLD * (hi - lo);
            fe = inner(e).0;
        }
    }
    let x_interior = 0.5 * (lo + hi);
    let (v_interior, m_interior) = inner(x_interior);
    // The maximum often sits on the full-queue boundary; prefer the exact
    // endpoint whenever it is at least as good.
    let (v_edge, m_edge) = inner(a as f64);
    let (x_best, v_best, m_best) = if v_edge >= v_interior {
        (a as f64, v_edge, m_edge)
    } else {
        (x_interior, v_interior, m_interior)
    };

    if v_best <= 0.0 {
        return Ok(ContinuousOptimum::Idle);
    }
    Ok(ContinuousOptimum::Code {
        m: m_best,
        x: x_best,
        rate: x_best / m_best,
    })
}

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `(-1, 1)`,
/// computed by Newton iteration on the Legendre polynomial.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    // Legendre P_n and its derivative at z, by the three-term recurrence.
    let eval = |z: f64| {
        let mut p0 = 1.0f64;
        let mut p1 = 0.0f64;
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
        }
        let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
        (p0, dp)
    };
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = eval(z);
            let step = p / dp;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = eval(z);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tail-weight series for the constant part of the bounded-regret case:
/// `psi(eps) = n_eps + t * m_max * (pi^2/2) * sum_{n >= n_eps} (n - ln(n+1)/eps)^-2`
/// where `n_eps` is the first positive integer at which the summand's
/// denominator base `g(n) = n - ln(n+1)/eps` turns positive.
///
/// The series is summed explicitly until `g` is large, then closed with the
/// integral `int_{M+1/2}^inf g(u)^-2 du` (an upper bound on the remainder by
/// convexity, evaluated by Gauss-Legendre panels). The result overestimates
/// the true value by at most one part in `1e9`.
pub fn psi(epsilon: f64, t: u32, m_max: u64) -> f64 {
    assert!(
        epsilon > 0.0 && epsilon.is_finite(),
        "epsilon must be positive and finite"
    );
    let g = |u: f64| u - (u + 1.0).ln() / epsilon;
    let g_prime = |u: f64| 1.0 - 1.0 / (epsilon * (u + 1.0));

    // First positive integer with g(n) > 0, by doubling then binary search.
    let n_eps = if g(1.0) > 0.0 {
        1.0
    } else {
        let mut hi = 2.0f64;
        while g(hi) <= 0.0 {
            hi *= 2.0;
        }
        let mut lo = hi / 2.0; // g(lo) <= 0 < g(hi)
        while hi - lo > 1.0 {
            let mid = ((lo + hi) / 2.0).floor();
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    debug_assert!(g(n_eps) > 0.0 && (n_eps < 1.5 || g(n_eps - 1.0) <= 0.0));

    // Explicit terms until the remainder's closing error is negligible: the
    // integral closure below overshoots by O(g^-3), so running g up to ~1e3
    // keeps the overshoot under 1e-9 of the (at least 1) first term.
    let mut sum = 0.0;
    let mut n = n_eps;
    loop {
        let gv = g(n);
        sum += 1.0 / (gv * gv);
        if gv >= 1e3 && n - n_eps >= 63.0 {
            break;
        }
        n += 1.0;
    }

    // Remainder: sum_{k > n} g(k)^-2 <= int_{n+1/2}^inf g(u)^-2 du since the
    // integrand is convex. Dyadic Gauss-Legendre panels, closed by the
    // tangent-line bound 1/(g'(B) g(B)) once it is relatively tiny.
    let (nodes, weights) = gauss_legendre(16);
    let mut tail = 0.0;
    let mut left = n + 0.5;
    for _ in 0..300 {
        let right = 2.0 * left;
        let half = 0.5 * (right - left);
        let mid = 0.5 * (right + left);
        let mut panel = 0.0;
        for (&z, &w) in nodes.iter().zip(&weights) {
            let u = mid + half * z;
            let gv = g(u);
            panel += w / (gv * gv);
        }
        tail += panel * half;
        left = right;
        let closing = 1.0 / (g_prime(left) * g(left));
        if closing <= 1e-13 * (sum + tail + closing) {
            tail += closing;
            break;
        }
    }

    let scale = t as f64 * m_max as f64 * PI * PI / 2.0;
    n_eps + scale * (sum + tail)
}

/// Largest belief interval around `mu_star` on which the solved policy,
/// restricted to the states reachable when `a` packets arrive (queues up to
/// `a`), prescribes exactly the decisions it prescribes at `mu_star`.
///
/// Scans outward in `grid_step` increments, then refines each boundary by
/// bisection; returned endpoints lie inside the interval, within `1e-6` of
/// its true edges, clamped to `[0, 1]`.
pub fn zeta_interval(
    a: u32,
    mu_star: Belief,
    params: &SystemParams,
    grid_step: f64,
) -> Result<(f64, f64)> {
    if !grid_step.is_finite() || grid_step <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "grid step must be positive and finite, got {grid_step}"
        )));
    }
    if a > params.a_max() {
        return Err(Error::InvalidParams(format!(
            "arrival {a} exceeds the arrival bound {}",
            params.a_max()
        )));
    }
    let reference = solve_policy(mu_star, params);
    let same = |b: f64| solve_policy(Belief::new(b), params).same_decisions_up_to(&reference, a);
    let center = mu_star.get();

    let refine = |mut inside: f64, mut outside: f64| -> f64 {
        while (outside - inside).abs() > 1e-7 {
            let mid = 0.5 * (inside + outside);
            if same(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };

    // Upward boundary.
    let mut inside = center;
    let mut upper = 1.0;
    let mut k = 1u64;
    loop {
        let b = center + k as f64 * grid_step;
        if b >= 1.0 {
            if !same(1.0) {
                upper = refine(inside, 1.0);
            }
            break;
        }
        if same(b) {
            inside = b;
        } else {
            upper = refine(inside, b);
            break;
        }
        k += 1;
    }

    // Downward boundary.
    let mut inside = center;
    let mut lower = 0.0;
    let mut k = 1u64;
    loop {
        let b = center - k as f64 * grid_step;
        if b <= 0.0 {
            if !same(0.0) {
                lower = refine(inside, 0.0);
            }
            break;
        }
        if same(b) {
            inside = b;
        } else {
            lower = refine(inside, b);
            break;
        }
        k += 1;
    }

    Ok((lower, upper))
}

/// Which squared gap scales the logarithmic term of the below-threshold
/// regret bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapConvention {
    /// `(zeta - mu_star)^2`: distance to the activation threshold. Default,
    /// consistent with the deviation argument behind the bound.
    CriticalPoint,
    /// `(d - mu_star)^2`: distance to the channel cost, kept selectable for
    /// comparison.
    ChannelCost,
}

/// A regret upper-bound curve `n -> slope * ln(n) + intercept`.
///
/// Below the activation threshold the bound grows logarithmically; at or
/// above it the bound is a constant (slope zero).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegretBound {
    slope: f64,
    intercept: f64,
}

impl RegretBound {
    pub fn eval(&self, n: u64) -> f64 {
        self.slope * (n.max(1) as f64).ln() + self.intercept
    }

    /// True in the bounded-regret case (no horizon dependence).
    pub fn is_constant(&self) -> bool {
        self.slope == 0.0
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }
}

#[allow(clippy::too_many_arguments)]
fn bound_parts(
    mu_star: Belief,
    params: &SystemParams,
    arrivals: &ArrivalDistribution,
    beta: f64,
    zeta_intervals: &[(f64, f64)],
    per_arrival_bounds: &[f64],
    genie: &[f64],
    convention: GapConvention,
) -> Result<(f64, f64)> {
    if beta.is_nan() || beta < 4.0 {
        return Err(Error::Unsupported(format!(
            "the regret bound requires beta >= 4, got {beta}"
        )));
    }
    let cells = params.a_max() as usize + 1;
    assert_eq!(zeta_intervals.len(), cells);
    assert_eq!(per_arrival_bounds.len(), cells);
    assert_eq!(genie.len(), cells);

    let zeta = critical_point(params)?;
    let mu = mu_star.get();
    let tm = params.t() as f64 * params.m_max() as f64;

    if mu < zeta {
        let gap = match convention {
            GapConvention::CriticalPoint => zeta - mu,
            GapConvention::ChannelCost => params.d() - mu,
        };
        let gap2 = gap * gap;
        let mut slope = 0.0;
        let mut intercept = 0.0;
        #[allow(clippy::needless_range_loop)]
        for a in 0..cells {
            let w = arrivals.prob(a as u32) * per_arrival_bounds[a];
            if w == 0.0 {
                continue;
            }
            if gap2 == 0.0 {
                return Err(Error::InvalidParams(
                    "zero squared gap under the selected convention".into(),
                ));
            }
            slope += w * 2.0 * beta / gap2;
            intercept += w * tm * PI * PI / 6.0;
        }
        Ok((slope, intercept))
    } else {
        let mut intercept = 0.0;
        for a in 0..cells {
            // Zero-probability or zero-scale terms contribute nothing and are
            // skipped before the divergence check below.
            let w = arrivals.prob(a as u32) * (genie[a] + per_arrival_bounds[a]);
            if w == 0.0 {
                continue;
            }
            let gap = mu - zeta_intervals[a].1;
            let eps = gap * gap / (2.0 * beta);
            if eps == 0.0 {
                return Err(Error::UnboundedBound {
                    mu_star: mu,
                    arrival: a as u32,
                });
            }
            intercept += w * (tm * PI * PI / 3.0 + psi(eps, params.t(), params.m_max()));
        }
        Ok((0.0, intercept))
    }
}

/// Regret upper bound at horizon `n` from caller-supplied per-arrival data:
/// decision-stability intervals, worst-case per-frame regrets `B_a`, and the
/// known-connectivity values `J*(a)`.
///
/// Below the activation threshold the bound is
/// `sum_a alpha_a B_a (2 beta ln n / gap^2 + t m_max pi^2/6)`; at or above it
/// `sum_a alpha_a (J*(a) + B_a)(t m_max pi^2/3 + psi((mu - zeta_a^u)^2 / 2 beta))`.
#[allow(clippy::too_many_arguments)]
pub fn regret_upper_bound(
    mu_star: Belief,
    params: &SystemParams,
    arrivals: &ArrivalDistribution,
    beta: f64,
    n: u64,
    zeta_intervals: &[(f64, f64)],
    per_arrival_bounds: &[f64],
    genie: &[f64],
    convention: GapConvention,
) -> Result<f64> {
    let (slope, intercept) = bound_parts(
        mu_star,
        params,
        arrivals,
        beta,
        zeta_intervals,
        per_arrival_bounds,
        genie,
        convention,
    )?;
    Ok(RegretBound { slope, intercept }.eval(n))
}

/// Assemble a [`RegretBound`] curve, computing the per-arrival inputs
/// (stability intervals, worst-case frame regrets, genie values) internally.
pub fn prepare_regret_bound(
    mu_star: Belief,
    params: &SystemParams,
    arrivals: &ArrivalDistribution,
    beta: f64,
    convention: GapConvention,
    grid_step: f64,
) -> Result<RegretBound> {
    let a_max = params.a_max();
    let zeta_intervals: Vec<(f64, f64)> = (0..=a_max)
        .map(|a| zeta_interval(a, mu_star, params, grid_step))
        .collect::<Result<_>>()?;
    let per_arrival_bounds: Vec<f64> = (0..=a_max)
        .map(|a| params.per_frame_regret_bound(a))
        .collect();
    let genie = genie_values(mu_star, params);
    let (slope, intercept) = bound_parts(
        mu_star,
        params,
        arrivals,
        beta,
        &zeta_intervals,
        &per_arrival_bounds,
        &genie,
        convention,
    )?;
    Ok(RegretBound { slope, intercept })
}
