//! Core system model: frame/slot timing parameters, erasure-code decisions,
//! channel realizations and arrival distributions.
//!
//! A frame consists of `T` slots. In each slot the controller chooses a code
//! `(m, x)`: `x` packets are spread over `m` parallel channels and the slot
//! delivers all `x` of them iff at least `x` channels are connected.
//! Channels connect independently with probability `mu`, so the slot success
//! probability is the binomial tail `P(Bin(m, mu) >= x)`.

use rand::Rng;

use crate::error::Error;
use crate::Result;

/// Tolerance used when validating that a pmf sums to one.
const PMF_SUM_TOL: f64 = 1e-9;

/// Static parameters of the transmission system.
///
/// Invariants are enforced at construction: `t >= 1`, `0 <= d <= 1`,
/// `lambda >= 0`, and `d > 0` unless an explicit per-slot channel cap bounds
/// the decision space (with `d = 0` and no cap, arbitrarily many channels
/// would be free and the control problem degenerates).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    t: u32,
    d: f64,
    lambda: f64,
    a_max: u32,
    channel_cap: Option<u32>,
}

impl SystemParams {
    pub fn new(t: u32, d: f64, lambda: f64, a_max: u32, channel_cap: Option<u32>) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidParams("frame length t must be >= 1".into()));
        }
        if !d.is_finite() || !(0.0..=1.0).contains(&d) {
            return Err(Error::InvalidParams(format!(
                "channel use cost d must lie in [0, 1], got {d}"
            )));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParams(format!(
                "deadline penalty lambda must be finite and >= 0, got {lambda}"
            )));
        }
        if d == 0.0 && channel_cap.is_none() {
            return Err(Error::InvalidParams(
                "d = 0 requires an explicit channel cap".into(),
            ));
        }
        Ok(Self {
            t,
            d,
            lambda,
            a_max,
            channel_cap,
        })
    }

    /// Number of slots per frame.
    pub fn t(&self) -> u32 {
        self.t
    }

    /// Cost per activated channel.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Penalty per packet still queued at the frame deadline.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Largest possible number of packet arrivals per frame.
    pub fn a_max(&self) -> u32 {
        self.a_max
    }

    /// Optional hard per-slot limit on the number of channels.
    pub fn channel_cap(&self) -> Option<u32> {
        self.channel_cap
    }

    /// Upper bound on the total number of channel uses in one frame,
    /// `ceil(t * a_max / d)`, tightened to `t * cap` when a hard per-slot cap
    /// is configured.
    pub fn m_max(&self) -> u64 {
        let by_cost = if self.d > 0.0 {
            (self.t as f64 * self.a_max as f64 / self.d).ceil() as u64
        } else {
            u64::MAX
        };
        let by_cap = self
            .channel_cap
            .map(|k| self.t as u64 * k as u64)
            .unwrap_or(u64::MAX);
        by_cost.min(by_cap)
    }

    /// Worst-case per-frame regret when `a` packets arrive: the maximum
    /// possible channel spend `t * a / d` plus the maximum deadline penalty
    /// `lambda * a`.
    pub fn per_frame_regret_bound(&self, a: u32) -> f64 {
        if a == 0 {
            return 0.0;
        }
        let spend = if self.d > 0.0 {
            self.t as f64 * a as f64 / self.d
        } else {
            // With d = 0 the spend term vanishes from the revenue entirely.
            0.0
        };
        spend + self.lambda * a as f64
    }
}

/// An estimate of the channel connectivity, clamped to `[0, 1]`.
///
/// Optimistic learner indices can exceed 1 before clamping; the clamp happens
/// here, at the type boundary, so every downstream computation sees a valid
/// probability.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Belief(f64);

impl Belief {
    /// Clamp `v` into `[0, 1]`. Panics on NaN, which can only arise from a
    /// programming error upstream.
    pub fn new(v: f64) -> Self {
        assert!(!v.is_nan(), "belief must not be NaN");
        Self(v.clamp(0.0, 1.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// A per-slot erasure-code choice: `x` packets over `m` channels.
///
/// `(0, 0)` is the idle decision. `x > m` is representable but useless: the
/// slot then succeeds with probability zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CodeDecision {
    pub m: u32,
    pub x: u32,
}

impl CodeDecision {
    pub const IDLE: CodeDecision = CodeDecision { m: 0, x: 0 };

    pub fn is_idle(&self) -> bool {
        self.m == 0 && self.x == 0
    }
}

/// Connectivity outcome of the channels activated in one slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelRealization {
    states: Vec<bool>,
}

impl ChannelRealization {
    pub fn new(states: Vec<bool>) -> Self {
        Self { states }
    }

    /// Number of connected channels.
    pub fn connected(&self) -> u32 {
        self.states.iter().filter(|&&b| b).count() as u32
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.states
    }
}

/// Success probability of a slot: `P(Bin(m, mu) >= x)`.
///
/// Computed by direct summation of binomial probabilities in the direction of
/// the smaller tail, with each starting term built from a running product that
/// interleaves the `(1 - mu)` factors (no factorials, no overflow). Absolute
/// error stays well below `1e-12` for the block lengths this crate uses.
pub fn binomial_tail(m: u32, x: u32, mu: Belief) -> f64 {
    if x == 0 {
        return 1.0;
    }
    if x > m {
        return 0.0;
    }
    let p = mu.get();
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    if (x as f64) > m as f64 * p {
        // x sits at or above the mode: the upper tail has the decreasing terms.
        sum_pmf_up(m, x, p)
    } else {
        // x sits below the mean: sum the lower tail downward and complement.
        1.0 - sum_pmf_down(m, x - 1, p)
    }
}

/// `P(Bin(m, p) = k)` for `0 < p < 1`, via an overflow-safe running product.
fn binom_pmf(m: u32, k: u32, p: f64) -> f64 {
    let q = 1.0 - p;
    let mut t = 1.0f64;
    let mut q_left = m - k;
    for i in 1..=k {
        t *= (m - k + i) as f64 / i as f64 * p;
        // Keep the partial product in range by spending (1 - p) factors early.
        while t > 1.0 && q_left > 0 {
            t *= q;
            q_left -= 1;
        }
    }
    for _ in 0..q_left {
        t *= q;
    }
    t
}

/// Sum of `P(Bin(m, p) = k)` for `k = lo..=m`; terms are nonincreasing when
/// `lo` is at or above the mode.
fn sum_pmf_up(m: u32, lo: u32, p: f64) -> f64 {
    let ratio = p / (1.0 - p);
    let mut term = binom_pmf(m, lo, p);
    let mut acc = term;
    for k in lo..m {
        term *= (m - k) as f64 / (k + 1) as f64 * ratio;
        acc += term;
    }
    acc.min(1.0)
}

/// Sum of `P(Bin(m, p) = k)` for `k = 0..=hi`; terms are nonincreasing going
/// down when `hi` is below the mode.
fn sum_pmf_down(m: u32, hi: u32, p: f64) -> f64 {
    let ratio = (1.0 - p) / p;
    let mut term = binom_pmf(m, hi, p);
    let mut acc = term;
    let mut k = hi;
    while k > 0 {
        term *= k as f64 / (m - k + 1) as f64 * ratio;
        acc += term;
        k -= 1;
    }
    acc.min(1.0)
}

/// Packets delivered in a slot: `x` on success (at least `x` channels
/// connected), zero otherwise.
pub fn throughput(decision: CodeDecision, realization: &ChannelRealization) -> u32 {
    assert_eq!(
        realization.len(),
        decision.m as usize,
        "realization must cover exactly the activated channels"
    );
    if decision.x > 0 && realization.connected() >= decision.x {
        decision.x
    } else {
        0
    }
}

/// Slot revenue: delivered packets minus the channel spend `d * m`.
pub fn revenue(decision: CodeDecision, realization: &ChannelRealization, d: f64) -> f64 {
    throughput(decision, realization) as f64 - d * decision.m as f64
}

/// Draw the connectivity of `m` channels, consuming exactly `m` values from
/// the stream (one uniform per channel, connected iff `u < mu_star`).
pub fn sample_channels<R: Rng + ?Sized>(
    m: u32,
    mu_star: Belief,
    rng: &mut R,
) -> ChannelRealization {
    let p = mu_star.get();
    let states = (0..m).map(|_| rng.random::<f64>() < p).collect();
    ChannelRealization::new(states)
}

/// Distribution of per-frame packet arrivals on `{0, .., a_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalDistribution {
    pmf: Vec<f64>,
}

impl ArrivalDistribution {
    /// Validate an explicit pmf over `{0, .., pmf.len() - 1}`.
    pub fn from_pmf(pmf: Vec<f64>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::InvalidArrivals("pmf must be nonempty".into()));
        }
        if pmf.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidArrivals(
                "pmf entries must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > PMF_SUM_TOL {
            return Err(Error::InvalidArrivals(format!(
                "pmf sums to {total}, expected 1"
            )));
        }
        Ok(Self { pmf })
    }

    /// Equiprobable arrivals on `{0, .., a_max}`.
    pub fn uniform(a_max: u32) -> Self {
        let n = a_max as usize + 1;
        Self {
            pmf: vec![1.0 / n as f64; n],
        }
    }

    /// Poisson(rate) conditioned on `{0, .., a_max}` (weights renormalized).
    pub fn truncated_poisson(rate: f64, a_max: u32) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidArrivals(format!(
                "poisson rate must be finite and >= 0, got {rate}"
            )));
        }
        // Unnormalized weights rate^k / k! by running product; the common
        // exp(-rate) factor cancels in the normalization.
        let mut weights = Vec::with_capacity(a_max as usize + 1);
        let mut w = 1.0f64;
        weights.push(w);
        for k in 1..=a_max {
            w *= rate / k as f64;
            weights.push(w);
        }
        let total: f64 = weights.iter().sum();
        Ok(Self {
            pmf: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// All frames carry exactly `a` packets.
    pub fn point(a: u32) -> Self {
        let mut pmf = vec![0.0; a as usize + 1];
        pmf[a as usize] = 1.0;
        Self { pmf }
    }

    /// Largest supported arrival count.
    pub fn a_max(&self) -> u32 {
        self.pmf.len() as u32 - 1
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of exactly `a` arrivals.
    pub fn prob(&self, a: u32) -> f64 {
        self.pmf.get(a as usize).copied().unwrap_or(0.0)
    }
}

/// Draw one arrival count by inverse CDF, consuming exactly one value from
/// the stream.
pub fn sample_arrival<R: Rng + ?Sized>(dist: &ArrivalDistribution, rng: &mut R) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, &p) in dist.pmf().iter().enumerate() {
        acc += p;
        if u < acc {
            return a as u32;
        }
    }
    // Rounding can leave acc marginally below 1; fall back to the largest
    // arrival that carries mass.
    dist.pmf()
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(0) as u32
}
