//! Learners that estimate the channel connectivity from ACK feedback.
//!
//! All channels are exchangeable, so every learner pools the per-channel
//! ACK bits from all slots into a single success/trial count. The resulting
//! belief is fed to the planner ([`crate::solve_policy`]) at the start of each
//! frame; feedback from a frame is folded in only after that frame completes,
//! so the belief used in frame `n` never depends on frame-`n` outcomes.

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::model::{Belief, ChannelRealization};
use crate::{Error, Result};

/// ACK bits collected over one frame: one bit per activated channel, `true`
/// for a connected channel. Slots are concatenated in transmission order; an
/// all-idle frame yields an empty batch.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeedbackBatch {
    bits: Vec<bool>,
}

impl FeedbackBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Append the ACKs of one slot's activated channels.
    pub fn push_slot(&mut self, realization: &ChannelRealization) {
        self.bits.extend_from_slice(realization.bits());
    }

    /// Number of channel observations (total activations across slots).
    pub fn len(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of positive ACKs in the batch.
    pub fn ones(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Optimistic index learner: pooled empirical mean plus an exploration bonus
/// `sqrt(beta * ln n / (2 z))` that shrinks as observations accumulate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UcbState {
    /// Total channel activations observed (including the free initial sample).
    z: u64,
    /// Total positive ACKs among them.
    sum: u64,
    /// Exploration coefficient; at least 3.
    beta: f64,
}

impl UcbState {
    pub fn z(&self) -> u64 {
        self.z
    }

    pub fn sum(&self) -> u64 {
        self.sum
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Initialize the optimistic learner with one free channel observation.
///
/// The free sample is a single Bernoulli(`mu_star`) draw — it consumes exactly
/// one value from `rng` — so the empirical mean is defined from frame 1 on
/// even if the policy idles forever after. `beta` below 3 breaks the
/// concentration argument behind the index and is rejected.
pub fn ucb_init<R: Rng + ?Sized>(beta: f64, mu_star: Belief, rng: &mut R) -> Result<UcbState> {
    if beta.is_nan() || beta < 3.0 {
        return Err(Error::BetaTooSmall(beta));
    }
    let hit = rng.random::<f64>() < mu_star.get();
    Ok(UcbState {
        z: 1,
        sum: hit as u64,
        beta,
    })
}

/// The raw optimistic index before clamping, with the log of the frame index
/// supplied directly. Split out so exact log values can be exercised.
fn ucb_index(state: &UcbState, ln_n: f64) -> f64 {
    let z = state.z as f64;
    state.sum as f64 / z + (state.beta * ln_n / (2.0 * z)).sqrt()
}

/// Belief for frame `n >= 1`: `clamp(sum/z + sqrt(beta * ln n / (2 z)), 0, 1)`
/// with the natural logarithm. At `n = 1` the bonus vanishes and the belief is
/// the plain empirical mean.
pub fn ucb_belief(state: &UcbState, n: u64) -> Belief {
    assert!(n >= 1, "frame indices start at 1");
    Belief::new(ucb_index(state, (n as f64).ln()))
}

/// Fold one frame's feedback into the pooled counts. An empty batch (idle
/// frame) leaves the state unchanged.
pub fn ucb_update(state: UcbState, batch: &FeedbackBatch) -> UcbState {
    UcbState {
        z: state.z + batch.len(),
        sum: state.sum + batch.ones(),
        beta: state.beta,
    }
}

/// Posterior-sampling learner: Beta posterior over the connectivity, one draw
/// per frame as the belief.
///
/// `theta0` counts failures plus one, `theta1` successes plus one, so the
/// posterior density is proportional to `(1-x)^(theta0-1) * x^(theta1-1)` and
/// the fresh state is Uniform(0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TsState {
    theta0: u64,
    theta1: u64,
}

impl TsState {
    /// Failure count plus one.
    pub fn theta0(&self) -> u64 {
        self.theta0
    }

    /// Success count plus one.
    pub fn theta1(&self) -> u64 {
        self.theta1
    }
}

/// Fresh uniform prior.
pub fn ts_init() -> TsState {
    TsState {
        theta0: 1,
        theta1: 1,
    }
}

/// One posterior draw. Consumes a state-dependent number of values from `rng`
/// (the Beta sampler is rejection-based), deterministically for a given
/// `(state, rng)` pair.
pub fn ts_belief<R: Rng + ?Sized>(state: &TsState, rng: &mut R) -> Belief {
    let beta = Beta::new(state.theta1 as f64, state.theta0 as f64)
        .expect("posterior parameters are positive integers");
    Belief::new(beta.sample(rng))
}

/// Add the batch's failures to `theta0` and successes to `theta1`.
pub fn ts_update(state: TsState, batch: &FeedbackBatch) -> TsState {
    let ones = batch.ones();
    TsState {
        theta0: state.theta0 + (batch.len() - ones),
        theta1: state.theta1 + ones,
    }
}

/// Baseline that knows the true connectivity; its belief is always exact, so
/// it defines the zero of the regret scale.
pub fn genie_belief(mu_star: Belief) -> Belief {
    mu_star
}

/// A learner of any kind, as carried through a simulation replication.
#[derive(Clone, Debug, PartialEq)]
pub enum LearnerState {
    Ucb(UcbState),
    Ts(TsState),
    Genie(Belief),
}

impl LearnerState {
    /// Belief for frame `n`. Only the posterior sampler consumes randomness.
    pub fn belief<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Belief {
        match self {
            LearnerState::Ucb(s) => ucb_belief(s, n),
            LearnerState::Ts(s) => ts_belief(s, rng),
            LearnerState::Genie(mu) => genie_belief(*mu),
        }
    }

    /// Fold in one completed frame's feedback; a no-op for the baseline.
    pub fn update(&mut self, batch: &FeedbackBatch) {
        match self {
            LearnerState::Ucb(s) => *s = ucb_update(*s, batch),
            LearnerState::Ts(s) => *s = ts_update(*s, batch),
            LearnerState::Genie(_) => {}
        }
    }
}
