use thiserror::Error;

/// Errors raised by constructors and analysis routines.
///
/// Numerical routines in this crate are written so that, once the inputs have
/// been validated, they cannot fail; everything fallible is funneled through
/// this enum at the boundaries.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// System parameters violate a model precondition.
    #[error("invalid system parameters: {0}")]
    InvalidParams(String),

    /// An arrival distribution was not a probability mass function.
    #[error("invalid arrival distribution: {0}")]
    InvalidArrivals(String),

    /// A belief or connectivity probability was NaN.
    #[error("belief must be a (possibly out-of-range) real number, got NaN")]
    NanBelief,

    /// UCB exploration constant below the admissible minimum of 3.
    #[error("UCB exploration constant beta = {0} is below the minimum 3")]
    BetaTooSmall(f64),

    /// An analysis routine that only covers the single-packet model was
    /// called with a multi-packet arrival bound.
    #[error("operation requires a_max = 1, got a_max = {0}")]
    NotSinglePacket(u32),

    /// The channel-cost parameter admits no idle region to bracket.
    #[error("activation threshold undefined: d = 0 leaves no idle region")]
    NoIdleRegion,

    /// The Gaussian revenue proxy has no profitable interior block length:
    /// idling dominates every `m > 0`.
    #[error("no profitable block length: idling is optimal at this connectivity")]
    IdleOptimal,

    /// The regret upper bound diverges because the true connectivity sits
    /// exactly on a decision-change boundary.
    #[error("regret bound is unbounded: connectivity {mu_star} coincides with a decision boundary for arrival {arrival}")]
    UnboundedBound { mu_star: f64, arrival: u32 },

    /// A bound or overlay was requested for a configuration it does not cover.
    #[error("{0}")]
    Unsupported(String),
}
