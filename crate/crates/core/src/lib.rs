//! Simulator and analysis toolkit for dynamic erasure coding over
//! deadline-constrained multi-channel networks.
//!
//! A controller serves packet frames of `T` slots over `m` parallel channels,
//! each an independent Bernoulli link with unknown connectivity `mu_star`.
//! Per slot it picks an `(m, x)` code: `x` packets go out over `m` channels
//! and are all delivered iff at least `x` channels connect. Channel uses cost
//! `d` each and packets left at the frame deadline cost `lambda` each.
//!
//! The crate provides
//! - the exact finite-horizon solver for the per-frame control problem
//!   ([`solve_policy`]) and exact policy evaluation under a true connectivity
//!   ([`evaluate_policy`]),
//! - structural analysis of the optimal policy: activation threshold,
//!   single-packet closed form, Gaussian block-length approximation and
//!   regret upper bounds ([`analysis`]),
//! - optimistic (UCB-style) and posterior-sampling learners that estimate
//!   `mu_star` from ACK feedback ([`learner`]),
//! - a reproducible frame-level simulation engine with exact per-frame
//!   pseudo-regret accounting ([`sim`]).

pub mod analysis;
pub mod dp;
mod error;
pub mod learner;
pub mod model;
pub mod sim;

pub use dp::{
    evaluate_policy, genie_values, pseudo_regret_increment, solve_policy, PolicyEvaluation,
    PolicyTable,
};
pub use error::Error;
pub use learner::{FeedbackBatch, LearnerState, TsState, UcbState};
pub use model::{
    binomial_tail, revenue, sample_arrival, sample_channels, throughput, ArrivalDistribution,
    Belief, ChannelRealization, CodeDecision, SystemParams,
};
pub use sim::{
    bound_overlay, curve_to_csv, run_experiment, run_experiment_with_workers, run_frame,
    run_replication, ExperimentConfig, FrameOutcome, LearnerKind, RegretCurve, Simulator,
    TransitionMode,
};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
