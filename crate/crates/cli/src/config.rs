//! The on-disk experiment description and its conversion into engine types.
//!
//! A config is a single JSON object mirroring the engine's experiment fields;
//! unknown keys are hard errors so a typo cannot silently fall back to a
//! default and poison a reproduction run.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use dlcode_core::{
    ArrivalDistribution, Belief, ExperimentConfig, LearnerKind, SystemParams, TransitionMode,
};

fn default_horizon() -> u64 {
    10_000
}

fn default_replications() -> u32 {
    200
}

/// JSON shape of an experiment. All fields except `params`, `arrivals`,
/// `mu_star` and `learner` have defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub params: ParamsFile,
    pub arrivals: ArrivalsFile,
    /// True channel connectivity in `[0, 1]`.
    pub mu_star: f64,
    pub learner: LearnerFile,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_replications")]
    pub replications: u32,
    /// Omit to draw a fresh seed at run time; summaries echo the resolved
    /// value so any run can be repeated exactly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    #[serde(default)]
    pub transition_mode: TransitionModeFile,
}

/// `{"t": .., "d": .., "lambda": .., "a_max": .., "channel_cap": ..?}`
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    /// Slots per frame.
    pub t: u32,
    /// Cost per activated channel.
    pub d: f64,
    /// Penalty per packet still queued at the deadline.
    pub lambda: f64,
    /// Largest possible arrival batch.
    pub a_max: u32,
    /// Optional hard per-slot limit on activated channels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_cap: Option<u32>,
}

/// Arrival law, e.g. `{"point": {"a": 1}}` or `{"uniform": {"a_max": 6}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ArrivalsFile {
    /// The same batch size every frame.
    Point { a: u32 },
    /// Equally likely batch sizes `0..=a_max`.
    Uniform { a_max: u32 },
    /// Poisson(`rate`) conditioned on `0..=a_max`.
    TruncatedPoisson { rate: f64, a_max: u32 },
    /// Explicit probability mass over `0..=pmf.len()-1`.
    Pmf { pmf: Vec<f64> },
}

/// Learner choice, e.g. `{"ucb": {"beta": 4.0}}`, `"ts"` or `"genie"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum LearnerFile {
    Ucb { beta: f64 },
    Ts,
    Genie,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionModeFile {
    #[default]
    Realized,
    Pseudocode,
}

/// Command-line overrides applied to a config before a run.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub mu_star: Option<f64>,
    pub base_seed: Option<u64>,
    pub horizon: Option<u64>,
    pub replications: Option<u32>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).context("invalid experiment config")
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Apply overrides and fix the seed, returning the echo-ready config.
    /// A missing seed is drawn fresh here so the echoed config reruns the
    /// exact same experiment.
    pub fn resolved(&self, overrides: &Overrides) -> Self {
        let mut file = self.clone();
        if let Some(mu) = overrides.mu_star {
            file.mu_star = mu;
        }
        if let Some(seed) = overrides.base_seed {
            file.base_seed = Some(seed);
        }
        if let Some(horizon) = overrides.horizon {
            file.horizon = horizon;
        }
        if let Some(replications) = overrides.replications {
            file.replications = replications;
        }
        if file.base_seed.is_none() {
            file.base_seed = Some(rand::random());
        }
        file
    }

    pub fn params(&self) -> anyhow::Result<SystemParams> {
        Ok(SystemParams::new(
            self.params.t,
            self.params.d,
            self.params.lambda,
            self.params.a_max,
            self.params.channel_cap,
        )?)
    }

    pub fn belief(&self) -> anyhow::Result<Belief> {
        parse_belief(self.mu_star)
    }

    /// Build the full engine config. Call on a [`resolved`](Self::resolved)
    /// config; a still-unset seed falls back to 0.
    pub fn to_experiment(&self) -> anyhow::Result<ExperimentConfig> {
        let arrivals = match &self.arrivals {
            ArrivalsFile::Point { a } => ArrivalDistribution::point(*a),
            ArrivalsFile::Uniform { a_max } => ArrivalDistribution::uniform(*a_max),
            ArrivalsFile::TruncatedPoisson { rate, a_max } => {
                ArrivalDistribution::truncated_poisson(*rate, *a_max)?
            }
            ArrivalsFile::Pmf { pmf } => ArrivalDistribution::from_pmf(pmf.clone())?,
        };
        let learner = match self.learner {
            LearnerFile::Ucb { beta } => LearnerKind::Ucb { beta },
            LearnerFile::Ts => LearnerKind::Ts,
            LearnerFile::Genie => LearnerKind::Genie,
        };
        let config = ExperimentConfig {
            params: self.params()?,
            arrivals,
            mu_star: self.belief()?,
            learner,
            horizon: self.horizon,
            replications: self.replications,
            base_seed: self.base_seed.unwrap_or(0),
            transition_mode: match self.transition_mode {
                TransitionModeFile::Realized => TransitionMode::Realized,
                TransitionModeFile::Pseudocode => TransitionMode::Pseudocode,
            },
        };
        config.validate()?;
        Ok(config)
    }
}

/// Reject beliefs outside `[0, 1]` with a readable message before the engine
/// sees them.
pub fn parse_belief(v: f64) -> anyhow::Result<Belief> {
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        bail!("belief must lie in [0, 1], got {v}");
    }
    Ok(Belief::new(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "params": {"t": 4, "d": 0.25, "lambda": 1.0, "a_max": 1},
        "arrivals": {"point": {"a": 1}},
        "mu_star": 0.7,
        "learner": {"ucb": {"beta": 4.0}}
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let file = ConfigFile::parse(MINIMAL).unwrap();
        assert_eq!(file.horizon, 10_000);
        assert_eq!(file.replications, 200);
        assert_eq!(file.base_seed, None);
        assert_eq!(file.transition_mode, TransitionModeFile::Realized);
        let resolved = file.resolved(&Overrides::default());
        assert!(resolved.base_seed.is_some());
        resolved.to_experiment().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let bad = MINIMAL.replace("\"mu_star\"", "\"mu_stat\"");
        let err = format!("{:#}", ConfigFile::parse(&bad).unwrap_err());
        assert!(err.contains("mu_stat"), "{err}");

        let bad = MINIMAL.replace("\"lambda\"", "\"lamda\"");
        let err = format!("{:#}", ConfigFile::parse(&bad).unwrap_err());
        assert!(err.contains("lamda"), "{err}");
    }

    #[test]
    fn overrides_win_and_seeds_stick() {
        let file = ConfigFile::parse(MINIMAL).unwrap();
        let resolved = file.resolved(&Overrides {
            mu_star: Some(0.3),
            base_seed: Some(99),
            horizon: Some(50),
            replications: Some(2),
        });
        assert_eq!(resolved.mu_star, 0.3);
        assert_eq!(resolved.base_seed, Some(99));
        let exp = resolved.to_experiment().unwrap();
        assert_eq!(exp.base_seed, 99);
        assert_eq!(exp.horizon, 50);
        assert_eq!(exp.replications, 2);
    }

    #[test]
    fn config_echo_round_trips() {
        let file = ConfigFile::parse(MINIMAL).unwrap();
        let resolved = file.resolved(&Overrides::default());
        let echoed = serde_json::to_string(&resolved).unwrap();
        let back = ConfigFile::parse(&echoed).unwrap();
        assert_eq!(back.base_seed, resolved.base_seed);
        assert_eq!(back.mu_star, resolved.mu_star);
    }

    #[test]
    fn bad_beliefs_are_refused() {
        assert!(parse_belief(1.2).is_err());
        assert!(parse_belief(-0.1).is_err());
        assert!(parse_belief(f64::NAN).is_err());
        assert!(parse_belief(0.0).is_ok());
    }
}
