//! Built-in experiment configurations for the standard scenarios.
//!
//! Every preset is a complete config: `dlcode presets NAME` prints it as
//! JSON, which feeds back into any command that takes a config file.
//! Comparison scenarios come in pairs sharing a base seed — the headline
//! optimistic-learner preset plus a `...ts` posterior-sampling companion —
//! so the two curves of a comparison plot are two invocations.

use crate::config::{ArrivalsFile, ConfigFile, LearnerFile, ParamsFile, TransitionModeFile};

pub struct Preset {
    pub name: &'static str,
    pub describe: &'static str,
    pub suggested: &'static str,
    pub config: ConfigFile,
}

fn config(
    params: ParamsFile,
    arrivals: ArrivalsFile,
    mu_star: f64,
    learner: LearnerFile,
    base_seed: u64,
) -> ConfigFile {
    ConfigFile {
        params,
        arrivals,
        mu_star,
        learner,
        horizon: 10_000,
        replications: 200,
        base_seed: Some(base_seed),
        transition_mode: TransitionModeFile::Realized,
    }
}

const UCB4: LearnerFile = LearnerFile::Ucb { beta: 4.0 };

/// Four-slot frame, unit arrivals: the setting whose exact policy has a
/// closed form.
fn tolerant(mu_star: f64, learner: LearnerFile, seed: u64) -> ConfigFile {
    let params = ParamsFile {
        t: 4,
        d: 0.25,
        lambda: 1.0,
        a_max: 1,
        channel_cap: None,
    };
    config(params, ArrivalsFile::Point { a: 1 }, mu_star, learner, seed)
}

/// One-slot frame with up to six uniform arrivals; `(d, lambda)` as printed
/// beside the standard comparison plots.
fn intolerant(d: f64, lambda: f64, mu_star: f64, learner: LearnerFile, seed: u64) -> ConfigFile {
    let params = ParamsFile {
        t: 1,
        d,
        lambda,
        a_max: 6,
        channel_cap: None,
    };
    config(
        params,
        ArrivalsFile::Uniform { a_max: 6 },
        mu_star,
        learner,
        seed,
    )
}

/// One-slot frame, two packets every frame, at most two channels.
fn crossover(mu_star: f64, learner: LearnerFile) -> ConfigFile {
    let params = ParamsFile {
        t: 1,
        d: 0.2,
        lambda: 0.0,
        a_max: 2,
        channel_cap: Some(2),
    };
    config(params, ArrivalsFile::Point { a: 2 }, mu_star, learner, 1212)
}

pub fn catalog() -> Vec<Preset> {
    let continuous = config(
        ParamsFile {
            t: 1,
            d: 0.25,
            lambda: 1.0,
            a_max: 6,
            channel_cap: None,
        },
        ArrivalsFile::Point { a: 6 },
        0.7,
        UCB4,
        506,
    );
    vec![
        Preset {
            name: "fig3",
            describe: "per-slot channel counts of the exact four-slot policy across beliefs",
            suggested: "dlcode analyze --preset fig3 --what policy --sweep mu:0:1:101",
            config: tolerant(0.7, UCB4, 303),
        },
        Preset {
            name: "fig5",
            describe: "continuous-approximation first-slot code (m1, x1) for a six-packet queue",
            suggested: "dlcode analyze --preset fig5 --what continuous --sweep mu:0:1:101",
            config: continuous.clone(),
        },
        Preset {
            name: "fig6",
            describe: "continuous-approximation code rate x1/m1 for a six-packet queue",
            suggested: "dlcode analyze --preset fig6 --what rate --sweep mu:0:1:101",
            config: continuous,
        },
        Preset {
            name: "fig7",
            describe: "bounded-regret run: four-slot frames, mu*=0.7 above the threshold, optimistic learner",
            suggested: "dlcode simulate --preset fig7 --out fig7.csv",
            config: tolerant(0.7, UCB4, 707),
        },
        Preset {
            name: "fig7ts",
            describe: "posterior-sampling companion to fig7",
            suggested: "dlcode simulate --preset fig7ts --out fig7ts.csv",
            config: tolerant(0.7, LearnerFile::Ts, 707),
        },
        Preset {
            name: "fig8",
            describe: "throughput view of fig7 (same run; read the mean_throughput column)",
            suggested: "dlcode simulate --preset fig8 --out fig8.csv",
            config: tolerant(0.7, UCB4, 707),
        },
        Preset {
            name: "lowmu",
            describe: "logarithmic-regret run: four-slot frames, mu*=0.05 below the threshold, optimistic learner",
            suggested: "dlcode simulate --preset lowmu --out lowmu.csv",
            config: tolerant(0.05, UCB4, 505),
        },
        Preset {
            name: "lowmuts",
            describe: "posterior-sampling companion to lowmu",
            suggested: "dlcode simulate --preset lowmuts --out lowmuts.csv",
            config: tolerant(0.05, LearnerFile::Ts, 505),
        },
        Preset {
            name: "fig9",
            describe: "one-slot frames, uniform arrivals up to 6, mu*=0.05: logarithmic regret",
            suggested: "dlcode simulate --preset fig9 --out fig9.csv",
            config: intolerant(0.25, 1.0, 0.05, UCB4, 909),
        },
        Preset {
            name: "fig9ts",
            describe: "posterior-sampling companion to fig9",
            suggested: "dlcode simulate --preset fig9ts --out fig9ts.csv",
            config: intolerant(0.25, 1.0, 0.05, LearnerFile::Ts, 909),
        },
        Preset {
            name: "fig10",
            describe: "throughput view of fig9 (same run; read the mean_throughput column)",
            suggested: "dlcode simulate --preset fig10 --out fig10.csv",
            config: intolerant(0.25, 1.0, 0.05, UCB4, 909),
        },
        Preset {
            name: "fig9alt",
            describe: "fig9 with the alternative cost pair d=0.2, lambda=0",
            suggested: "dlcode simulate --preset fig9alt --out fig9alt.csv",
            config: intolerant(0.2, 0.0, 0.05, UCB4, 909),
        },
        Preset {
            name: "fig10alt",
            describe: "throughput view of fig9alt (same run)",
            suggested: "dlcode simulate --preset fig10alt --out fig10alt.csv",
            config: intolerant(0.2, 0.0, 0.05, UCB4, 909),
        },
        Preset {
            name: "fig11",
            describe: "one-slot frames, uniform arrivals up to 6, mu*=0.81: bounded regret",
            suggested: "dlcode simulate --preset fig11 --out fig11.csv",
            config: intolerant(0.25, 1.0, 0.81, UCB4, 1111),
        },
        Preset {
            name: "fig11ts",
            describe: "posterior-sampling companion to fig11",
            suggested: "dlcode simulate --preset fig11ts --out fig11ts.csv",
            config: intolerant(0.25, 1.0, 0.81, LearnerFile::Ts, 1111),
        },
        Preset {
            name: "fig11alt",
            describe: "fig11 with the alternative cost pair d=0.2, lambda=0",
            suggested: "dlcode simulate --preset fig11alt --out fig11alt.csv",
            config: intolerant(0.2, 0.0, 0.81, UCB4, 1111),
        },
        Preset {
            name: "fig12",
            describe: "learner comparison point: two packets, one slot, at most two channels; rerun with --mu to sweep",
            suggested: "dlcode simulate --preset fig12 --mu 0.25 --out fig12_25.csv",
            config: crossover(0.25, UCB4),
        },
        Preset {
            name: "fig12ts",
            describe: "posterior-sampling companion to fig12",
            suggested: "dlcode simulate --preset fig12ts --mu 0.25 --out fig12ts_25.csv",
            config: crossover(0.25, LearnerFile::Ts),
        },
    ]
}

pub fn lookup(name: &str) -> Option<Preset> {
    catalog().into_iter().find(|p| p.name == name)
}
