//! `dlcode`: solve, analyze and simulate deadline-constrained coding
//! policies over unreliable channels.
//!
//! Four subcommands: `solve` dumps an exact policy table as JSON, `analyze`
//! sweeps a parameter and emits structural quantities as CSV, `simulate`
//! runs learning experiments into CSV curves plus a JSON summary, and
//! `presets` lists the built-in scenario configurations.

mod config;
mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use config::{parse_belief, ConfigFile, Overrides, ParamsFile};
use dlcode_core::analysis::{continuous_optimum, critical_point, ContinuousOptimum};
use dlcode_core::sim::fmt_float;
use dlcode_core::{
    bound_overlay, curve_to_csv, run_experiment_with_workers, solve_policy, Belief, LearnerKind,
    PolicyTable, SystemParams,
};

#[derive(Parser)]
#[command(
    name = "dlcode",
    version,
    about = "Deadline-coding policy solver, analyzer and simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the per-frame policy for a belief and dump the table as JSON
    Solve(SolveArgs),
    /// Sweep a parameter and emit one CSV row of analysis per grid point
    Analyze(AnalyzeArgs),
    /// Run a learning experiment; write curves as CSV and a JSON summary
    Simulate(SimulateArgs),
    /// List built-in presets, or print one as a ready-to-use config
    Presets(PresetsArgs),
}

/// Where the experiment description comes from: a file or a preset name.
#[derive(Args)]
struct Source {
    /// Path to a JSON experiment config
    #[arg(
        value_name = "CONFIG",
        required_unless_present = "preset",
        conflicts_with = "preset"
    )]
    config: Option<PathBuf>,
    /// Use a built-in preset instead of a config file (see `dlcode presets`)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> anyhow::Result<ConfigFile> {
        match &self.preset {
            Some(name) => match presets::lookup(name) {
                Some(p) => Ok(p.config),
                None => bail!("unknown preset `{name}`; run `dlcode presets` for the list"),
            },
            None => ConfigFile::load(self.config.as_deref().expect("clap enforces the source")),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    /// Belief to solve for; defaults to the config's mu_star
    #[arg(long)]
    mu: Option<f64>,
    /// Write the JSON here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: Source,
    /// Which quantity to tabulate per grid point
    #[arg(long, value_enum, default_value_t = What::Policy)]
    what: What,
    /// Sweep spec AXIS:LO:HI:STEPS with axis mu, lambda or d
    #[arg(long, default_value = "mu:0:1:101")]
    sweep: String,
    /// Fixed belief when sweeping lambda or d; defaults to the config's
    /// mu_star
    #[arg(long)]
    mu: Option<f64>,
    /// Write the CSV here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    /// Exact per-slot decisions at a full queue
    Policy,
    /// Activation threshold with its analytic bracket
    Critical,
    /// Continuous-approximation first-slot code (m1, x1, rate)
    Continuous,
    /// Continuous-approximation code rate only
    Rate,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: Source,
    /// Output CSV path; the JSON summary lands next to it as `<stem>.json`
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Worker threads (0 = all cores); defaults to $DLCODE_WORKERS, then 0
    #[arg(long)]
    workers: Option<usize>,
    /// Override the config's true connectivity mu_star
    #[arg(long)]
    mu: Option<f64>,
    /// Override the config's base seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's horizon (frames per replication)
    #[arg(long)]
    horizon: Option<u64>,
    /// Override the config's replication count
    #[arg(long)]
    replications: Option<u32>,
}

#[derive(Args)]
struct PresetsArgs {
    /// Print this preset's full config as JSON
    name: Option<String>,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Solve(args) => cmd_solve(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Presets(args) => cmd_presets(args),
    }
}

// ---- solve ----------------------------------------------------------------

#[derive(Serialize)]
struct PolicyDump {
    belief: f64,
    params: ParamsFile,
    /// Worth of each leftover queue size once the frame is over.
    terminal_values: Vec<f64>,
    /// One entry per stage, stage 1 being the final slot before the deadline.
    stages: Vec<StageDump>,
}

#[derive(Serialize)]
struct StageDump {
    remaining_slots: u32,
    rows: Vec<RowDump>,
}

#[derive(Serialize)]
struct RowDump {
    queue: u32,
    m: u32,
    x: u32,
    value: f64,
}

fn dump_table(table: &PolicyTable, params: &ParamsFile) -> PolicyDump {
    let a_max = params.a_max;
    // `+ 0.0` turns the negative zero of an empty terminal penalty into plain
    // zero so the JSON never shows `-0.0`.
    PolicyDump {
        belief: table.belief().get(),
        params: params.clone(),
        terminal_values: (0..=a_max).map(|q| table.value(0, q) + 0.0).collect(),
        stages: (1..=params.t)
            .map(|s| StageDump {
                remaining_slots: s,
                rows: (0..=a_max)
                    .map(|q| {
                        let d = table.decision(s, q);
                        RowDump {
                            queue: q,
                            m: d.m,
                            x: d.x,
                            value: table.value(s, q) + 0.0,
                        }
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let file = args.source.load()?;
    let params = file.params()?;
    let belief = match args.mu {
        Some(v) => parse_belief(v)?,
        None => file.belief()?,
    };
    let table = solve_policy(belief, &params);
    let dump = dump_table(&table, &file.params);
    let json = serde_json::to_string_pretty(&dump)?;
    write_out(args.out.as_deref(), &(json + "\n"))
}

// ---- analyze --------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Mu,
    Lambda,
    D,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Mu => "mu",
            Axis::Lambda => "lambda",
            Axis::D => "d",
        }
    }
}

struct Sweep {
    axis: Axis,
    lo: f64,
    hi: f64,
    steps: usize,
}

impl Sweep {
    fn parse(text: &str) -> anyhow::Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [axis, lo, hi, steps] = parts.as_slice() else {
            bail!("sweep must look like AXIS:LO:HI:STEPS, got `{text}`");
        };
        let axis = match *axis {
            "mu" => Axis::Mu,
            "lambda" => Axis::Lambda,
            "d" => Axis::D,
            other => bail!("unknown sweep axis `{other}` (expected mu, lambda or d)"),
        };
        let lo: f64 = lo.parse().context("sweep LO is not a number")?;
        let hi: f64 = hi.parse().context("sweep HI is not a number")?;
        let steps: usize = steps.parse().context("sweep STEPS is not an integer")?;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            bail!("sweep range [{lo}, {hi}] is not an interval");
        }
        if steps < 1 {
            bail!("sweep needs at least one grid point");
        }
        if axis == Axis::Mu && !(0.0..=1.0).contains(&lo) | !(0.0..=1.0).contains(&hi) {
            bail!("mu sweeps must stay inside [0, 1]");
        }
        Ok(Self {
            axis,
            lo,
            hi,
            steps,
        })
    }

    fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> anyhow::Result<()> {
    let file = args.source.load()?;
    let sweep = Sweep::parse(&args.sweep)?;
    let base_mu = match args.mu {
        Some(v) => parse_belief(v)?,
        None => file.belief()?,
    };
    let p = &file.params;
    // Per grid point: the system with the swept coordinate substituted, and
    // the belief in force there.
    let setting = |v: f64| -> anyhow::Result<(SystemParams, Belief)> {
        let (d, lambda, mu) = match sweep.axis {
            Axis::Mu => (p.d, p.lambda, parse_belief(v)?),
            Axis::Lambda => (p.d, v, base_mu),
            Axis::D => (v, p.lambda, base_mu),
        };
        let params = SystemParams::new(p.t, d, lambda, p.a_max, p.channel_cap)
            .with_context(|| format!("at {}={v}", sweep.axis.name()))?;
        Ok((params, mu))
    };

    let mut csv = String::new();
    match args.what {
        What::Policy => {
            csv.push_str(sweep.axis.name());
            for t in 1..=p.t {
                csv.push_str(&format!(",m_t{t},x_t{t}"));
            }
            csv.push('\n');
            for v in sweep.grid() {
                let (params, mu) = setting(v)?;
                let table = solve_policy(mu, &params);
                csv.push_str(&fmt_float(v));
                // Slot t has T - t + 1 slots still remaining; report the
                // decision for a still-full queue.
                for t in 1..=p.t {
                    let dec = table.decision(p.t - t + 1, p.a_max);
                    csv.push_str(&format!(",{},{}", dec.m, dec.x));
                }
                csv.push('\n');
            }
        }
        What::Critical => {
            if sweep.axis == Axis::Mu {
                bail!("the activation threshold does not depend on mu; sweep lambda or d");
            }
            csv.push_str(&format!("{},zeta,bracket_lo,bracket_hi\n", sweep.axis.name()));
            for v in sweep.grid() {
                let (params, _) = setting(v)?;
                let zeta = critical_point(&params)
                    .with_context(|| format!("at {}={v}", sweep.axis.name()))?;
                let lo = params.d() / (1.0 + params.lambda());
                let hi = (2.0 * lo).min(1.0);
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_float(v),
                    fmt_float(zeta),
                    fmt_float(lo),
                    fmt_float(hi)
                ));
            }
        }
        What::Continuous | What::Rate => {
            let header = match args.what {
                What::Continuous => format!("{},m1,x1,rate\n", sweep.axis.name()),
                _ => format!("{},rate\n", sweep.axis.name()),
            };
            csv.push_str(&header);
            for v in sweep.grid() {
                let (params, mu) = setting(v)?;
                let opt = continuous_optimum(p.a_max, mu, params.d(), params.lambda())
                    .with_context(|| format!("at {}={v}", sweep.axis.name()))?;
                let (m1, x1, rate) = match opt {
                    ContinuousOptimum::Idle => (0.0, 0.0, 0.0),
                    ContinuousOptimum::Code { m, x, rate } => (m, x, rate),
                };
                match args.what {
                    What::Continuous => csv.push_str(&format!(
                        "{},{},{},{}\n",
                        fmt_float(v),
                        fmt_float(m1),
                        fmt_float(x1),
                        fmt_float(rate)
                    )),
                    _ => csv.push_str(&format!("{},{}\n", fmt_float(v), fmt_float(rate))),
                }
            }
        }
    }
    write_out(args.out.as_deref(), &csv)
}

// ---- simulate -------------------------------------------------------------

#[derive(Serialize)]
struct Summary {
    /// Name of the preset behind this run, if any.
    preset: Option<String>,
    /// The exact config that ran, including the resolved seed; feed it back
    /// in to repeat the run.
    config: ConfigFile,
    workers: usize,
    frames: u64,
    replications: u32,
    #[serde(rename = "final")]
    final_values: FinalValues,
    csv: String,
}

#[derive(Serialize)]
struct FinalValues {
    mean_cum_regret: f64,
    se_cum_regret: f64,
    mean_throughput: f64,
    /// Theoretical ceiling at the final frame; absent when no guarantee
    /// applies.
    bound: Option<f64>,
}

fn env_workers() -> anyhow::Result<Option<usize>> {
    match std::env::var("DLCODE_WORKERS") {
        Ok(v) => Ok(Some(v.parse().with_context(|| {
            format!("DLCODE_WORKERS must be a worker count, got `{v}`")
        })?)),
        Err(_) => Ok(None),
    }
}

fn summary_path(csv: &Path) -> PathBuf {
    if csv.extension().is_some_and(|e| e == "json") {
        csv.with_extension("summary.json")
    } else {
        csv.with_extension("json")
    }
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    if let Some(v) = args.mu {
        parse_belief(v)?;
    }
    let file = args.source.load()?;
    let resolved = file.resolved(&Overrides {
        mu_star: args.mu,
        base_seed: args.seed,
        horizon: args.horizon,
        replications: args.replications,
    });
    let experiment = resolved.to_experiment()?;
    let workers = match args.workers {
        Some(w) => w,
        None => env_workers()?.unwrap_or(0),
    };

    let bound = match experiment.learner {
        LearnerKind::Ucb { beta } if beta >= 4.0 => match bound_overlay(&experiment) {
            Ok(b) => Some(b),
            Err(e) => {
                eprintln!("warning: regret ceiling unavailable ({e}); omitting the bound column");
                None
            }
        },
        LearnerKind::Ucb { beta } => {
            eprintln!(
                "warning: beta = {beta} is below 4, where the regret guarantee does not \
                 apply; omitting the bound column"
            );
            None
        }
        _ => None,
    };

    let curve = run_experiment_with_workers(&experiment, workers)?;
    let csv = curve_to_csv(&curve, bound.as_deref());
    fs::write(&args.out, &csv)
        .with_context(|| format!("cannot write CSV to {}", args.out.display()))?;

    let last = curve.len() - 1;
    let summary = Summary {
        preset: args.source.preset.clone(),
        config: resolved,
        workers,
        frames: experiment.horizon,
        replications: experiment.replications,
        final_values: FinalValues {
            mean_cum_regret: curve.mean_cum_regret()[last],
            se_cum_regret: curve.se_cum_regret()[last],
            mean_throughput: curve.mean_throughput()[last],
            bound: bound.as_ref().map(|b| b[last]),
        },
        csv: args.out.display().to_string(),
    };
    let sp = summary_path(&args.out);
    fs::write(&sp, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("cannot write summary to {}", sp.display()))?;
    println!(
        "wrote {} and {} (final mean cumulative regret {})",
        args.out.display(),
        sp.display(),
        fmt_float(summary.final_values.mean_cum_regret)
    );
    Ok(())
}

// ---- presets --------------------------------------------------------------

fn cmd_presets(args: PresetsArgs) -> anyhow::Result<()> {
    match args.name {
        Some(name) => match presets::lookup(&name) {
            Some(p) => {
                println!("{}", serde_json::to_string_pretty(&p.config)?);
                Ok(())
            }
            None => bail!("unknown preset `{name}`; run `dlcode presets` for the list"),
        },
        None => {
            let mut listing = String::new();
            for p in presets::catalog() {
                listing.push_str(&format!("{:<10} {}\n", p.name, p.describe));
                listing.push_str(&format!("{:<10}   e.g. {}\n", "", p.suggested));
                listing.push_str(&format!(
                    "{:<10}   {}\n\n",
                    "",
                    serde_json::to_string(&p.config)?
                ));
            }
            print_all(&listing)
        }
    }
}

// ---- shared ---------------------------------------------------------------

fn write_out(path: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            fs::write(p, content).with_context(|| format!("cannot write {}", p.display()))
        }
        None => print_all(content),
    }
}

/// Print to stdout, treating a closed pipe (e.g. `| head`) as a normal exit
/// rather than a panic.
fn print_all(content: &str) -> anyhow::Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(content.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => Ok(other?),
    }
}
