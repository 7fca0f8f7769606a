//! `qwalk`: quantum-walk pipelines from an edge list to ranked nodes.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qwalk::ErrorKind;

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Discrete-time quantum walks on networks")]
struct Cli {
    /// TOML or JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed for sampling, layout search, trajectories and shots.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Edge list (tab- or comma-separated).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// `id<TAB>label` sidecar.
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    /// Start node (id or label).
    #[arg(long, global = true)]
    seed_node: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Walk steps T.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// oracle, dense, bounded or noisy.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// heavy-hex:<d>, all-to-all[:<n>] or line:<n>.
    #[arg(long, global = true)]
    coupling: Option<String>,
    /// Noise preset: kingston, pittsburgh or noiseless.
    #[arg(long, global = true)]
    noise: Option<String>,
    #[arg(long, global = true)]
    p1: Option<f64>,
    #[arg(long, global = true)]
    p2: Option<f64>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    #[arg(long, global = true)]
    readout: Option<f64>,
    /// Device calibration JSON.
    #[arg(long, global = true)]
    calibration: Option<PathBuf>,
    #[arg(long, global = true)]
    trajectories: Option<usize>,
    #[arg(long, global = true)]
    layout_trials: Option<usize>,
    #[arg(long, global = true)]
    max_pair_distance: Option<usize>,
    #[arg(long, global = true)]
    readout_threshold: Option<f64>,
    #[arg(long, global = true)]
    shot_base: Option<f64>,
    #[arg(long, global = true)]
    shot_growth: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a bounded-degree connected subgraph.
    Sample {
        /// Comma-separated seed candidates (default: every node).
        #[arg(long, value_delimiter = ',')]
        candidates: Option<Vec<String>>,
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        max_edges: Option<usize>,
        #[arg(long)]
        target_nodes: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Node distributions for t = 0..T on the selected backend.
    Walk,
    /// Compile, lay out and route the walk circuit; export OpenQASM 3.
    Compile,
    /// Layout search only.
    Layout,
    /// Noisy trajectories and sampled shot tables per step.
    Simulate,
    /// Raw and postselected estimates and fidelities from shot tables.
    Metrics {
        /// Shot table JSON files written by `simulate`.
        #[arg(long, required = true, num_args = 1..)]
        shots: Vec<PathBuf>,
    },
    /// Interference index, node scores and ranking.
    Prioritize {
        #[command(flatten)]
        args: PrioritizeArgs,
    },
    /// Full pipeline: compile summary, walk, metrics and ranking.
    Report {
        #[command(flatten)]
        args: PrioritizeArgs,
    },
}

#[derive(Args, Debug)]
struct PrioritizeArgs {
    #[arg(long)]
    t_min: Option<usize>,
    #[arg(long)]
    t_max: Option<usize>,
    /// Leave the seed out of the ranking.
    #[arg(long)]
    exclude_seed: bool,
    /// Quantum trajectory CSV to score instead of running a backend.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Classical trajectory CSV paired with --replay.
    #[arg(long, requires = "replay")]
    replay_classical: Option<PathBuf>,
    /// `node<TAB>score` table to rank as is.
    #[arg(long, conflicts_with = "replay")]
    replay_scores: Option<PathBuf>,
}

fn apply_common(cfg: &mut RunConfig, c: Common) {
    macro_rules! set {
        ($src:expr => $dst:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
        ($src:expr => some $dst:expr) => {
            if let Some(v) = $src {
                $dst = Some(v);
            }
        };
    }
    set!(c.graph => some cfg.graph);
    set!(c.labels => some cfg.labels);
    set!(c.seed_node => some cfg.seed_node);
    set!(c.alpha => cfg.alpha);
    set!(c.steps => cfg.steps);
    set!(c.backend => cfg.backend);
    set!(c.coupling => cfg.coupling);
    set!(c.noise => cfg.noise.preset);
    set!(c.p1 => some cfg.noise.p1);
    set!(c.p2 => some cfg.noise.p2);
    set!(c.gamma => some cfg.noise.gamma);
    set!(c.readout => some cfg.noise.readout);
    set!(c.calibration => some cfg.noise.calibration);
    set!(c.trajectories => cfg.noise.trajectories);
    set!(c.layout_trials => cfg.layout.trials);
    set!(c.max_pair_distance => cfg.layout.max_pair_distance);
    set!(c.readout_threshold => some cfg.layout.readout_threshold);
    set!(c.shot_base => cfg.shots.base);
    set!(c.shot_growth => cfg.shots.growth);
}

fn apply_prioritize(cfg: &mut RunConfig, a: PrioritizeArgs) {
    let p = &mut cfg.prioritize;
    if let Some(t) = a.t_min {
        p.t_min = t;
    }
    if a.t_max.is_some() {
        p.t_max = a.t_max;
    }
    p.exclude_seed |= a.exclude_seed;
    if a.replay.is_some() {
        p.replay = a.replay;
    }
    if a.replay_classical.is_some() {
        p.replay_classical = a.replay_classical;
    }
    if a.replay_scores.is_some() {
        p.replay_scores = a.replay_scores;
    }
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Validation | ErrorKind::Io => 2,
        ErrorKind::Infeasible => 3,
        ErrorKind::Capability => 4,
    }
}

fn run(cli: Cli) -> qwalk::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.rng_seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    apply_common(&mut cfg, cli.common);
    match cli.command {
        Command::Sample {
            candidates,
            max_degree,
            max_edges,
            target_nodes,
            trials,
        } => {
            let s = &mut cfg.sample;
            if let Some(c) = candidates {
                s.candidates = c;
            }
            if let Some(v) = max_degree {
                s.max_degree = v;
            }
            if let Some(v) = max_edges {
                s.max_edges = v;
            }
            if target_nodes.is_some() {
                s.target_nodes = target_nodes;
            }
            if let Some(v) = trials {
                s.trials = v;
            }
            cfg.validate()?;
            commands::sample(&cfg)
        }
        Command::Walk => {
            cfg.validate()?;
            commands::walk(&cfg)
        }
        Command::Compile => {
            cfg.validate()?;
            commands::compile(&cfg)
        }
        Command::Layout => {
            cfg.validate()?;
            commands::layout(&cfg)
        }
        Command::Simulate => {
            cfg.validate()?;
            commands::simulate(&cfg)
        }
        Command::Metrics { shots } => {
            cfg.validate()?;
            commands::metrics(&cfg, &shots)
        }
        Command::Prioritize { args } => {
            apply_prioritize(&mut cfg, args);
            cfg.validate()?;
            commands::prioritize(&cfg)
        }
        Command::Report { args } => {
            apply_prioritize(&mut cfg, args);
            cfg.validate()?;
            commands::report(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
