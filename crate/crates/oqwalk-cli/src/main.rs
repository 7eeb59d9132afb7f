//! `oqwalk` — command-line front end for the open-quantum-walk
//! reaction-kinetics simulator.
//!
//! Subcommands map one-to-one onto library entry points: `evolve`
//! (trajectory), `hitting` (hitting-time statistics), `sweep` (parameter
//! sweeps), `tc` (threshold-crossing time) and `preset list`. Every run
//! writes its outputs plus a `manifest.json` recording the exact inputs
//! and SHA-256 digests of the emitted files, so results can be audited
//! and reruns compared byte for byte.
//!
//! Exit codes: 0 success, 2 configuration error (bad config file, bad
//! flag, time step too large), 3 numerical failure (singular operator,
//! non-finite value, non-classical Monte Carlo request), 4 target not
//! reached (threshold never crossed, tail mass above bound, unreachable
//! absorber).

mod output;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oqwalk::config::{
    parse_reaction_config, parse_sweep_config, DEFAULT_MAX_STEPS, DEFAULT_TAIL_BOUND,
};
use oqwalk::dynamics::{crossing_time, evolve, mc_sample_hitting};
use oqwalk::hitting::{
    hitting_distribution, hitting_distribution_auto, mean_from_distribution, mean_hitting_steps,
    HittingResult,
};
use oqwalk::reaction::{cryptochrome_preset, ReactionGraph};
use oqwalk::scenarios::{find_scenario, run_sweep, scenario_presets, NamedSweep, SweepSpec};
use oqwalk::Error;

use output::{
    value_slug, CrossingSummary, Emitter, Manifest, Overrides, SourceDesc, Summary, Tolerances,
};

#[derive(Parser)]
#[command(
    name = "oqwalk",
    version,
    about = "Discrete-time open-quantum-walk simulator for radical-pair reaction kinetics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the density matrix and write a trajectory CSV.
    Evolve(EvolveArgs),
    /// Hitting-time statistics of the absorbing node.
    Hitting(HittingArgs),
    /// Run a parameter sweep (scenario preset or config with a [sweep] section).
    Sweep(SweepArgs),
    /// First time the absorbing node's occupation crosses a threshold.
    Tc(TcArgs),
    /// Inspect built-in presets.
    Preset {
        #[command(subcommand)]
        what: PresetCommand,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    /// Print the available model and scenario presets.
    List,
}

/// Where the reaction model comes from: exactly one of the two.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModelSource {
    /// Reaction model config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in preset name (see `oqwalk preset list`).
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "oqwalk-out")]
    out: PathBuf,
    /// Override the time step, in seconds.
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Override the dephasing rate of the pair-coherence edge 3 ~ 2, in 1/s.
    #[arg(long, value_name = "RATE")]
    q32: Option<f64>,
    /// Seed for Monte Carlo sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(usize))]
    workers: Option<usize>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    source: ModelSource,
    #[command(flatten)]
    common: CommonArgs,
    /// Number of steps to propagate.
    #[arg(long)]
    steps: u64,
    /// Record every STRIDE-th step (step 0 and the last step always).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    stride: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Iterate the hitting distribution and report truncated statistics.
    Dist,
    /// Exact mean hitting time via the resolvent (no iteration).
    Mean,
    /// Both, printing the relative difference as a cross-check.
    Both,
    /// Classical Monte Carlo cross-check (requires full dephasing).
    Mc,
}

#[derive(Args)]
struct HittingArgs {
    #[command(flatten)]
    source: ModelSource,
    #[command(flatten)]
    common: CommonArgs,
    /// What to compute.
    #[arg(long, value_enum, default_value_t = Mode::Mean)]
    mode: Mode,
    /// Fixed distribution length; otherwise it grows until the tail bound.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    n_max: Option<u64>,
    /// Tail mass below which the distribution may stop.
    #[arg(long, default_value_t = DEFAULT_TAIL_BOUND)]
    tail_bound: f64,
    /// Hard cap on the distribution length.
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    /// Monte Carlo trial count (mode = mc).
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(usize))]
    trials: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: ModelSource,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct TcArgs {
    #[command(flatten)]
    source: ModelSource,
    #[command(flatten)]
    common: CommonArgs,
    /// Occupation threshold, strictly between 0 and 1.
    #[arg(long, default_value_t = 0.2, value_parser = parse_eta)]
    eta: f64,
    /// Give up after this many steps.
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
}

fn parse_eta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must be strictly between 0 and 1, got {v}"))
    }
}

/// Library errors keep their class; I/O errors carry the path they hit.
enum CliError {
    Lib(Error),
    Io(std::io::Error, PathBuf),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e, path) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

/// Map a library error onto the documented exit-code classes.
fn exit_class(e: &Error) -> u8 {
    match e {
        Error::AtGridPoint { source, .. } => exit_class(source),
        Error::Config(_) | Error::InvalidGraph(_) | Error::TimeStepTooLarge { .. } => 2,
        Error::ThresholdNotReached { .. }
        | Error::TailTooHeavy { .. }
        | Error::TargetUnreachable { .. } => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(code) => code,
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_class(&e))
        }
        Err(CliError::Io(e, path)) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Evolve(a) => cmd_evolve(a, argv),
        Command::Hitting(a) => cmd_hitting(a, argv),
        Command::Sweep(a) => cmd_sweep(a, argv),
        Command::Tc(a) => cmd_tc(a, argv),
        Command::Preset {
            what: PresetCommand::List,
        } => Ok(cmd_preset_list()),
    }
}

/// Install the global worker pool before any parallel section runs.
fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn model_preset(name: &str) -> Option<ReactionGraph> {
    match name {
        "cryptochrome" => Some(cryptochrome_preset()),
        _ => None,
    }
}

fn apply_overrides(mut g: ReactionGraph, c: &CommonArgs) -> Result<ReactionGraph, CliError> {
    if let Some(dt) = c.dt {
        g = g.with_dt(dt);
    }
    if let Some(q) = c.q32 {
        g = g.with_dephasing_rate(2, 1, q)?;
    }
    Ok(g)
}

fn load_model(
    src: &ModelSource,
    common: &CommonArgs,
) -> Result<(ReactionGraph, SourceDesc), CliError> {
    let (g, desc) = if let Some(path) = &src.config {
        let text = fs::read_to_string(path).map_err(io(path))?;
        let g = parse_reaction_config(&text).map_err(Error::from)?;
        let desc = SourceDesc {
            config: Some(path.display().to_string()),
            preset: None,
        };
        (g, desc)
    } else {
        let name = src
            .preset
            .as_deref()
            .expect("clap enforces the source group");
        let g = model_preset(name).ok_or_else(|| {
            Error::InvalidGraph(format!(
                "unknown model preset '{name}'; see `oqwalk preset list`"
            ))
        })?;
        let desc = SourceDesc {
            config: None,
            preset: Some(name.to_string()),
        };
        (g, desc)
    };
    Ok((apply_overrides(g, common)?, desc))
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError {
    let p = path.to_path_buf();
    move |e| CliError::Io(e, p)
}

fn manifest(
    command: &str,
    argv: Vec<String>,
    source: SourceDesc,
    common: &CommonArgs,
    tolerances: Tolerances,
) -> Manifest {
    Manifest {
        command: command.to_string(),
        argv,
        source,
        out_dir: common.out.display().to_string(),
        seed: common.seed,
        overrides: Overrides {
            dt: common.dt,
            q32: common.q32,
        },
        tolerances,
        files: Vec::new(),
    }
}

fn cmd_evolve(a: EvolveArgs, argv: Vec<String>) -> Result<ExitCode, CliError> {
    init_workers(a.common.workers);
    let (g, desc) = load_model(&a.source, &a.common)?;
    let map = g.compile()?;
    let traj = evolve(&map, &g.initial_state(), a.steps, a.stride)?;

    let mut em = Emitter::new(&a.common.out).map_err(io(&a.common.out))?;
    let path = em
        .trajectory_csv("trajectory.csv", &traj)
        .map_err(io(&a.common.out))?;
    println!("wrote {}", path.display());
    let m = manifest("evolve", argv, desc, &a.common, Tolerances::default());
    let mpath = em.finish(m).map_err(io(&a.common.out))?;
    println!("wrote {}", mpath.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_hitting(a: HittingArgs, argv: Vec<String>) -> Result<ExitCode, CliError> {
    init_workers(a.common.workers);
    let (g, desc) = load_model(&a.source, &a.common)?;
    let target = g.n_nodes - 1;
    let map = g.compile()?;
    let rho0 = g.initial_state();
    let mut em = Emitter::new(&a.common.out).map_err(io(&a.common.out))?;

    let mut summary = Summary {
        n41: None,
        t41_s: None,
        n_mp: None,
        tail_mass: None,
        dt_s: g.dt,
        mu32: g.dephasing_mu(2, 1),
    };
    let mut exit = ExitCode::SUCCESS;

    if matches!(a.mode, Mode::Mean | Mode::Both) {
        let n41 = mean_hitting_steps(&map, &rho0, target)?;
        summary.n41 = Some(n41);
        summary.t41_s = Some(n41 * g.dt);
    }

    if matches!(a.mode, Mode::Dist | Mode::Both) {
        let reachable = g.reachable_from(g.initial_node)[target];
        let d: HittingResult = if !reachable {
            // Nothing ever arrives; emit a short all-zero distribution
            // instead of iterating to the step cap.
            let n = a.n_max.unwrap_or(1000).min(a.max_steps.max(1));
            hitting_distribution(&map, &rho0, target, n)?
        } else if let Some(n) = a.n_max {
            hitting_distribution(&map, &rho0, target, n)?
        } else {
            hitting_distribution_auto(&map, &rho0, target, a.tail_bound, a.max_steps)?
        };
        summary.n_mp = Some(d.most_probable_step());
        summary.tail_mass = Some(d.tail_mass);
        let path = em
            .distribution_csv("distribution.csv", &d)
            .map_err(io(&a.common.out))?;
        println!("wrote {}", path.display());
        match mean_from_distribution(&d, a.tail_bound) {
            Ok((n_trunc, t_trunc)) => {
                if a.mode == Mode::Dist {
                    summary.n41 = Some(n_trunc);
                    summary.t41_s = Some(t_trunc);
                } else if let Some(n_exact) = summary.n41 {
                    let rel = ((n_trunc - n_exact) / n_exact).abs();
                    println!("truncated vs exact mean: rel. diff {rel:.3e}");
                }
            }
            Err(e) => {
                eprintln!("warning: {e}");
                exit = ExitCode::from(4);
            }
        }
    }

    if a.mode == Mode::Mc {
        let samples = mc_sample_hitting(&g, target, a.trials, a.common.seed)?;
        let n = samples.len() as f64;
        let mean = samples.iter().map(|&s| s as f64).sum::<f64>() / n;
        let var = samples
            .iter()
            .map(|&s| (s as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0).max(1.0);
        let std_error = (var / n).sqrt();
        summary.n41 = Some(mean);
        summary.t41_s = Some(mean * g.dt);
        println!(
            "mc: {} trials, seed {}, std. error {:.6e} steps",
            samples.len(),
            a.common.seed,
            std_error
        );
    }

    if let (Some(n), Some(t)) = (summary.n41, summary.t41_s) {
        println!("n41 = {n:.11e} steps");
        println!("t41 = {t:.11e} s");
    }
    if let Some(nm) = summary.n_mp {
        println!("n_mp = {nm}");
    }
    if let Some(tm) = summary.tail_mass {
        println!("tail_mass = {tm:.3e}");
    }

    let path = em
        .json("summary.json", &summary)
        .map_err(io(&a.common.out))?;
    println!("wrote {}", path.display());
    let tol = Tolerances {
        tail_bound: Some(a.tail_bound),
        max_steps: Some(a.max_steps),
        eta: None,
        trials: (a.mode == Mode::Mc).then_some(a.trials),
    };
    let m = manifest("hitting", argv, desc, &a.common, tol);
    let mpath = em.finish(m).map_err(io(&a.common.out))?;
    println!("wrote {}", mpath.display());
    Ok(exit)
}

fn cmd_sweep(a: SweepArgs, argv: Vec<String>) -> Result<ExitCode, CliError> {
    init_workers(a.common.workers);
    let (sweeps, desc) = if let Some(path) = &a.source.config {
        let text = fs::read_to_string(path).map_err(io(path))?;
        let (g, section) = parse_sweep_config(&text).map_err(Error::from)?;
        let g = apply_overrides(g, &a.common)?;
        let named = NamedSweep {
            label: String::new(),
            spec: SweepSpec::from_section(g, &section),
        };
        let desc = SourceDesc {
            config: Some(path.display().to_string()),
            preset: None,
        };
        (vec![named], desc)
    } else {
        let name = a
            .source
            .preset
            .as_deref()
            .expect("clap enforces the source group");
        let mut scenario = find_scenario(name).ok_or_else(|| {
            Error::InvalidGraph(format!(
                "unknown scenario preset '{name}'; see `oqwalk preset list`"
            ))
        })?;
        for ns in &mut scenario.sweeps {
            ns.spec.base = apply_overrides(ns.spec.base.clone(), &a.common)?;
        }
        let desc = SourceDesc {
            config: None,
            preset: Some(name.to_string()),
        };
        (scenario.sweeps, desc)
    };

    let mut em = Emitter::new(&a.common.out).map_err(io(&a.common.out))?;
    let tol = Tolerances {
        tail_bound: sweeps.first().map(|ns| ns.spec.tail_bound),
        max_steps: sweeps.first().map(|ns| ns.spec.max_steps),
        eta: sweeps.first().and_then(|ns| ns.spec.eta),
        trials: None,
    };
    for ns in &sweeps {
        let rows = run_sweep(&ns.spec)?;
        let csv_name = if ns.label.is_empty() {
            "sweep.csv".to_string()
        } else {
            format!("sweep-{}.csv", ns.label)
        };
        let path = em.sweep_csv(&csv_name, &rows).map_err(io(&a.common.out))?;
        println!("wrote {}", path.display());
        for row in &rows {
            let slug = format!("{}_{}", row.parameter.name(), value_slug(row.value));
            let prefix = if ns.label.is_empty() {
                slug
            } else {
                format!("{}-{slug}", ns.label)
            };
            if let Some(d) = &row.distribution {
                let p = em
                    .distribution_csv(&format!("dist-{prefix}.csv"), d)
                    .map_err(io(&a.common.out))?;
                println!("wrote {}", p.display());
            }
            if let Some(t) = &row.trajectory {
                let p = em
                    .trajectory_csv(&format!("traj-{prefix}.csv"), t)
                    .map_err(io(&a.common.out))?;
                println!("wrote {}", p.display());
            }
        }
    }
    let m = manifest("sweep", argv, desc, &a.common, tol);
    let mpath = em.finish(m).map_err(io(&a.common.out))?;
    println!("wrote {}", mpath.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_tc(a: TcArgs, argv: Vec<String>) -> Result<ExitCode, CliError> {
    init_workers(a.common.workers);
    let (g, desc) = load_model(&a.source, &a.common)?;
    let map = g.compile()?;
    let res = crossing_time(&map, &g.initial_state(), g.n_nodes - 1, a.eta, a.max_steps)?;
    println!(
        "t_c = {:.11e} s (bracketed between steps {} and {})",
        res.t_c, res.step_before, res.step_after
    );

    let mut em = Emitter::new(&a.common.out).map_err(io(&a.common.out))?;
    let record = CrossingSummary {
        eta: a.eta,
        t_c_s: res.t_c,
        step_before: res.step_before,
        step_after: res.step_after,
        dt_s: g.dt,
        mu32: g.dephasing_mu(2, 1),
    };
    let path = em
        .json("crossing.json", &record)
        .map_err(io(&a.common.out))?;
    println!("wrote {}", path.display());
    let tol = Tolerances {
        tail_bound: None,
        max_steps: Some(a.max_steps),
        eta: Some(a.eta),
        trials: None,
    };
    let m = manifest("tc", argv, desc, &a.common, tol);
    let mpath = em.finish(m).map_err(io(&a.common.out))?;
    println!("wrote {}", mpath.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_preset_list() -> ExitCode {
    println!("model presets (--preset for evolve, hitting, tc):");
    println!(
        "  {:<18} {}",
        "cryptochrome", "four-node radical-pair model with published magnitudes"
    );
    println!();
    println!("scenario presets (--preset for sweep):");
    for s in scenario_presets() {
        println!("  {:<18} {}", s.name, s.description);
    }
    ExitCode::SUCCESS
}
