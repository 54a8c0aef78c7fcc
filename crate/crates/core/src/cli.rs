//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 I/O error, 3 when an
//! acceptance band evaluated by the command fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{LabError, Result};
use crate::experiment::{
    coverage_bands, lemma_bands, regret_bands, regret_envelope, run_experiment_with_threads,
    stability_bands, threads_from_env, with_thread_pool, write_lemmas, write_report, BandOutcome,
    ExperimentConfig, ExperimentRun,
};
use crate::stability_lab::{run_lemma_checks, LemmaConfig, LemmaReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_BAND: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ots-lab",
    version,
    about = "Gaussian Thompson sampling simulation lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run replications and write trajectories.csv and aggregate.json.
    Simulate(CommonArgs),
    /// Simulate, then check per-arm Wald coverage against 1 − α.
    Coverage(CommonArgs),
    /// Simulate, then check pull-count ratios against the stability targets.
    Stability(CommonArgs),
    /// Simulate, then check regret against its envelope.
    Regret(CommonArgs),
    /// Run the numerical lemma checks and write lemmas.json.
    Lemmas(CommonArgs),
    /// Everything above.
    All(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Experiment config (JSON). Optional for `lemmas`.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Master seed; overrides the config, including the lemma seed.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Replication count; overrides the config.
    #[arg(long, value_name = "INT")]
    reps: Option<u64>,
    /// Suppress stdout; files are written unchanged.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Task {
    Simulate,
    Coverage,
    Stability,
    Regret,
    Lemmas,
    All,
}

impl Task {
    fn simulates(self) -> bool {
        self != Task::Lemmas
    }

    fn runs_lemmas(self) -> bool {
        matches!(self, Task::Lemmas | Task::All)
    }

    fn wants(self, other: Task) -> bool {
        self == other || self == Task::All
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Summaries go to stdout, diagnostics to stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_to(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`dispatch`] with explicit output sinks.
pub fn dispatch_to<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            if informational {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{e}");
            return EXIT_INVALID;
        }
    };
    let (task, args) = match cli.command {
        Command::Simulate(a) => (Task::Simulate, a),
        Command::Coverage(a) => (Task::Coverage, a),
        Command::Stability(a) => (Task::Stability, a),
        Command::Regret(a) => (Task::Regret, a),
        Command::Lemmas(a) => (Task::Lemmas, a),
        Command::All(a) => (Task::All, a),
    };
    let mut sink = std::io::sink();
    let out: &mut dyn Write = if args.quiet { &mut sink } else { out };
    match run(task, &args, out) {
        Ok(bands) => {
            let failed: Vec<&BandOutcome> = bands.iter().filter(|b| !b.pass).collect();
            if failed.is_empty() {
                EXIT_OK
            } else {
                for b in failed {
                    let _ = writeln!(err, "band violated: {b}");
                }
                EXIT_BAND
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}

fn load_config(task: Task, args: &CommonArgs) -> Result<Option<ExperimentConfig>> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if task == Task::Lemmas => return Ok(None),
        None => return Err(LabError::InvalidConfig("--config PATH is required".into())),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
        cfg.lemmas.seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.replications = reps;
    }
    if let Some(dir) = &args.out {
        cfg.outputs.dir = dir.clone();
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

// Writes to stdout are best effort; a closed pipe must not change the exit code.
macro_rules! say {
    ($out:expr, $($arg:tt)*) => {{
        let _ = writeln!($out, $($arg)*);
    }};
}

fn run(task: Task, args: &CommonArgs, out: &mut dyn Write) -> Result<Vec<BandOutcome>> {
    let cfg = load_config(task, args)?;
    let threads = threads_from_env()?;
    let mut bands = Vec::new();

    if let (true, Some(cfg)) = (task.simulates(), &cfg) {
        let run = run_experiment_with_threads(cfg, threads)?;
        let paths = write_report(&run.report, &run.records, &cfg.outputs.dir)?;
        print_simulation(out, cfg, &run);
        if task.wants(Task::Coverage) {
            bands.extend(print_bands(out, "coverage", coverage_bands(&run.report)));
        }
        if task.wants(Task::Stability) {
            print_stability(out, &run);
            bands.extend(print_bands(out, "stability", stability_bands(&run.report)));
        }
        if task.wants(Task::Regret) {
            print_regret(out, cfg, &run)?;
            bands.extend(print_bands(out, "regret", regret_bands(cfg, &run.report)?));
        }
        say!(out, "wrote {}", paths.trajectories.display());
        say!(out, "wrote {}", paths.aggregate.display());
    }

    if task.runs_lemmas() {
        let (lemma_cfg, dir) = match &cfg {
            Some(c) => (c.lemmas.clone(), c.outputs.dir.clone()),
            None => {
                let mut l = LemmaConfig::default();
                if let Some(seed) = args.seed {
                    l.seed = seed;
                }
                let dir = args
                    .out
                    .clone()
                    .unwrap_or_else(|| crate::experiment::OutputConfig::default().dir);
                (l, dir)
            }
        };
        let report = with_thread_pool(threads, || run_lemma_checks(&lemma_cfg))??;
        let path = write_lemmas(&report, &dir)?;
        print_lemmas(out, &report);
        bands.extend(lemma_bands(&report).into_iter().filter(|b| !b.pass));
        say!(out, "wrote {}", path.display());
    }
    Ok(bands)
}

fn print_bands(out: &mut dyn Write, heading: &str, bands: Vec<BandOutcome>) -> Vec<BandOutcome> {
    if bands.is_empty() {
        say!(out, "{heading}: no acceptance bands for this policy");
    }
    for b in &bands {
        say!(out, "  {b}");
    }
    bands
}

fn print_simulation(out: &mut dyn Write, cfg: &ExperimentConfig, run: &ExperimentRun) {
    let m = &run.report.metadata;
    say!(
        out,
        "{} K={} T={} R={} seed={} sigma={:.6} beta={:.6} config={}",
        m.mode.label(),
        cfg.arms(),
        m.horizon,
        m.replications,
        m.master_seed,
        m.sigma,
        m.beta,
        &m.config_hash[..12]
    );
    say!(
        out,
        "{:>10} {:>5} {:>8} {:>12} {:>9}",
        "t",
        "arm",
        "mu",
        "mean count",
        "coverage"
    );
    for cp in &run.report.checkpoints {
        for arm in &cp.arms {
            say!(
                out,
                "{:>10} {:>5} {:>8.4} {:>12.2} {:>9.4}",
                cp.t,
                arm.arm,
                arm.true_mean,
                arm.count_mean,
                arm.coverage
            );
        }
    }
    let last = run.report.final_checkpoint();
    say!(out, "nominal coverage {:.4}", 1.0 - m.alpha);
    for arm in &last.arms {
        say!(
            out,
            "  arm {} studentized KS: D = {:.5}, p = {:.4}",
            arm.arm,
            arm.studentized_ks.statistic,
            arm.studentized_ks.p_value
        );
    }
}

fn print_stability(out: &mut dyn Write, run: &ExperimentRun) {
    say!(
        out,
        "{:>10} {:>5} {:>12} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "t",
        "arm",
        "target",
        "q05",
        "q25",
        "median",
        "q75",
        "q95"
    );
    for cp in &run.report.checkpoints {
        for arm in &cp.arms {
            if let (Some(target), Some(q)) = (arm.target, &arm.ratio) {
                say!(
                    out,
                    "{:>10} {:>5} {:>12.2} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                    cp.t,
                    arm.arm,
                    target,
                    q.q05,
                    q.q25,
                    q.median,
                    q.q75,
                    q.q95
                );
            }
        }
        if let Some(v) = cp.lyapunov_mean {
            say!(out, "{:>10} mean Lyapunov V = {v:.3e}", cp.t);
        }
    }
}

fn print_regret(out: &mut dyn Write, cfg: &ExperimentConfig, run: &ExperimentRun) -> Result<()> {
    let m = &run.report.metadata;
    let instance = cfg.instance()?;
    say!(
        out,
        "{:>10} {:>12} {:>10} {:>12} {:>12}",
        "t",
        "mean regret",
        "se",
        "median",
        "regret/t"
    );
    for cp in &run.report.checkpoints {
        let se = cp
            .regret
            .std_error
            .map_or_else(|| "-".to_string(), |s| format!("{s:.3}"));
        say!(
            out,
            "{:>10} {:>12.3} {:>10} {:>12.3} {:>12.6}",
            cp.t,
            cp.regret.mean,
            se,
            cp.regret.median,
            cp.regret.median / cp.t as f64
        );
    }
    if let Some(env) = regret_envelope(&instance, m.mode, m.horizon, m.sigma, m.beta) {
        say!(out, "envelope at T: {env:.3}");
    }
    Ok(())
}

fn print_lemmas(out: &mut dyn Write, report: &LemmaReport) {
    say!(out, "lemma checks (seed {})", report.seed);
    for c in &report.checks {
        say!(
            out,
            "  {} {:<34} n={:<6} worst={:+.4e} tol={:.1e}  {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.grid_size,
            c.worst_violation,
            c.tolerance,
            c.detail
        );
    }
}
