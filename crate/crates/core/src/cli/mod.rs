//! Command-line front end: `check`, `construct`, `optimize`, `simulate` and
//! `sweep` over a [`RunConfig`].
//!
//! Exit codes: 0 success, 2 infeasible verdict, 1 any other error.

pub mod commands;
pub mod config;
pub mod presets;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{cmd_check, cmd_construct, cmd_optimize, cmd_simulate, cmd_sweep, SweepParam, SweepRange};
pub use config::{Format, Mode, RunConfig};
pub use report::Report;

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nqi", version, about = "Nondistortion quantum interrogation toolkit")]
pub struct Cli {
    /// JSON run configuration; command-line flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long = "tol-rel", global = true)]
    pub tol_rel: Option<f64>,
    /// Seeds the probe-grid phase offset and Monte Carlo sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Single,
    Zeno,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Named system: atom, atom-potting.
    #[arg(long)]
    pub preset: Option<String>,
    /// Atom preset: p+ = p- = p.
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long = "p-plus", allow_negative_numbers = true)]
    pub p_plus: Option<f64>,
    #[arg(long = "p-minus", allow_negative_numbers = true)]
    pub p_minus: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Probe split; optimized when absent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Zeno loop count.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Simulate the empty box only.
    #[arg(long)]
    pub empty: bool,
    /// Also sample this many Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// p, p_plus, p_minus, alpha or N.
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide single-shot feasibility and print the witness.
    Check(RunArgs),
    /// Build the final measurement at the given (or optimal) alpha.
    Construct(RunArgs),
    /// Maximize the single-shot success probability over alpha.
    Optimize(RunArgs),
    /// Exact outcome distribution of a single-shot or Zeno run.
    Simulate(RunArgs),
    /// Run the pipeline over a parameter grid, one JSON line per point.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

impl Command {
    fn run_args(&self) -> &RunArgs {
        match self {
            Command::Check(a) | Command::Construct(a) | Command::Optimize(a) | Command::Simulate(a) => a,
            Command::Sweep { run, .. } => run,
        }
    }
}

/// Folds the command-line flags into the (file) configuration.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
        };
    }
    if let Some(t) = cli.tol_rel {
        cfg.tolerances.tol_rel = t;
    }
    if let Some(s) = cli.seed {
        cfg.search.seed = Some(s);
    }
    let a = cli.command.run_args();
    if let Some(p) = &a.preset {
        cfg.system.preset = Some(p.clone());
        cfg.system.inline = None;
    }
    if a.p.is_some() {
        cfg.system.p = a.p;
        cfg.system.p_plus = None;
        cfg.system.p_minus = None;
    }
    if a.p_plus.is_some() {
        cfg.system.p_plus = a.p_plus;
    }
    if a.p_minus.is_some() {
        cfg.system.p_minus = a.p_minus;
    }
    if let Some(m) = a.mode {
        cfg.protocol.mode = match m {
            ModeArg::Single => Mode::Single,
            ModeArg::Zeno => Mode::Zeno,
        };
    }
    if a.alpha.is_some() {
        cfg.protocol.alpha = a.alpha;
    }
    if a.n.is_some() {
        cfg.protocol.n = a.n;
    }
    if a.n.is_some() && a.mode.is_none() {
        cfg.protocol.mode = Mode::Zeno;
    }
    cfg.protocol.empty |= a.empty;
    if a.trials.is_some() {
        cfg.protocol.trials = a.trials;
    }
    if a.output.is_some() {
        cfg.output.path = a.output.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let cfg = effective_config(cli)?;
    let text = cfg.output.format == Format::Text;
    let mut file;
    let out: &mut dyn Write = match &cfg.output.path {
        Some(path) => {
            file = std::io::BufWriter::new(std::fs::File::create(path)?);
            &mut file
        }
        None => stdout,
    };
    let report = match &cli.command {
        Command::Check(_) => cmd_check(&cfg)?,
        Command::Construct(_) => cmd_construct(&cfg)?,
        Command::Optimize(_) => cmd_optimize(&cfg)?,
        Command::Simulate(_) => cmd_simulate(&cfg)?,
        Command::Sweep { sweep, .. } => {
            let range = SweepRange {
                param: SweepParam::parse(&sweep.param)?,
                from: sweep.from,
                to: sweep.to,
                steps: sweep.steps,
            };
            cmd_sweep(&cfg, &range, |r| {
                commands::write_report(out, r, text)?;
                out.flush()?;
                Ok(())
            })?;
            return Ok(EXIT_OK);
        }
    };
    commands::write_report(out, &report, text)?;
    out.flush()?;
    Ok(if report.is_feasible() {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    })
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(&cli, stdout) {
        Ok(code) => code,
        Err(Error::InfeasibleSystem) => {
            let _ = writeln!(stderr, "error: {}", Error::InfeasibleSystem);
            EXIT_INFEASIBLE
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}
