//! Command-line front end for the naming-game library.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use naming_game::ingestion::Strictness;
use naming_game::mutation::MutationConfig;
use naming_game::population::parse_proportion;

use crate::commands::{CmdResult, Failure};
use crate::config::{load_config_file, InitialSpec, ModeSpec, PrefSpec, RunConfig, RunSpec, DEFAULT_POPULATION};

#[derive(Debug, Parser)]
#[command(name = "naming-game", version, about = "Myopic baby-naming simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options for reading SSA year files.
#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Sex filter for SSA year files: F, M or all.
    #[arg(long, default_value = "all")]
    pub sex: String,
    /// Stop at the first malformed line (default).
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    /// Skip malformed lines and report how many were skipped.
    #[arg(long)]
    pub lenient: bool,
}

impl InputArgs {
    pub fn strictness(&self) -> Strictness {
        if self.lenient {
            Strictness::Lenient
        } else {
            Strictness::Strict
        }
    }
}

fn proportion(text: &str) -> Result<f64, String> {
    parse_proportion(text).map_err(|e| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a simulation and write per-step tables, diagnostics and a manifest.
    Simulate {
        /// JSON run config, or a manifest from an earlier run. Flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// `powerlaw:t=1,n=1000` or `file:PATH[,sex=F]`.
        #[arg(long)]
        initial: Option<InitialSpec>,
        /// `lognormal:mode=0.1%[,sigma=1]`, `powerlaw:t=0.5`, `dweezil` or `explicit:PATH`.
        #[arg(long)]
        prefs: Option<PrefSpec>,
        #[arg(long)]
        steps: Option<usize>,
        /// `deterministic` or `monte-carlo`.
        #[arg(long)]
        mode: Option<ModeSpec>,
        /// Parents per Monte Carlo step.
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Print closed-form exponents and top-1 shares as CSV.
    ClosedForm {
        #[arg(allow_hyphen_values = true)]
        t: f64,
        #[arg(allow_hyphen_values = true)]
        t_prime: f64,
        /// Number of steps.
        n: usize,
        /// Number of ranks.
        ranks: usize,
    },
    /// Fit a power law to a table and write its rank-frequency CSV.
    Fit {
        path: PathBuf,
        /// Where to write the rank-frequency CSV.
        #[arg(long, default_value = "rank_frequency.csv")]
        out: PathBuf,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Popularity statistics for name lists, with a Welch test for two lists.
    Analyze {
        path: PathBuf,
        /// First list of names.
        #[arg(required = true, num_args = 1..)]
        names: Vec<String>,
        /// Optional second list, compared with the first.
        #[arg(long, num_args = 1..)]
        versus: Option<Vec<String>>,
        /// Match names case-insensitively.
        #[arg(long)]
        case_fold: bool,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Choose the cheapest mutated name for a desired popularity.
    Mutate {
        path: PathBuf,
        /// Desired popularity (proportion or percent).
        #[arg(long, value_parser = proportion)]
        mu: f64,
        #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1)]
        max_edits: usize,
        /// Letters available to insertions and substitutions.
        #[arg(long, default_value = "abcdefghijklmnopqrstuvwxyz")]
        alphabet: String,
        /// Treat names as plain strings instead of capitalized names.
        #[arg(long)]
        no_capitalize: bool,
        /// Write a CSV of the choice for log-spaced λ values to this path.
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        sweep_min: f64,
        #[arg(long, default_value_t = 1.0)]
        sweep_max: f64,
        #[arg(long, default_value_t = 20)]
        sweep_count: usize,
        #[command(flatten)]
        input: InputArgs,
    },
    /// Convert an SSA year file into a frequency table (.csv or .json).
    Ingest {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        input: InputArgs,
    },
}

/// Resolves the simulate flags and optional config file into a run config.
#[allow(clippy::too_many_arguments)]
pub fn resolve_run_config(
    config: Option<&PathBuf>,
    initial: Option<InitialSpec>,
    prefs: Option<PrefSpec>,
    steps: Option<usize>,
    mode: Option<ModeSpec>,
    population: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> CmdResult<RunConfig> {
    let (base, base_out) = match config {
        Some(path) => {
            if !path.exists() {
                return Err(Failure::io(anyhow!("config file {} not found", path.display())));
            }
            let (spec, out) = load_config_file(path).map_err(Failure::usage)?;
            (Some(spec), out)
        }
        None => (None, None),
    };
    let spec =
        RunSpec {
            initial: initial
                .or_else(|| base.as_ref().map(|b| b.initial.clone()))
                .unwrap_or(InitialSpec::Powerlaw { t: 1.0, n: 1000 }),
            preferences: prefs
                .or_else(|| base.as_ref().map(|b| b.preferences.clone()))
                .unwrap_or(PrefSpec::Lognormal { mode: 1e-3, sigma: 1.0, floor: None, bins: 200 }),
            steps: steps.or(base.as_ref().map(|b| b.steps)).unwrap_or(1),
            mode: mode.or(base.as_ref().map(|b| b.mode)).unwrap_or(ModeSpec::MonteCarlo),
            population: population.or(base.as_ref().map(|b| b.population)).unwrap_or(DEFAULT_POPULATION),
            seed: seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
        };
    let out = out.or(base_out).ok_or_else(|| Failure::usage(anyhow!("an output directory (--out) is required")))?;
    Ok(RunConfig { spec, out })
}

/// Runs a parsed command line.
pub fn run(cli: Cli, out: &mut dyn Write, warn: &mut dyn Write) -> CmdResult {
    match cli.command {
        Command::Simulate { config, initial, prefs, steps, mode, population, seed, out: dir, input } => {
            let config = resolve_run_config(config.as_ref(), initial, prefs, steps, mode, population, seed, dir)?;
            commands::simulate(&config, input.strictness(), out)
        }
        Command::ClosedForm { t, t_prime, n, ranks } => commands::closed_form(t, t_prime, n, ranks, out),
        Command::Fit { path, out: csv, input } => commands::fit(&path, &input.sex, input.strictness(), &csv, out),
        Command::Analyze { path, names, versus, case_fold, input } => {
            let mut lists = vec![names];
            lists.extend(versus);
            commands::analyze(&path, &input.sex, input.strictness(), &lists, case_fold, out, warn)
        }
        Command::Mutate {
            path,
            mu,
            lambda,
            max_edits,
            alphabet,
            no_capitalize,
            sweep,
            sweep_min,
            sweep_max,
            sweep_count,
            input,
        } => {
            let config = MutationConfig {
                lambda,
                alphabet: alphabet.chars().collect(),
                max_edits,
                capitalize_first: !no_capitalize,
            };
            let lambdas = match &sweep {
                Some(_) => commands::log_space(sweep_min, sweep_max, sweep_count)?,
                None => Vec::new(),
            };
            let sweep = sweep.as_deref().map(|p| (p, lambdas.as_slice()));
            commands::mutate(&path, &input.sex, input.strictness(), mu, &config, sweep, out)
        }
        Command::Ingest { path, out: dest, input } => {
            commands::ingest(&path, &input.sex, input.strictness(), &dest, out)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Help and version requests exit 0, usage errors 1.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match run(cli, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {:#}", f.error);
            f.code
        }
    }
}
