//! Subcommand bodies. Each writes its report to the given sink and returns a
//! [`Failure`] carrying the process exit code on error.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use naming_game::distributions::{fit_powerlaw, powerlaw_normalize, powerlaw_pmf, PowerLawFit};
use naming_game::dynamics::{closed_form_iterate, iterate, step_file_name};
use naming_game::ingestion::{build_table, name_list_stats, parse_ssa_year, welch_t_test, SexFilter, Strictness};
use naming_game::metrics::{error_histogram, Histogram, Scale};
use naming_game::mutation::{choose_mutated_name, lambda_sweep, MutationConfig};
use naming_game::population::format_f64;
use naming_game::{DiscretePrefMass, Error, LogNormalParams, NameTable, PreferenceModel, StepMode};
use serde::Serialize;
use serde_json::json;

use crate::config::{InitialSpec, ModeSpec, PrefSpec, RunConfig, RunSpec};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_USAGE, error: error.into() }
    }

    pub fn io(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_IO, error: error.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Parse { .. } => Failure::io(e),
            other => Failure::usage(other),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

fn write_out(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes()).map_err(Failure::io)
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(Failure::usage)?;
    write_out(out, &format!("{text}\n"))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display())).map_err(Failure::io)?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display())).map_err(Failure::io)
}

/// A loaded table plus the line numbers skipped by a lenient SSA parse.
pub struct LoadedTable {
    pub table: NameTable,
    pub skipped: Vec<usize>,
}

/// Reads a table by extension: `.json` and `.csv` hold `name,frequency`
/// tables; anything else is read as an SSA year file (`name,sex,count`).
pub fn load_table(path: &Path, sex: &str, strictness: Strictness) -> CmdResult<LoadedTable> {
    let wrap = |e: Error| Failure::io(anyhow!(e).context(format!("loading {}", path.display())));
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let file = || fs::File::open(path).with_context(|| format!("opening {}", path.display())).map_err(Failure::io);
    match ext.as_deref() {
        Some("json") => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::io)?;
            Ok(LoadedTable { table: NameTable::from_json(&text, 0).map_err(wrap)?, skipped: Vec::new() })
        }
        Some("csv") => Ok(LoadedTable { table: NameTable::read_csv(file()?, 0).map_err(wrap)?, skipped: Vec::new() }),
        _ => {
            let filter: SexFilter = sex.parse().map_err(Failure::usage)?;
            let parsed = parse_ssa_year(BufReader::new(file()?), strictness).map_err(wrap)?;
            let table = build_table(&parsed.records, filter).map_err(wrap)?;
            Ok(LoadedTable { table, skipped: parsed.skipped })
        }
    }
}

/// Builds the preference model a run spec describes.
pub fn preference_model(spec: &RunSpec) -> CmdResult<PreferenceModel> {
    Ok(match &spec.preferences {
        PrefSpec::Lognormal { mode, sigma, floor, bins } => PreferenceModel::LogNormal {
            params: LogNormalParams::new(*mode, *sigma, floor.unwrap_or(spec.default_floor()))?,
            bins: *bins,
        },
        PrefSpec::Powerlaw { t_prime, floor, bins } => {
            PreferenceModel::PowerLaw { t_prime: *t_prime, floor: floor.unwrap_or(spec.default_floor()), bins: *bins }
        }
        PrefSpec::Dweezil => PreferenceModel::Dweezil,
        PrefSpec::Explicit { path } => {
            let file =
                fs::File::open(path).with_context(|| format!("opening {}", path.display())).map_err(Failure::io)?;
            let mass = DiscretePrefMass::read_csv(file)
                .map_err(|e| Failure::io(anyhow!(e).context(format!("loading {}", path.display()))))?;
            PreferenceModel::Explicit { mass }
        }
    })
}

pub fn initial_table(spec: &RunSpec, strictness: Strictness) -> CmdResult<NameTable> {
    match &spec.initial {
        InitialSpec::Powerlaw { t, n } => Ok(naming_game::dynamics::powerlaw_initial(*t, *n)?),
        InitialSpec::File { path, sex } => Ok(load_table(path, sex, strictness)?.table),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    run: &'a RunSpec,
}

/// Error histogram edges: log-spaced, covering every measure's range.
fn error_edges() -> Vec<f64> {
    Histogram::log_edges(1e-9, 1e4, 130)
}

fn preference_edges() -> Vec<f64> {
    Histogram::log_edges(1e-9, 1.0, 90)
}

/// Runs a simulation and writes its output tree:
///
/// - `manifest.json`: tool version and the full run spec
/// - `step_NNNN.csv` per step and `diagnostics.csv`
/// - `preferences.csv`: the preference mass applied at the first step
/// - Monte Carlo only: `errors/step_NNNN_{ratio,absdiff,relerror}.csv` and
///   `desired/step_NNNN.csv` histograms
pub fn simulate(config: &RunConfig, strictness: Strictness, out: &mut dyn Write) -> CmdResult {
    let spec = &config.spec;
    spec.validate().map_err(Failure::usage)?;
    let model = preference_model(spec)?;
    let initial = initial_table(spec, strictness)?;
    let mode = match spec.mode {
        ModeSpec::Deterministic => StepMode::DeterministicMass,
        ModeSpec::MonteCarlo => StepMode::monte_carlo(spec.population, spec.seed)?,
    };
    let first_mass = model.mass_for(&initial)?;
    let trajectory = iterate(&initial, &model, spec.steps, mode)?;

    let dir = &config.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(Failure::io)?;
    let manifest = Manifest { tool: "naming-game", version: env!("CARGO_PKG_VERSION"), run: spec };
    let manifest_text = serde_json::to_string_pretty(&manifest).map_err(Failure::usage)?;
    write_file(&dir.join("manifest.json"), &format!("{manifest_text}\n"))?;
    trajectory.write_dir(dir)?;
    write_file(&dir.join("preferences.csv"), &first_mass.to_csv_string())?;

    if let Some(all) = &trajectory.outcomes {
        let edges = error_edges();
        let pref_edges = preference_edges();
        for (k, outcomes) in all.iter().enumerate() {
            let stem = step_file_name(k + 1);
            let stem = stem.trim_end_matches(".csv");
            let hist = error_histogram(outcomes, &edges, Scale::Log)?;
            write_file(&dir.join("errors").join(format!("{stem}_ratio.csv")), &hist.ratio.to_csv_string())?;
            write_file(&dir.join("errors").join(format!("{stem}_absdiff.csv")), &hist.absdiff.to_csv_string())?;
            write_file(&dir.join("errors").join(format!("{stem}_relerror.csv")), &hist.relerror.to_csv_string())?;
            let desired = Histogram::from_values(outcomes.iter().map(|o| o.desired), &pref_edges, Scale::Log)?;
            write_file(&dir.join("desired").join(format!("{stem}.csv")), &desired.to_csv_string())?;
        }
    }

    let last = trajectory.diagnostics.last();
    print_json(
        out,
        &json!({
            "out": dir,
            "steps": spec.steps,
            "names": initial.len(),
            "final_top1_share": last.map(|d| d.top1_share),
            "final_fitted_t": last.map(|d| d.fitted_t),
        }),
    )
}

fn orientation(exponent: f64) -> &'static str {
    if exponent > 0.0 {
        "decreasing"
    } else if exponent < 0.0 {
        "increasing"
    } else {
        "flat"
    }
}

/// CSV of the exponent and top-1 share after each of `n` closed-form steps.
pub fn closed_form(t: f64, t_prime: f64, n: usize, n_ranks: usize, out: &mut dyn Write) -> CmdResult {
    if n_ranks < 2 {
        return Err(Failure::usage(anyhow!("N must be at least 2, got {n_ranks}")));
    }
    if !t_prime.is_finite() {
        return Err(Failure::usage(anyhow!("t' must be finite, got {t_prime}")));
    }
    let f0 = powerlaw_normalize(t, n_ranks)?;
    let mut csv = String::from("step,exponent,top1_share,orientation\n");
    for (k, params) in closed_form_iterate(&f0, t_prime, n).iter().enumerate() {
        if !params.t.is_finite() {
            return Err(Failure::usage(anyhow!("exponent overflows at step {k}")));
        }
        let top_rank = if params.t >= 0.0 { 1 } else { n_ranks };
        let top1 = powerlaw_pmf(params, top_rank)?;
        csv.push_str(&format!("{k},{},{},{}\n", format_f64(params.t), format_f64(top1), orientation(params.t)));
    }
    write_out(out, &csv)
}

/// `rank,name,frequency,fitted` rows for a table and its fit.
pub fn rank_frequency_csv(table: &NameTable, fit: &PowerLawFit) -> String {
    let mut csv = String::from("rank,name,frequency,fitted\n");
    for (i, (name, f)) in table.entries().enumerate() {
        let rank = (i + 1) as f64;
        let name =
            if name.contains([',', '"', '\n']) { format!("\"{}\"", name.replace('"', "\"\"")) } else { name.into() };
        csv.push_str(&format!("{},{name},{},{}\n", i + 1, format_f64(f), format_f64(fit.k * rank.powf(-fit.t))));
    }
    csv
}

/// Fits a power law to a table file and writes its rank-frequency CSV.
pub fn fit(path: &Path, sex: &str, strictness: Strictness, csv_out: &Path, out: &mut dyn Write) -> CmdResult {
    let loaded = load_table(path, sex, strictness)?;
    let fit = fit_powerlaw(&loaded.table)?;
    write_file(csv_out, &rank_frequency_csv(&loaded.table, &fit))?;
    print_json(
        out,
        &json!({
            "t": fit.t,
            "k": fit.k,
            "r2": fit.r2,
            "points": fit.points,
            "names": loaded.table.len(),
            "skipped_lines": loaded.skipped.len(),
            "rank_frequency_csv": csv_out,
        }),
    )
}

/// Popularity statistics for one or two name lists, plus a Welch test when
/// there are two.
pub fn analyze(
    path: &Path,
    sex: &str,
    strictness: Strictness,
    lists: &[Vec<String>],
    case_fold: bool,
    out: &mut dyn Write,
    warn: &mut dyn Write,
) -> CmdResult {
    if lists.is_empty() || lists.iter().any(Vec::is_empty) {
        return Err(Failure::usage(anyhow!("every name list needs at least one name")));
    }
    let loaded = load_table(path, sex, strictness)?;
    let mut stats = Vec::new();
    let mut reports = Vec::new();
    for (i, names) in lists.iter().enumerate() {
        let s = name_list_stats(&loaded.table, names, case_fold)?;
        if !s.missing.is_empty() {
            let line = format!(
                "warning: list {}: {} name(s) not in table: {}\n",
                i + 1,
                s.missing.len(),
                s.missing.join(", ")
            );
            warn.write_all(line.as_bytes()).map_err(Failure::io)?;
        }
        reports.push(json!({
            "n": s.n,
            "mean": s.mean,
            "mean_percent": s.mean * 100.0,
            "std": s.std,
            "std_percent": s.std * 100.0,
            "missing_count": s.missing.len(),
            "missing": s.missing,
        }));
        stats.push(s);
    }
    let welch = match stats.as_slice() {
        [a, b] => Some(welch_t_test(a, b)?),
        _ => None,
    };
    print_json(out, &json!({ "lists": reports, "welch": welch }))
}

/// Cheapest mutated name for a parent wanting `mu`, optionally followed by
/// a λ sweep written as CSV.
pub fn mutate(
    path: &Path,
    sex: &str,
    strictness: Strictness,
    mu: f64,
    config: &MutationConfig,
    sweep: Option<(&Path, &[f64])>,
    out: &mut dyn Write,
) -> CmdResult {
    config.validate()?;
    if !(0.0..=1.0).contains(&mu) {
        return Err(Failure::usage(anyhow!("mu must lie in [0, 1], got {mu}")));
    }
    let loaded = load_table(path, sex, strictness)?;
    let choice = choose_mutated_name(&loaded.table, mu, config)?;
    let novel = !loaded.table.contains(&choice.candidate);
    if let Some((sweep_path, lambdas)) = sweep {
        if lambdas.iter().any(|l| l.is_nan() || *l < 0.0) {
            return Err(Failure::usage(anyhow!("sweep values of lambda must be non-negative")));
        }
        let mut csv = String::from("lambda,base,candidate,distance,cost\n");
        for (lambda, c) in lambda_sweep(&loaded.table, mu, config, lambdas)? {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                format_f64(lambda),
                c.base,
                c.candidate,
                c.distance,
                format_f64(c.cost)
            ));
        }
        write_file(sweep_path, &csv)?;
    }
    print_json(
        out,
        &json!({
            "base": choice.base,
            "candidate": choice.candidate,
            "distance": choice.distance,
            "cost": choice.cost,
            "novel": novel,
        }),
    )
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> CmdResult<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 {
        return Err(Failure::usage(anyhow!("sweep range needs 0 < min <= max and count >= 1")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect())
}

/// Converts an SSA year file into a frequency table (CSV or JSON by the
/// output extension).
pub fn ingest(path: &Path, sex: &str, strictness: Strictness, dest: &Path, out: &mut dyn Write) -> CmdResult {
    let loaded = load_table(path, sex, strictness)?;
    let is_json = dest.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let text = if is_json { loaded.table.to_json() } else { loaded.table.to_csv_string() };
    write_file(dest, &text)?;
    print_json(
        out,
        &json!({
            "names": loaded.table.len(),
            "skipped_lines": loaded.skipped,
            "out": PathBuf::from(dest),
        }),
    )
}
