//! The naming step: every parent picks the name whose current popularity is
//! closest to the popularity they want, all at once, and the next table is
//! whatever that produces.

use std::fs;
use std::ops::Range;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    self, fit_powerlaw, lognormal_pref_mass, powerlaw_normalize, powerlaw_pref_mass, sample_preferences,
    DiscretePrefMass, LogNormalParams, PowerLawParams,
};
use crate::metrics::{spearman, top_k_share};
use crate::population::{format_f64, NameTable, ParentOutcome};
use crate::rng;
use crate::{Error, Result};

/// Positions (in rank order) of the names closest to `mu`.
///
/// `freqs` must be non-increasing. Equally close names are contiguous in
/// that order, so the whole tied set is a range.
pub(crate) fn closest_range(freqs: &[f64], mu: f64) -> Range<usize> {
    debug_assert!(!freqs.is_empty());
    let split = freqs.partition_point(|&f| f >= mu);
    let dist = |i: usize| (freqs[i] - mu).abs();
    let best = match (split.checked_sub(1), (split < freqs.len()).then_some(split)) {
        (Some(l), Some(r)) => dist(l).min(dist(r)),
        (Some(l), None) => dist(l),
        (None, Some(r)) => dist(r),
        (None, None) => unreachable!("non-empty table"),
    };
    let mut lo = split;
    while lo > 0 && dist(lo - 1) == best {
        lo -= 1;
    }
    let mut hi = split;
    while hi < freqs.len() && dist(hi) == best {
        hi += 1;
    }
    lo..hi
}

/// Every name whose popularity is closest to `mu`, in rank order.
pub fn assign_name(table: &NameTable, mu: f64) -> Vec<&str> {
    table.names()[closest_range(table.frequencies(), mu)].iter().map(String::as_str).collect()
}

/// Mass-flow step: each preference point sends its mass to its closest
/// name, split evenly between ties.
pub fn step_deterministic(table: &NameTable, g: &DiscretePrefMass) -> Result<NameTable> {
    let freqs = table.frequencies();
    let mut inflow = vec![0.0; table.len()];
    for &(mu, p) in g.pairs() {
        let range = closest_range(freqs, mu);
        let share = p / range.len() as f64;
        for slot in &mut inflow[range] {
            *slot += share;
        }
    }
    NameTable::new(table.names().iter().cloned().zip(inflow), table.step_index() + 1)
}

/// One cohort of parents, each with their own desired popularity.
///
/// Everybody looks at the same current table. Ties are broken uniformly at
/// random with a stream keyed by `(seed, parent index)`, so the result does
/// not depend on the thread count.
pub fn step_montecarlo(table: &NameTable, prefs: &[f64], seed: u64) -> Result<(NameTable, Vec<ParentOutcome>)> {
    if prefs.is_empty() {
        return Err(Error::input("a Monte Carlo step needs at least one parent"));
    }
    let freqs = table.frequencies();
    let tie_seed = rng::derive_seed(seed, rng::DOMAIN_TIE);
    let choose = |(j, &mu): (usize, &f64)| -> u32 {
        let range = closest_range(freqs, mu);
        let pick = if range.len() == 1 { range.start } else { rng::stream(tie_seed, j as u64).random_range(range) };
        pick as u32
    };
    #[cfg(feature = "parallel")]
    let chosen: Vec<u32> = {
        use rayon::prelude::*;
        prefs.par_iter().enumerate().map(choose).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let chosen: Vec<u32> = prefs.iter().enumerate().map(choose).collect();

    let mut counts = vec![0u64; table.len()];
    for &c in &chosen {
        counts[c as usize] += 1;
    }
    let total = prefs.len() as f64;
    let next = NameTable::new(
        table.names().iter().cloned().zip(counts.iter().map(|&c| c as f64 / total)),
        table.step_index() + 1,
    )?;
    let outcomes = prefs
        .iter()
        .zip(&chosen)
        .map(|(&desired, &c)| {
            let chosen = table.names()[c as usize].clone();
            let achieved = counts[c as usize] as f64 / total;
            ParentOutcome { desired, chosen, achieved }
        })
        .collect();
    Ok((next, outcomes))
}

/// Image of a power-law table under a power-law preference `g(mu) = K' mu^-t'`.
///
/// Composing gives a pmf proportional to `rank^(t t')`, stored here as the
/// exponent `-t t'` of the usual `rank^-t` form.
pub fn closed_form_step(f: &PowerLawParams, t_prime: f64) -> PowerLawParams {
    powerlaw_normalize(-f.t * t_prime, f.n_ranks).expect("rank count carried over from valid params")
}

/// `n` repeated closed-form steps; element `k` has exponent `t (-t')^k`.
pub fn closed_form_iterate(f: &PowerLawParams, t_prime: f64, n: usize) -> Vec<PowerLawParams> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(*f);
    for _ in 0..n {
        let next = closed_form_step(out.last().unwrap(), t_prime);
        out.push(next);
    }
    out
}

/// `true` when no name's popularity moved by more than `tol`.
pub fn is_stable(a: &NameTable, b: &NameTable, tol: f64) -> Result<bool> {
    let other = a.aligned(b)?;
    let max_delta = a.frequencies().iter().zip(&other).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(max_delta <= tol)
}

/// Every parent wants exactly the popularity of their own name.
///
/// Names with zero popularity contribute nothing. Tied names merge into a
/// single point carrying their combined popularity, so only the tied
/// group's total is preserved by a step.
pub fn dweezil_preferences(table: &NameTable) -> DiscretePrefMass {
    DiscretePrefMass::new(table.frequencies().iter().filter(|&&f| f > 0.0).map(|&f| (f, f)))
        .expect("a valid table is a valid preference mass")
}

/// A cohort of `population` parents that reproduces `table` as closely as
/// whole people allow: name `a` gets round(f(a) * population) parents by
/// largest remainder, each wanting f(a).
pub fn dweezil_sample(table: &NameTable, population: usize) -> Vec<f64> {
    let freqs = table.frequencies();
    let exact: Vec<f64> = freqs.iter().map(|f| f * population as f64).collect();
    let mut seats: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = seats.iter().sum();
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    order.sort_by(|&i, &j| (exact[j] - exact[j].floor()).total_cmp(&(exact[i] - exact[i].floor())).then(i.cmp(&j)));
    for &i in order.iter().take(population.saturating_sub(assigned)) {
        seats[i] += 1;
    }
    freqs.iter().zip(&seats).flat_map(|(&f, &n)| std::iter::repeat_n(f, n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    /// More parents want this popularity than it has, so they end up with a
    /// more popular name than they wanted.
    Overshoot,
    Undershoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisfiabilityRow {
    pub mu: f64,
    pub demand: f64,
    /// Popularity after the step of the name(s) chosen for `mu`.
    pub resulting: f64,
    /// `None` for `mu = 0`, which the satisfiability cases leave open.
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatisfiabilityReport {
    pub rows: Vec<SatisfiabilityRow>,
}

impl SatisfiabilityReport {
    /// Whether every row with a verdict is satisfied.
    pub fn all_satisfied(&self) -> bool {
        self.rows.iter().all(|r| matches!(r.verdict, None | Some(Verdict::Satisfied)))
    }

    pub fn row(&self, mu: f64) -> Option<&SatisfiabilityRow> {
        self.rows.iter().find(|r| r.mu == mu)
    }
}

pub fn verdict(mu: f64, demand: f64, tol: f64) -> Option<Verdict> {
    if mu <= 0.0 {
        None
    } else if demand > mu + tol {
        Some(Verdict::Overshoot)
    } else if demand < mu - tol {
        Some(Verdict::Undershoot)
    } else {
        Some(Verdict::Satisfied)
    }
}

/// Compares demand `g(mu)` with `mu` for each preference point. The names
/// chosen for `mu` are looked up in `before`; their popularity is read from
/// `after`.
pub fn satisfiability_report(
    before: &NameTable,
    after: &NameTable,
    g: &DiscretePrefMass,
    tol: f64,
) -> Result<SatisfiabilityReport> {
    before.check_same_universe(after)?;
    let rows = g
        .pairs()
        .iter()
        .map(|&(mu, demand)| {
            let chosen = assign_name(before, mu);
            let resulting =
                chosen.iter().map(|n| after.freq_of(n).expect("same universe")).sum::<f64>() / chosen.len() as f64;
            SatisfiabilityRow { mu, demand, resulting, verdict: verdict(mu, demand, tol) }
        })
        .collect();
    Ok(SatisfiabilityReport { rows })
}

/// What parents want, reused unchanged at every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreferenceModel {
    LogNormal { params: LogNormalParams, bins: usize },
    PowerLaw { t_prime: f64, floor: f64, bins: usize },
    Dweezil,
    Explicit { mass: DiscretePrefMass },
}

impl PreferenceModel {
    /// The discrete mass the deterministic step consumes.
    pub fn mass_for(&self, table: &NameTable) -> Result<DiscretePrefMass> {
        match self {
            PreferenceModel::LogNormal { params, bins } => lognormal_pref_mass(params, *bins),
            PreferenceModel::PowerLaw { t_prime, floor, bins } => powerlaw_pref_mass(*t_prime, *floor, *bins),
            PreferenceModel::Dweezil => Ok(dweezil_preferences(table)),
            PreferenceModel::Explicit { mass } => Ok(mass.clone()),
        }
    }

    /// A cohort of `population` desired popularities.
    ///
    /// Log-normal preferences are drawn from the continuous law; discrete
    /// ones by inverse CDF over their points.
    pub fn sample_for(&self, table: &NameTable, population: usize, seed: u64) -> Result<Vec<f64>> {
        match self {
            PreferenceModel::LogNormal { params, .. } => Ok(sample_preferences(params, population, seed)),
            PreferenceModel::Dweezil => Ok(dweezil_sample(table, population)),
            other => Ok(other.mass_for(table)?.sample(population, seed)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepMode {
    DeterministicMass,
    MonteCarlo { population: usize, seed: u64 },
}

impl StepMode {
    pub fn monte_carlo(population: usize, seed: u64) -> Result<Self> {
        if population == 0 {
            return Err(Error::domain("population must be at least 1"));
        }
        Ok(StepMode::MonteCarlo { population, seed })
    }
}

/// Pairwise diagnostics between step `step - 1` and `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: usize,
    pub spearman: f64,
    pub top1_share: f64,
    pub fitted_t: f64,
    pub r2: f64,
}

impl StepDiagnostics {
    pub fn between(prev: &NameTable, next: &NameTable) -> Self {
        let fit = fit_powerlaw(next).ok();
        StepDiagnostics {
            step: next.step_index(),
            spearman: spearman(prev, next).unwrap_or(f64::NAN),
            top1_share: top_k_share(next, 1).expect("tables are non-empty"),
            fitted_t: fit.map_or(f64::NAN, |f| f.t),
            r2: fit.map_or(f64::NAN, |f| f.r2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub tables: Vec<NameTable>,
    /// Per-step parent outcomes (Monte Carlo runs only); entry `k` belongs to
    /// the step producing `tables[k + 1]`.
    pub outcomes: Option<Vec<Vec<ParentOutcome>>>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn last(&self) -> &NameTable {
        self.tables.last().expect("trajectory holds the initial table")
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("step,spearman,top1_share,fitted_t,r2\n");
        for d in &self.diagnostics {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                d.step,
                format_f64(d.spearman),
                format_f64(d.top1_share),
                format_f64(d.fitted_t),
                format_f64(d.r2)
            ));
        }
        out
    }

    /// Writes `step_NNNN.csv` per table plus `diagnostics.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for table in &self.tables {
            fs::write(dir.join(step_file_name(table.step_index())), table.to_csv_string())?;
        }
        fs::write(dir.join("diagnostics.csv"), self.diagnostics_csv())?;
        Ok(())
    }
}

pub fn step_file_name(step: usize) -> String {
    format!("step_{step:04}.csv")
}

/// Seed for step `step` of a run rooted at `root_seed`.
pub fn step_seed(root_seed: u64, step: usize) -> u64 {
    rng::derive_seed(root_seed, step as u64)
}

/// Applies `n` steps with the same preferences.
pub fn iterate(table: &NameTable, model: &PreferenceModel, n: usize, mode: StepMode) -> Result<Trajectory> {
    let initial = table.clone().with_step_index(0);
    let mut tables = vec![initial];
    let mut outcomes = matches!(mode, StepMode::MonteCarlo { .. }).then(Vec::new);
    let mut diagnostics = Vec::with_capacity(n);
    for k in 0..n {
        let current = tables.last().unwrap();
        let next = match mode {
            StepMode::DeterministicMass => step_deterministic(current, &model.mass_for(current)?)?,
            StepMode::MonteCarlo { population, seed } => {
                let seed = step_seed(seed, k);
                let prefs = model.sample_for(current, population, rng::derive_seed(seed, rng::DOMAIN_SAMPLE))?;
                let (next, step_outcomes) = step_montecarlo(current, &prefs, seed)?;
                if let Some(all) = outcomes.as_mut() {
                    all.push(step_outcomes);
                }
                next
            }
        };
        diagnostics.push(StepDiagnostics::between(current, &next));
        tables.push(next);
    }
    Ok(Trajectory { tables, outcomes, diagnostics })
}

/// Power-law table over `rank_labels(n)`.
pub fn powerlaw_initial(t: f64, n: usize) -> Result<NameTable> {
    distributions::powerlaw_table(&powerlaw_normalize(t, n)?, &distributions::rank_labels(n))
}
