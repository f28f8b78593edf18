//! Browser demo: closed-form power-law iteration, a one-step log-normal
//! explorer and the mutated-name chooser. Each export returns JSON.

use naming_game::distributions::{default_floor, powerlaw_normalize};
use naming_game::dynamics::{closed_form_iterate, iterate, powerlaw_initial};
use naming_game::metrics::{ks_distance, spearman, top_k_share};
use naming_game::mutation::{choose_mutated_name, MutationChoice, MutationConfig};
use naming_game::{LogNormalParams, NameTable, PreferenceModel, StepMode};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Ranks sampled for plotting: every rank up to 20, then log-spaced.
fn plot_ranks(n: usize) -> Vec<usize> {
    let mut ranks: Vec<usize> = (1..=n.min(20)).collect();
    let mut r = 20.0f64;
    while (r as usize) < n {
        r *= 1.15;
        let k = (r.round() as usize).min(n);
        if k > *ranks.last().unwrap() {
            ranks.push(k);
        }
    }
    ranks
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub step: usize,
    pub exponent: f64,
    pub top1_share: f64,
    pub ranks: Vec<usize>,
    pub pmf: Vec<f64>,
}

/// Power-law pmf after each of `steps` closed-form steps under exponent `t_prime`.
pub fn closed_form_curves(t: f64, t_prime: f64, steps: usize, ranks: usize) -> Result<Vec<Curve>, String> {
    if ranks < 2 || !t_prime.is_finite() || steps > 64 {
        return Err("need at least 2 ranks, a finite t' and at most 64 steps".into());
    }
    let f = powerlaw_normalize(t, ranks).map_err(|e| e.to_string())?;
    let sample = plot_ranks(ranks);
    Ok(closed_form_iterate(&f, t_prime, steps)
        .iter()
        .enumerate()
        .map(|(step, p)| {
            let pmf = p.pmf_values();
            Curve {
                step,
                exponent: p.t,
                top1_share: pmf.iter().copied().fold(0.0, f64::max),
                ranks: sample.clone(),
                pmf: sample.iter().map(|&r| pmf[r - 1]).collect(),
            }
        })
        .collect())
}

#[derive(Debug, Serialize)]
pub struct StepView {
    pub ranks: Vec<usize>,
    /// Sorted frequencies before the step, at `ranks`.
    pub before: Vec<f64>,
    /// Sorted frequencies after the step, at `ranks`.
    pub after: Vec<f64>,
    pub ks: f64,
    pub spearman: f64,
    pub top1_before: f64,
    pub top1_after: f64,
}

/// One Monte Carlo step of a power-law table under log-normal preferences.
pub fn lognormal_step(
    t: f64,
    names: usize,
    mode: f64,
    sigma: f64,
    population: usize,
    seed: u64,
) -> Result<StepView, String> {
    if !(2..=20_000).contains(&names) || !(1..=2_000_000).contains(&population) {
        return Err("need 2..=20000 names and 1..=2000000 parents".into());
    }
    let s = |e: naming_game::Error| e.to_string();
    let initial = powerlaw_initial(t, names).map_err(s)?;
    let params = LogNormalParams::new(mode, sigma, default_floor(population as u64).min(mode)).map_err(s)?;
    let model = PreferenceModel::LogNormal { params, bins: 200 };
    let run = iterate(&initial, &model, 1, StepMode::monte_carlo(population, seed).map_err(s)?).map_err(s)?;
    let after = run.last();
    let ranks = plot_ranks(names);
    let at = |table: &NameTable| ranks.iter().map(|&r| table.frequencies()[r - 1]).collect();
    Ok(StepView {
        before: at(&initial),
        after: at(after),
        ks: ks_distance(after, &initial).map_err(s)?,
        spearman: spearman(&initial, after).map_err(s)?,
        top1_before: top_k_share(&initial, 1).map_err(s)?,
        top1_after: top_k_share(after, 1).map_err(s)?,
        ranks,
    })
}

/// Parses `name,weight` lines (blank lines and `#` comments skipped) into a
/// normalized table.
pub fn parse_weighted_names(text: &str) -> Result<NameTable, String> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, weight) = line.split_once(',').ok_or(format!("line {}: expected name,weight", i + 1))?;
        let weight: f64 = weight.trim().parse().map_err(|_| format!("line {}: bad weight", i + 1))?;
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(format!("line {}: weight must be non-negative", i + 1));
        }
        pairs.push((name.trim().to_string(), weight));
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    if total.is_nan() || total <= 0.0 {
        return Err("weights sum to zero".into());
    }
    NameTable::new(pairs.into_iter().map(|(n, w)| (n, w / total)), 0).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct MutationView {
    #[serde(flatten)]
    pub choice: MutationChoice,
    pub novel: bool,
    pub candidate_share: f64,
}

/// Cheapest name for a parent wanting popularity `mu`.
pub fn mutate(table_text: &str, mu: f64, lambda: f64, max_edits: usize) -> Result<MutationView, String> {
    if max_edits > 2 {
        return Err("the demo allows at most 2 edits".into());
    }
    let table = parse_weighted_names(table_text)?;
    let config = MutationConfig { lambda, max_edits, ..MutationConfig::default() };
    let choice = choose_mutated_name(&table, mu, &config).map_err(|e| e.to_string())?;
    let novel = !table.contains(&choice.candidate);
    let candidate_share = table.freq_of(&choice.candidate).unwrap_or(0.0);
    Ok(MutationView { choice, novel, candidate_share })
}

/// A starter table for the mutation panel: `count` common names with
/// power-law weights.
pub fn sample_names(count: usize) -> String {
    const NAMES: [&str; 20] = [
        "Emma",
        "Olivia",
        "Ava",
        "Isabella",
        "Sophia",
        "Mia",
        "Amelia",
        "Harper",
        "Evelyn",
        "Abigail",
        "Emily",
        "Ella",
        "Elizabeth",
        "Camila",
        "Luna",
        "Sofia",
        "Avery",
        "Mila",
        "Aria",
        "Scarlett",
    ];
    let count = count.clamp(1, NAMES.len());
    let f = powerlaw_normalize(1.0, count).expect("count is at least 1");
    NAMES.iter().zip(f.pmf_values()).map(|(n, p)| format!("{n},{p:.6}\n")).collect()
}

fn to_json<T: Serialize>(value: Result<T, String>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = closedFormCurves)]
pub fn closed_form_curves_js(t: f64, t_prime: f64, steps: usize, ranks: usize) -> Result<String, JsError> {
    to_json(closed_form_curves(t, t_prime, steps, ranks))
}

#[wasm_bindgen(js_name = lognormalStep)]
pub fn lognormal_step_js(
    t: f64,
    names: usize,
    mode: f64,
    sigma: f64,
    population: usize,
    seed: u64,
) -> Result<String, JsError> {
    to_json(lognormal_step(t, names, mode, sigma, population, seed))
}

#[wasm_bindgen(js_name = mutateName)]
pub fn mutate_js(table_text: &str, mu: f64, lambda: f64, max_edits: usize) -> Result<String, JsError> {
    to_json(mutate(table_text, mu, lambda, max_edits))
}

#[wasm_bindgen(js_name = sampleNames)]
pub fn sample_names_js(count: usize) -> String {
    sample_names(count)
}
