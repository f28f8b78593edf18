//! Rank power laws, log-normal preferences and discretized preference masses.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::population::NameTable;
use crate::rng;
use crate::special::normal_cdf;
use crate::{Error, Result};

/// Default number of log-spaced bins used when discretizing a preference law.
pub const DEFAULT_PREF_BINS: usize = 200;

/// Default log-space spread of the preference distribution.
pub const DEFAULT_SIGMA: f64 = 1.0;

/// Smallest popularity worth distinguishing for a cohort of `population` parents:
/// one tenth of a person.
pub fn default_floor(population: u64) -> f64 {
    1.0 / (10.0 * population.max(1) as f64)
}

/// Normalized discrete power law `k * rank^-t` over ranks `1..=n_ranks`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawParams {
    pub t: f64,
    pub n_ranks: usize,
    pub k: f64,
    // ln k, kept separately so extreme exponents don't overflow.
    log_k: f64,
}

impl PowerLawParams {
    pub fn log_k(&self) -> f64 {
        self.log_k
    }

    /// `true` when probability decreases with rank.
    pub fn is_decreasing(&self) -> bool {
        self.t > 0.0
    }

    /// Probability of each rank, rank 1 first.
    pub fn pmf_values(&self) -> Vec<f64> {
        (1..=self.n_ranks).map(|a| self.pmf_unchecked(a)).collect()
    }

    fn pmf_unchecked(&self, rank: usize) -> f64 {
        (self.log_k - self.t * (rank as f64).ln()).exp()
    }
}

pub fn powerlaw_normalize(t: f64, n_ranks: usize) -> Result<PowerLawParams> {
    if n_ranks == 0 {
        return Err(Error::domain("power law needs at least one rank"));
    }
    if !t.is_finite() {
        return Err(Error::domain(format!("exponent must be finite, got {t}")));
    }
    let logs: Vec<f64> = (1..=n_ranks).map(|a| -t * (a as f64).ln()).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    Ok(PowerLawParams { t, n_ranks, k: (-log_z).exp(), log_k: -log_z })
}

pub fn powerlaw_pmf(params: &PowerLawParams, rank: usize) -> Result<f64> {
    if rank == 0 || rank > params.n_ranks {
        return Err(Error::domain(format!("rank {rank} outside 1..={}", params.n_ranks)));
    }
    Ok(params.pmf_unchecked(rank))
}

/// Labels `r1..rN`, zero-padded so that name order equals rank order.
pub fn rank_labels(n: usize) -> Vec<String> {
    let width = n.max(1).to_string().len();
    (1..=n).map(|a| format!("r{a:0width$}")).collect()
}

/// Materializes the power law as a table; the i-th label gets rank i's mass.
pub fn powerlaw_table<S: AsRef<str>>(params: &PowerLawParams, labels: &[S]) -> Result<NameTable> {
    if labels.len() != params.n_ranks {
        return Err(Error::input(format!("{} labels for {} ranks", labels.len(), params.n_ranks)));
    }
    let pairs = labels.iter().zip(params.pmf_values()).map(|(l, p)| (l.as_ref().to_string(), p));
    NameTable::new(pairs, 0)
}

/// Log-normal law of desired popularity, parameterized by its mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalParams {
    pub mode: f64,
    pub sigma: f64,
    /// Samples are clamped into `[floor, 1]`.
    pub floor: f64,
}

impl LogNormalParams {
    pub fn new(mode: f64, sigma: f64, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor <= mode && mode <= 1.0) {
            return Err(Error::domain(format!("need 0 < floor <= mode <= 1, got floor={floor} mode={mode}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(LogNormalParams { mode, sigma, floor })
    }

    /// Mean of the underlying normal: the mode sits at `exp(mu - sigma^2)`.
    pub fn log_mean(&self) -> f64 {
        self.mode.ln() + self.sigma * self.sigma
    }

    pub fn median(&self) -> f64 {
        self.log_mean().exp()
    }

    fn draw(&self, seed: u64, index: u64) -> f64 {
        let z: f64 = rng::stream(seed, index).sample(StandardNormal);
        (self.log_mean() + self.sigma * z).exp().clamp(self.floor, 1.0)
    }
}

/// Draws `n` desired popularities. Draw `i` depends only on `(params, seed, i)`.
pub fn sample_preferences(params: &LogNormalParams, n: usize, seed: u64) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n as u64).into_par_iter().map(|i| params.draw(seed, i)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n as u64).map(|i| params.draw(seed, i)).collect()
    }
}

/// Finite preference distribution: `p` of all parents want popularity `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePrefMass {
    pairs: Vec<(f64, f64)>,
}

impl DiscretePrefMass {
    /// Sorts by `mu`, merges repeated `mu` values and rescales to unit mass.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::input("preference mass needs at least one point"));
        }
        for &(mu, p) in &pairs {
            if !(0.0..=1.0).contains(&mu) || !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("pair (mu={mu}, p={p}) outside [0,1]")));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (mu, p) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == mu => last.1 += p,
                _ => merged.push((mu, p)),
            }
        }
        let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > crate::population::INPUT_SUM_TOLERANCE {
            return Err(Error::Normalization { sum });
        }
        if (sum - 1.0).abs() > 1e-12 {
            for pair in merged.iter_mut() {
                pair.1 /= sum;
            }
        }
        Ok(DiscretePrefMass { pairs: merged })
    }

    /// Builds from unnormalized non-negative weights.
    pub fn from_weights(points: &[f64], weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::domain("preference weights must have a positive finite total"));
        }
        Self::new(points.iter().zip(weights).map(|(&mu, &w)| (mu, w / total)))
    }

    /// `(mu, p)` pairs in increasing `mu`.
    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Mass at exactly `mu`, zero if absent.
    pub fn demand(&self, mu: f64) -> f64 {
        self.pairs.iter().find(|&&(m, _)| m == mu).map_or(0.0, |&(_, p)| p)
    }

    /// Draws `n` desired popularities by inverse CDF.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut cum = Vec::with_capacity(self.pairs.len());
        let mut acc = 0.0;
        for &(_, p) in &self.pairs {
            acc += p;
            cum.push(acc);
        }
        let last = self.pairs.len() - 1;
        let draw = |i: u64| {
            let u: f64 = rng::stream(seed, i).random::<f64>() * acc;
            let idx = cum.partition_point(|&c| c <= u).min(last);
            self.pairs[idx].0
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n as u64).into_par_iter().map(draw).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n as u64).map(draw).collect()
        }
    }

    /// Writes `mu,p` CSV.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("mu,p\n");
        for &(mu, p) in &self.pairs {
            out.push_str(&format!("{},{}\n", crate::population::format_f64(mu), crate::population::format_f64(p)));
        }
        out
    }

    /// Reads `mu,p` CSV; values may be written as percentages.
    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let mut pairs = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
            if record.len() != 2 {
                return Err(Error::Parse { line, message: "expected two columns mu,p".into() });
            }
            let parse = |s: &str| {
                crate::population::parse_proportion(s)
                    .map_err(|_| Error::Parse { line, message: format!("bad number {s:?}") })
            };
            pairs.push((parse(&record[0])?, parse(&record[1])?));
        }
        Self::new(pairs)
    }
}

/// Log-spaced bin edges from `lo` to `hi` inclusive.
pub fn log_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..=bins).map(|i| if i == bins { hi } else { (a + (b - a) * i as f64 / bins as f64).exp() }).collect()
}

fn log_centers(edges: &[f64]) -> Vec<f64> {
    edges.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect()
}

/// Discretizes the preference power law `mu^-t'` on `[floor, 1]`.
///
/// Bins are equal width in `ln mu`, so each bin center carries mass
/// proportional to `mu^-t'`. Positive `t_prime` favours uncommon names.
pub fn powerlaw_pref_mass(t_prime: f64, floor: f64, n_bins: usize) -> Result<DiscretePrefMass> {
    if !(floor > 0.0 && floor < 1.0) {
        return Err(Error::domain(format!("floor must lie in (0, 1), got {floor}")));
    }
    if n_bins == 0 {
        return Err(Error::domain("need at least one bin"));
    }
    let centers = log_centers(&log_edges(floor, 1.0, n_bins));
    let logs: Vec<f64> = centers.iter().map(|mu| -t_prime * mu.ln()).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    DiscretePrefMass::from_weights(&centers, &weights)
}

/// Discretizes a log-normal preference law onto `bins` log-spaced points in
/// `[floor, 1]`. The tails beyond either end fold into the end bins, matching
/// how samples are clamped.
pub fn lognormal_pref_mass(params: &LogNormalParams, bins: usize) -> Result<DiscretePrefMass> {
    if bins == 0 {
        return Err(Error::domain("need at least one bin"));
    }
    if params.floor >= 1.0 {
        return DiscretePrefMass::new([(1.0, 1.0)]);
    }
    let edges = log_edges(params.floor, 1.0, bins);
    let centers = log_centers(&edges);
    let mu = params.log_mean();
    let mut cdf: Vec<f64> = edges.iter().map(|e| normal_cdf((e.ln() - mu) / params.sigma)).collect();
    cdf[0] = 0.0;
    cdf[bins] = 1.0;
    let weights: Vec<f64> = cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
    DiscretePrefMass::from_weights(&centers, &weights)
}

/// Result of a least-squares fit of `ln f = ln k - t ln rank`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub t: f64,
    pub k: f64,
    pub r2: f64,
    /// Number of positive-frequency points used.
    pub points: usize,
}

/// Fits a power law to `(rank, frequency)` points, skipping zero frequencies.
pub fn fit_ranked(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    let xy: Vec<(f64, f64)> = points.iter().filter(|&&(_, f)| f > 0.0).map(|&(r, f)| (r.ln(), f.ln())).collect();
    if xy.len() < 2 {
        return Err(Error::InsufficientData(format!("need at least two positive frequencies, found {}", xy.len())));
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &xy {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all points share one rank".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xy.iter().map(|&(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(PowerLawFit { t: -slope, k: intercept.exp(), r2, points: xy.len() })
}

/// Fits against the table's own ranking (descending frequency, ties by name).
pub fn fit_powerlaw(table: &NameTable) -> Result<PowerLawFit> {
    let points: Vec<(f64, f64)> = table.frequencies().iter().enumerate().map(|(i, &f)| ((i + 1) as f64, f)).collect();
    fit_ranked(&points)
}

/// Fits using each name's rank in `reference` instead of in `table`.
///
/// This is how an exponent that reverses the ranking (pmf increasing in the
/// original rank) is recovered: the table's own order would re-sort it.
pub fn fit_powerlaw_against(table: &NameTable, reference: &NameTable) -> Result<PowerLawFit> {
    table.check_same_universe(reference)?;
    let points: Vec<(f64, f64)> =
        table.entries().map(|(name, f)| (reference.rank_of(name).expect("same universe") as f64, f)).collect();
    fit_ranked(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_abs_diff_eq!(powerlaw_normalize(1.0, 2).unwrap().k, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(powerlaw_normalize(0.0, 4).unwrap().k, 0.25, epsilon = 1e-15);
        for t in [-7.0, 0.0, 2.5] {
            assert_abs_diff_eq!(powerlaw_normalize(t, 1).unwrap().k, 1.0, epsilon = 1e-15);
        }
        assert!(matches!(powerlaw_normalize(1.0, 0), Err(Error::InvalidDomain(_))));
    }

    #[test]
    fn pmf_examples() {
        let p = powerlaw_normalize(1.0, 2).unwrap();
        assert_abs_diff_eq!(powerlaw_pmf(&p, 1).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert!(matches!(powerlaw_pmf(&p, 3), Err(Error::InvalidDomain(_))));
        assert!(matches!(powerlaw_pmf(&p, 0), Err(Error::InvalidDomain(_))));
        let u = powerlaw_normalize(0.0, 4).unwrap();
        assert_abs_diff_eq!(powerlaw_pmf(&u, 3).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn extreme_exponents_stay_finite() {
        let steep = powerlaw_normalize(3000.0, 1000).unwrap();
        assert_eq!(powerlaw_pmf(&steep, 1).unwrap(), 1.0);
        let reversed = powerlaw_normalize(-3000.0, 1000).unwrap();
        assert!(reversed.k == 0.0 && reversed.log_k().is_finite());
        assert!(powerlaw_pmf(&reversed, 1000).unwrap() > 0.9);
        assert_eq!(powerlaw_pmf(&reversed, 1).unwrap(), 0.0);
        assert!((reversed.pmf_values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_examples() {
        let p = powerlaw_normalize(1.0, 2).unwrap();
        let t = powerlaw_table(&p, &["A", "B"]).unwrap();
        assert_abs_diff_eq!(t.freq_of("A").unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.freq_of("B").unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        let one = powerlaw_table(&powerlaw_normalize(0.0, 1).unwrap(), &["X"]).unwrap();
        assert_eq!(one.freq_of("X").unwrap(), 1.0);
        assert!(powerlaw_table(&p, &["A", "A"]).is_err());
        assert!(powerlaw_table(&p, &["A"]).is_err());
    }

    #[test]
    fn rank_labels_sort_in_rank_order() {
        let labels = rank_labels(120);
        assert_eq!(labels[0], "r001");
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(sorted, labels);
    }

    #[test]
    fn lognormal_params_validation() {
        assert!(LogNormalParams::new(0.001, 1.0, 1e-7).is_ok());
        assert!(LogNormalParams::new(0.001, 0.0, 1e-7).is_err());
        assert!(LogNormalParams::new(0.001, 1.0, 0.01).is_err());
        assert!(LogNormalParams::new(1.5, 1.0, 0.01).is_err());
        let p = LogNormalParams::new(0.001, 1.0, 1e-7).unwrap();
        assert_abs_diff_eq!(p.median(), 0.001 * 1f64.exp(), epsilon = 1e-15);
    }

    #[test]
    fn sampling_is_deterministic_and_clamped() {
        let p = LogNormalParams::new(0.05, 2.0, 0.01).unwrap();
        assert!(sample_preferences(&p, 0, 1).is_empty());
        let a = sample_preferences(&p, 5000, 9);
        assert_eq!(a, sample_preferences(&p, 5000, 9));
        assert_ne!(a, sample_preferences(&p, 5000, 10));
        assert!(a.iter().all(|&x| (0.01..=1.0).contains(&x)));
        assert!(a.contains(&1.0) && a.contains(&0.01));
        // prefix stability: draw i does not depend on n
        assert_eq!(&sample_preferences(&p, 100, 9)[..], &a[..100]);
    }

    #[test]
    fn sample_density_peaks_at_mode() {
        // The density per unit popularity, estimated on 50 log-spaced bins
        // over [1e-8, 1], must peak in or next to the bin holding the mode.
        let p = LogNormalParams::new(0.001, 1.0, 1e-8).unwrap();
        let xs = sample_preferences(&p, 1_000_000, 42);
        let edges = log_edges(1e-8, 1.0, 50);
        let mut counts = vec![0u64; 50];
        for x in xs {
            let i = edges.partition_point(|&e| e <= x).saturating_sub(1).min(49);
            counts[i] += 1;
        }
        let density: Vec<f64> = counts.iter().zip(edges.windows(2)).map(|(&c, w)| c as f64 / (w[1] - w[0])).collect();
        let peak = (0..50).max_by(|&i, &j| density[i].total_cmp(&density[j])).unwrap();
        let mode_bin = edges.partition_point(|&e| e <= 0.001) - 1;
        assert!(peak.abs_diff(mode_bin) <= 1, "peak {peak} vs mode bin {mode_bin}");
    }

    #[test]
    fn pref_mass_examples() {
        let flat = powerlaw_pref_mass(0.0, 0.1, 2).unwrap();
        assert_eq!(flat.len(), 2);
        assert_abs_diff_eq!(flat.pairs()[0].1, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(flat.pairs()[0].0, 0.1f64.powf(0.75), epsilon = 1e-15);

        let uncommon = powerlaw_pref_mass(1.0, 0.01, 10).unwrap();
        assert!(uncommon.pairs()[0].1 > uncommon.pairs()[9].1);
        let common = powerlaw_pref_mass(-1.0, 0.01, 10).unwrap();
        assert!(common.pairs()[9].1 > common.pairs()[0].1);

        assert!(powerlaw_pref_mass(1.0, 1.0, 10).is_err());
        assert!(powerlaw_pref_mass(1.0, 0.0, 10).is_err());
        assert!(powerlaw_pref_mass(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn pref_mass_new_merges_and_validates() {
        let m = DiscretePrefMass::new([(0.5, 0.25), (0.1, 0.5), (0.5, 0.25)]).unwrap();
        assert_eq!(m.pairs(), &[(0.1, 0.5), (0.5, 0.5)]);
        assert_eq!(m.demand(0.5), 0.5);
        assert_eq!(m.demand(0.3), 0.0);
        assert!(DiscretePrefMass::new([(0.5, 0.5)]).is_err());
        assert!(DiscretePrefMass::new([(1.5, 1.0)]).is_err());
        assert!(DiscretePrefMass::new(Vec::new()).is_err());
    }

    #[test]
    fn pref_mass_csv_round_trip() {
        let m = powerlaw_pref_mass(0.7, 1e-4, 13).unwrap();
        assert_eq!(DiscretePrefMass::read_csv(m.to_csv_string().as_bytes()).unwrap(), m);
        let pct = DiscretePrefMass::read_csv("mu,p\n10%,20%\n1%,80%\n".as_bytes()).unwrap();
        assert_eq!(pct.pairs(), &[(0.01, 0.8), (0.1, 0.2)]);
    }

    #[test]
    fn discrete_sampling_matches_masses() {
        let m = DiscretePrefMass::new([(0.1, 0.2), (0.2, 0.3), (0.7, 0.5)]).unwrap();
        let xs = m.sample(200_000, 3);
        assert_eq!(xs, m.sample(200_000, 3));
        for &(mu, p) in m.pairs() {
            let share = xs.iter().filter(|&&x| x == mu).count() as f64 / xs.len() as f64;
            assert_abs_diff_eq!(share, p, epsilon = 0.005);
        }
    }

    #[test]
    fn lognormal_mass_sums_to_one_and_peaks_near_median() {
        let p = LogNormalParams::new(0.001, 1.0, 1e-7).unwrap();
        let m = lognormal_pref_mass(&p, 200).unwrap();
        let total: f64 = m.pairs().iter().map(|x| x.1).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        // equal log-width bins: the mass peaks at the median of the law
        let best = m.pairs().iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
        assert!((best.ln() - p.median().ln()).abs() < 0.1);
    }

    #[test]
    fn fit_recovers_generated_exponent() {
        let params = powerlaw_normalize(1.3, 100).unwrap();
        let table = powerlaw_table(&params, &rank_labels(100)).unwrap();
        let fit = fit_powerlaw(&table).unwrap();
        assert_abs_diff_eq!(fit.t, 1.3, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.k, params.k, epsilon = 1e-9);
        assert!(fit.r2 >= 1.0 - 1e-12);
    }

    #[test]
    fn fit_needs_two_positive_points() {
        let one = NameTable::new([("A", 1.0)], 0).unwrap();
        assert!(matches!(fit_powerlaw(&one), Err(Error::InsufficientData(_))));
        let zero_tail = NameTable::new([("A", 1.0), ("B", 0.0)], 0).unwrap();
        assert!(matches!(fit_powerlaw(&zero_tail), Err(Error::InsufficientData(_))));
    }

    /// Slope of ln f on ln rank from the raw normal equations.
    fn normal_equation_slope(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &(r, f) in points {
            let (x, y) = (r.ln(), f.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn fit_tolerates_multiplicative_noise() {
        let params = powerlaw_normalize(1.0, 50).unwrap();
        let raw: Vec<f64> = params
            .pmf_values()
            .iter()
            .enumerate()
            .map(|(i, p)| p * (1.0 + 0.01 * (2.0 * rand::Rng::random::<f64>(&mut rng::stream(11, i as u64)) - 1.0)))
            .collect();
        let total: f64 = raw.iter().sum();
        let table = NameTable::new(rank_labels(50).into_iter().zip(raw.iter().map(|x| x / total)), 0).unwrap();
        let fit = fit_powerlaw(&table).unwrap();
        let ranked: Vec<(f64, f64)> =
            table.frequencies().iter().enumerate().map(|(i, &f)| ((i + 1) as f64, f)).collect();
        assert_abs_diff_eq!(fit.t, -normal_equation_slope(&ranked), epsilon = 1e-9);
        assert!((fit.t - 1.0).abs() < 0.05, "t_hat = {}", fit.t);
    }

    #[test]
    fn fit_against_reference_recovers_reversed_law() {
        let labels = rank_labels(30);
        let base = powerlaw_table(&powerlaw_normalize(1.0, 30).unwrap(), &labels).unwrap();
        let up = powerlaw_table(&powerlaw_normalize(-0.5, 30).unwrap(), &labels).unwrap();
        let fit = fit_powerlaw_against(&up, &base).unwrap();
        assert_abs_diff_eq!(fit.t, -0.5, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn pmf_sums_to_one_and_is_monotone(t in -3.0f64..3.0, n in 1usize..3000) {
            let p = powerlaw_normalize(t, n).unwrap();
            let v = p.pmf_values();
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            if t > 0.0 {
                prop_assert!(v.windows(2).all(|w| w[0] > w[1]));
            } else if t < 0.0 {
                prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
            }
        }

        #[test]
        fn fit_inverts_table(t in -3.0f64..3.0, n in 2usize..10_000) {
            let labels = rank_labels(n);
            let table = powerlaw_table(&powerlaw_normalize(t, n).unwrap(), &labels).unwrap();
            let reference = powerlaw_table(&powerlaw_normalize(1.0, n).unwrap(), &labels).unwrap();
            let fit = fit_powerlaw_against(&table, &reference).unwrap();
            prop_assert!((fit.t - t).abs() < 1e-9, "t={} fit={}", t, fit.t);
        }

        #[test]
        fn pref_mass_sums_to_one(t in -4.0f64..4.0, floor in 1e-9f64..0.9, bins in 1usize..400) {
            let m = powerlaw_pref_mass(t, floor, bins).unwrap();
            prop_assert!((m.pairs().iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(m.pairs().windows(2).all(|w| w[0].0 < w[1].0));
        }

        #[test]
        fn sampling_is_a_pure_function(mode in 1e-5f64..1.0, sigma in 0.1f64..3.0, seed: u64) {
            let p = LogNormalParams::new(mode, sigma, 1e-6f64.min(mode)).unwrap();
            prop_assert_eq!(sample_preferences(&p, 64, seed), sample_preferences(&p, 64, seed));
        }
    }
}
