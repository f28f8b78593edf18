//! Parent error measures, rank correlation, concentration and distances.

use serde::{Deserialize, Serialize};

use crate::population::{format_f64, NameTable, ParentOutcome};
use crate::{Error, Result};

/// How far a parent landed from the popularity they wanted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTriple {
    /// achieved / desired
    pub ratio: f64,
    /// |achieved - desired|
    pub absdiff: f64,
    /// |achieved - desired| / desired
    pub relerror: f64,
}

pub fn parent_error(desired: f64, achieved: f64) -> Result<ErrorTriple> {
    if desired == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    if desired.is_nan() || desired < 0.0 || achieved.is_nan() || achieved < 0.0 {
        return Err(Error::domain(format!("desired={desired}, achieved={achieved}")));
    }
    let absdiff = (achieved - desired).abs();
    Ok(ErrorTriple { ratio: achieved / desired, absdiff, relerror: absdiff / desired })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub scale: Scale,
}

impl Histogram {
    /// Bins are `[e_i, e_i+1)`; values outside the edges land in the end bins.
    pub fn from_values(values: impl IntoIterator<Item = f64>, edges: &[f64], scale: Scale) -> Result<Self> {
        check_edges(edges)?;
        let mut counts = vec![0u64; edges.len() - 1];
        let last = counts.len() - 1;
        for v in values {
            let i = edges.partition_point(|&e| e <= v).saturating_sub(1).min(last);
            counts[i] += 1;
        }
        Ok(Histogram { edges: edges.to_vec(), counts, scale })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn linear_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
        (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
    }

    pub fn log_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
        crate::distributions::log_edges(lo, hi, bins)
    }

    /// `bin_low,bin_high,count` CSV.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("bin_low,bin_high,count\n");
        for (w, c) in self.edges.windows(2).zip(&self.counts) {
            out.push_str(&format!("{},{},{}\n", format_f64(w[0]), format_f64(w[1]), c));
        }
        out
    }
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::input("histogram needs at least two edges"));
    }
    if !edges.windows(2).all(|w| w[0] < w[1]) || edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::input("histogram edges must be finite and strictly ascending"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorHistograms {
    pub ratio: Histogram,
    pub absdiff: Histogram,
    pub relerror: Histogram,
    /// Outcomes with zero desired popularity, which have no ratio.
    pub skipped: usize,
}

/// Histograms of the three error measures over a cohort, all on `edges`.
pub fn error_histogram(outcomes: &[ParentOutcome], edges: &[f64], scale: Scale) -> Result<ErrorHistograms> {
    check_edges(edges)?;
    let triples: Vec<ErrorTriple> = outcomes.iter().filter_map(|o| parent_error(o.desired, o.achieved).ok()).collect();
    Ok(ErrorHistograms {
        ratio: Histogram::from_values(triples.iter().map(|e| e.ratio), edges, scale)?,
        absdiff: Histogram::from_values(triples.iter().map(|e| e.absdiff), edges, scale)?,
        relerror: Histogram::from_values(triples.iter().map(|e| e.relerror), edges, scale)?,
        skipped: outcomes.len() - triples.len(),
    })
}

/// Ranks by descending value, 1-based, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("a ranking with every name tied has no correlation".into()));
    }
    let r = if sxx == syy { sxy / sxx } else { sxy / (sxx * syy).sqrt() };
    Ok(r.clamp(-1.0, 1.0))
}

/// Spearman rank correlation between two popularity tables on one universe.
pub fn spearman(a: &NameTable, b: &NameTable) -> Result<f64> {
    let other = a.aligned(b)?;
    if a.len() < 2 {
        return Err(Error::input("rank correlation needs at least two names"));
    }
    pearson(&average_ranks(a.frequencies()), &average_ranks(&other))
}

/// Combined popularity of the `k` most popular names.
pub fn top_k_share(table: &NameTable, k: usize) -> Result<f64> {
    if k == 0 || k > table.len() {
        return Err(Error::input(format!("k = {k} outside 1..={}", table.len())));
    }
    Ok(table.frequencies()[..k].iter().sum())
}

/// Largest gap between the cumulative distributions, accumulating names in
/// `a`'s rank order.
///
/// The ordering follows `a`, so `ks_distance(a, b)` and `ks_distance(b, a)`
/// can differ; use [`ks_distance_in_order`] with a shared reference when a
/// symmetric distance is needed.
pub fn ks_distance(a: &NameTable, b: &NameTable) -> Result<f64> {
    let other = a.aligned(b)?;
    Ok(max_cumulative_gap(a.frequencies(), &other))
}

/// Like [`ks_distance`] but accumulating in `reference`'s rank order. For a
/// fixed reference this is a pseudometric.
pub fn ks_distance_in_order(a: &NameTable, b: &NameTable, reference: &NameTable) -> Result<f64> {
    let xa = reference.aligned(a)?;
    let xb = reference.aligned(b)?;
    Ok(max_cumulative_gap(&xa, &xb))
}

fn max_cumulative_gap(x: &[f64], y: &[f64]) -> f64 {
    let (mut cx, mut cy, mut best) = (0.0, 0.0, 0.0f64);
    for (a, b) in x.iter().zip(y) {
        cx += a;
        cy += b;
        best = best.max((cx - cy).abs());
    }
    best.min(1.0)
}

/// Total variation distance, half the L1 distance.
pub fn total_variation(a: &NameTable, b: &NameTable) -> Result<f64> {
    let other = a.aligned(b)?;
    Ok(0.5 * a.frequencies().iter().zip(&other).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn table(pairs: &[(&str, f64)]) -> NameTable {
        NameTable::new(pairs.iter().map(|&(n, f)| (n, f)), 0).unwrap()
    }

    fn outcome(desired: f64, achieved: f64) -> ParentOutcome {
        ParentOutcome { desired, chosen: "A".into(), achieved }
    }

    #[test]
    fn parent_error_examples() {
        let e = parent_error(0.01, 0.02).unwrap();
        assert_abs_diff_eq!(e.ratio, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.absdiff, 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(e.relerror, 1.0, epsilon = 1e-13);
        assert_eq!(parent_error(0.3, 0.3).unwrap(), ErrorTriple { ratio: 1.0, absdiff: 0.0, relerror: 0.0 });
        assert!(matches!(parent_error(0.0, 0.05), Err(Error::UndefinedRatio)));
    }

    #[test]
    fn histogram_examples() {
        let edges = [0.0, 1.0, 3.0];
        let empty = error_histogram(&[], &edges, Scale::Linear).unwrap();
        assert_eq!(empty.ratio.counts, [0, 0]);
        assert_eq!(empty.relerror.total(), 0);

        let same = vec![outcome(0.1, 0.2); 5];
        let h = error_histogram(&same, &[0.0, 0.5, 1.5, 2.5], Scale::Linear).unwrap();
        assert_eq!(h.ratio.counts, [0, 0, 5]);

        let three = [outcome(0.2, 0.1), outcome(0.2, 0.2), outcome(0.2, 0.4)];
        let h = error_histogram(&three, &edges, Scale::Linear).unwrap();
        assert_eq!(h.ratio.counts, [1, 2]);
        assert!(error_histogram(&three, &[0.0, 0.0, 1.0], Scale::Linear).is_err());
        assert!(error_histogram(&three, &[1.0], Scale::Linear).is_err());
    }

    #[test]
    fn histogram_clamps_and_skips() {
        let h = Histogram::from_values([-5.0, 0.5, 99.0], &[0.0, 1.0, 2.0], Scale::Log).unwrap();
        assert_eq!(h.counts, [2, 1]);
        let hs = error_histogram(&[outcome(0.0, 0.1), outcome(0.1, 0.1)], &[0.0, 2.0], Scale::Linear).unwrap();
        assert_eq!(hs.skipped, 1);
        assert_eq!(hs.ratio.total(), 1);
        assert!(h.to_csv_string().starts_with("bin_low,bin_high,count\n"));
    }

    /// Spearman from first principles: average ranks, then covariance over
    /// the product of standard deviations.
    fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
        let rank = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|a| {
                    let greater = v.iter().filter(|b| *b > a).count() as f64;
                    let equal = v.iter().filter(|b| *b == a).count() as f64;
                    greater + (equal + 1.0) / 2.0
                })
                .collect()
        };
        let (rx, ry) = (rank(x), rank(y));
        let n = x.len() as f64;
        let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
        let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn spearman_examples() {
        let a = table(&[("A", 0.5), ("B", 0.3), ("C", 0.2)]);
        assert_eq!(spearman(&a, &a).unwrap(), 1.0);
        let rev = table(&[("A", 0.2), ("B", 0.3), ("C", 0.5)]);
        assert_eq!(spearman(&a, &rev).unwrap(), -1.0);

        // ranks (1, 2, 3) against (1.5, 3, 1.5): the rank covariance is zero
        let b = table(&[("A", 0.4), ("B", 0.2), ("C", 0.4)]);
        let expect = spearman_oracle(&[0.5, 0.3, 0.2], &[0.4, 0.2, 0.4]);
        assert_abs_diff_eq!(expect, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(spearman(&a, &b).unwrap(), expect, epsilon = 1e-12);

        let other = table(&[("A", 0.5), ("Z", 0.5)]);
        assert!(spearman(&a, &other).is_err());
        let single = table(&[("A", 1.0)]);
        assert!(spearman(&single, &single).is_err());
    }

    #[test]
    fn average_ranks_handle_ties() {
        assert_eq!(average_ranks(&[0.4, 0.2, 0.4]), [1.5, 3.0, 1.5]);
        assert_eq!(average_ranks(&[0.1, 0.1, 0.1, 0.7]), [3.0, 3.0, 3.0, 1.0]);
    }

    #[test]
    fn top_k_examples() {
        let a = table(&[("A", 0.5), ("B", 0.3), ("C", 0.2)]);
        assert_eq!(top_k_share(&a, 1).unwrap(), 0.5);
        assert_abs_diff_eq!(top_k_share(&a, 3).unwrap(), 1.0, epsilon = 1e-15);
        assert!(top_k_share(&a, 0).is_err());
        assert!(top_k_share(&a, 4).is_err());
        let p = crate::dynamics::powerlaw_initial(1.0, 3).unwrap();
        assert_abs_diff_eq!(top_k_share(&p, 2).unwrap(), 9.0 / 11.0, epsilon = 1e-15);
    }

    #[test]
    fn ks_examples() {
        let a = table(&[("A", 0.6), ("B", 0.4)]);
        assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
        let x = table(&[("A", 1.0), ("B", 0.0)]);
        let y = table(&[("A", 0.0), ("B", 1.0)]);
        assert_eq!(ks_distance(&x, &y).unwrap(), 1.0);
        let half = table(&[("A", 0.5), ("B", 0.5)]);
        assert_abs_diff_eq!(ks_distance(&a, &half).unwrap(), 0.1, epsilon = 1e-15);
        assert!(ks_distance(&a, &table(&[("Q", 1.0)])).is_err());
    }

    #[test]
    fn ks_follows_first_table_order() {
        let a = table(&[("A", 0.0), ("B", 0.0), ("C", 0.0), ("D", 1.0)]);
        let b = table(&[("A", 0.0), ("B", 0.2), ("C", 0.4), ("D", 0.4)]);
        // a's order D, A, B, C: gap 1.0 - 0.4 after D
        assert_abs_diff_eq!(ks_distance(&a, &b).unwrap(), 0.6, epsilon = 1e-15);
        // b's order C, D, B, A: gap 0.4 after C
        assert_abs_diff_eq!(ks_distance(&b, &a).unwrap(), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(ks_distance_in_order(&b, &a, &a).unwrap(), 0.6, epsilon = 1e-15);
    }

    fn arb_weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.001f64..1.0, n)
    }

    fn to_table(w: &[f64]) -> NameTable {
        let s: f64 = w.iter().sum();
        NameTable::new(w.iter().enumerate().map(|(i, x)| (format!("n{i}"), x / s)), 0).unwrap()
    }

    proptest! {
        #[test]
        fn error_identities(desired in 1e-9f64..1.0, achieved in 0.0f64..1.0) {
            let e = parent_error(desired, achieved).unwrap();
            prop_assert!((e.relerror - (e.ratio - 1.0).abs()).abs() <= 1e-12 * e.ratio.max(1.0));
            prop_assert!(e.absdiff >= 0.0 && e.relerror >= 0.0 && e.ratio >= 0.0);
        }

        #[test]
        fn spearman_symmetric_and_reflexive(w in (2usize..25).prop_flat_map(|n| (arb_weights(n), arb_weights(n)))) {
            let (a, b) = (to_table(&w.0), to_table(&w.1));
            prop_assert_eq!(spearman(&a, &a).unwrap(), 1.0);
            let (ab, ba) = (spearman(&a, &b).unwrap(), spearman(&b, &a).unwrap());
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((ab - spearman_oracle(a.frequencies(), &a.aligned(&b).unwrap())).abs() < 1e-9);
        }

        #[test]
        fn ks_is_pseudometric_under_shared_order(
            w in (2usize..12).prop_flat_map(|n| (arb_weights(n), arb_weights(n), arb_weights(n), arb_weights(n)))
        ) {
            let (a, b, c, r) = (to_table(&w.0), to_table(&w.1), to_table(&w.2), to_table(&w.3));
            prop_assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
            let ab = ks_distance_in_order(&a, &b, &r).unwrap();
            prop_assert!((ab - ks_distance_in_order(&b, &a, &r).unwrap()).abs() < 1e-15);
            let ac = ks_distance_in_order(&a, &c, &r).unwrap();
            let bc = ks_distance_in_order(&b, &c, &r).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
        }
    }
}
