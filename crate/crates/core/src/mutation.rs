//! Inventing new names by editing established ones.
//!
//! A parent may take a base name from the table and change it a little. The
//! cost of a candidate is how far its popularity is from what the parent
//! wants, plus `lambda` per edit. Names not already in the table are
//! treated as having popularity zero.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::population::NameTable;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    pub lambda: f64,
    pub alphabet: Vec<char>,
    pub max_edits: usize,
    /// Insert and substitute uppercase letters at the first position and
    /// keep only candidates that start with an uppercase letter.
    pub capitalize_first: bool,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig { lambda: 0.01, alphabet: ('a'..='z').collect(), max_edits: 1, capitalize_first: true }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::domain(format!("lambda must be a non-negative number, got {}", self.lambda)));
        }
        if self.alphabet.is_empty() {
            return Err(Error::input("alphabet is empty"));
        }
        Ok(())
    }
}

/// Minimum number of single-character insertions, deletions and
/// substitutions turning `a` into `b`.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn single_edits(word: &[char], config: &MutationConfig, out: &mut BTreeSet<String>) {
    let letters_at = |pos: usize| -> Vec<char> {
        if config.capitalize_first && pos == 0 {
            config.alphabet.iter().flat_map(|c| c.to_uppercase()).collect()
        } else {
            config.alphabet.clone()
        }
    };
    for i in 0..word.len() {
        let mut w = word.to_vec();
        w.remove(i);
        out.insert(w.into_iter().collect());
    }
    for i in 0..word.len() {
        for c in letters_at(i) {
            if c != word[i] {
                let mut w = word.to_vec();
                w[i] = c;
                out.insert(w.into_iter().collect());
            }
        }
    }
    for i in 0..=word.len() {
        for c in letters_at(i) {
            let mut w = word.to_vec();
            w.insert(i, c);
            out.insert(w.into_iter().collect());
        }
    }
}

/// Every string reachable from `base` in at most `max_edits` edits,
/// including `base` itself.
pub fn generate_candidates(base: &str, config: &MutationConfig) -> BTreeSet<String> {
    let mut all = BTreeSet::from([base.to_string()]);
    let mut frontier = all.clone();
    for _ in 0..config.max_edits {
        let mut next = BTreeSet::new();
        for word in &frontier {
            let chars: Vec<char> = word.chars().collect();
            single_edits(&chars, config, &mut next);
        }
        next.retain(|w| !all.contains(w));
        all.extend(next.iter().cloned());
        frontier = next;
    }
    if config.capitalize_first {
        all.retain(|w| w == base || w.chars().next().is_some_and(char::is_uppercase));
    }
    all
}

/// `|assumed_freq - mu| + lambda * d(base, candidate)`.
pub fn mutation_cost(candidate: &str, base: &str, mu: f64, lambda: f64, assumed_freq: f64) -> f64 {
    (assumed_freq - mu).abs() + lambda * levenshtein(base, candidate) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationChoice {
    pub base: String,
    pub candidate: String,
    pub distance: usize,
    pub cost: f64,
}

/// The cheapest `(base, candidate)` pair over the whole table.
///
/// Ties go to the smaller edit distance, then the alphabetically first
/// candidate, then the alphabetically first base.
pub fn choose_mutated_name(table: &NameTable, mu: f64, config: &MutationConfig) -> Result<MutationChoice> {
    config.validate()?;
    let mut best: Option<MutationChoice> = None;
    for base in table.names() {
        for candidate in generate_candidates(base, config) {
            let distance = levenshtein(base, &candidate);
            if distance > config.max_edits {
                continue;
            }
            let assumed = table.freq_of(&candidate).unwrap_or(0.0);
            let cost = (assumed - mu).abs() + config.lambda * distance as f64;
            let better = match &best {
                None => true,
                Some(b) => (cost, distance, candidate.as_str(), base.as_str())
                    .partial_cmp(&(b.cost, b.distance, b.candidate.as_str(), b.base.as_str()))
                    .is_some_and(|o| o.is_lt()),
            };
            if better {
                best = Some(MutationChoice { base: base.clone(), candidate, distance, cost });
            }
        }
    }
    best.ok_or_else(|| Error::input("table has no names"))
}

/// Choices for each `lambda` in `lambdas`, other settings fixed.
pub fn lambda_sweep(
    table: &NameTable,
    mu: f64,
    config: &MutationConfig,
    lambdas: &[f64],
) -> Result<Vec<(f64, MutationChoice)>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let cfg = MutationConfig { lambda, ..config.clone() };
            choose_mutated_name(table, mu, &cfg).map(|c| (lambda, c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::assign_name;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn plain(alphabet: &str, max_edits: usize, lambda: f64) -> MutationConfig {
        MutationConfig { lambda, alphabet: alphabet.chars().collect(), max_edits, capitalize_first: false }
    }

    /// Textbook recursion without memoization.
    fn lev_recursive(a: &[char], b: &[char]) -> usize {
        match (a.split_last(), b.split_last()) {
            (None, _) => b.len(),
            (_, None) => a.len(),
            (Some((x, ra)), Some((y, rb))) => {
                let sub = lev_recursive(ra, rb) + usize::from(x != y);
                sub.min(lev_recursive(ra, b) + 1).min(lev_recursive(a, rb) + 1)
            }
        }
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("Kat", "Kat"), 0);
        assert_eq!(levenshtein("Kat", "Kate"), 1);
        assert_eq!(levenshtein("Cathy", "Kat"), 3);
        let (c, k): (Vec<char>, Vec<char>) = ("Cathy".chars().collect(), "Kat".chars().collect());
        assert_eq!(lev_recursive(&c, &k), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("Zoë", "Zoe"), 1);
    }

    #[test]
    fn candidate_examples() {
        assert_eq!(generate_candidates("Kat", &plain("e", 0, 0.0)), BTreeSet::from(["Kat".to_string()]));
        let c = generate_candidates("Kat", &plain("e", 1, 0.0));
        for expected in ["Kate", "Kaet", "eKat", "Ket", "Kat", "Ka", "at", "Kt"] {
            assert!(c.contains(expected), "missing {expected}");
        }
    }

    /// Brute-force enumeration of every single edit, deduplicated.
    fn one_edit_oracle(base: &str, alphabet: &[char]) -> BTreeSet<String> {
        let w: Vec<char> = base.chars().collect();
        let mut out = BTreeSet::from([base.to_string()]);
        for i in 0..w.len() {
            out.insert(w.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, c)| c).collect());
            for &c in alphabet {
                let mut s = w.clone();
                s[i] = c;
                out.insert(s.into_iter().collect());
            }
        }
        for i in 0..=w.len() {
            for &c in alphabet {
                let mut s = w.clone();
                s.insert(i, c);
                out.insert(s.into_iter().collect());
            }
        }
        out
    }

    #[test]
    fn candidate_count_matches_enumeration() {
        for (base, alphabet) in [("Kat", "e"), ("anna", "abn"), ("xy", "xyz"), ("q", "abcdef")] {
            let alpha: Vec<char> = alphabet.chars().collect();
            let got = generate_candidates(base, &plain(alphabet, 1, 0.0));
            assert_eq!(got, one_edit_oracle(base, &alpha), "{base}");
            assert!(got.iter().all(|c| levenshtein(base, c) <= 1));
        }
    }

    #[test]
    fn two_edit_candidates_are_exactly_the_ball() {
        let cfg = plain("ab", 2, 0.0);
        let got = generate_candidates("ab", &cfg);
        let mut ball = BTreeSet::new();
        for len in 0..=4 {
            for bits in 0..(1u32 << len) {
                let s: String = (0..len).map(|i| if bits >> i & 1 == 1 { 'b' } else { 'a' }).collect();
                if levenshtein("ab", &s) <= 2 {
                    ball.insert(s);
                }
            }
        }
        assert_eq!(got, ball);
    }

    #[test]
    fn capitalized_candidates() {
        let c = generate_candidates("Kat", &MutationConfig::default());
        assert!(c.contains("Kate") && c.contains("Mat") && c.contains("Kat"));
        assert!(!c.contains("at") && !c.contains("kat"));
        assert!(c.iter().all(|w| w.starts_with(char::is_uppercase)));
    }

    #[test]
    fn cost_examples() {
        assert_eq!(mutation_cost("Kat", "Kat", 0.1, 5.0, 0.1), 0.0);
        assert_eq!(mutation_cost("Kate", "Kat", 0.1, 0.0, 0.04), (0.04f64 - 0.1).abs());
        assert_abs_diff_eq!(mutation_cost("Kate", "Kat", 0.02, 0.01, 0.0), 0.03, epsilon = 1e-15);
    }

    fn small_table() -> NameTable {
        NameTable::new([("Kat", 0.5), ("Ann", 0.3), ("Bo", 0.2)], 0).unwrap()
    }

    #[test]
    fn choice_examples() {
        let big = choose_mutated_name(&small_table(), 0.27, &plain("ae", 1, 2.0)).unwrap();
        assert_eq!(big.distance, 0);
        assert_eq!(big.candidate, assign_name(&small_table(), 0.27)[0]);

        let novel = choose_mutated_name(&small_table(), 0.0, &plain("ae", 1, 0.0)).unwrap();
        assert_eq!(novel.cost, 0.0);
        assert!(!small_table().contains(&novel.candidate));

        let tie = NameTable::new([("Kat", 0.5), ("Ann", 0.5)], 0).unwrap();
        let c = choose_mutated_name(&tie, 0.5, &plain("ae", 1, 0.3)).unwrap();
        assert_eq!((c.base.as_str(), c.candidate.as_str(), c.cost), ("Ann", "Ann", 0.0));

        assert!(choose_mutated_name(&tie, 0.5, &plain("ae", 1, -1.0)).is_err());
    }

    #[test]
    fn zero_edits_agree_with_assignment() {
        let t = small_table();
        for mu in [0.0, 0.1, 0.25, 0.4, 0.45, 1.0] {
            let c = choose_mutated_name(&t, mu, &plain("a", 0, 0.7)).unwrap();
            let mut tied: Vec<&str> = assign_name(&t, mu);
            tied.sort();
            assert_eq!(c.candidate, tied[0], "mu = {mu}");
        }
    }

    proptest! {
        #[test]
        fn levenshtein_agrees_with_recursion(a in "[abc]{0,6}", b in "[abc]{0,6}") {
            let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
            prop_assert_eq!(levenshtein(&a, &b), lev_recursive(&ca, &cb));
        }

        #[test]
        fn levenshtein_is_a_metric(a in "[ab]{0,5}", b in "[ab]{0,5}", c in "[ab]{0,5}") {
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
            prop_assert_eq!(levenshtein(&a, &b) == 0, a == b);
            prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        }

        #[test]
        fn distance_falls_as_lambda_grows(mu in 0.0f64..0.6, l1 in 0.0f64..0.5, l2 in 0.0f64..0.5) {
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            let t = small_table();
            let a = choose_mutated_name(&t, mu, &plain("ae", 1, lo)).unwrap();
            let b = choose_mutated_name(&t, mu, &plain("ae", 1, hi)).unwrap();
            prop_assert!(b.distance <= a.distance);
        }
    }
}
