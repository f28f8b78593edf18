//! SSA baby-name files, empirical tables and name-list statistics.
//!
//! The input format is the public `yobYYYY.txt` layout: one `name,sex,count`
//! record per line and no header.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::population::NameTable;
use crate::special::student_t_two_sided;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::F => "F",
            Sex::M => "M",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SexFilter {
    Only(Sex),
    All,
}

impl FromStr for SexFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "F" => Ok(SexFilter::Only(Sex::F)),
            "M" => Ok(SexFilter::Only(Sex::M)),
            "ALL" | "*" => Ok(SexFilter::All),
            other => Err(Error::input(format!("sex filter must be F, M or all, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsaRecord {
    pub name: String,
    pub sex: Sex,
    pub count: u64,
}

impl fmt::Display for SsaRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.name, self.sex, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    /// Stop at the first malformed line.
    Strict,
    /// Skip malformed lines and count them.
    Lenient,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedYear {
    pub records: Vec<SsaRecord>,
    /// Line numbers of malformed lines skipped in lenient mode.
    pub skipped: Vec<usize>,
}

fn parse_line(line: &str, number: usize) -> Result<SsaRecord> {
    let bad = |message: String| Error::Parse { line: number, message };
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 3 {
        return Err(bad(format!("expected name,sex,count but found {} field(s)", fields.len())));
    }
    let name = fields[0].trim();
    if name.is_empty() {
        return Err(bad("empty name".into()));
    }
    let sex = match fields[1].trim() {
        "F" => Sex::F,
        "M" => Sex::M,
        other => return Err(bad(format!("sex must be F or M, got {other:?}"))),
    };
    let count = fields[2]
        .trim()
        .parse::<u64>()
        .map_err(|_| bad(format!("count is not a non-negative integer: {:?}", fields[2])))?;
    Ok(SsaRecord { name: name.to_string(), sex, count })
}

/// Parses one year file. Blank lines are ignored.
pub fn parse_ssa_year<R: BufRead>(input: R, strictness: Strictness) -> Result<ParsedYear> {
    let mut parsed = ParsedYear::default();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line, i + 1) {
            Ok(record) => parsed.records.push(record),
            Err(e) if strictness == Strictness::Strict => return Err(e),
            Err(_) => parsed.skipped.push(i + 1),
        }
    }
    Ok(parsed)
}

/// Serializes records back into the year-file layout.
pub fn write_ssa_year(records: &[SsaRecord]) -> String {
    records.iter().map(|r| format!("{r}\n")).collect()
}

/// Popularity of each name among the births passing `filter`. Under
/// [`SexFilter::All`] a name's counts across sexes are merged.
pub fn build_table(records: &[SsaRecord], filter: SexFilter) -> Result<NameTable> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for r in records {
        if matches!(filter, SexFilter::Only(s) if s != r.sex) {
            continue;
        }
        *counts.entry(r.name.as_str()).or_default() += r.count;
    }
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::InsufficientData("no births pass the sex filter".into()));
    }
    NameTable::new(counts.into_iter().map(|(n, c)| (n, c as f64 / total as f64)), 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListStats {
    pub mean: f64,
    /// Sample (n - 1) standard deviation; zero when `n == 1`.
    pub std: f64,
    pub n: usize,
    /// Listed names absent from the table, each scored as zero popularity.
    pub missing: Vec<String>,
}

impl ListStats {
    pub fn from_summary(mean: f64, std: f64, n: usize) -> Self {
        ListStats { mean, std, n, missing: Vec::new() }
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }
}

/// Mean and spread of the popularity of a list of names.
pub fn name_list_stats<S: AsRef<str>>(table: &NameTable, names: &[S], case_fold: bool) -> Result<ListStats> {
    if names.is_empty() {
        return Err(Error::input("name list is empty"));
    }
    let folded: Option<BTreeMap<String, f64>> = case_fold.then(|| {
        table.entries().map(|(n, f)| (n.to_lowercase(), f)).fold(BTreeMap::new(), |mut m, (n, f)| {
            *m.entry(n).or_insert(0.0) += f;
            m
        })
    });
    let mut missing = Vec::new();
    let values: Vec<f64> = names
        .iter()
        .map(|name| {
            let name = name.as_ref();
            let found = match &folded {
                Some(map) => map.get(&name.to_lowercase()).copied(),
                None => table.freq_of(name).ok(),
            };
            found.unwrap_or_else(|| {
                missing.push(name.to_string());
                0.0
            })
        })
        .collect();
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std =
        if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    Ok(ListStats { mean, std, n, missing })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Welch's unequal-variance t-test on two summaries.
pub fn welch_t_test(a: &ListStats, b: &ListStats) -> Result<WelchResult> {
    if a.n < 2 || b.n < 2 {
        return Err(Error::input("each sample needs at least two values"));
    }
    let (va, vb) = (a.variance() / a.n as f64, b.variance() / b.n as f64);
    let se2 = va + vb;
    let diff = a.mean - b.mean;
    if se2 == 0.0 {
        if diff == 0.0 {
            return Ok(WelchResult { t: 0.0, df: (a.n + b.n - 2) as f64, p: 1.0 });
        }
        return Err(Error::Degenerate("both samples have zero variance but different means".into()));
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.n - 1) as f64 + vb * vb / (b.n - 1) as f64);
    Ok(WelchResult { t, df, p: student_t_two_sided(t, df) })
}
