//! The name universe and its popularity distribution at one time step.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Inputs whose frequencies sum outside this band are rejected, not fixed.
pub const INPUT_SUM_TOLERANCE: f64 = 1e-3;

/// Maximum distance of a stored table's total from one.
pub const TABLE_SUM_TOLERANCE: f64 = 1e-9;

// Sums this close to one are left untouched so already-normalized tables
// survive a rebuild bit for bit.
const RENORMALIZE_THRESHOLD: f64 = 1e-12;

/// Popularity distribution over a fixed set of names.
///
/// Entries are kept sorted by descending frequency, ties by ascending name,
/// so a name's rank is its 1-based position.
#[derive(Debug, Clone, PartialEq)]
pub struct NameTable {
    names: Vec<String>,
    freqs: Vec<f64>,
    index: HashMap<String, usize>,
    step_index: usize,
}

impl NameTable {
    /// Builds a table from `(name, frequency)` pairs.
    ///
    /// Frequencies must be non-negative and sum to one within 0.1%; they are
    /// rescaled to sum to one when they are off by more than rounding noise.
    pub fn new<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64)>, step_index: usize) -> Result<Self> {
        let mut entries: Vec<(String, f64)> = pairs.into_iter().map(|(n, f)| (n.into(), f)).collect();
        if entries.is_empty() {
            return Err(Error::input("name table needs at least one name"));
        }
        for (name, f) in &entries {
            if !f.is_finite() || *f < 0.0 {
                return Err(Error::input(format!("frequency of {name:?} is {f}")));
            }
        }
        let sum: f64 = entries.iter().map(|(_, f)| f).sum();
        if (sum - 1.0).abs() > INPUT_SUM_TOLERANCE {
            return Err(Error::Normalization { sum });
        }
        if (sum - 1.0).abs() > RENORMALIZE_THRESHOLD {
            for (_, f) in entries.iter_mut() {
                *f /= sum;
            }
        }
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

        let mut index = HashMap::with_capacity(entries.len());
        for (i, (name, _)) in entries.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate name {name:?}")));
            }
        }
        let (names, freqs) = entries.into_iter().unzip();
        Ok(NameTable { names, freqs, index, step_index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn with_step_index(mut self, step_index: usize) -> Self {
        self.step_index = step_index;
        self
    }

    /// Names in rank order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Frequencies in rank order (non-increasing).
    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = (&str, f64)> + '_ {
        self.names.iter().map(String::as_str).zip(self.freqs.iter().copied())
    }

    /// 0-based position of `name`, if present.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// 1-based popularity rank.
    pub fn rank_of(&self, name: &str) -> Result<usize> {
        self.position(name).map(|i| i + 1).ok_or_else(|| Error::NotFound(name.to_string()))
    }

    pub fn freq_of(&self, name: &str) -> Result<f64> {
        self.position(name).map(|i| self.freqs[i]).ok_or_else(|| Error::NotFound(name.to_string()))
    }

    pub fn same_universe(&self, other: &NameTable) -> bool {
        self.len() == other.len() && self.names.iter().all(|n| other.contains(n))
    }

    pub(crate) fn check_same_universe(&self, other: &NameTable) -> Result<()> {
        if self.same_universe(other) {
            Ok(())
        } else {
            Err(Error::input("tables cover different name universes"))
        }
    }

    /// Frequencies of `other` listed in this table's rank order.
    pub(crate) fn aligned(&self, other: &NameTable) -> Result<Vec<f64>> {
        self.check_same_universe(other)?;
        Ok(self.names.iter().map(|n| other.freqs[other.index[n]]).collect())
    }

    /// Writes `name,frequency` CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "name,frequency")?;
        for (name, f) in self.entries() {
            writeln!(out, "{},{}", csv_field(name), format_f64(f))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("names are UTF-8")
    }

    pub fn read_csv<R: Read>(input: R, step_index: usize) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers().map_err(csv_error)?.clone();
        let col = |want: &str| {
            headers
                .iter()
                .position(|h| h.eq_ignore_ascii_case(want))
                .ok_or_else(|| Error::Parse { line: 1, message: format!("missing column {want:?}") })
        };
        let (name_col, freq_col) = (col("name")?, col("frequency")?);
        let mut pairs = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(csv_error)?;
            let line = i + 2;
            let name = record.get(name_col).unwrap_or_default().to_string();
            let raw = record.get(freq_col).unwrap_or_default();
            let freq =
                parse_proportion(raw).map_err(|_| Error::Parse { line, message: format!("bad frequency {raw:?}") })?;
            pairs.push((name, freq));
        }
        NameTable::new(pairs, step_index)
    }

    /// JSON object mapping name to frequency.
    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, f64> = self.entries().collect();
        serde_json::to_string_pretty(&map).expect("finite floats serialize")
    }

    pub fn from_json(text: &str, step_index: usize) -> Result<Self> {
        let map: BTreeMap<String, f64> =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        NameTable::new(map, step_index)
    }
}

/// What a single parent wanted and what they got.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentOutcome {
    pub desired: f64,
    pub chosen: String,
    /// Popularity of `chosen` after everyone in the cohort has chosen.
    pub achieved: f64,
}

/// Parses a proportion written either as a plain number (`0.001`) or as a
/// percentage (`0.1%`).
pub fn parse_proportion(text: &str) -> Result<f64> {
    let text = text.trim();
    let value = match text.strip_suffix('%') {
        Some(pct) => pct.trim().parse::<f64>().map(|v| v / 100.0),
        None => text.parse::<f64>(),
    }
    .map_err(|_| Error::input(format!("not a proportion: {text:?}")))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::input(format!("not a finite proportion: {text:?}")))
    }
}

/// Formats with 17 significant digits, enough to round-trip any f64.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse { line, message: e.to_string() }
}
