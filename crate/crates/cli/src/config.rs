//! Run configuration, shared by the flag parser and the JSON config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use naming_game::distributions::{default_floor, DEFAULT_PREF_BINS, DEFAULT_SIGMA};
use naming_game::population::parse_proportion;
use serde::{Deserialize, Serialize};

/// Parents per step assumed when a deterministic run needs a default floor.
pub const DEFAULT_POPULATION: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Powerlaw {
        t: f64,
        n: usize,
    },
    /// A table file (`.csv`, `.json`) or an SSA year file (anything else).
    File {
        path: PathBuf,
        #[serde(default = "default_sex")]
        sex: String,
    },
}

fn default_sex() -> String {
    "all".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrefSpec {
    Lognormal {
        mode: f64,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        floor: Option<f64>,
        #[serde(default = "default_bins")]
        bins: usize,
    },
    Powerlaw {
        t_prime: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        floor: Option<f64>,
        #[serde(default = "default_bins")]
        bins: usize,
    },
    Dweezil,
    Explicit {
        path: PathBuf,
    },
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

fn default_bins() -> usize {
    DEFAULT_PREF_BINS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Deterministic,
    MonteCarlo,
}

impl FromStr for ModeSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "deterministic" | "mass" => Ok(ModeSpec::Deterministic),
            "monte-carlo" | "montecarlo" | "mc" => Ok(ModeSpec::MonteCarlo),
            other => bail!("unknown mode {other:?} (expected deterministic or monte-carlo)"),
        }
    }
}

/// Everything that determines a run's results. Echoed verbatim in the
/// manifest; the output location is not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub initial: InitialSpec,
    pub preferences: PrefSpec,
    pub steps: usize,
    pub mode: ModeSpec,
    #[serde(default = "default_population")]
    pub population: usize,
    pub seed: u64,
}

fn default_population() -> usize {
    DEFAULT_POPULATION
}

impl RunSpec {
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.population == 0 {
            bail!("population must be at least 1");
        }
        if let InitialSpec::Powerlaw { n, t } = self.initial {
            if n == 0 || !t.is_finite() {
                bail!("power-law initial table needs n >= 1 and a finite t");
            }
        }
        Ok(())
    }

    /// Floor used when the preference spec does not set one.
    pub fn default_floor(&self) -> f64 {
        default_floor(self.population as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: RunSpec,
    pub out: PathBuf,
}

/// Splits `kind:a=1,b=2` (or `kind:positional,a=1`) into its parts.
fn split_spec(text: &str) -> (String, Option<String>, BTreeMap<String, String>) {
    let (kind, rest) = match text.split_once(':') {
        Some((k, r)) => (k.trim().to_ascii_lowercase(), r),
        None => (text.trim().to_ascii_lowercase(), ""),
    };
    let mut positional = None;
    let mut keys = BTreeMap::new();
    for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('=') {
            Some((k, v)) => {
                keys.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
            }
            None if positional.is_none() => positional = Some(part.to_string()),
            None => {
                keys.insert(part.to_string(), String::new());
            }
        }
    }
    (kind, positional, keys)
}

fn take<T: FromStr>(keys: &mut BTreeMap<String, String>, name: &str) -> anyhow::Result<Option<T>> {
    keys.remove(name).map(|v| v.parse::<T>().map_err(|_| anyhow!("bad value {v:?} for {name}"))).transpose()
}

fn take_proportion(keys: &mut BTreeMap<String, String>, name: &str) -> anyhow::Result<Option<f64>> {
    keys.remove(name).map(|v| parse_proportion(&v).map_err(|e| anyhow!("{name}: {e}"))).transpose()
}

fn no_leftovers(keys: BTreeMap<String, String>, what: &str) -> anyhow::Result<()> {
    if let Some(k) = keys.keys().next() {
        bail!("unknown {what} option {k:?}");
    }
    Ok(())
}

impl FromStr for InitialSpec {
    type Err = anyhow::Error;

    /// `powerlaw:t=1,n=1000` or `file:PATH[,sex=F]`.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (kind, positional, mut keys) = split_spec(s);
        let spec = match kind.as_str() {
            "powerlaw" => InitialSpec::Powerlaw {
                t: take(&mut keys, "t")?.unwrap_or(1.0),
                n: take(&mut keys, "n")?.unwrap_or(1000),
            },
            "file" => InitialSpec::File {
                path: positional
                    .or_else(|| keys.remove("path"))
                    .map(PathBuf::from)
                    .context("file initial table needs a path")?,
                sex: keys.remove("sex").unwrap_or_else(default_sex),
            },
            other => bail!("unknown initial table kind {other:?}"),
        };
        no_leftovers(keys, "initial")?;
        Ok(spec)
    }
}

impl FromStr for PrefSpec {
    type Err = anyhow::Error;

    /// `lognormal:mode=0.1%[,sigma=1][,floor=..][,bins=..]`,
    /// `powerlaw:t=0.5[,floor=..][,bins=..]`, `dweezil` or `explicit:PATH`.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (kind, positional, mut keys) = split_spec(s);
        let spec = match kind.as_str() {
            "lognormal" => PrefSpec::Lognormal {
                mode: take_proportion(&mut keys, "mode")?.context("lognormal preferences need mode=")?,
                sigma: take(&mut keys, "sigma")?.unwrap_or(DEFAULT_SIGMA),
                floor: take_proportion(&mut keys, "floor")?,
                bins: take(&mut keys, "bins")?.unwrap_or(DEFAULT_PREF_BINS),
            },
            "powerlaw" => PrefSpec::Powerlaw {
                t_prime: take(&mut keys, "t")?
                    .or(take(&mut keys, "t_prime")?)
                    .context("power-law preferences need t=")?,
                floor: take_proportion(&mut keys, "floor")?,
                bins: take(&mut keys, "bins")?.unwrap_or(DEFAULT_PREF_BINS),
            },
            "dweezil" => PrefSpec::Dweezil,
            "explicit" => PrefSpec::Explicit {
                path: positional
                    .or_else(|| keys.remove("path"))
                    .map(PathBuf::from)
                    .context("explicit preferences need a path")?,
            },
            other => bail!("unknown preference kind {other:?}"),
        };
        no_leftovers(keys, "preference")?;
        Ok(spec)
    }
}

/// A JSON config file: either a bare run spec plus optional `out`, or a
/// manifest written by a previous run.
pub fn load_config_file(path: &Path) -> anyhow::Result<(RunSpec, Option<PathBuf>)> {
    #[derive(Deserialize)]
    struct WithOut {
        #[serde(flatten)]
        spec: RunSpec,
        out: Option<PathBuf>,
    }
    #[derive(Deserialize)]
    struct ManifestShape {
        run: RunSpec,
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(m) = serde_json::from_str::<ManifestShape>(&text) {
        return Ok((m.run, None));
    }
    let w: WithOut = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok((w.spec, w.out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_initial_specs() {
        assert_eq!("powerlaw:t=1.2,n=50".parse::<InitialSpec>().unwrap(), InitialSpec::Powerlaw { t: 1.2, n: 50 });
        assert_eq!(
            "file:data/yob2010.txt,sex=F".parse::<InitialSpec>().unwrap(),
            InitialSpec::File { path: "data/yob2010.txt".into(), sex: "F".into() }
        );
        assert!("powerlaw:q=3".parse::<InitialSpec>().is_err());
        assert!("file".parse::<InitialSpec>().is_err());
    }

    #[test]
    fn parses_preference_specs() {
        assert_eq!(
            "lognormal:mode=0.1%".parse::<PrefSpec>().unwrap(),
            PrefSpec::Lognormal { mode: 0.001, sigma: 1.0, floor: None, bins: 200 }
        );
        assert_eq!(
            "powerlaw:t=-1.5,floor=1e-6,bins=50".parse::<PrefSpec>().unwrap(),
            PrefSpec::Powerlaw { t_prime: -1.5, floor: Some(1e-6), bins: 50 }
        );
        assert_eq!("dweezil".parse::<PrefSpec>().unwrap(), PrefSpec::Dweezil);
        assert_eq!("explicit:g.csv".parse::<PrefSpec>().unwrap(), PrefSpec::Explicit { path: "g.csv".into() });
        assert!("lognormal:sigma=2".parse::<PrefSpec>().is_err());
        assert!("uniform".parse::<PrefSpec>().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = RunSpec {
            initial: InitialSpec::Powerlaw { t: 1.0, n: 10 },
            preferences: PrefSpec::Lognormal { mode: 0.01, sigma: 1.0, floor: None, bins: 20 },
            steps: 2,
            mode: ModeSpec::MonteCarlo,
            population: 100,
            seed: 4,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<RunSpec>(&text).unwrap(), spec);
    }
}
