//! Scenario files: a base parameter set, one swept variable, optional
//! series overlays.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use std::fmt;
use std::str::FromStr;
use vhetnet_core::{NetworkParams, SimMode};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_THRESHOLD_DB: f64 = 5.0;

/// Sweep variables that are not fields of [`NetworkParams`].
pub const SPECIAL_VARIABLES: [&str; 4] = ["threshold_db", "theta_deg", "h_c", "tilt_deg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    AnalyticalExact,
    AnalyticalApprox,
    Montecarlo,
}

impl PathKind {
    pub const ALL: [PathKind; 3] = [PathKind::AnalyticalExact, PathKind::AnalyticalApprox, PathKind::Montecarlo];

    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::AnalyticalExact => "analytical_exact",
            PathKind::AnalyticalApprox => "analytical_approx",
            PathKind::Montecarlo => "montecarlo",
        }
    }
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PathKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytical_exact" | "exact" => Ok(PathKind::AnalyticalExact),
            "analytical_approx" | "approx" => Ok(PathKind::AnalyticalApprox),
            "montecarlo" | "mc" => Ok(PathKind::Montecarlo),
            other => bail!("unknown path `{other}` (expected analytical_exact, analytical_approx or montecarlo)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Coverage,
    Rate,
    Association,
    LosProb,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: String,
    #[serde(default)]
    pub values: Vec<f64>,
    /// `[start, stop, step]`, inclusive of `stop` up to rounding.
    #[serde(default)]
    pub range: Option<[f64; 3]>,
}

impl Sweep {
    pub fn points(&self) -> Result<Vec<f64>> {
        let mut out = self.values.clone();
        if let Some([start, stop, step]) = self.range {
            if !(step > 0.0) || !(stop >= start) {
                bail!("sweep.range needs start ≤ stop and step > 0, got [{start}, {stop}, {step}]");
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            out.extend((0..=n).map(|k| start + step * k as f64));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    pub label: String,
    #[serde(default)]
    pub params: toml::Table,
    #[serde(default)]
    pub mode: Option<SimMode>,
    #[serde(default)]
    pub paths: Option<Vec<PathKind>>,
    #[serde(default)]
    pub threshold_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// One-line caption of the plot the scenario produces.
    #[serde(default)]
    pub figure: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default = "default_paths")]
    pub paths: Vec<PathKind>,
    pub outputs: Vec<Output>,
    #[serde(default = "default_threshold")]
    pub threshold_db: f64,
    #[serde(default)]
    pub mode: SimMode,
    #[serde(default)]
    pub params: toml::Table,
    pub sweep: Sweep,
    #[serde(default)]
    pub series: Vec<Series>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_paths() -> Vec<PathKind> {
    PathKind::ALL.to_vec()
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD_DB
}

/// One overlay with its settings resolved against the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSeries {
    pub label: String,
    pub params: toml::Table,
    pub mode: SimMode,
    pub paths: Vec<PathKind>,
    pub threshold_db: f64,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| anyhow!("scenario parse error: {e}"))?;
        s.check()?;
        Ok(s)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    fn check(&self) -> Result<()> {
        let var = self.sweep.variable.as_str();
        if !SPECIAL_VARIABLES.contains(&var) {
            let base = toml::Table::try_from(NetworkParams::default())?;
            match base.get(var) {
                Some(toml::Value::Float(_)) | Some(toml::Value::Integer(_)) => {}
                _ => bail!("sweep variable `{var}` is not a numeric parameter"),
            }
        }
        if self.outputs.contains(&Output::LosProb) != (var == "theta_deg") {
            bail!("the los_prob output goes with a theta_deg sweep and nothing else");
        }
        if self.n_trials == 0 {
            bail!("n_trials must be at least 1");
        }
        self.sweep.points()?;
        Ok(())
    }

    /// Series to run; a scenario without overlays runs once as `base`.
    pub fn resolved_series(&self) -> Vec<ResolvedSeries> {
        let base = ResolvedSeries {
            label: "base".into(),
            params: self.params.clone(),
            mode: self.mode,
            paths: self.paths.clone(),
            threshold_db: self.threshold_db,
        };
        if self.series.is_empty() {
            return vec![base];
        }
        self.series
            .iter()
            .map(|s| {
                let mut params = self.params.clone();
                params.extend(s.params.clone());
                ResolvedSeries {
                    label: s.label.clone(),
                    params,
                    mode: s.mode.unwrap_or(self.mode),
                    paths: s.paths.clone().unwrap_or_else(|| self.paths.clone()),
                    threshold_db: s.threshold_db.unwrap_or(self.threshold_db),
                }
            })
            .collect()
    }
}

/// Builds [`NetworkParams`] from defaults, overrides, and an optional swept field.
pub fn build_params(overrides: &toml::Table, field: Option<(&str, f64)>) -> Result<NetworkParams> {
    let mut table = toml::Table::try_from(NetworkParams::default())?;
    table.extend(overrides.clone());
    if let Some((name, v)) = field {
        let value = match table.get(name) {
            Some(toml::Value::Integer(_)) => {
                if v.fract() != 0.0 {
                    bail!("`{name}` takes integer values, got {v}");
                }
                toml::Value::Integer(v as i64)
            }
            _ => toml::Value::Float(v),
        };
        table.insert(name.to_string(), value);
    }
    // integer literals are accepted where the field is a float
    let defaults = toml::Table::try_from(NetworkParams::default())?;
    for (k, v) in table.iter_mut() {
        if let (Some(toml::Value::Float(_)), toml::Value::Integer(i)) = (defaults.get(k), &*v) {
            *v = toml::Value::Float(*i as f64);
        }
    }
    table.try_into().map_err(|e: toml::de::Error| anyhow!("invalid parameters: {e}"))
}
