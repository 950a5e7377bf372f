//! Built-in scenarios, one per standard plot. The TOML
//! sources live in `scenarios/` and double as documented examples.

use crate::scenario::Scenario;
use anyhow::{anyhow, Result};

pub struct Preset {
    pub id: &'static str,
    pub source: &'static str,
}

pub const PRESETS: [Preset; 10] = [
    Preset { id: "fig-los-fit", source: include_str!("../scenarios/fig-los-fit.toml") },
    Preset { id: "fig-assoc-height", source: include_str!("../scenarios/fig-assoc-height.toml") },
    Preset { id: "fig-cov-threshold", source: include_str!("../scenarios/fig-cov-threshold.toml") },
    Preset { id: "fig-cov-cylinder", source: include_str!("../scenarios/fig-cov-cylinder.toml") },
    Preset { id: "fig-cov-tilt", source: include_str!("../scenarios/fig-cov-tilt.toml") },
    Preset { id: "fig-cov-height", source: include_str!("../scenarios/fig-cov-height.toml") },
    Preset { id: "fig-cov-density", source: include_str!("../scenarios/fig-cov-density.toml") },
    Preset { id: "fig-cov-n", source: include_str!("../scenarios/fig-cov-n.toml") },
    Preset { id: "fig-los-only", source: include_str!("../scenarios/fig-los-only.toml") },
    Preset { id: "fig-rate-ma", source: include_str!("../scenarios/fig-rate-ma.toml") },
];

pub fn preset(id: &str) -> Result<Scenario> {
    let p = PRESETS
        .iter()
        .find(|p| p.id == id)
        .ok_or_else(|| anyhow!("unknown preset `{id}`; see `vhetnet list-presets`"))?;
    Scenario::parse(p.source)
}

/// `(id, figure caption)` for every preset.
pub fn list_presets() -> Vec<(&'static str, String)> {
    PRESETS
        .iter()
        .map(|p| (p.id, Scenario::parse(p.source).map(|s| s.figure).unwrap_or_default()))
        .collect()
}
