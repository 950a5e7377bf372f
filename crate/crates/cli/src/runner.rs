//! Evaluates a scenario into CSV rows.

use crate::scenario::{build_params, Output, PathKind, ResolvedSeries, Scenario};
use anyhow::{anyhow, bail, Result};
use rayon::prelude::*;
use std::io::Write;
use std::time::Instant;
use vhetnet_core::association::assoc_probs;
use vhetnet_core::channel::{fitted_los_probability, itu_los_probability_at_angle};
use vhetnet_core::montecarlo::{coverage_curve, estimate_association, simulate, DEFAULT_R_SIM};
use vhetnet_core::{
    coverage, db_to_linear, rate, validate, AngleUnit, EstimateWithCI, Method, SimMode, TierLabel, TrialOutcome,
    ValidatedParams,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const COLUMNS: [&str; 12] = [
    "sweep_var", "value", "path", "metric", "result", "ci_low", "ci_high", "n_trials", "seed", "runtime_ms", "series",
    "error",
];

/// Knobs that command-line flags override.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub n_trials: Option<usize>,
    pub paths: Option<Vec<PathKind>>,
    /// Record wall-clock time per row; makes the output non-reproducible.
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub sweep_var: String,
    pub value: f64,
    pub path: PathKind,
    pub metric: &'static str,
    pub result: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub n_trials: Option<usize>,
    pub seed: Option<u64>,
    pub runtime_ms: Option<f64>,
    pub series: String,
    pub error: Option<String>,
}

struct Point<'a> {
    scenario: &'a Scenario,
    series: &'a ResolvedSeries,
    value: f64,
    seed: u64,
    n_trials: usize,
}

impl Point<'_> {
    fn row(&self, path: PathKind, metric: &'static str) -> Row {
        Row {
            sweep_var: self.scenario.sweep.variable.clone(),
            value: self.value,
            path,
            metric,
            result: None,
            ci: None,
            n_trials: None,
            seed: None,
            runtime_ms: None,
            series: self.series.label.clone(),
            error: None,
        }
    }

    fn var(&self) -> &str {
        &self.scenario.sweep.variable
    }

    fn params(&self) -> Result<ValidatedParams> {
        let field = match self.var() {
            "threshold_db" | "theta_deg" | "h_c" | "tilt_deg" => None,
            v => Some((v, self.value)),
        };
        Ok(validate(&build_params(&self.series.params, field)?)?)
    }

    fn threshold(&self) -> f64 {
        db_to_linear(if self.var() == "threshold_db" { self.value } else { self.series.threshold_db })
    }

    fn mode(&self) -> Result<SimMode> {
        Ok(match (self.var(), self.series.mode) {
            ("h_c", SimMode::Standard | SimMode::Bpp3d { .. }) => SimMode::Bpp3d { h_c: self.value },
            ("h_c", _) => bail!("an h_c sweep needs the standard or bpp3d mode"),
            ("tilt_deg", SimMode::Tilt { beamwidth_deg, .. }) => SimMode::Tilt { tilt_deg: self.value, beamwidth_deg },
            ("tilt_deg", _) => bail!("a tilt_deg sweep needs the tilt mode"),
            (_, m) => m,
        })
    }
}

fn metric_names(output: Output) -> &'static [&'static str] {
    match output {
        Output::Coverage => &["coverage"],
        Output::Rate => &["rate"],
        Output::Association => &["association_l", "association_n", "association_a"],
        Output::LosProb => &["los_prob"],
    }
}

fn fill(row: &mut Row, value: Result<f64>) {
    match value {
        Ok(v) => row.result = Some(v),
        Err(e) => row.error = Some(format!("{e:#}")),
    }
}

fn fill_estimate(row: &mut Row, e: &EstimateWithCI) {
    row.result = Some(e.mean);
    row.ci = Some((e.ci_low, e.ci_high));
    row.n_trials = Some(e.n_trials);
    row.seed = Some(e.seed);
}

fn elapsed_ms(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1e3 * 1e3).round() / 1e3
}

/// Rows of the analytical paths at one point.
fn analytical_rows(point: &Point, path: PathKind, out: &mut Vec<Row>) {
    let method = if path == PathKind::AnalyticalExact { Method::Exact } else { Method::Approx };
    let setup = point.params().and_then(|p| match point.mode()? {
        SimMode::Standard => Ok(p),
        SimMode::Bpp3d { h_c } if h_c == 0.0 => Ok(p),
        SimMode::Bpp3d { .. } => bail!("the analytical model covers aerial BSs at a single height only"),
        SimMode::Tilt { .. } => bail!("the analytical model assumes sidelobe-only terrestrial gain"),
    });
    for &output in &point.scenario.outputs {
        let start = Instant::now();
        let values: Vec<Result<f64>> = match (&setup, output) {
            (Err(e), _) => metric_names(output).iter().map(|_| Err(anyhow!("{e:#}"))).collect(),
            (Ok(p), Output::Coverage) => vec![coverage(point.threshold(), p, method).map(|c| c.total).map_err(Into::into)],
            (Ok(p), Output::Rate) => vec![rate(p, method).map(|r| r.total).map_err(Into::into)],
            (Ok(p), Output::Association) => match assoc_probs(p) {
                Ok(a) => TierLabel::ALL.iter().map(|&t| Ok(a.get(t))).collect(),
                Err(e) => (0..3).map(|_| Err(anyhow!("{e}"))).collect(),
            },
            (Ok(p), Output::LosProb) => vec![los_prob(p, point.value, path)],
        };
        let ms = elapsed_ms(start);
        for (metric, v) in metric_names(output).iter().zip(values) {
            let mut row = point.row(path, metric);
            fill(&mut row, v);
            row.runtime_ms = Some(ms);
            out.push(row);
        }
    }
}

/// ITU reference for the exact path, fitted curve for the approximate one.
fn los_prob(p: &ValidatedParams, theta_deg: f64, path: PathKind) -> Result<f64> {
    let env = p.environment();
    if path == PathKind::AnalyticalExact {
        let itu = env
            .itu()
            .ok_or_else(|| anyhow!("no ITU building statistics for environment `{}`", env.name))?;
        Ok(itu_los_probability_at_angle(theta_deg, &itu, env.h_t))
    } else {
        let theta = match p.angle_unit() {
            AngleUnit::Degrees => theta_deg,
            AngleUnit::Radians => theta_deg.to_radians(),
        };
        Ok(fitted_los_probability(theta, env))
    }
}

fn montecarlo_rows(point: &Point, shared: Option<&(Vec<TrialOutcome>, f64)>, out: &mut Vec<Row>) {
    let path = PathKind::Montecarlo;
    let setup = point.params().and_then(|p| Ok((p, point.mode()?)));
    let needs_trials = point.scenario.outputs.iter().any(|o| matches!(o, Output::Coverage | Output::Rate));
    let start = Instant::now();
    let own = match (&setup, shared) {
        (Ok((p, mode)), None) if needs_trials => Some(
            simulate(p, *mode, point.n_trials, point.seed, DEFAULT_R_SIM)
                .map(|t| (t, elapsed_ms(start)))
                .map_err(|e| anyhow!("{e}")),
        ),
        _ => None,
    };
    let trials: Option<std::result::Result<&(Vec<TrialOutcome>, f64), &anyhow::Error>> = match (shared, &own) {
        (Some(s), _) => Some(Ok(s)),
        (None, Some(r)) => Some(r.as_ref()),
        (None, None) => None,
    };
    for &output in &point.scenario.outputs {
        let start = Instant::now();
        let mut rows: Vec<Row> = metric_names(output).iter().map(|m| point.row(path, m)).collect();
        match (&setup, output) {
            (Err(e), _) => rows.iter_mut().for_each(|r| r.error = Some(format!("{e:#}"))),
            (_, Output::LosProb) => rows[0].error = Some("no Monte Carlo estimate of the LoS probability curve".into()),
            (Ok((p, _)), Output::Association) => match estimate_association(p, point.n_trials, point.seed) {
                Ok(est) => rows.iter_mut().zip(est.iter()).for_each(|(r, e)| fill_estimate(r, e)),
                Err(e) => rows.iter_mut().for_each(|r| r.error = Some(e.to_string())),
            },
            (Ok((p, _)), Output::Coverage | Output::Rate) => match trials {
                Some(Ok((t, sim_ms))) => {
                    let est = if output == Output::Coverage {
                        coverage_curve(t, &[point.threshold()], p.policy(), point.seed)[0]
                    } else {
                        let rates: Vec<f64> = t.iter().map(|o| o.sinr_for(p.policy()).ln_1p() / std::f64::consts::LN_2).collect();
                        EstimateWithCI::sample_mean(&rates, point.seed)
                    };
                    fill_estimate(&mut rows[0], &est);
                    rows[0].runtime_ms = Some(sim_ms + elapsed_ms(start));
                }
                Some(Err(e)) => rows[0].error = Some(format!("{e:#}")),
                None => rows[0].error = Some("internal: trials missing".into()),
            },
        }
        for r in rows.iter_mut() {
            if r.runtime_ms.is_none() {
                r.runtime_ms = Some(elapsed_ms(start));
            }
        }
        out.extend(rows);
    }
}

/// All rows of `scenario`, in series, value, path, metric order.
pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<Row>> {
    let values = scenario.sweep.points()?;
    let seed = opts.seed.unwrap_or(scenario.seed);
    let n_trials = opts.n_trials.unwrap_or(scenario.n_trials);
    if n_trials == 0 {
        bail!("the number of trials must be at least 1");
    }
    let mut series = scenario.resolved_series();
    if let Some(paths) = &opts.paths {
        for s in series.iter_mut() {
            s.paths = paths.clone();
        }
    }

    // a threshold sweep reuses one set of trials per series
    let shared: Vec<Option<(Vec<TrialOutcome>, f64)>> = series
        .iter()
        .map(|s| {
            let wanted = scenario.sweep.variable == "threshold_db"
                && s.paths.contains(&PathKind::Montecarlo)
                && scenario.outputs.iter().any(|o| matches!(o, Output::Coverage | Output::Rate))
                && !values.is_empty();
            if !wanted {
                return None;
            }
            let point = Point {
                scenario,
                series: s,
                value: values[0],
                seed,
                n_trials,
            };
            let start = Instant::now();
            let p = point.params().ok()?;
            let mode = point.mode().ok()?;
            simulate(&p, mode, n_trials, seed, DEFAULT_R_SIM).ok().map(|t| (t, elapsed_ms(start)))
        })
        .collect();

    let jobs: Vec<(usize, f64)> = (0..series.len()).flat_map(|i| values.iter().map(move |&v| (i, v))).collect();
    let chunks: Vec<Vec<Row>> = jobs
        .par_iter()
        .map(|&(i, value)| {
            let point = Point {
                scenario,
                series: &series[i],
                value,
                seed,
                n_trials,
            };
            let mut rows = Vec::new();
            for &path in &PathKind::ALL {
                if !series[i].paths.contains(&path) {
                    continue;
                }
                match path {
                    PathKind::Montecarlo => montecarlo_rows(&point, shared[i].as_ref(), &mut rows),
                    _ => analytical_rows(&point, path, &mut rows),
                }
            }
            rows
        })
        .collect();
    let mut rows: Vec<Row> = chunks.into_iter().flatten().collect();
    if !opts.timing {
        rows.iter_mut().for_each(|r| r.runtime_ms = None);
    }
    Ok(rows)
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

/// Writes the schema comment, the header, and `rows`.
pub fn write_csv<W: Write>(mut w: W, scenario: &Scenario, rows: &[Row]) -> Result<()> {
    writeln!(w, "# vhetnet csv schema v{SCHEMA_VERSION}; scenario {}", scenario.name)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COLUMNS)?;
    for r in rows {
        out.write_record([
            r.sweep_var.clone(),
            format!("{}", r.value),
            r.path.to_string(),
            r.metric.to_string(),
            num(r.result),
            num(r.ci.map(|c| c.0)),
            num(r.ci.map(|c| c.1)),
            r.n_trials.map(|n| n.to_string()).unwrap_or_default(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            num(r.runtime_ms),
            r.series.clone(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
