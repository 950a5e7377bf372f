//! Monte Carlo simulator of the two-tier network.
//!
//! Every trial draws from its own ChaCha8 stream keyed by (seed, trial
//! index), so results do not depend on the number of worker threads.

use crate::channel::{in_terrestrial_mainlobe, los_probability_of_distance, sample_aerial_interferer_gain, LinkState};
use crate::config::{SpectrumPolicy, TierLabel, ValidatedParams};
use crate::distributions::{exclusion_radii, horizontal};
use crate::error::{invalid, Result};
use crate::geometry::sample_bpp_disc;
use crate::interference::LaplaceEvalRequest;
use crate::numerics::sampling::{gamma_unit_mean, uniform_open};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default radius of the simulated terrestrial window, meters.
pub const DEFAULT_R_SIM: f64 = 30_000.0;
/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;
const HEIGHT_STREAM_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Deployment and antenna model of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    /// Aerial BSs on a disc, terrestrial BSs seen through their sidelobe.
    #[default]
    Standard,
    /// Aerial BSs uniform in a cylinder of height `h_c` centred at `h_A`.
    Bpp3d { h_c: f64 },
    /// Down-tilted terrestrial antennas; association and SINR use the actual gain.
    Tilt { tilt_deg: f64, beamwidth_deg: f64 },
}

/// One realisation seen by the user. Interference is kept per tier so both
/// spectrum policies can be evaluated on the same trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub tier: TierLabel,
    /// SINR under the policy of the parameters the trial ran with.
    pub sinr: f64,
    /// `log2(1 + sinr)`.
    pub rate: f64,
    pub serving_distance: f64,
    pub signal: f64,
    pub interference_l: f64,
    pub interference_n: f64,
    pub interference_a: f64,
    pub noise: f64,
}

impl TrialOutcome {
    pub fn interference(&self, policy: SpectrumPolicy) -> f64 {
        match (policy, self.tier) {
            (SpectrumPolicy::Noss, _) => self.interference_l + self.interference_n + self.interference_a,
            (SpectrumPolicy::Oss, TierLabel::A) => self.interference_a,
            (SpectrumPolicy::Oss, _) => self.interference_l + self.interference_n,
        }
    }

    pub fn sinr_for(&self, policy: SpectrumPolicy) -> f64 {
        self.signal / (self.interference(policy) + self.noise)
    }
}

/// Estimate with a 99% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_trials: usize,
    pub seed: u64,
}

impl EstimateWithCI {
    /// Wilson score interval for `successes` out of `n`.
    pub fn proportion(successes: usize, n: usize, seed: u64) -> Self {
        let nf = n as f64;
        let p = successes as f64 / nf;
        let z2 = Z_99 * Z_99;
        let denom = 1.0 + z2 / nf;
        let centre = (p + z2 / (2.0 * nf)) / denom;
        let half = Z_99 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
        EstimateWithCI {
            mean: p,
            ci_low: (centre - half).max(0.0).min(p),
            ci_high: (centre + half).min(1.0).max(p),
            n_trials: n,
            seed,
        }
    }

    /// Normal interval for a sample mean.
    pub fn sample_mean(values: &[f64], seed: u64) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let half = Z_99 * (var / n).sqrt();
        EstimateWithCI {
            mean,
            ci_low: mean - half,
            ci_high: mean + half,
            n_trials: values.len(),
            seed,
        }
    }

    /// Standard error implied by the interval.
    pub fn standard_error(&self) -> f64 {
        (self.ci_high - self.ci_low) / (2.0 * Z_99)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// RNG of trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Separate stream for aerial heights, so the 3-D deployment shares every
/// other draw with the 2-D one.
fn height_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ HEIGHT_STREAM_SALT);
    rng.set_stream(trial);
    rng
}

#[derive(Default, Clone, Copy)]
struct TierTrack {
    sum: f64,
    best_avg: f64,
    best_faded: f64,
    best_dist: f64,
}

impl TierTrack {
    fn push(&mut self, avg: f64, faded: f64, dist: f64) {
        self.sum += faded;
        if avg > self.best_avg {
            self.best_avg = avg;
            self.best_faded = faded;
            self.best_dist = dist;
        }
    }
}

/// One full trial with an explicit terrestrial window and height stream.
pub fn run_trial_with<R: Rng + ?Sized, H: Rng + ?Sized>(
    params: &ValidatedParams,
    mode: SimMode,
    r_sim: f64,
    rng: &mut R,
    heights: &mut H,
) -> Result<TrialOutcome> {
    let h_ut2 = params.h_ut() * params.h_ut();
    let mut tracks = [TierTrack::default(); 3];

    // terrestrial PPP, radii only: the user sits on the axis
    let mean = params.lambda_t() * PI * r_sim * r_sim;
    let count = if mean > 0.0 {
        Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
    } else {
        0
    };
    let gain_ratio = params.g_m_t() / params.g_s_t();
    for _ in 0..count {
        let z = r_sim * rng.random::<f64>().sqrt();
        let pl = los_probability_of_distance(z, params);
        let state = if rng.random::<f64>() < pl { LinkState::Los } else { LinkState::Nlos };
        let tier = if state == LinkState::Los { TierLabel::L } else { TierLabel::N };
        let fading = gamma_unit_mean(params.m(tier), rng);
        let t2 = z * z + h_ut2;
        let mut avg = params.mu(tier) * t2.powf(-params.alpha(tier) / 2.0);
        if let SimMode::Tilt { tilt_deg, beamwidth_deg } = mode {
            if in_terrestrial_mainlobe(z, params.h_u(), params.h_t(), tilt_deg, beamwidth_deg) {
                avg *= gain_ratio;
            }
        }
        tracks[tier.index()].push(avg, avg * fading, t2.sqrt());
    }

    // aerial BPP; heights come from their own stream in the 3-D mode
    let mut aerial = sample_bpp_disc(params.n(), params.r_d(), params.h_a(), rng);
    if let SimMode::Bpp3d { h_c } = mode {
        let bottom = params.h_a() - h_c / 2.0;
        if !(h_c >= 0.0) || !(bottom > params.h_u()) {
            return Err(invalid(
                "h_c",
                format!("cylinder bottom {bottom} m must lie above the user at {} m", params.h_u()),
            ));
        }
        if h_c > 0.0 {
            for p in aerial.iter_mut() {
                p.z = bottom + h_c * heights.random::<f64>();
            }
        }
    }
    let p_eta = params.p_a() * params.eta(TierLabel::A);
    let alpha_a = params.alpha(TierLabel::A);
    let m_a = params.m(TierLabel::A);
    let mut draws = Vec::with_capacity(aerial.len());
    for p in &aerial {
        let dz = p.z - params.h_u();
        let t2 = p.x * p.x + p.y * p.y + dz * dz;
        let fading = gamma_unit_mean(m_a, rng);
        let gain = sample_aerial_interferer_gain(params.q_a(), params.g_m_a(), params.g_s_a(), rng);
        draws.push((t2, fading, gain));
    }
    // the strongest aerial BS serves through its mainlobe, the rest interfere
    let mut best = None;
    let mut best_avg = 0.0;
    for (k, &(t2, _, _)) in draws.iter().enumerate() {
        let avg = params.mu(TierLabel::A) * t2.powf(-alpha_a / 2.0);
        if avg > best_avg {
            best_avg = avg;
            best = Some(k);
        }
    }
    {
        let a = &mut tracks[TierLabel::A.index()];
        for (k, &(t2, fading, gain)) in draws.iter().enumerate() {
            let path = t2.powf(-alpha_a / 2.0);
            if Some(k) == best {
                a.best_avg = best_avg;
                a.best_faded = p_eta * params.g_m_a() * path * fading;
                a.best_dist = t2.sqrt();
            } else {
                a.sum += p_eta * gain * path * fading;
            }
        }
    }

    // strongest average power; ties resolved L, then N, then A
    let mut tier = TierLabel::L;
    for t in [TierLabel::N, TierLabel::A] {
        if tracks[t.index()].best_avg > tracks[tier.index()].best_avg {
            tier = t;
        }
    }
    let serving = tracks[tier.index()];
    let minus = |t: TierLabel| {
        let tr = &tracks[t.index()];
        if t == tier && t != TierLabel::A {
            (tr.sum - tr.best_faded).max(0.0)
        } else {
            tr.sum
        }
    };
    let mut out = TrialOutcome {
        tier,
        sinr: 0.0,
        rate: 0.0,
        serving_distance: serving.best_dist,
        signal: serving.best_faded,
        interference_l: minus(TierLabel::L),
        interference_n: minus(TierLabel::N),
        interference_a: minus(TierLabel::A),
        noise: params.sigma2(),
    };
    out.sinr = out.sinr_for(params.policy());
    out.rate = out.sinr.ln_1p() / std::f64::consts::LN_2;
    Ok(out)
}

/// One full trial with the default window; heights share the trial stream.
pub fn run_trial<R: Rng + ?Sized>(params: &ValidatedParams, mode: SimMode, rng: &mut R) -> Result<TrialOutcome> {
    let mut h = ChaCha8Rng::seed_from_u64(rng.random());
    run_trial_with(params, mode, DEFAULT_R_SIM, rng, &mut h)
}

/// Trials `0..n_trials` of master seed `seed`, in trial order.
pub fn simulate(
    params: &ValidatedParams,
    mode: SimMode,
    n_trials: usize,
    seed: u64,
    r_sim: f64,
) -> Result<Vec<TrialOutcome>> {
    (0..n_trials as u64)
        .into_par_iter()
        .map(|i| run_trial_with(params, mode, r_sim, &mut trial_rng(seed, i), &mut height_rng(seed, i)))
        .collect()
}

fn check_trials(n_trials: usize) -> Result<()> {
    if n_trials == 0 {
        return Err(invalid("n_trials", "at least one trial is required"));
    }
    Ok(())
}

/// Fraction of trials with SINR ≥ T under `policy`, for each threshold.
pub fn coverage_curve(outcomes: &[TrialOutcome], thresholds: &[f64], policy: SpectrumPolicy, seed: u64) -> Vec<EstimateWithCI> {
    let sinr: Vec<f64> = outcomes.iter().map(|o| o.sinr_for(policy)).collect();
    thresholds
        .iter()
        .map(|&t| EstimateWithCI::proportion(sinr.iter().filter(|&&s| s >= t).count(), sinr.len(), seed))
        .collect()
}

/// P(SINR ≥ T) with a Wilson 99% interval.
pub fn estimate_coverage(
    params: &ValidatedParams,
    threshold: f64,
    n_trials: usize,
    seed: u64,
    mode: SimMode,
) -> Result<EstimateWithCI> {
    check_trials(n_trials)?;
    let out = simulate(params, mode, n_trials, seed, DEFAULT_R_SIM)?;
    Ok(coverage_curve(&out, &[threshold], params.policy(), seed)[0])
}

/// Mean of `log2(1 + SINR)`.
pub fn estimate_rate(params: &ValidatedParams, n_trials: usize, seed: u64, mode: SimMode) -> Result<EstimateWithCI> {
    check_trials(n_trials)?;
    let out = simulate(params, mode, n_trials, seed, DEFAULT_R_SIM)?;
    let rates: Vec<f64> = out.iter().map(|o| o.rate).collect();
    Ok(EstimateWithCI::sample_mean(&rates, seed))
}

/// Distance to the nearest BS of each tier; `None` when the tier is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestDistances {
    pub los: Option<f64>,
    pub nlos: Option<f64>,
    pub aerial: f64,
}

/// Nearest-BS distances of one standard deployment. Terrestrial BSs are
/// generated outward from the user and generation stops once neither
/// terrestrial tier can still change the association (`full = false`) or
/// once both nearest members are known.
fn nearest_distances<R: Rng + ?Sized>(params: &ValidatedParams, rng: &mut R, full: bool) -> NearestDistances {
    let aerial = sample_bpp_disc(params.n(), params.r_d(), params.h_a(), rng)
        .iter()
        .map(|p| (p.x * p.x + p.y * p.y + params.h_ua() * params.h_ua()).sqrt())
        .fold(f64::INFINITY, f64::min);
    let best_aerial = params.mu(TierLabel::A) * aerial.powf(-params.alpha(TierLabel::A));
    let (mut los, mut nlos) = (None, None);
    let lambda = params.lambda_t();
    if lambda > 0.0 {
        let h2 = params.h_ut() * params.h_ut();
        let mut area = 0.0;
        loop {
            area += -uniform_open(rng).ln();
            let z = (area / (PI * lambda)).sqrt();
            let t = (z * z + h2).sqrt();
            if rng.random::<f64>() < los_probability_of_distance(z, params) {
                los.get_or_insert(t);
            } else {
                nlos.get_or_insert(t);
            }
            if los.is_some() && nlos.is_some() {
                break;
            }
            // the remaining tiers cannot win any more
            let l_dead = los.is_some() || params.mu(TierLabel::L) * t.powf(-params.alpha(TierLabel::L)) < best_aerial;
            let n_dead = nlos.is_some() || params.mu(TierLabel::N) * t.powf(-params.alpha(TierLabel::N)) < best_aerial;
            if (!full && l_dead && n_dead) || z > 1e7 {
                break;
            }
        }
    }
    NearestDistances { los, nlos, aerial }
}

/// Nearest distances of `n` independent deployments.
pub fn sample_nearest_distances(params: &ValidatedParams, n: usize, seed: u64) -> Vec<NearestDistances> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| nearest_distances(params, &mut trial_rng(seed, i), true))
        .collect()
}

/// Serving tier of one standard deployment by strongest average power.
pub fn associate<R: Rng + ?Sized>(params: &ValidatedParams, rng: &mut R) -> TierLabel {
    let d = nearest_distances(params, rng, false);
    let power = |t: TierLabel, r: Option<f64>| r.map_or(0.0, |r| params.mu(t) * r.powf(-params.alpha(t)));
    let pl = power(TierLabel::L, d.los);
    let pn = power(TierLabel::N, d.nlos);
    let pa = power(TierLabel::A, Some(d.aerial));
    if pl >= pn && pl >= pa && pl > 0.0 {
        TierLabel::L
    } else if pn >= pa && pn > 0.0 {
        TierLabel::N
    } else {
        TierLabel::A
    }
}

/// Association frequencies `[L, N, A]` with Wilson 99% intervals.
pub fn estimate_association(params: &ValidatedParams, n_trials: usize, seed: u64) -> Result<[EstimateWithCI; 3]> {
    check_trials(n_trials)?;
    let counts = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut c = [0usize; 3];
            c[associate(params, &mut trial_rng(seed, i)).index()] += 1;
            c
        })
        .reduce(|| [0; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    Ok(counts.map(|c| EstimateWithCI::proportion(c, n_trials, seed)))
}

/// Samples of the interference seen by a user served by `req.serving_tier`
/// at `req.r`, with interferers drawn from the same conditional laws the
/// analysis uses: thinned PPPs beyond the exclusion radii (horizontal
/// window `window`) and `N′` aerial BSs uniform in area beyond `τ_A`.
/// Tiers are included according to `req.policy`; noise is not added.
pub fn sample_conditional_interference(
    params: &ValidatedParams,
    req: &LaplaceEvalRequest,
    n: usize,
    seed: u64,
    window: f64,
) -> Result<Vec<f64>> {
    let tau = exclusion_radii(req.serving_tier, req.r, params)?;
    let (terrestrial, aerial) = match (req.policy, req.serving_tier) {
        (SpectrumPolicy::Noss, _) => (true, true),
        (SpectrumPolicy::Oss, TierLabel::A) => (false, true),
        (SpectrumPolicy::Oss, _) => (true, false),
    };
    let h = params.h_ut();
    let z_l = horizontal(tau.tau_l, h);
    let z_n = horizontal(tau.tau_n, h);
    let z0 = z_l.min(z_n);
    let d = params.d();
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| {
            let rng = &mut trial_rng(seed, i);
            let mut total = 0.0;
            if terrestrial && window > z0 {
                let mean = params.lambda_t() * PI * (window * window - z0 * z0);
                let count = if mean > 0.0 {
                    Poisson::new(mean).map(|p| p.sample(rng) as u64).unwrap_or(0)
                } else {
                    0
                };
                for _ in 0..count {
                    let z = (z0 * z0 + (window * window - z0 * z0) * rng.random::<f64>()).sqrt();
                    let tier = if rng.random::<f64>() < los_probability_of_distance(z, params) {
                        TierLabel::L
                    } else {
                        TierLabel::N
                    };
                    let fading = gamma_unit_mean(params.m(tier), rng);
                    let z_min = if tier == TierLabel::L { z_l } else { z_n };
                    if z >= z_min {
                        let t2 = z * z + h * h;
                        total += params.mu(tier) * fading * t2.powf(-params.alpha(tier) / 2.0);
                    }
                }
            }
            if aerial && tau.tau_a < d {
                let span = d * d - tau.tau_a * tau.tau_a;
                for _ in 0..tau.n_prime {
                    let t2 = tau.tau_a * tau.tau_a + span * rng.random::<f64>();
                    let fading = gamma_unit_mean(params.m(TierLabel::A), rng);
                    let gain = sample_aerial_interferer_gain(params.q_a(), params.g_m_a(), params.g_s_a(), rng);
                    total += params.p_a() * params.eta(TierLabel::A) * gain * fading * t2.powf(-params.alpha(TierLabel::A) / 2.0);
                }
            }
            total
        })
        .collect())
}

/// Empirical `E[e^{−sI}]` from [`sample_conditional_interference`].
pub fn estimate_laplace(
    params: &ValidatedParams,
    req: &LaplaceEvalRequest,
    n: usize,
    seed: u64,
    window: f64,
) -> Result<EstimateWithCI> {
    check_trials(n)?;
    let v: Vec<f64> = sample_conditional_interference(params, req, n, seed, window)?
        .into_iter()
        .map(|i| (-req.s * i).exp())
        .collect();
    Ok(EstimateWithCI::sample_mean(&v, seed))
}

/// Coverage curves of the disc and cylinder deployments on common draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BppComparison {
    pub h_c: f64,
    pub thresholds: Vec<f64>,
    pub coverage_2d: Vec<EstimateWithCI>,
    pub coverage_3d: Vec<EstimateWithCI>,
    pub max_abs_diff: f64,
    /// `r_D / H_C ≥ 10`, where the disc is expected to stand in for the cylinder.
    pub thin_cylinder: bool,
}

pub fn validate_2d_vs_3d(
    params: &ValidatedParams,
    h_c: f64,
    thresholds: &[f64],
    n_trials: usize,
    seed: u64,
) -> Result<BppComparison> {
    check_trials(n_trials)?;
    let flat = simulate(params, SimMode::Standard, n_trials, seed, DEFAULT_R_SIM)?;
    let thick = simulate(params, SimMode::Bpp3d { h_c }, n_trials, seed, DEFAULT_R_SIM)?;
    let c2 = coverage_curve(&flat, thresholds, params.policy(), seed);
    let c3 = coverage_curve(&thick, thresholds, params.policy(), seed);
    let max_abs_diff = c2.iter().zip(&c3).map(|(a, b)| (a.mean - b.mean).abs()).fold(0.0, f64::max);
    Ok(BppComparison {
        h_c,
        thresholds: thresholds.to_vec(),
        coverage_2d: c2,
        coverage_3d: c3,
        max_abs_diff,
        thin_cylinder: h_c == 0.0 || params.r_d() / h_c >= 10.0,
    })
}

/// Sidelobe-only against tilted coverage at one user height and tilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltRow {
    pub h_u: f64,
    pub tilt_deg: f64,
    pub sidelobe: EstimateWithCI,
    pub tilted: EstimateWithCI,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltReport {
    pub beamwidth_deg: f64,
    pub threshold: f64,
    pub rows: Vec<TiltRow>,
    pub max_abs_delta: f64,
}

pub fn validate_sidelobe_assumption(
    params: &ValidatedParams,
    heights: &[f64],
    tilts_deg: &[f64],
    beamwidth_deg: f64,
    threshold: f64,
    n_trials: usize,
    seed: u64,
) -> Result<TiltReport> {
    check_trials(n_trials)?;
    let mut rows = Vec::new();
    for &h_u in heights {
        let p = params.with(|r| r.h_u = h_u)?;
        let base = simulate(&p, SimMode::Standard, n_trials, seed, DEFAULT_R_SIM)?;
        let sidelobe = coverage_curve(&base, &[threshold], p.policy(), seed)[0];
        for &tilt_deg in tilts_deg {
            let mode = SimMode::Tilt { tilt_deg, beamwidth_deg };
            let tilted_out = simulate(&p, mode, n_trials, seed, DEFAULT_R_SIM)?;
            let tilted = coverage_curve(&tilted_out, &[threshold], p.policy(), seed)[0];
            rows.push(TiltRow {
                h_u,
                tilt_deg,
                sidelobe,
                tilted,
                delta: tilted.mean - sidelobe.mean,
            });
        }
    }
    let max_abs_delta = rows.iter().map(|r| r.delta.abs()).fold(0.0, f64::max);
    Ok(TiltReport {
        beamwidth_deg,
        threshold,
        rows,
        max_abs_delta,
    })
}
