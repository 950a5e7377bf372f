//! Link-state models, antenna gains, fading and received power.

use crate::config::{AngleUnit, Environment, ItuEnvironment, LosModel, TierLabel, ValidatedParams};
use crate::error::{Error, Result};
use crate::numerics::sampling::{gamma_unit_mean, uniform_open};
use crate::numerics::simplex::nelder_mead;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkState {
    Los,
    Nlos,
}

/// Receiver height used when fitting the exponential curve; high enough
/// that the ITU staircase is smooth in the elevation angle.
pub const FIT_RECEIVER_HEIGHT: f64 = 10_000.0;

/// ITU-R P.1410 LoS probability for a link of horizontal length `z`.
pub fn itu_los_probability(z: f64, h_tx: f64, h_rx: f64, env: &ItuEnvironment) -> f64 {
    let m = (z * (env.alpha * env.beta).sqrt() / 1000.0 - 1.0).floor();
    if !(m >= 0.0) {
        return 1.0;
    }
    let m = m as u64;
    let two_delta2 = 2.0 * env.delta * env.delta;
    let slope = (h_tx - h_rx) / (m + 1) as f64;
    let mut p = 1.0;
    for n in 0..=m {
        let h = h_tx - (n as f64 + 0.5) * slope;
        p *= -(-(h * h) / two_delta2).exp_m1();
        if p == 0.0 {
            break;
        }
    }
    p
}

/// `clamp(c − a·exp(−b·θ), 0, 1)`; θ in the unit `b` was fitted in.
pub fn fitted_los_probability(theta: f64, env: &Environment) -> f64 {
    (env.c - env.a * (-env.b * theta).exp()).clamp(0.0, 1.0)
}

/// Elevation angle of a terrestrial BS seen from the user, in `unit`.
pub fn elevation_angle(z: f64, h_ut: f64, unit: AngleUnit) -> f64 {
    let rad = h_ut.atan2(z);
    match unit {
        AngleUnit::Degrees => rad.to_degrees(),
        AngleUnit::Radians => rad,
    }
}

/// LoS probability of a terrestrial link with horizontal length `z`.
pub fn los_probability_of_distance(z: f64, params: &ValidatedParams) -> f64 {
    los_probability_parts(z, params.h_ut(), params.los_model(), params.environment(), params.angle_unit())
}

/// NLoS complement of [`los_probability_of_distance`].
pub fn nlos_probability_of_distance(z: f64, params: &ValidatedParams) -> f64 {
    1.0 - los_probability_of_distance(z, params)
}

pub(crate) fn los_probability_parts(
    z: f64,
    h_ut: f64,
    model: LosModel,
    env: &Environment,
    unit: AngleUnit,
) -> f64 {
    match model {
        LosModel::AlwaysLos => 1.0,
        LosModel::Constant(p) => p,
        LosModel::Fitted => fitted_los_probability(elevation_angle(z, h_ut, unit), env),
    }
}

/// Outcome of [`fit_los_parameters`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rms: f64,
    pub iterations: usize,
}

/// The angle grid the fit uses: 0.5° to 90° in 0.5° steps.
pub fn fit_angle_grid() -> Vec<f64> {
    (1..=180).map(|k| 0.5 * k as f64).collect()
}

/// ITU LoS probability sampled on [`fit_angle_grid`] (degrees) for a BS at
/// `h_t` and a receiver at [`FIT_RECEIVER_HEIGHT`].
pub fn itu_curve(env: &ItuEnvironment, h_t: f64) -> Vec<(f64, f64)> {
    fit_angle_grid()
        .into_iter()
        .map(|t| (t, itu_los_probability_at_angle(t, env, h_t)))
        .collect()
}

/// ITU LoS probability at elevation `theta_deg` seen from a BS at `h_t`,
/// with the receiver at [`FIT_RECEIVER_HEIGHT`].
pub fn itu_los_probability_at_angle(theta_deg: f64, env: &ItuEnvironment, h_t: f64) -> f64 {
    let z = (FIT_RECEIVER_HEIGHT - h_t) / theta_deg.to_radians().tan();
    itu_los_probability(z.max(0.0), h_t, FIT_RECEIVER_HEIGHT, env)
}

/// Least-squares fit of `c − a·exp(−b·θ)` to `(θ, p)` samples.
///
/// Nelder–Mead from the starts (1, 1, 1) and (1, 0.1, 1); the better
/// minimum wins.
pub fn fit_exponential_curve(samples: &[(f64, f64)]) -> Result<LosFit> {
    if samples.len() < 3 {
        return Err(Error::Domain {
            what: "fit_exponential_curve",
            detail: format!("need at least 3 samples, got {}", samples.len()),
        });
    }
    let sse = |p: &[f64]| -> f64 {
        samples
            .iter()
            .map(|&(t, y)| {
                let r = p[2] - p[0] * (-p[1] * t).exp() - y;
                r * r
            })
            .sum()
    };
    let mut best: Option<crate::numerics::SimplexResult> = None;
    for start in [[1.0, 1.0, 1.0], [1.0, 0.1, 1.0]] {
        let step = [0.1, 0.1 * start[1], 0.05];
        let mut r = nelder_mead(sse, &start, &step, 1e-10, 20_000);
        // restart once from the optimum to shake off a collapsed simplex
        let step2 = [0.01, 0.01 * r.x[1].abs().max(1e-3), 0.01];
        let r2 = nelder_mead(sse, &r.x.clone(), &step2, 1e-16, 20_000);
        if r2.value <= r.value {
            r.iterations += r2.iterations;
            r.x = r2.x;
            r.value = r2.value;
            r.converged = r2.converged;
        }
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    let best = best.unwrap();
    let rms = (best.value / samples.len() as f64).sqrt();
    if !best.converged || !rms.is_finite() {
        return Err(Error::Convergence {
            what: "fit_los_parameters",
            detail: format!("residual RMS {rms:e} after {} iterations", best.iterations),
        });
    }
    Ok(LosFit {
        a: best.x[0],
        b: best.x[1],
        c: best.x[2],
        rms,
        iterations: best.iterations,
    })
}

/// Fits the exponential LoS curve (b per degree) to the ITU model.
pub fn fit_los_parameters(env: &ItuEnvironment, h_t: f64) -> Result<LosFit> {
    env.validate()?;
    fit_exponential_curve(&itu_curve(env, h_t))
}

/// Directional antenna with a flat mainlobe and a flat sidelobe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    pub mainlobe_gain: f64,
    pub sidelobe_gain: f64,
    pub beamwidth_deg: f64,
    /// Down-tilt, terrestrial antennas only.
    pub tilt_deg: f64,
}

/// Terrestrial antenna model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrestrialGainMode {
    /// Every terrestrial BS reaches the user through its sidelobe.
    #[default]
    SidelobeOnly,
    /// Down-tilted sector with the given tilt and beamwidth.
    Tilted { tilt_deg: f64, beamwidth_deg: f64 },
}

/// True when a BS at horizontal distance `r` has the user in its mainlobe:
/// `r·tan(θ_t + θ_B/2) < h_U < h_T − r·tan(θ_t − θ_B/2)`.
pub fn in_terrestrial_mainlobe(r: f64, h_u: f64, h_t: f64, tilt_deg: f64, beamwidth_deg: f64) -> bool {
    let upper = (tilt_deg + beamwidth_deg / 2.0).to_radians().tan();
    let lower = (tilt_deg - beamwidth_deg / 2.0).to_radians().tan();
    r * upper < h_u && h_u < h_t - r * lower
}

/// Gain of a terrestrial BS at horizontal distance `r`.
pub fn terrestrial_gain(r: f64, params: &ValidatedParams, mode: TerrestrialGainMode) -> f64 {
    match mode {
        TerrestrialGainMode::SidelobeOnly => params.g_s_t(),
        TerrestrialGainMode::Tilted { tilt_deg, beamwidth_deg } => {
            if in_terrestrial_mainlobe(r, params.h_u(), params.h_t(), tilt_deg, beamwidth_deg) {
                params.g_m_t()
            } else {
                params.g_s_t()
            }
        }
    }
}

/// Mainlobe gain with probability `q`, sidelobe gain otherwise. The serving
/// aerial BS always uses its mainlobe and is not drawn here.
pub fn sample_aerial_interferer_gain<R: Rng + ?Sized>(q: f64, g_m: f64, g_s: f64, rng: &mut R) -> f64 {
    if q >= 1.0 {
        g_m
    } else if q <= 0.0 {
        g_s
    } else if uniform_open(rng) <= q {
        g_m
    } else {
        g_s
    }
}

/// Nakagami-m power gain: Gamma(m, 1/m), unit mean.
pub fn sample_nakagami_power<R: Rng + ?Sized>(m: u32, rng: &mut R) -> f64 {
    gamma_unit_mean(m, rng)
}

/// `P·η·gain·fading·distance^(−α)` with the tier's transmit power and loss.
pub fn received_power(tier: TierLabel, distance: f64, gain: f64, fading: f64, params: &ValidatedParams) -> f64 {
    let p = if tier.is_terrestrial() { params.p_t() } else { params.p_a() };
    p * params.eta(tier) * gain * fading * distance.powf(-params.alpha(tier))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate, NetworkParams};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn urban_itu() -> ItuEnvironment {
        Environment::urban().itu().unwrap()
    }

    #[test]
    fn itu_empty_product() {
        // m = floor(z·sqrt(0.15)/1000 − 1) < 0 for z < 2582 m
        assert_eq!(itu_los_probability(100.0, 19.0, 10_000.0, &urban_itu()), 1.0);
        assert_eq!(itu_los_probability(0.0, 19.0, 10_000.0, &urban_itu()), 1.0);
    }

    #[test]
    fn itu_term_by_term() {
        // z = 5000 m: m = floor(5000·sqrt(150)/1000 − 1) = 60
        let env = urban_itu();
        let (z, htx, hrx) = (5000.0, 19.0, 10_000.0);
        let m = 60u32;
        let mut log_p = 0.0f64;
        for n in 0..=m {
            let h = htx - (n as f64 + 0.5) * (htx - hrx) / (m as f64 + 1.0);
            log_p += (1.0 - (-h * h / (2.0 * 15.0 * 15.0)).exp()).ln();
        }
        let v = itu_los_probability(z, htx, hrx, &env);
        assert!((v - log_p.exp()).abs() < 1e-14, "{v}");
        // frozen value: the first factor 1 − exp(−(19+81.8)²/450) dominates
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn itu_low_receiver() {
        // receiver below the rooftops: the product shrinks with distance
        let env = urban_itu();
        let near = itu_los_probability(3000.0, 19.0, 1.5, &env);
        let far = itu_los_probability(30_000.0, 19.0, 1.5, &env);
        assert!(near > far && far < 1e-6, "{near} {far}");
    }

    proptest! {
        #[test]
        fn itu_non_increasing(z in 0.0f64..50_000.0, dz in 0.0f64..5_000.0) {
            let env = urban_itu();
            let a = itu_los_probability(z, 19.0, 60.0, &env);
            let b = itu_los_probability(z + dz, 19.0, 60.0, &env);
            prop_assert!(b <= a + 1e-15);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn los_nlos_complement(z in 0.0f64..20_000.0) {
            let p = validate(&NetworkParams::default()).unwrap();
            prop_assert_eq!(los_probability_of_distance(z, &p) + nlos_probability_of_distance(z, &p), 1.0);
        }

        #[test]
        fn fitted_non_decreasing(t in 0.0f64..89.0, dt in 0.0f64..1.0) {
            for env in [Environment::urban(), Environment::highrise(), Environment::suburban()] {
                prop_assert!(fitted_los_probability(t + dt, &env) >= fitted_los_probability(t, &env));
            }
        }
    }

    #[test]
    fn fitted_examples() {
        let urban = Environment::urban();
        assert!((fitted_los_probability(10.0, &urban) - (1.0 - (-1.51f64).exp())).abs() < 1e-15);
        assert!((fitted_los_probability(10.0, &urban) - 0.77909).abs() < 1e-5);
        let flat = Environment { a: 0.0, ..Environment::urban() };
        assert_eq!(fitted_los_probability(3.0, &flat), 1.0);
        let sub = Environment::suburban();
        assert!((fitted_los_probability(2.0, &sub) - (1.0 - (-13.162f64).exp())).abs() < 1e-15);
        // highrise exceeds 1 before clamping
        assert_eq!(fitted_los_probability(90.0, &Environment::highrise()), 1.0);
        assert_eq!(fitted_los_probability(0.5, &Environment::highrise()), 0.0);
    }

    #[test]
    fn distance_limits() {
        let p = validate(&NetworkParams::default()).unwrap();
        let urban = Environment::urban();
        assert!((los_probability_of_distance(0.0, &p) - (1.0 - (-0.151f64 * 90.0).exp())).abs() < 1e-15);
        assert!(los_probability_of_distance(1e12, &p) < 1e-9);
        // h_UT = 30, z = 30 → 45°
        let v = los_probability_of_distance(30.0, &p);
        assert!((v - fitted_los_probability(45.0, &urban)).abs() < 1e-14);
        assert!((v - (1.0 - (-0.151f64 * 45.0).exp())).abs() < 1e-14);
    }

    #[test]
    fn radian_toggle() {
        let p = validate(&NetworkParams {
            angle_unit: AngleUnit::Radians,
            ..Default::default()
        })
        .unwrap();
        let v = los_probability_of_distance(30.0, &p);
        assert!((v - (1.0 - (-0.151 * std::f64::consts::FRAC_PI_4).exp())).abs() < 1e-14);
    }

    #[test]
    fn synthetic_fit_recovers_parameters() {
        let (a0, b0, c0) = (0.9, 0.12, 0.97);
        let samples: Vec<(f64, f64)> = fit_angle_grid()
            .into_iter()
            .map(|t| (t, c0 - a0 * (-b0 * t).exp()))
            .collect();
        let fit = fit_exponential_curve(&samples).unwrap();
        assert!((fit.a - a0).abs() < 1e-6 && (fit.b - b0).abs() < 1e-6 && (fit.c - c0).abs() < 1e-6, "{fit:?}");
        assert!(fit.rms < 1e-7);
    }

    #[test]
    fn urban_fit_is_close() {
        let fit = fit_los_parameters(&urban_itu(), 19.0).unwrap();
        assert!(fit.rms < 0.02, "{fit:?}");
        assert!((fit.b - 0.151).abs() < 0.0151, "{fit:?}");
    }

    #[test]
    fn sidelobe_only_gain() {
        let p = validate(&NetworkParams::default()).unwrap();
        for r in [0.0, 10.0, 1e4] {
            assert_eq!(terrestrial_gain(r, &p, TerrestrialGainMode::SidelobeOnly), p.g_s_t());
        }
        // tilt 10°, beamwidth 30°: user at 50 m is never in the mainlobe
        let mode = TerrestrialGainMode::Tilted { tilt_deg: 10.0, beamwidth_deg: 30.0 };
        for r in [0.0, 50.0, 500.0, 5000.0] {
            assert_eq!(terrestrial_gain(r, &p, mode), p.g_s_t());
        }
    }

    #[test]
    fn mainlobe_set_when_user_barely_above_bs() {
        // tilt 8°, beam 30°: needs r < h_U/tan 23° and r > (h_U − h_T)/tan 7°
        assert!(in_terrestrial_mainlobe(50.0, 25.0, 20.0, 8.0, 30.0));
        assert!(!in_terrestrial_mainlobe(50.0, 50.0, 20.0, 8.0, 30.0));
    }

    #[test]
    fn aerial_gain_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(sample_aerial_interferer_gain(1.0, 1.0, 0.01, &mut rng), 1.0);
        assert_eq!(sample_aerial_interferer_gain(0.0, 1.0, 0.01, &mut rng), 0.01);
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| sample_aerial_interferer_gain(0.1, 1.0, 0.01, &mut rng) == 1.0)
            .count();
        assert!((hits as f64 / n as f64 - 0.1).abs() < 0.001);
    }

    #[test]
    fn received_power_examples() {
        let p = validate(&NetworkParams {
            alpha_a: 2.0,
            eta_a_db: 0.0,
            ..Default::default()
        })
        .unwrap();
        assert!((received_power(TierLabel::A, 1.0, 1.0, 1.0, &p) - p.p_a()).abs() < 1e-15);
        let ratio = received_power(TierLabel::A, 10.0, 1.0, 1.0, &p) / received_power(TierLabel::A, 20.0, 1.0, 1.0, &p);
        assert!((ratio - 4.0).abs() < 1e-12);
        let d = validate(&NetworkParams::default()).unwrap();
        let v = received_power(TierLabel::L, 100.0, d.g_s_t(), 1.0, &d);
        let oracle = 10f64.powf(4.3 - 3.0) * 10f64.powf(-0.3 - 1.5) * 100f64.powf(-2.5);
        assert!((v / oracle - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nakagami_mean_within_three_se() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=4 {
            let n = 100_000;
            let mean = (0..n).map(|_| sample_nakagami_power(m, &mut rng)).sum::<f64>() / n as f64;
            let se = (1.0 / (m as f64 * n as f64)).sqrt();
            assert!((mean - 1.0).abs() < 3.0 * se);
        }
    }
}
