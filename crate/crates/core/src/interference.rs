//! Laplace transforms of the aggregate interference seen by a user served by
//! a given tier at a given distance.
//!
//! Terrestrial interferers use the sidelobe gain `g_s_T`; aerial interferers
//! use their mainlobe with probability `q_A` and the sidelobe otherwise.

use crate::config::{SpectrumPolicy, TierLabel, ValidatedParams};
use crate::distributions::{exclusion_radii, horizontal, intensity_tables, ExclusionRadii};
use crate::error::{Error, Result};
use crate::numerics::hypergeometric::{meijer_g_12_22, meijer_g_21_22};
use crate::numerics::quadrature::integrate_breaks;
use crate::numerics::special::gamma;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ABS_TOL: f64 = 1e-14;
const REL_TOL: f64 = 1e-11;

/// Arguments of a conditional Laplace transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEvalRequest {
    /// Transform variable, per watt.
    pub s: f64,
    pub serving_tier: TierLabel,
    /// Serving distance in meters.
    pub r: f64,
    pub policy: SpectrumPolicy,
}

impl LaplaceEvalRequest {
    pub fn new(s: f64, serving_tier: TierLabel, r: f64, policy: SpectrumPolicy) -> Self {
        LaplaceEvalRequest {
            s,
            serving_tier,
            r,
            policy,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.s >= 0.0 && self.s.is_finite()) {
            return Err(Error::Domain {
                what: "laplace",
                detail: format!("transform variable must be finite and non-negative, got {}", self.s),
            });
        }
        Ok(())
    }

    fn radii(&self, params: &ValidatedParams) -> Result<ExclusionRadii> {
        self.check()?;
        exclusion_radii(self.serving_tier, self.r, params)
    }
}

/// `1 − (m/(m + x))^m` without cancellation for small `x`.
fn kappa(m: f64, x: f64) -> f64 {
    -(-m * (x / m).ln_1p()).exp_m1()
}

/// `2πλ ∫ κ(t) t P_ω dt` over terrestrial interferers of tier `tier` beyond
/// the 3-D distance `tau`, computed in the horizontal distance.
pub fn terrestrial_exponent(tier: TierLabel, tau: f64, s: f64, params: &ValidatedParams) -> Result<f64> {
    if params.lambda_t() == 0.0 || s == 0.0 {
        return Ok(0.0);
    }
    let table = intensity_tables(params).get(tier);
    let h = params.h_ut();
    let (alpha, m) = (params.alpha(tier), params.m(tier) as f64);
    let smu = s * params.mu(tier);
    let integrand = |z: f64| {
        let t2 = z * z + h * h;
        kappa(m, smu * t2.powf(-alpha / 2.0)) * table.intensity(z)
    };

    let z0 = horizontal(tau, h);
    // past z1 the substitution z = z1·u^{−1/(α−2)} turns the t^{1−α} tail
    // into a bounded integrand on (0, 1]
    let z1 = z0.max(4.0 * h).max(100.0).max(smu.powf(1.0 / alpha));
    let mut head = 0.0;
    if z1 > z0 {
        let mut pts = vec![z0];
        pts.extend(table.kinks().iter().copied().filter(|&k| k > z0 && k < z1));
        pts.push(z1);
        head = integrate_breaks(integrand, &pts, ABS_TOL, REL_TOL)?.value;
    }
    let p = 1.0 / (alpha - 2.0);
    let mut pts = vec![0.0];
    let mut inner: Vec<f64> = table
        .kinks()
        .iter()
        .filter(|&&k| k > z1)
        .map(|&k| (z1 / k).powf(alpha - 2.0))
        .collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(1.0);
    let tail = integrate_breaks(
        |u| {
            if u <= 0.0 {
                return 0.0;
            }
            let z = z1 * u.powf(-p);
            let v = integrand(z) * z1 * p * u.powf(-p - 1.0);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        &pts,
        ABS_TOL,
        REL_TOL,
    )?;
    Ok(head + tail.value)
}

/// Laplace transform of the terrestrial interference (LoS and NLoS tiers).
pub fn laplace_terrestrial(req: &LaplaceEvalRequest, params: &ValidatedParams) -> Result<f64> {
    let tau = req.radii(params)?;
    let e = terrestrial_exponent(TierLabel::L, tau.tau_l, req.s, params)?
        + terrestrial_exponent(TierLabel::N, tau.tau_n, req.s, params)?;
    Ok((-e).exp())
}

/// Closed form of the terrestrial Laplace transform when every terrestrial
/// BS is LoS: a finite sum of Meijer-G terms, one per fading order.
pub fn laplace_terrestrial_los_only(req: &LaplaceEvalRequest, params: &ValidatedParams) -> Result<f64> {
    let tau = req.radii(params)?.tau_l;
    if params.lambda_t() == 0.0 || req.s == 0.0 {
        return Ok(1.0);
    }
    let alpha = params.alpha(TierLabel::L);
    let m = params.m(TierLabel::L);
    let u0 = m as f64 * tau.powf(alpha) / (req.s * params.mu(TierLabel::L));
    let mut sum = 0.0;
    for i in 0..m {
        let (fi, fm) = (i as f64, m as f64);
        let g = meijer_g_21_22(
            u0,
            1.0 + fi - fm,
            2.0 + fi - fm - 2.0 / alpha,
            1.0 + fi - fm - 2.0 / alpha,
            0.0,
        )?;
        sum += u0.powf(fm - fi - 1.0) * tau * tau / (alpha * gamma(fm - fi)) * g;
    }
    Ok((-2.0 * PI * params.lambda_t() * sum).exp())
}

/// `1 − J_g`: mean of `κ` over one interfering aerial BS with gain `g`,
/// uniform in area between the 3-D distances `tau` and `d`.
fn aerial_kappa_integral(g: f64, tau: f64, s: f64, params: &ValidatedParams) -> Result<f64> {
    let d = params.d();
    let alpha = params.alpha(TierLabel::A);
    let m = params.m(TierLabel::A) as f64;
    let c = s * params.p_a() * g * params.eta(TierLabel::A);
    let norm = (d - tau) * (d + tau);
    let v = integrate_breaks(
        |t| kappa(m, c * t.powf(-alpha)) * 2.0 * t,
        &[tau, d],
        ABS_TOL,
        REL_TOL,
    )?;
    Ok(v.value / norm)
}

/// Combines the two per-gain averages `1 − J_G`, `1 − J_g` over `N′` interferers:
/// `Σ_i C(N′,i) q^{N′−i}(1−q)^i J_G^{N′−i} J_g^i = (q J_G + (1−q) J_g)^{N′}`.
fn combine_aerial(k_main: f64, k_side: f64, q: f64, n_prime: u32) -> f64 {
    let mix = q * k_main + (1.0 - q) * k_side;
    (n_prime as f64 * (-mix).ln_1p()).exp()
}

/// Laplace transform of the aerial interference, per-gain averages by quadrature.
pub fn laplace_aerial_integral(req: &LaplaceEvalRequest, params: &ValidatedParams) -> Result<f64> {
    let tau = req.radii(params)?;
    if tau.n_prime == 0 || tau.tau_a >= params.d() || req.s == 0.0 {
        return Ok(1.0);
    }
    let k_main = aerial_kappa_integral(params.g_m_a(), tau.tau_a, req.s, params)?;
    let k_side = aerial_kappa_integral(params.g_s_a(), tau.tau_a, req.s, params)?;
    Ok(combine_aerial(k_main, k_side, params.q_a(), tau.n_prime))
}

/// `Ω(x, g)`, the antiderivative (up to the constant prefactor) of
/// `(m t^α/(m t^α + sPgη))^m · 2t`.
fn omega(x: f64, g: f64, s: f64, params: &ValidatedParams) -> Result<f64> {
    let alpha = params.alpha(TierLabel::A);
    let m = params.m(TierLabel::A) as f64;
    let spe = s * params.p_a() * params.eta(TierLabel::A);
    let z = m * x.powf(alpha) / (spe * g);
    let gv = meijer_g_12_22(z, 1.0 - m - 2.0 / alpha, 1.0 - m, 0.0, -m - 2.0 / alpha)?;
    Ok(x.powf(alpha * m + 2.0) / g.powf(m) * gv)
}

fn aerial_j_meijer(g: f64, tau: f64, s: f64, params: &ValidatedParams) -> Result<f64> {
    let d = params.d();
    let alpha = params.alpha(TierLabel::A);
    let m = params.m(TierLabel::A) as f64;
    let spe = s * params.p_a() * params.eta(TierLabel::A);
    let k = 2.0 * m.powf(m) * spe.powf(-m) / (alpha * gamma(m) * (d - tau) * (d + tau));
    Ok(k * (omega(d, g, s, params)? - omega(tau, g, s, params)?))
}

/// Laplace transform of the aerial interference through the Meijer-G
/// antiderivative; falls back to quadrature if the special function fails.
pub fn laplace_aerial_meijerg(req: &LaplaceEvalRequest, params: &ValidatedParams) -> Result<f64> {
    let tau = req.radii(params)?;
    if tau.n_prime == 0 || tau.tau_a >= params.d() || req.s == 0.0 {
        return Ok(1.0);
    }
    let closed = aerial_j_meijer(params.g_m_a(), tau.tau_a, req.s, params).and_then(|jm| {
        let js = aerial_j_meijer(params.g_s_a(), tau.tau_a, req.s, params)?;
        Ok((jm, js))
    });
    match closed {
        Ok((jm, js)) if jm.is_finite() && js.is_finite() => {
            Ok(combine_aerial(1.0 - jm, 1.0 - js, params.q_a(), tau.n_prime))
        }
        other => {
            log::info!(
                "Meijer-G aerial Laplace unavailable at s = {}, r = {} ({:?}); using quadrature",
                req.s,
                req.r,
                other.err()
            );
            laplace_aerial_integral(req, params)
        }
    }
}

/// Laplace transform of interference plus noise, `e^{−σ²s}·L_I(s)`, with the
/// interfering tiers chosen by the spectrum policy.
pub fn laplace_total(req: &LaplaceEvalRequest, params: &ValidatedParams) -> Result<f64> {
    req.check()?;
    let noise = (-params.sigma2() * req.s).exp();
    let (terrestrial, aerial) = match (req.policy, req.serving_tier) {
        (SpectrumPolicy::Noss, _) => (true, true),
        (SpectrumPolicy::Oss, TierLabel::A) => (false, true),
        (SpectrumPolicy::Oss, _) => (true, false),
    };
    let mut v = noise;
    if terrestrial {
        v *= laplace_terrestrial(req, params)?;
    }
    if aerial {
        v *= laplace_aerial_integral(req, params)?;
    }
    Ok(v)
}
