//! Tier association probabilities under the strongest-average-power rule.

use crate::config::{TierLabel, ValidatedParams};
use crate::distributions::{
    equal_power_distance, horizontal, intensity_tables, nearest_aerial_ccdf, nearest_aerial_pdf,
    nearest_terrestrial_ccdf, nearest_terrestrial_cdf, nearest_terrestrial_pdf_z, slant, zeta_a_l, zeta_l_a,
    zeta_n_a, zeta_n_l, LAMBDA_TRUNCATION,
};
use crate::error::{Error, Result};
use crate::numerics::quadrature::integrate_breaks;
use crate::numerics::special::{binomial, ln_incomplete_gamma_diff};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ABS_TOL: f64 = 1e-13;
const REL_TOL: f64 = 1e-10;
/// Largest drift of `A_L + A_A` above one that is treated as quadrature noise.
pub const DRIFT_TOLERANCE: f64 = 1e-6;

/// Probabilities of being served by each tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationProbs {
    pub a_l: f64,
    pub a_n: f64,
    pub a_a: f64,
}

impl AssociationProbs {
    pub fn get(&self, tier: TierLabel) -> f64 {
        match tier {
            TierLabel::L => self.a_l,
            TierLabel::N => self.a_n,
            TierLabel::A => self.a_a,
        }
    }
}

/// Upper horizontal distance for integrals against the LoS nearest-BS density.
fn los_z_end(params: &ValidatedParams) -> Option<f64> {
    intensity_tables(params).los.z_reaching(LAMBDA_TRUNCATION)
}

/// Serving LoS BS horizontal distances where the integrand has kinks.
fn los_kinks_z(params: &ValidatedParams) -> Vec<f64> {
    let h = params.h_ut();
    let t = intensity_tables(params);
    let mut out: Vec<f64> = t.los.kinks().to_vec();
    // NLoS kinks seen through τ_N(r)
    for &k in t.nlos.kinks() {
        let r = equal_power_distance(TierLabel::N, TierLabel::L, slant(k, h), params);
        out.push(horizontal(r, h));
    }
    out
}

fn breakpoints(lo: f64, hi: f64, inner: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut mid: Vec<f64> = inner.into_iter().filter(|&x| x > lo && x < hi).collect();
    mid.sort_by(f64::total_cmp);
    mid.dedup();
    pts.extend(mid);
    pts.push(hi);
    pts
}

/// P(the nearest LoS BS beats the nearest NLoS BS).
fn xi_n_l(params: &ValidatedParams) -> Result<f64> {
    let h = params.h_ut();
    let zeta = zeta_n_l(params);
    let start = zeta.max(h);
    let head = if h <= zeta {
        nearest_terrestrial_cdf(zeta, TierLabel::L, params)?
    } else {
        0.0
    };
    let z0 = horizontal(start, h);
    // beyond either truncation point the integrand is negligible
    let mut z1 = los_z_end(params).unwrap_or(f64::INFINITY);
    if let Some(zn) = intensity_tables(params).nlos.z_reaching(LAMBDA_TRUNCATION) {
        let r = equal_power_distance(TierLabel::N, TierLabel::L, slant(zn, h), params);
        z1 = z1.min(horizontal(r, h));
    }
    if !z1.is_finite() {
        z1 = horizontal(1e7, h);
    }
    if z1 <= z0 {
        return Ok(head);
    }
    let pts = breakpoints(z0, z1, los_kinks_z(params));
    let tail = integrate_breaks(
        |z| {
            let r = slant(z, h);
            let tau = equal_power_distance(TierLabel::L, TierLabel::N, r, params).max(h);
            nearest_terrestrial_ccdf(tau, TierLabel::N, params) * nearest_terrestrial_pdf_z(z, TierLabel::L, params)
        },
        &pts,
        ABS_TOL,
        REL_TOL,
    )?;
    Ok(head + tail.value)
}

/// P(the nearest LoS BS beats the nearest aerial BS).
fn xi_a_l(params: &ValidatedParams) -> Result<f64> {
    let (h, h_ua, d) = (params.h_ut(), params.h_ua(), params.d());
    let upper = zeta_a_l(d, params);
    if h >= upper {
        return Ok(0.0);
    }
    let zeta = h.max(zeta_a_l(h_ua, params));
    let head = nearest_terrestrial_cdf(zeta, TierLabel::L, params)?;
    let z0 = horizontal(zeta, h);
    let mut z1 = horizontal(upper, h);
    if let Some(zl) = los_z_end(params) {
        z1 = z1.min(zl);
    }
    if z1 <= z0 {
        return Ok(head);
    }
    let pts = breakpoints(z0, z1, intensity_tables(params).los.kinks().iter().copied());
    let tail = integrate_breaks(
        |z| {
            let r = slant(z, h);
            let tau = equal_power_distance(TierLabel::L, TierLabel::A, r, params);
            nearest_aerial_ccdf(tau, params) * nearest_terrestrial_pdf_z(z, TierLabel::L, params)
        },
        &pts,
        ABS_TOL,
        REL_TOL,
    )?;
    Ok(head + tail.value)
}

/// P(the nearest aerial BS beats the nearest BS of terrestrial tier `other`),
/// with `ζ` the aerial distance matching a tier-`other` BS at `h_UT`.
fn xi_terrestrial_a(other: TierLabel, zeta: f64, params: &ValidatedParams) -> Result<f64> {
    let (h, h_ua, d) = (params.h_ut(), params.h_ua(), params.d());
    if zeta >= d {
        return Ok(1.0);
    }
    let start = zeta.max(h_ua);
    let head = if zeta <= h_ua { 0.0 } else { 1.0 - nearest_aerial_ccdf(zeta, params) };
    let kinks = intensity_tables(params)
        .get(other)
        .kinks()
        .iter()
        .map(|&k| equal_power_distance(other, TierLabel::A, slant(k, h), params));
    let pts = breakpoints(start, d, kinks);
    let tail = integrate_breaks(
        |r| {
            let tau = equal_power_distance(TierLabel::A, other, r, params).max(h);
            nearest_terrestrial_ccdf(tau, other, params) * nearest_aerial_pdf(r, params)
        },
        &pts,
        ABS_TOL,
        REL_TOL,
    )?;
    Ok(head + tail.value)
}

/// `A_L = Ξ_N^L · Ξ_A^L`.
pub fn assoc_prob_los(params: &ValidatedParams) -> Result<f64> {
    if params.lambda_t() == 0.0 {
        return Ok(0.0);
    }
    let xa = xi_a_l(params)?;
    if xa == 0.0 {
        return Ok(0.0);
    }
    Ok((xi_n_l(params)? * xa).clamp(0.0, 1.0))
}

/// `A_A = Ξ_N^A · Ξ_L^A`.
pub fn assoc_prob_aerial(params: &ValidatedParams) -> Result<f64> {
    let xn = xi_terrestrial_a(TierLabel::N, zeta_n_a(params), params)?;
    let xl = xi_terrestrial_a(TierLabel::L, zeta_l_a(params), params)?;
    Ok((xn * xl).clamp(0.0, 1.0))
}

/// All three probabilities, with `A_N` as the complement.
pub fn assoc_probs(params: &ValidatedParams) -> Result<AssociationProbs> {
    let a_l = assoc_prob_los(params)?;
    let a_a = assoc_prob_aerial(params)?;
    let a_n = 1.0 - a_l - a_a;
    if a_n >= 0.0 {
        return Ok(AssociationProbs { a_l, a_n, a_a });
    }
    if -a_n < DRIFT_TOLERANCE {
        let s = a_l + a_a;
        return Ok(AssociationProbs {
            a_l: a_l / s,
            a_n: 0.0,
            a_a: a_a / s,
        });
    }
    Err(Error::Inconsistent(format!(
        "A_L + A_A = {} exceeds one by more than {DRIFT_TOLERANCE}",
        a_l + a_a
    )))
}

/// Closed form of `A_L` when every terrestrial link is LoS, so the terrestrial
/// layer is a plain PPP and only the aerial tier competes. The configured LoS
/// model is ignored.
pub fn assoc_prob_los_simplified(params: &ValidatedParams) -> f64 {
    let (h, h_ua, d, rd) = (params.h_ut(), params.h_ua(), params.d(), params.r_d());
    let lam = PI * params.lambda_t();
    if lam == 0.0 {
        return 0.0;
    }
    let upper = zeta_a_l(d, params);
    if h >= upper {
        return 0.0;
    }
    let zeta = h.max(zeta_a_l(h_ua, params));
    let head = -(-lam * (zeta * zeta - h * h)).exp_m1();
    let (al, aa) = (params.alpha(TierLabel::L), params.alpha(TierLabel::A));
    let ratio = params.mu(TierLabel::A) / params.mu(TierLabel::L);
    let n = params.n();
    let (x1, x2) = (lam * zeta * zeta, lam * upper * upper);
    let mut sum = 0.0;
    for i in 0..=n {
        let k = i as f64 * al / aa;
        // ln of d^{2(N−i)} (μ_A/μ_L)^{2i/α_A} (πλ)^{−k} [Γ(k+1, x1) − Γ(k+1, x2)] e^{πλh²} / r_D^{2N}
        let ln_term = 2.0 * (n - i) as f64 * d.ln() + 2.0 * i as f64 / aa * ratio.ln() - k * lam.ln()
            + ln_incomplete_gamma_diff(k + 1.0, x1, x2)
            + lam * h * h
            - 2.0 * n as f64 * rd.ln();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial(n, i) * ln_term.exp();
    }
    (head + sum).clamp(0.0, 1.0)
}
