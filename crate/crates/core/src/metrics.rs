//! Coverage probability and average achievable rate.
//!
//! The exact path expands the Gamma CCDF of the serving fading into
//! derivatives of the Laplace transform of interference plus noise; the
//! approximate path replaces that CCDF by its Alzer-type bound, which only
//! needs Laplace values.

use crate::association::{assoc_probs, AssociationProbs};
use crate::config::{TierLabel, ValidatedParams};
use crate::distributions::ServingDensity;
use crate::error::{Error, Result};
use crate::interference::{laplace_total, LaplaceEvalRequest};
use crate::numerics::derivative::richardson_derivative;
use crate::numerics::quadrature::integrate_adaptive;
use crate::numerics::special::{binomial, factorial};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::LN_2;

/// Largest fading order accepted by the exact path.
pub const MAX_EXACT_M: u32 = 4;
/// Relative accuracy requested from the derivative engine.
pub const DERIVATIVE_TARGET: f64 = 1e-8;
/// Tolerances of the outer integral over the serving distance.
pub const OUTER_ABS_TOL: f64 = 1e-9;
pub const OUTER_REL_TOL: f64 = 1e-7;
/// Coverage level below which the rate integrand is cut off.
pub const RATE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    #[default]
    Approx,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Approx => "approx",
        })
    }
}

/// Association probability and conditional metric of one tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierMetric {
    pub tier: TierLabel,
    pub association: f64,
    pub conditional: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub total: f64,
    pub per_tier: [TierMetric; 3],
    pub threshold: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    /// bits/s/Hz
    pub total: f64,
    pub per_tier: [TierMetric; 3],
    pub method: Method,
}

fn request(tier: TierLabel, r: f64, s: f64, params: &ValidatedParams) -> LaplaceEvalRequest {
    LaplaceEvalRequest::new(s, tier, r, params.policy())
}

/// k-th derivative in `s` of the Laplace transform of interference plus noise.
pub fn laplace_kth_derivative(s: f64, k: u32, req: &LaplaceEvalRequest, params: &ValidatedParams) -> Result<f64> {
    if k == 0 {
        return laplace_total(&LaplaceEvalRequest { s, ..*req }, params);
    }
    let est = richardson_derivative(
        |x| laplace_total(&LaplaceEvalRequest { s: x, ..*req }, params),
        s,
        k,
        DERIVATIVE_TARGET,
    )?;
    Ok(est.value)
}

/// `s` at which the serving fading is probed: `m T r^α / μ`.
fn probe(tier: TierLabel, threshold: f64, r: f64, params: &ValidatedParams) -> f64 {
    params.m(tier) as f64 * threshold * r.powf(params.alpha(tier)) / params.mu(tier)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "coverage",
            detail: format!("threshold must be positive and finite, got {threshold}"),
        })
    }
}

/// P(SINR ≥ T) for a user served by `tier` at distance `r`, exact path.
pub fn coverage_given_distance_exact(tier: TierLabel, threshold: f64, r: f64, params: &ValidatedParams) -> Result<f64> {
    let m = params.m(tier);
    if m > MAX_EXACT_M {
        return Err(Error::Domain {
            what: "exact coverage",
            detail: format!("fading order {m} of tier {tier} exceeds {MAX_EXACT_M}; use the approximate method"),
        });
    }
    let s = probe(tier, threshold, r, params);
    let req = request(tier, r, s, params);
    let mut sum = 0.0;
    for k in 0..m {
        let dk = laplace_kth_derivative(s, k, &req, params)?;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * s.powi(k as i32) / factorial(k) * dk;
    }
    Ok(sum)
}

/// Alzer-bound counterpart of [`coverage_given_distance_exact`].
pub fn coverage_given_distance_approx(tier: TierLabel, threshold: f64, r: f64, params: &ValidatedParams) -> Result<f64> {
    let m = params.m(tier);
    let mf = m as f64;
    let rho = mf * factorial(m).powf(-1.0 / mf);
    // kρT r^α/μ = (kρ/m)·s
    let s = probe(tier, threshold, r, params) / mf;
    let mut sum = 0.0;
    for k in 1..=m {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let l = laplace_total(&request(tier, r, k as f64 * rho * s, params), params)?;
        sum += sign * binomial(m, k) * l;
    }
    Ok(sum)
}

fn coverage_given_distance(
    tier: TierLabel,
    threshold: f64,
    r: f64,
    params: &ValidatedParams,
    method: Method,
) -> Result<f64> {
    match method {
        Method::Exact => coverage_given_distance_exact(tier, threshold, r, params),
        Method::Approx => coverage_given_distance_approx(tier, threshold, r, params),
    }
}

/// Integrates a fallible function of the serving distance against the
/// conditional serving-distance density, keeping the first error.
fn integrate_over_serving<F: Fn(f64) -> Result<f64>>(dens: &ServingDensity<'_>, g: F) -> Result<f64> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let v = dens.integrate_with(
        |r| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match g(r) {
                Ok(v) => v,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    0.0
                }
            }
        },
        OUTER_ABS_TOL,
        OUTER_REL_TOL,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    v
}

fn conditional_coverage(tier: TierLabel, threshold: f64, params: &ValidatedParams, method: Method) -> Result<f64> {
    check_threshold(threshold)?;
    let dens = ServingDensity::new(tier, params)?;
    if dens.mass() <= 0.0 {
        return Ok(0.0);
    }
    let v = integrate_over_serving(&dens, |r| coverage_given_distance(tier, threshold, r, params, method))?;
    Ok(v.clamp(0.0, 1.0))
}

/// Coverage conditioned on being served by `tier` (0 for a tier that never serves).
pub fn conditional_coverage_exact(tier: TierLabel, threshold: f64, params: &ValidatedParams) -> Result<f64> {
    conditional_coverage(tier, threshold, params, Method::Exact)
}

pub fn conditional_coverage_approx(tier: TierLabel, threshold: f64, params: &ValidatedParams) -> Result<f64> {
    conditional_coverage(tier, threshold, params, Method::Approx)
}

fn combine(assoc: &AssociationProbs, conditional: [f64; 3]) -> ([TierMetric; 3], f64) {
    let per_tier = TierLabel::ALL.map(|t| TierMetric {
        tier: t,
        association: assoc.get(t),
        conditional: conditional[t.index()],
    });
    let total = per_tier.iter().map(|m| m.association * m.conditional).sum();
    (per_tier, total)
}

/// Total coverage `Σ A_ν C_ν` at linear threshold `T`.
pub fn coverage(threshold: f64, params: &ValidatedParams, method: Method) -> Result<CoverageResult> {
    check_threshold(threshold)?;
    let assoc = assoc_probs(params)?;
    let mut cond = [0.0; 3];
    for t in TierLabel::ALL {
        if assoc.get(t) > 0.0 {
            cond[t.index()] = conditional_coverage(t, threshold, params, method)?;
        }
    }
    let (per_tier, total) = combine(&assoc, cond);
    Ok(CoverageResult {
        total: total.clamp(0.0, 1.0),
        per_tier,
        threshold,
        method,
    })
}

/// Upper limit in `t` where the coverage at threshold `e^t − 1` falls below
/// [`RATE_CUTOFF`], found by bisection.
fn rate_upper_limit<F: Fn(f64) -> Result<f64>>(cov: &F) -> Result<f64> {
    let mut hi = 1.0;
    while cov(hi)? >= RATE_CUTOFF {
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::Convergence {
                what: "rate integral",
                detail: "coverage does not decay with the threshold".into(),
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if cov(mid)? >= RATE_CUTOFF {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-3 {
            break;
        }
    }
    Ok(hi)
}

/// `∫_0^∞ P(SINR ≥ e^t − 1 | r) dt / ln 2` for one serving distance.
fn rate_given_distance(tier: TierLabel, r: f64, params: &ValidatedParams, method: Method) -> Result<f64> {
    let cov = |t: f64| -> Result<f64> {
        let threshold = t.exp_m1();
        if threshold <= 0.0 {
            return Ok(1.0);
        }
        coverage_given_distance(tier, threshold, r, params, method)
    };
    let t_max = rate_upper_limit(&cov)?;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let v = integrate_adaptive(
        |t| match cov(t) {
            Ok(v) => v.clamp(0.0, 1.0),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        t_max,
        1e-9,
        1e-7,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(v?.value / LN_2)
}

fn conditional_rate(tier: TierLabel, params: &ValidatedParams, method: Method) -> Result<f64> {
    if !(params.sigma2() > 0.0) {
        return Err(Error::Domain {
            what: "rate",
            detail: "noise power must be positive for the rate integral to converge".into(),
        });
    }
    let dens = ServingDensity::new(tier, params)?;
    if dens.mass() <= 0.0 {
        return Ok(0.0);
    }
    integrate_over_serving(&dens, |r| rate_given_distance(tier, r, params, method))
}

/// Average rate conditioned on being served by `tier`, bits/s/Hz.
pub fn conditional_rate_exact(tier: TierLabel, params: &ValidatedParams) -> Result<f64> {
    conditional_rate(tier, params, Method::Exact)
}

pub fn conditional_rate_approx(tier: TierLabel, params: &ValidatedParams) -> Result<f64> {
    conditional_rate(tier, params, Method::Approx)
}

/// Average achievable rate `Σ A_ν R_ν`.
pub fn rate(params: &ValidatedParams, method: Method) -> Result<RateResult> {
    let assoc = assoc_probs(params)?;
    let mut cond = [0.0; 3];
    for t in TierLabel::ALL {
        if assoc.get(t) > 0.0 {
            cond[t.index()] = conditional_rate(t, params, method)?;
        }
    }
    let (per_tier, total) = combine(&assoc, cond);
    Ok(RateResult {
        total,
        per_tier,
        method,
    })
}
