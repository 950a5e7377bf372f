//! Distance laws: nearest BS of each tier, exclusion radii of interferers,
//! serving-distance densities and the interfering aerial distance density.
//!
//! Terrestrial laws are built on the cumulative intensity
//! `Λ_ν(z) = 2πλ ∫_0^z x·P_ν(x) dx` of the thinned PPP, where `z` is the
//! horizontal distance. Since `r dr = z dz` every terrestrial integral over
//! the 3-D distance is done in `z`, which avoids the square-root singularity
//! at `r = h_UT`.

use crate::channel::los_probability_parts;
use crate::config::{AngleUnit, Environment, LosModel, TierLabel, ValidatedParams};
use crate::error::{Error, Result};
use crate::numerics::quadrature::{gauss_legendre, integrate_breaks};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Λ above which a complementary CDF `e^{−Λ}` is treated as zero.
pub const LAMBDA_TRUNCATION: f64 = 40.0;
const CELLS_PER_DECADE: f64 = 64.0;
const Z_CAP: f64 = 1e7;

const QUAD_REL: f64 = 1e-11;

fn gl10() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(10))
}

/// Cumulative intensity of one thinned terrestrial tier, tabulated on a
/// geometric grid and completed exactly inside each cell.
#[derive(Debug, Clone)]
pub struct IntensityTable {
    tier: TierLabel,
    two_pi_lambda: f64,
    h_ut: f64,
    model: LosModel,
    env: Environment,
    unit: AngleUnit,
    nodes: Vec<f64>,
    cum: Vec<f64>,
    p_inf: f64,
    kinks: Vec<f64>,
}

impl IntensityTable {
    fn new(tier: TierLabel, params: &ValidatedParams) -> Self {
        let mut t = IntensityTable {
            tier,
            two_pi_lambda: 2.0 * PI * params.lambda_t(),
            h_ut: params.h_ut(),
            model: params.los_model(),
            env: params.environment().clone(),
            unit: params.angle_unit(),
            nodes: vec![0.0],
            cum: vec![0.0],
            p_inf: 0.0,
            kinks: Vec::new(),
        };
        t.p_inf = match t.model {
            LosModel::AlwaysLos => 1.0,
            LosModel::Constant(p) => p,
            LosModel::Fitted => (t.env.c - t.env.a).clamp(0.0, 1.0),
        };
        if tier == TierLabel::N {
            t.p_inf = 1.0 - t.p_inf;
        }
        t.kinks = clamp_kinks(&t.env, t.model, t.unit, t.h_ut);
        if t.two_pi_lambda > 0.0 {
            t.build();
        }
        t
    }

    /// LoS or NLoS probability (per this table's tier) at horizontal distance `z`.
    pub fn probability(&self, z: f64) -> f64 {
        let pl = los_probability_parts(z, self.h_ut, self.model, &self.env, self.unit);
        match self.tier {
            TierLabel::N => 1.0 - pl,
            _ => pl,
        }
    }

    /// Intensity density `2πλ·z·P(z)` in the horizontal distance.
    pub fn intensity(&self, z: f64) -> f64 {
        self.two_pi_lambda * z * self.probability(z)
    }

    fn cell(&self, a: f64, b: f64) -> f64 {
        let (x, w) = gl10();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        x.iter().zip(w).map(|(xi, wi)| wi * self.intensity(mid + half * xi)).sum::<f64>() * half
    }

    fn build(&mut self) {
        let z_min = 1e-3 * self.h_ut.max(1.0);
        let ratio = 10f64.powf(1.0 / CELLS_PER_DECADE);
        let mut kinks = self.kinks.iter().copied().filter(|&k| k > z_min).peekable();
        let mut z = 0.0;
        let mut next = z_min;
        let mut total = 0.0;
        loop {
            // never step across a kink of P
            let mut b = next;
            if let Some(&k) = kinks.peek() {
                if k <= b {
                    b = k;
                    kinks.next();
                }
            }
            total += self.cell(z, b);
            self.nodes.push(b);
            self.cum.push(total);
            z = b;
            if b >= next {
                next *= ratio;
            }
            if total >= LAMBDA_TRUNCATION + 5.0 || z >= Z_CAP {
                break;
            }
        }
    }

    /// `Λ(z)`.
    pub fn cumulative(&self, z: f64) -> f64 {
        if z <= 0.0 || self.two_pi_lambda == 0.0 {
            return 0.0;
        }
        let last = *self.nodes.last().unwrap();
        if z >= last {
            let p = if last >= Z_CAP { self.p_inf } else { self.probability(last) };
            return self.cum[self.cum.len() - 1] + 0.5 * self.two_pi_lambda * p * (z * z - last * last);
        }
        let k = self.nodes.partition_point(|&n| n <= z) - 1;
        self.cum[k] + self.cell(self.nodes[k], z)
    }

    /// A horizontal distance beyond which `Λ ≥ target`, or `None` if the
    /// intensity saturates below it.
    pub fn z_reaching(&self, target: f64) -> Option<f64> {
        if target <= 0.0 {
            return Some(0.0);
        }
        if self.two_pi_lambda == 0.0 {
            return None;
        }
        let k = self.cum.partition_point(|&c| c < target);
        if k < self.cum.len() {
            return Some(self.nodes[k]);
        }
        let last = *self.nodes.last().unwrap();
        let p = if last >= Z_CAP { self.p_inf } else { self.probability(last) };
        if p <= 0.0 {
            return None;
        }
        let extra = target - self.cum[self.cum.len() - 1];
        Some((last * last + 2.0 * extra / (self.two_pi_lambda * p)).sqrt())
    }

    /// Horizontal distances where `P` has a kink (clamping of the fitted curve).
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }
}

/// Horizontal distances where `c − a·e^{−bθ}` hits 0 or 1.
fn clamp_kinks(env: &Environment, model: LosModel, unit: AngleUnit, h_ut: f64) -> Vec<f64> {
    if model != LosModel::Fitted || env.a <= 0.0 || env.b <= 0.0 {
        return Vec::new();
    }
    let right_angle = match unit {
        AngleUnit::Degrees => 90.0,
        AngleUnit::Radians => std::f64::consts::FRAC_PI_2,
    };
    let mut out = Vec::new();
    // P = 0 at θ0, P = 1 at θ1
    let mut thetas = Vec::new();
    if env.c > 0.0 && env.a > env.c {
        thetas.push((env.a / env.c).ln() / env.b);
    }
    if env.c > 1.0 && env.a > env.c - 1.0 {
        thetas.push((env.a / (env.c - 1.0)).ln() / env.b);
    }
    for th in thetas {
        if th > 0.0 && th < right_angle {
            let rad = match unit {
                AngleUnit::Degrees => th.to_radians(),
                AngleUnit::Radians => th,
            };
            out.push(h_ut / rad.tan());
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Both terrestrial intensity tables for one parameter set.
#[derive(Debug, Clone)]
pub struct IntensityTables {
    pub los: IntensityTable,
    pub nlos: IntensityTable,
}

impl IntensityTables {
    pub fn get(&self, tier: TierLabel) -> &IntensityTable {
        match tier {
            TierLabel::L => &self.los,
            TierLabel::N => &self.nlos,
            TierLabel::A => panic!("no intensity table for the aerial tier"),
        }
    }
}

/// Shared intensity tables, built on first use.
pub fn intensity_tables(params: &ValidatedParams) -> &IntensityTables {
    params.intensity.get_or_init(|| IntensityTables {
        los: IntensityTable::new(TierLabel::L, params),
        nlos: IntensityTable::new(TierLabel::N, params),
    })
}

fn terrestrial_only(tier: TierLabel) -> Result<()> {
    if tier.is_terrestrial() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "nearest_terrestrial",
            detail: "tier must be L or N".into(),
        })
    }
}

/// Horizontal distance of a terrestrial BS at 3-D distance `r`.
pub fn horizontal(r: f64, h_ut: f64) -> f64 {
    if r <= h_ut {
        0.0
    } else {
        ((r - h_ut) * (r + h_ut)).sqrt()
    }
}

/// 3-D distance of a terrestrial BS at horizontal distance `z`.
pub fn slant(z: f64, h_ut: f64) -> f64 {
    z.hypot(h_ut)
}

/// CDF of the distance to the nearest BS of a terrestrial tier.
pub fn nearest_terrestrial_cdf(r: f64, tier: TierLabel, params: &ValidatedParams) -> Result<f64> {
    terrestrial_only(tier)?;
    if r <= params.h_ut() {
        return Ok(0.0);
    }
    let lam = intensity_tables(params).get(tier).cumulative(horizontal(r, params.h_ut()));
    Ok(-(-lam).exp_m1())
}

/// Complementary CDF `e^{−Λ}` of the nearest terrestrial distance; 1 below `h_UT`.
pub fn nearest_terrestrial_ccdf(r: f64, tier: TierLabel, params: &ValidatedParams) -> f64 {
    if r <= params.h_ut() {
        return 1.0;
    }
    (-intensity_tables(params).get(tier).cumulative(horizontal(r, params.h_ut()))).exp()
}

/// PDF of the distance to the nearest BS of a terrestrial tier.
pub fn nearest_terrestrial_pdf(r: f64, tier: TierLabel, params: &ValidatedParams) -> Result<f64> {
    terrestrial_only(tier)?;
    if r < params.h_ut() {
        return Ok(0.0);
    }
    let table = intensity_tables(params).get(tier);
    let z = horizontal(r, params.h_ut());
    Ok(table.two_pi_lambda * r * table.probability(z) * (-table.cumulative(z)).exp())
}

/// Density of the nearest terrestrial BS in the horizontal distance `z`
/// (the same law as [`nearest_terrestrial_pdf`] after `r dr = z dz`).
pub fn nearest_terrestrial_pdf_z(z: f64, tier: TierLabel, params: &ValidatedParams) -> f64 {
    let table = intensity_tables(params).get(tier);
    table.intensity(z) * (-table.cumulative(z)).exp()
}

/// PDF of the distance to the nearest aerial BS.
pub fn nearest_aerial_pdf(r: f64, params: &ValidatedParams) -> f64 {
    let (h, d, rd) = (params.h_ua(), params.d(), params.r_d());
    if r < h || r > d {
        return 0.0;
    }
    let n = params.n() as i32;
    let base = ((d - r) * (d + r) / (rd * rd)).max(0.0);
    n as f64 * (2.0 * r / (rd * rd)) * base.powi(n - 1)
}

/// CDF of the distance to the nearest aerial BS.
pub fn nearest_aerial_cdf(r: f64, params: &ValidatedParams) -> f64 {
    1.0 - nearest_aerial_ccdf(r, params)
}

/// `((d² − r²)/r_D²)^N` on `[h_UA, d]`.
pub fn nearest_aerial_ccdf(r: f64, params: &ValidatedParams) -> f64 {
    let (h, d, rd) = (params.h_ua(), params.d(), params.r_d());
    if r <= h {
        1.0
    } else if r >= d {
        0.0
    } else {
        ((d - r) * (d + r) / (rd * rd)).powi(params.n() as i32)
    }
}

/// Distance at which a BS of tier `to` matches the average power of a BS of
/// tier `from` at distance `x`: `(μ_to·x^{α_from}/μ_from)^{1/α_to}`.
pub fn equal_power_distance(from: TierLabel, to: TierLabel, x: f64, params: &ValidatedParams) -> f64 {
    (params.mu(to) * x.powf(params.alpha(from)) / params.mu(from)).powf(1.0 / params.alpha(to))
}

/// ζ_N^L: LoS distance at which the nearest possible NLoS BS (at `h_UT`) matches it.
pub fn zeta_n_l(params: &ValidatedParams) -> f64 {
    equal_power_distance(TierLabel::N, TierLabel::L, params.h_ut(), params)
}

/// ζ_A^L(x): LoS distance matching an aerial BS at distance `x`.
pub fn zeta_a_l(x: f64, params: &ValidatedParams) -> f64 {
    equal_power_distance(TierLabel::A, TierLabel::L, x, params)
}

/// ζ_L^A: aerial distance matching a LoS BS at `h_UT`.
pub fn zeta_l_a(params: &ValidatedParams) -> f64 {
    equal_power_distance(TierLabel::L, TierLabel::A, params.h_ut(), params)
}

/// ζ_N^A: aerial distance matching an NLoS BS at `h_UT`.
pub fn zeta_n_a(params: &ValidatedParams) -> f64 {
    equal_power_distance(TierLabel::N, TierLabel::A, params.h_ut(), params)
}

/// Closest possible interferer of each tier, given the serving tier and
/// distance, and the number of interfering aerial BSs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionRadii {
    pub tau_l: f64,
    pub tau_n: f64,
    pub tau_a: f64,
    pub n_prime: u32,
}

impl ExclusionRadii {
    pub fn get(&self, tier: TierLabel) -> f64 {
        match tier {
            TierLabel::L => self.tau_l,
            TierLabel::N => self.tau_n,
            TierLabel::A => self.tau_a,
        }
    }
}

/// Exclusion radii for a user served by `serving` at distance `r`.
pub fn exclusion_radii(serving: TierLabel, r: f64, params: &ValidatedParams) -> Result<ExclusionRadii> {
    use TierLabel::*;
    let (h_ut, h_ua, d, n) = (params.h_ut(), params.h_ua(), params.d(), params.n());
    let slack = 1e-9 * r.abs().max(1.0);
    let out_of_support = |lo: f64, hi: f64| Error::Domain {
        what: "exclusion_radii",
        detail: format!("serving distance {r} outside [{lo}, {hi}] for tier {serving}"),
    };
    match serving {
        L => {
            if !(r >= h_ut - slack && r.is_finite()) {
                return Err(out_of_support(h_ut, f64::INFINITY));
            }
            let tau_n = if r <= zeta_n_l(params) {
                h_ut
            } else {
                equal_power_distance(L, N, r, params)
            };
            let tau_a = equal_power_distance(L, A, r, params).max(h_ua).min(d);
            Ok(ExclusionRadii {
                tau_l: r,
                tau_n,
                tau_a,
                n_prime: n,
            })
        }
        N => {
            if !(r >= h_ut - slack && r.is_finite()) {
                return Err(out_of_support(h_ut, f64::INFINITY));
            }
            Ok(ExclusionRadii {
                tau_l: equal_power_distance(N, L, r, params).max(h_ut),
                tau_n: r,
                tau_a: h_ua,
                n_prime: n,
            })
        }
        A => {
            if !(r >= h_ua - slack && r <= d + slack) {
                return Err(out_of_support(h_ua, d));
            }
            let tau_l = if r <= zeta_l_a(params) {
                h_ut
            } else {
                equal_power_distance(A, L, r, params)
            };
            Ok(ExclusionRadii {
                tau_l,
                tau_n: h_ut,
                tau_a: r,
                n_prime: n - 1,
            })
        }
    }
}

/// Density of the distance to an interfering aerial BS given the serving
/// aerial BS sits at `r`: `2t/(d² − r²)` on `[r, d]`.
pub fn interferer_aerial_distance_pdf(t: f64, r: f64, params: &ValidatedParams) -> Result<f64> {
    let d = params.d();
    if !(r < d) {
        return Err(Error::Domain {
            what: "interferer_aerial_distance_pdf",
            detail: format!("conditioning distance {r} must be below d = {d}"),
        });
    }
    if t < r || t > d {
        return Ok(0.0);
    }
    Ok(2.0 * t / ((d - r) * (d + r)))
}

/// Conditional density of the serving distance given the serving tier.
///
/// The unnormalised joint density of (serving tier = ν, distance = r) is the
/// tier's nearest-BS density times the complementary CDFs of the competing
/// tiers at their exclusion radii. It is normalised by its own integral so
/// that it is a proper density; the association weights used with it come
/// from the association module.
#[derive(Debug, Clone)]
pub struct ServingDensity<'a> {
    params: &'a ValidatedParams,
    tier: TierLabel,
    lo: f64,
    hi: f64,
    breaks: Vec<f64>,
    mass: f64,
}

impl<'a> ServingDensity<'a> {
    pub fn new(tier: TierLabel, params: &'a ValidatedParams) -> Result<Self> {
        let (lo, hi, mut breaks) = serving_support(tier, params);
        breaks.retain(|&b| b > lo && b < hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut s = ServingDensity {
            params,
            tier,
            lo,
            hi,
            breaks,
            mass: 0.0,
        };
        s.mass = if hi > lo { s.integrate_joint(|_| 1.0, 0.0, QUAD_REL)? } else { 0.0 };
        Ok(s)
    }

    pub fn tier(&self) -> TierLabel {
        self.tier
    }

    /// Support `[lo, hi]` in the 3-D serving distance.
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Integral of the unnormalised joint density, i.e. the probability of
    /// being served by this tier that the density itself implies.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Unnormalised joint density at `r`.
    pub fn joint(&self, r: f64) -> f64 {
        if r < self.lo || r > self.hi {
            return 0.0;
        }
        let p = self.params;
        let Ok(tau) = exclusion_radii(self.tier, r, p) else {
            return 0.0;
        };
        match self.tier {
            TierLabel::L => {
                nearest_terrestrial_pdf(r, TierLabel::L, p).unwrap_or(0.0)
                    * nearest_terrestrial_ccdf(tau.tau_n, TierLabel::N, p)
                    * nearest_aerial_ccdf(tau.tau_a, p)
            }
            TierLabel::N => {
                nearest_terrestrial_pdf(r, TierLabel::N, p).unwrap_or(0.0)
                    * nearest_terrestrial_ccdf(tau.tau_l, TierLabel::L, p)
                    * nearest_aerial_ccdf(tau.tau_a, p)
            }
            TierLabel::A => {
                nearest_aerial_pdf(r, p)
                    * nearest_terrestrial_ccdf(tau.tau_n, TierLabel::N, p)
                    * nearest_terrestrial_ccdf(tau.tau_l, TierLabel::L, p)
            }
        }
    }

    /// Normalised conditional density at `r`.
    pub fn pdf(&self, r: f64) -> f64 {
        if self.mass > 0.0 {
            self.joint(r) / self.mass
        } else {
            0.0
        }
    }

    fn integrate_joint<F: Fn(f64) -> f64>(&self, g: F, abs_tol: f64, rel_tol: f64) -> Result<f64> {
        let p = self.params;
        let h_ut = p.h_ut();
        if self.tier.is_terrestrial() {
            // r dr = z dz: ∫ g(r) j(r) dr = ∫ g(r(z)) j(r(z)) (z/r) dz
            let mut pts: Vec<f64> = std::iter::once(self.lo)
                .chain(self.breaks.iter().copied())
                .chain(std::iter::once(self.hi))
                .map(|r| horizontal(r, h_ut))
                .collect();
            pts.dedup();
            let res = integrate_breaks(
                |z| {
                    let r = slant(z, h_ut);
                    if r <= 0.0 {
                        return 0.0;
                    }
                    let j = self.joint(r.max(self.lo));
                    if j == 0.0 {
                        0.0
                    } else {
                        g(r) * j * z / r
                    }
                },
                &pts,
                abs_tol,
                rel_tol,
            )?;
            Ok(res.value)
        } else {
            let pts: Vec<f64> = std::iter::once(self.lo)
                .chain(self.breaks.iter().copied())
                .chain(std::iter::once(self.hi))
                .collect();
            let res = integrate_breaks(
                |r| {
                    let j = self.joint(r);
                    if j == 0.0 {
                        0.0
                    } else {
                        g(r) * j
                    }
                },
                &pts,
                abs_tol,
                rel_tol,
            )?;
            Ok(res.value)
        }
    }

    /// `∫ g(r) f(r) dr` against the normalised conditional density.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> Result<f64> {
        self.integrate_with(g, 0.0, QUAD_REL)
    }

    /// As [`integrate`](Self::integrate) with explicit tolerances on the result.
    pub fn integrate_with<F: Fn(f64) -> f64>(&self, g: F, abs_tol: f64, rel_tol: f64) -> Result<f64> {
        if self.mass <= 0.0 {
            return Ok(0.0);
        }
        Ok(self.integrate_joint(g, abs_tol * self.mass, rel_tol)? / self.mass)
    }
}

/// Support and interior kinks of the serving distance for `tier`.
fn serving_support(tier: TierLabel, params: &ValidatedParams) -> (f64, f64, Vec<f64>) {
    let (h_ut, h_ua, d) = (params.h_ut(), params.h_ua(), params.d());
    let kinks_r = |t: TierLabel| -> Vec<f64> {
        if params.lambda_t() == 0.0 {
            return Vec::new();
        }
        intensity_tables(params).get(t).kinks().iter().map(|&z| slant(z, h_ut)).collect()
    };
    // beyond this the nearest-BS density of a terrestrial tier is e^{-40}-small
    let terrestrial_end = |t: TierLabel| -> f64 {
        if params.lambda_t() == 0.0 {
            return h_ut;
        }
        match intensity_tables(params).get(t).z_reaching(LAMBDA_TRUNCATION) {
            Some(z) => slant(z, h_ut),
            None => f64::INFINITY,
        }
    };
    match tier {
        TierLabel::L => {
            let mut hi = zeta_a_l(d, params).min(terrestrial_end(TierLabel::L));
            if !hi.is_finite() {
                hi = slant(Z_CAP, h_ut);
            }
            let mut b = kinks_r(TierLabel::L);
            b.extend(kinks_r(TierLabel::N));
            b.push(zeta_n_l(params));
            b.push(zeta_a_l(h_ua, params));
            (h_ut, hi.max(h_ut), b)
        }
        TierLabel::N => {
            let hi = d.min(terrestrial_end(TierLabel::N));
            let mut b = kinks_r(TierLabel::N);
            b.extend(kinks_r(TierLabel::L));
            // τ_L(r) = h_UT up to where the equal-power distance passes h_UT
            b.push(equal_power_distance(TierLabel::L, TierLabel::N, h_ut, params));
            (h_ut, hi.max(h_ut), b)
        }
        TierLabel::A => {
            let mut b = vec![zeta_l_a(params)];
            b.extend(kinks_r(TierLabel::L).into_iter().map(|r| equal_power_distance(TierLabel::L, TierLabel::A, r, params)));
            (h_ua, d, b)
        }
    }
}

/// Conditional serving-distance density at `r`; errors when the tier's
/// association probability is zero while `r` lies in its support.
pub fn serving_distance_pdf(
    tier: TierLabel,
    r: f64,
    params: &ValidatedParams,
    assoc: &crate::association::AssociationProbs,
) -> Result<f64> {
    let dens = ServingDensity::new(tier, params)?;
    let (lo, hi) = dens.support();
    if assoc.get(tier) <= 0.0 && r >= lo && r <= hi {
        return Err(Error::Inconsistent(format!(
            "association probability of tier {tier} is zero but r = {r} lies in its support"
        )));
    }
    Ok(dens.pdf(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate, NetworkParams};
    use crate::numerics::quadrature::integrate_adaptive;
    use proptest::prelude::*;

    fn defaults() -> ValidatedParams {
        validate(&NetworkParams::default()).unwrap()
    }

    #[test]
    fn cdf_starts_at_zero() {
        let p = defaults();
        assert_eq!(nearest_terrestrial_cdf(p.h_ut(), TierLabel::L, &p).unwrap(), 0.0);
        assert_eq!(nearest_terrestrial_cdf(p.h_ut(), TierLabel::N, &p).unwrap(), 0.0);
        assert!(nearest_terrestrial_cdf(10.0, TierLabel::A, &p).is_err());
    }

    #[test]
    fn always_los_matches_closed_form() {
        let p = validate(&NetworkParams {
            los_model: LosModel::AlwaysLos,
            ..Default::default()
        })
        .unwrap();
        let lam = p.lambda_t();
        let mut worst = 0.0f64;
        for k in 0..400 {
            let r = p.h_ut() + 5.0 * k as f64 + 0.37;
            let exact = 1.0 - (-PI * lam * (r * r - p.h_ut() * p.h_ut())).exp();
            let v = nearest_terrestrial_cdf(r, TierLabel::L, &p).unwrap();
            worst = worst.max((v - exact).abs());
        }
        assert!(worst < 1e-12, "{worst}");
        // NLoS tier is empty
        assert_eq!(nearest_terrestrial_cdf(500.0, TierLabel::N, &p).unwrap(), 0.0);
    }

    #[test]
    fn cumulative_matches_direct_quadrature() {
        for env in [Environment::urban(), Environment::highrise(), Environment::suburban()] {
            let p = validate(&NetworkParams {
                environment: env,
                h_u: 100.0,
                ..Default::default()
            })
            .unwrap();
            let t = intensity_tables(&p);
            for tier in [TierLabel::L, TierLabel::N] {
                let table = t.get(tier);
                for &z in &[0.5, 17.0, 333.3, 1500.0, 4000.0] {
                    let mut pts = vec![0.0];
                    pts.extend(table.kinks().iter().copied().filter(|&k| k < z));
                    pts.push(z);
                    let direct = integrate_breaks(|x| table.intensity(x), &pts, 1e-14, 1e-13).unwrap().value;
                    if direct > LAMBDA_TRUNCATION {
                        // only the tabulated range is exact
                        assert!(table.cumulative(z) > LAMBDA_TRUNCATION);
                        continue;
                    }
                    let v = table.cumulative(z);
                    assert!((v - direct).abs() <= 1e-10 * direct.max(1e-3), "{tier} z={z}: {v} vs {direct}");
                }
            }
        }
    }

    #[test]
    fn highrise_los_saturates() {
        let p = validate(&NetworkParams {
            environment: Environment::highrise(),
            h_u: 100.0,
            ..Default::default()
        })
        .unwrap();
        let t = intensity_tables(&p);
        assert_eq!(t.los.kinks().len(), 2);
        let a = t.los.cumulative(5e4);
        let b = t.los.cumulative(5e5);
        assert!((a - b).abs() < 1e-12 && a < LAMBDA_TRUNCATION);
        assert!(t.los.z_reaching(LAMBDA_TRUNCATION).is_none());
    }

    #[test]
    fn aerial_support_edges() {
        let p = defaults();
        assert_eq!(nearest_aerial_cdf(p.d(), &p), 1.0);
        assert_eq!(nearest_aerial_cdf(p.h_ua(), &p), 0.0);
        let one = validate(&NetworkParams { n: 1, ..Default::default() }).unwrap();
        let r = (one.h_ua().powi(2) + one.r_d().powi(2) / 2.0).sqrt();
        assert!((nearest_aerial_cdf(r, &one) - 0.5).abs() < 1e-14);
        let mass = integrate_adaptive(|r| nearest_aerial_pdf(r, &p), p.h_ua(), p.d(), 1e-13, 1e-12).unwrap();
        assert!((mass.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn terrestrial_pdfs_integrate_to_cdf() {
        let p = defaults();
        for tier in [TierLabel::L, TierLabel::N] {
            let r_end = 3000.0;
            let z_end = horizontal(r_end, p.h_ut());
            let mass = integrate_adaptive(|z| nearest_terrestrial_pdf_z(z, tier, &p), 0.0, z_end, 1e-13, 1e-11)
                .unwrap()
                .value;
            let cdf = nearest_terrestrial_cdf(r_end, tier, &p).unwrap();
            assert!((mass - cdf).abs() < 1e-9, "{tier}: {mass} vs {cdf}");
        }
    }

    #[test]
    fn table_iv_rows() {
        let p = defaults();
        let r = 60.0;
        let e = exclusion_radii(TierLabel::N, r, &p).unwrap();
        let tau_l = (p.mu(TierLabel::L) * r.powf(3.5) / p.mu(TierLabel::N)).powf(1.0 / 2.5);
        assert!((e.tau_l - tau_l).abs() < 1e-9 * tau_l);
        assert_eq!((e.tau_n, e.tau_a, e.n_prime), (r, p.h_ua(), 10));
        let ea = exclusion_radii(TierLabel::A, p.h_ua(), &p).unwrap();
        if p.h_ua() <= zeta_l_a(&p) {
            assert_eq!(ea.tau_l, p.h_ut());
        }
        assert_eq!(ea.n_prime, 9);
        assert!(exclusion_radii(TierLabel::A, p.d() * 1.01, &p).is_err());
        assert!(exclusion_radii(TierLabel::L, 10.0, &p).is_err());
    }

    #[test]
    fn symmetric_tiers_give_tau_equal_r() {
        let p = validate(&NetworkParams {
            alpha_l: 2.5,
            alpha_a: 2.5,
            // μ_L = P_T η_L g_s = 20 W · η_L · g_s; match μ_A = 1 W · η_A
            eta_l_db: -3.0,
            g_s_t_db: -15.0,
            eta_a_db: 43.0 - 30.0 - 3.0 - 15.0,
            ..Default::default()
        })
        .unwrap();
        assert!((p.mu(TierLabel::L) / p.mu(TierLabel::A) - 1.0).abs() < 1e-12);
        let r = 1000.0;
        let e = exclusion_radii(TierLabel::A, r, &p).unwrap();
        assert!((e.tau_l - r).abs() < 1e-9);
    }

    #[test]
    fn interferer_density_normalised() {
        let p = defaults();
        let r = 400.0;
        let mass = integrate_adaptive(
            |t| interferer_aerial_distance_pdf(t, r, &p).unwrap(),
            r,
            p.d(),
            1e-14,
            1e-13,
        )
        .unwrap()
        .value;
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(interferer_aerial_distance_pdf(500.0, p.d(), &p).is_err());
    }

    #[test]
    fn serving_densities_normalised() {
        for h_u in [50.0, 150.0] {
            let p = validate(&NetworkParams { h_u, ..Default::default() }).unwrap();
            for tier in TierLabel::ALL {
                let dens = ServingDensity::new(tier, &p).unwrap();
                if dens.mass() == 0.0 {
                    continue;
                }
                let one = dens.integrate(|_| 1.0).unwrap();
                assert!((one - 1.0).abs() < 1e-6, "{tier} h_u={h_u}: {one}");
            }
        }
    }

    #[test]
    fn serving_aerial_reduces_to_nearest_when_alone() {
        let p = validate(&NetworkParams {
            lambda_t_per_km2: 0.0,
            ..Default::default()
        })
        .unwrap();
        let dens = ServingDensity::new(TierLabel::A, &p).unwrap();
        assert!((dens.mass() - 1.0).abs() < 1e-9);
        for r in [260.0, 500.0, 1500.0] {
            assert!((dens.pdf(r) - nearest_aerial_pdf(r, &p)).abs() < 1e-9 * nearest_aerial_pdf(r, &p));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn cdfs_monotone_in_unit_interval(h_u in 25.0f64..290.0, r1 in 0.0f64..5000.0, dr in 0.0f64..500.0) {
            let p = validate(&NetworkParams { h_u, ..Default::default() }).unwrap();
            for tier in [TierLabel::L, TierLabel::N] {
                let a = nearest_terrestrial_cdf(r1, tier, &p).unwrap();
                let b = nearest_terrestrial_cdf(r1 + dr, tier, &p).unwrap();
                prop_assert!((0.0..=1.0).contains(&a) && b >= a);
            }
            let a = nearest_aerial_cdf(r1, &p);
            let b = nearest_aerial_cdf(r1 + dr, &p);
            prop_assert!((0.0..=1.0).contains(&a) && b >= a);
        }

        #[test]
        fn exclusion_radii_respect_minimum_distances(h_u in 25.0f64..290.0, frac in 0.0f64..1.0) {
            let p = validate(&NetworkParams { h_u, ..Default::default() }).unwrap();
            for tier in TierLabel::ALL {
                let r = match tier {
                    TierLabel::A => p.h_ua() + frac * (p.d() - p.h_ua()),
                    _ => p.h_ut() + frac * 3000.0,
                };
                let e = exclusion_radii(tier, r, &p).unwrap();
                prop_assert!(e.tau_l >= p.h_ut() - 1e-9);
                prop_assert!(e.tau_n >= p.h_ut() - 1e-9);
                prop_assert!(e.tau_a >= p.h_ua() - 1e-9);
            }
        }
    }
}
