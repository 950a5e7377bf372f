//! Gauss hypergeometric ₂F₁ for real arguments z < 1 (and z = 1 when it
//! converges), plus the two Meijer-G classes that reduce to a single ₂F₁.
//!
//! Negative arguments go through the Pfaff transformation onto (0, 1); points
//! above 0.75 use the 1 − z connection formulas, including the logarithmic
//! cases when c − a − b is an integer.

use super::special::{digamma, gamma, is_gamma_pole, pochhammer, rgamma};
use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 0.75;
const MAX_TERMS: usize = 200_000;
const INTEGER_TOL: f64 = 1e-9;

/// ₂F₁(a, b; c; z).
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if is_gamma_pole(c) {
        return Err(Error::Domain {
            what: "gauss_2f1",
            detail: format!("c = {c} is a pole"),
        });
    }
    if a == 0.0 || b == 0.0 || z == 0.0 {
        return Ok(1.0);
    }
    if z > 1.0 || z.is_nan() {
        return Err(Error::Domain {
            what: "gauss_2f1",
            detail: format!("z = {z} outside (-inf, 1]"),
        });
    }
    if z == 1.0 {
        let s = c - a - b;
        if s <= 0.0 {
            return Err(Error::Domain {
                what: "gauss_2f1",
                detail: format!("divergent at z = 1 (c - a - b = {s})"),
            });
        }
        return Ok(gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b));
    }
    if z < 0.0 {
        let w = -z;
        let y = w / (1.0 + w);
        let omy = 1.0 / (1.0 + w);
        // prefer the variant whose series terminates
        if is_gamma_pole(c - a) && !is_gamma_pole(c - b) {
            return Ok(omy.powf(b) * core(c - a, b, c, y, omy)?);
        }
        return Ok(omy.powf(a) * core(a, c - b, c, y, omy)?);
    }
    core(a, b, c, z, 1.0 - z)
}

/// ₂F₁ on 0 ≤ y < 1 with `omy = 1 - y` supplied exactly by the caller.
fn core(a: f64, b: f64, c: f64, y: f64, omy: f64) -> Result<f64> {
    if is_gamma_pole(a) || is_gamma_pole(b) || y <= SERIES_CUTOFF {
        return series(a, b, c, y);
    }
    let s = c - a - b;
    let n = s.round();
    if (s - n).abs() < INTEGER_TOL {
        if n >= 0.0 {
            log_case_plus(a, b, n as usize, omy)
        } else {
            log_case_minus(a, b, (-n) as usize, omy)
        }
    } else {
        let t1 = if is_gamma_pole(c - a) || is_gamma_pole(c - b) {
            0.0
        } else {
            gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b) * series(a, b, 1.0 - s, omy)?
        };
        let t2 = omy.powf(s) * gamma(c) * gamma(-s) * rgamma(a) * rgamma(b) * series(c - a, c - b, 1.0 + s, omy)?;
        Ok(t1 + t2)
    }
}

/// Plain hypergeometric series.
fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let num = (a + kf) * (b + kf);
        if num == 0.0 {
            return Ok(sum);
        }
        term *= num / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > 2 {
            return Ok(sum);
        }
    }
    Err(Error::Convergence {
        what: "hypergeometric series",
        detail: format!("a={a} b={b} c={c} z={z}"),
    })
}

/// c = a + b + m, m ≥ 0, evaluated in x = 1 − z.
fn log_case_plus(a: f64, b: f64, m: usize, x: f64) -> Result<f64> {
    let c = a + b + m as f64;
    let mf = m as f64;
    let mut first = 0.0;
    if m > 0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 0..m {
            if k > 0 {
                let kf = (k - 1) as f64;
                term *= (a + kf) * (b + kf) / ((kf + 1.0) * (1.0 - mf + kf)) * x;
            }
            sum += term;
        }
        first = gamma(mf) * gamma(c) * rgamma(a + mf) * rgamma(b + mf) * sum;
    }
    let lnx = x.ln();
    let mut psi1 = digamma(1.0);
    let mut psi2 = digamma(mf + 1.0);
    let mut psi3 = digamma(a + mf);
    let mut psi4 = digamma(b + mf);
    let mut coef = 1.0 / pochhammer(1.0, m); // 1/(k! (k+m)!) at k = 0
    let mut sum = 0.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let t = coef * (lnx - psi1 - psi2 + psi3 + psi4);
        sum += t;
        if k > 2 && t.abs() <= 1e-17 * sum.abs() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let second = -sign * gamma(c) * rgamma(a) * rgamma(b) * x.powi(m as i32) * sum;
            return Ok(first + second);
        }
        coef *= (a + mf + kf) * (b + mf + kf) / ((kf + 1.0) * (kf + mf + 1.0)) * x;
        psi1 += 1.0 / (kf + 1.0);
        psi2 += 1.0 / (kf + mf + 1.0);
        psi3 += 1.0 / (a + mf + kf);
        psi4 += 1.0 / (b + mf + kf);
    }
    Err(Error::Convergence {
        what: "hypergeometric log series",
        detail: format!("a={a} b={b} m={m} x={x}"),
    })
}

/// c = a + b − m, m ≥ 1, evaluated in x = 1 − z.
fn log_case_minus(a: f64, b: f64, m: usize, x: f64) -> Result<f64> {
    let mf = m as f64;
    let c = a + b - mf;
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 0..m {
        if k > 0 {
            let kf = (k - 1) as f64;
            term *= (a - mf + kf) * (b - mf + kf) / ((kf + 1.0) * (1.0 - mf + kf)) * x;
        }
        sum += term;
    }
    let first = gamma(mf) * gamma(c) * rgamma(a) * rgamma(b) * x.powi(-(m as i32)) * sum;
    let lnx = x.ln();
    let mut psi1 = digamma(1.0);
    let mut psi2 = digamma(mf + 1.0);
    let mut psi3 = digamma(a);
    let mut psi4 = digamma(b);
    let mut coef = 1.0 / pochhammer(1.0, m);
    let mut s = 0.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let t = coef * (lnx - psi1 - psi2 + psi3 + psi4);
        s += t;
        if k > 2 && t.abs() <= 1e-17 * s.abs() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let second = -sign * gamma(c) * rgamma(a - mf) * rgamma(b - mf) * s;
            return Ok(first + second);
        }
        coef *= (a + kf) * (b + kf) / ((kf + 1.0) * (kf + mf + 1.0)) * x;
        psi1 += 1.0 / (kf + 1.0);
        psi2 += 1.0 / (kf + mf + 1.0);
        psi3 += 1.0 / (a + kf);
        psi4 += 1.0 / (b + kf);
    }
    Err(Error::Convergence {
        what: "hypergeometric log series",
        detail: format!("a={a} b={b} m={m} x={x}"),
    })
}

/// Meijer G^{1,2}_{2,2}(z | a1, a2; b1, b2) for z > 0.
pub fn meijer_g_12_22(z: f64, a1: f64, a2: f64, b1: f64, b2: f64) -> Result<f64> {
    let p = 1.0 - a1 + b1;
    let q = 1.0 - a2 + b1;
    let r = 1.0 - b2 + b1;
    Ok(gamma(p) * gamma(q) * rgamma(r) * z.powf(b1) * gauss_2f1(p, q, r, -z)?)
}

/// Meijer G^{2,1}_{2,2}(z | a1, a2; b1, b2) for z > 0, via z → 1/z.
pub fn meijer_g_21_22(z: f64, a1: f64, a2: f64, b1: f64, b2: f64) -> Result<f64> {
    meijer_g_12_22(1.0 / z, 1.0 - b1, 1.0 - b2, 1.0 - a1, 1.0 - a2)
}
