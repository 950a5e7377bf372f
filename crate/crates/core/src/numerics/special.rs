//! Gamma-family special functions.
//!
//! Γ, ln Γ and ψ come from `statrs`; the incomplete gamma functions are
//! evaluated here (series below `s + 1`, Lentz continued fraction above) and
//! are also available in log space, which the binomial sums of the LoS-only
//! association formula need to avoid overflow.

pub use statrs::function::gamma::{digamma, gamma, ln_gamma};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;

/// True when `x` is a non-positive integer (a pole of Γ).
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Reciprocal gamma, exactly zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Pochhammer symbol (a)_n.
pub fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |p, k| p * (a + k as f64))
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |p, k| p * k as f64)
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |p, i| p * (n - i) as f64 / (i + 1) as f64)
}

/// ln of the series sum Σ x^n / (s)_(n+1), so that γ(s,x) = x^s e^-x · sum.
fn lower_series_ln_sum(s: f64, x: f64) -> f64 {
    let mut term = 1.0 / s;
    let mut sum = term;
    let mut n = 1.0;
    for _ in 0..MAX_ITER {
        term *= x / (s + n);
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
        n += 1.0;
    }
    sum.ln()
}

/// ln of the continued fraction so that Γ(s,x) = x^s e^-x · cf.
fn upper_cf_ln(s: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h.ln()
}

/// ln γ(s, x), lower incomplete gamma, for s > 0, x ≥ 0.
pub fn ln_lower_incomplete_gamma(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x < s + 1.0 {
        s * x.ln() - x + lower_series_ln_sum(s, x)
    } else {
        let lg = ln_gamma(s);
        let lu = s * x.ln() - x + upper_cf_ln(s, x);
        lg + (-(lu - lg).exp()).ln_1p()
    }
}

/// ln Γ(s, x), upper incomplete gamma, for s > 0, x ≥ 0.
pub fn ln_upper_incomplete_gamma(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return ln_gamma(s);
    }
    if x < s + 1.0 {
        let lg = ln_gamma(s);
        let ll = s * x.ln() - x + lower_series_ln_sum(s, x);
        lg + (-(ll - lg).exp()).ln_1p()
    } else {
        s * x.ln() - x + upper_cf_ln(s, x)
    }
}

/// Γ(s, x) = ∫_x^∞ t^(s-1) e^-t dt.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> f64 {
    ln_upper_incomplete_gamma(s, x).exp()
}

/// γ(s, x) = ∫_0^x t^(s-1) e^-t dt.
pub fn lower_incomplete_gamma(s: f64, x: f64) -> f64 {
    ln_lower_incomplete_gamma(s, x).exp()
}

/// ln(Γ(s, x1) − Γ(s, x2)) for 0 ≤ x1 ≤ x2, computed without the
/// cancellation a direct difference suffers when both arguments are small.
pub fn ln_incomplete_gamma_diff(s: f64, x1: f64, x2: f64) -> f64 {
    if x2 <= x1 {
        return f64::NEG_INFINITY;
    }
    if x2 < s + 1.0 {
        let l2 = ln_lower_incomplete_gamma(s, x2);
        let l1 = ln_lower_incomplete_gamma(s, x1);
        l2 + (-(l1 - l2).exp()).ln_1p()
    } else {
        let u1 = ln_upper_incomplete_gamma(s, x1);
        let u2 = ln_upper_incomplete_gamma(s, x2);
        u1 + (-(u2 - u1).exp()).ln_1p()
    }
}
