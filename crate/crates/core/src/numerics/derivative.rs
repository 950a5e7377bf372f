//! k-th derivatives by central differences with Richardson extrapolation.

use super::special::binomial;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub abs_err: f64,
}

const LEVELS: usize = 8;

/// k-th central difference of `f` at `s` with step `h`.
fn central<F: FnMut(f64) -> Result<f64>>(f: &mut F, s: f64, k: u32, h: f64) -> Result<f64> {
    let mut acc = 0.0;
    for j in 0..=k {
        let x = s + (k as f64 / 2.0 - j as f64) * h;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(k, j) * f(x)?;
    }
    Ok(acc / h.powi(k as i32))
}

/// k-th derivative of `f` at `s > 0`.
///
/// The stencil never leaves (0, 2s), so functions defined only on the
/// positive half-line are safe. Stops once the extrapolation error estimate
/// drops below `target_rel * |value|` or starts growing (noise floor).
pub fn richardson_derivative<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    s: f64,
    k: u32,
    target_rel: f64,
) -> Result<DerivativeEstimate> {
    if k == 0 {
        return Ok(DerivativeEstimate {
            value: f(s)?,
            abs_err: 0.0,
        });
    }
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain {
            what: "richardson_derivative",
            detail: format!("s = {s} must be positive"),
        });
    }
    let mut h = 0.8 * s / k as f64;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(LEVELS);
    let mut best = DerivativeEstimate {
        value: f64::NAN,
        abs_err: f64::INFINITY,
    };
    for i in 0..LEVELS {
        let mut row = vec![central(&mut f, s, k, h)?];
        let mut fac = 1.0;
        for j in 1..=i {
            fac *= 4.0;
            let prev = table[i - 1][j - 1];
            let cur = row[j - 1];
            let val = cur + (cur - prev) / (fac - 1.0);
            row.push(val);
            let err = (val - cur).abs().max((val - prev).abs());
            if err < best.abs_err {
                best = DerivativeEstimate { value: val, abs_err: err };
            }
        }
        if i > 0 {
            let diag = row[i];
            let prev_diag = table[i - 1][i - 1];
            if (diag - prev_diag).abs() > 2.0 * best.abs_err && i > 2 {
                break;
            }
        }
        table.push(row);
        if best.abs_err <= target_rel * best.value.abs() {
            break;
        }
        h *= 0.5;
    }
    if !best.value.is_finite() {
        return Err(Error::Convergence {
            what: "richardson_derivative",
            detail: format!("k = {k} at s = {s}"),
        });
    }
    if best.abs_err > 1e-3 * best.value.abs().max(f64::MIN_POSITIVE) && best.abs_err > 1e-12 {
        return Err(Error::Convergence {
            what: "richardson_derivative",
            detail: format!(
                "k = {k} at s = {s}: value {:e} error {:e}",
                best.value, best.abs_err
            ),
        });
    }
    Ok(best)
}
