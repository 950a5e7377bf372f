//! Random variates used by the simulator.

use rand::Rng;

/// Uniform on (0, 1].
#[inline]
pub fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Gamma(m, 1/m) variate (unit mean) for integer `m ≥ 1`, as
/// −ln(U_1 ⋯ U_m)/m. Long products are split to stay clear of underflow.
#[inline]
pub fn gamma_unit_mean<R: Rng + ?Sized>(m: u32, rng: &mut R) -> f64 {
    debug_assert!(m >= 1);
    if m == 1 {
        return -uniform_open(rng).ln();
    }
    let mut acc = 0.0;
    let mut prod = 1.0;
    for i in 0..m {
        prod *= uniform_open(rng);
        if i % 32 == 31 {
            acc -= prod.ln();
            prod = 1.0;
        }
    }
    (acc - prod.ln()) / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(m: u32, n: usize) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(7 + m as u64);
        let xs: Vec<f64> = (0..n).map(|_| gamma_unit_mean(m, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var)
    }

    #[test]
    fn exponential_mean() {
        let (mean, _) = moments(1, 1_000_000);
        assert!((mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn gamma_two_variance() {
        let (_, var) = moments(2, 1_000_000);
        assert!((var - 0.5).abs() < 0.01, "{var}");
    }

    #[test]
    fn unit_mean_within_three_se() {
        for m in 1..=4u32 {
            let n = 200_000;
            let (mean, _) = moments(m, n);
            let se = (1.0 / m as f64 / n as f64).sqrt();
            assert!((mean - 1.0).abs() < 3.0 * se, "m={m} mean={mean}");
        }
    }

    #[test]
    fn large_m_concentrates() {
        let (mean, var) = moments(50, 100_000);
        assert!((mean - 1.0).abs() < 0.005 && (var - 0.02).abs() < 0.002);
    }
}
