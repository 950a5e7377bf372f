//! Point-process sampling around a user at the origin.

use crate::channel::{los_probability_of_distance, LinkState};
use crate::config::ValidatedParams;
use crate::error::{invalid, Result};
use crate::numerics::sampling::uniform_open;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    /// Distance from the vertical axis through the origin.
    pub fn horizontal_norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

pub fn distance_3d(p: Point3, q: Point3) -> f64 {
    let (dx, dy, dz) = (p.x - q.x, p.y - q.y, p.z - q.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Uniform point on a disc of the given radius, at height `h`.
fn uniform_on_disc<R: Rng + ?Sized>(radius: f64, h: f64, rng: &mut R) -> Point3 {
    let rho = radius * uniform_open(rng).sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    Point3::new(rho * phi.cos(), rho * phi.sin(), h)
}

/// Homogeneous PPP of intensity `lambda` (per m²) on a disc of radius `r_sim`.
pub fn sample_ppp_disc<R: Rng + ?Sized>(lambda: f64, r_sim: f64, h: f64, rng: &mut R) -> Vec<Point3> {
    let mean = lambda * PI * r_sim * r_sim;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let count = Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0);
    (0..count).map(|_| uniform_on_disc(r_sim, h, rng)).collect()
}

/// `n` points uniform on a disc of radius `r_d` at height `h_a`.
pub fn sample_bpp_disc<R: Rng + ?Sized>(n: u32, r_d: f64, h_a: f64, rng: &mut R) -> Vec<Point3> {
    (0..n).map(|_| uniform_on_disc(r_d, h_a, rng)).collect()
}

/// `n` points uniform in a cylinder of radius `r_d` and height `h_c` centred
/// at height `h_a`. The bottom face must lie above the user at `h_u`.
pub fn sample_bpp_cylinder<R: Rng + ?Sized>(
    n: u32,
    r_d: f64,
    h_a: f64,
    h_c: f64,
    h_u: f64,
    rng: &mut R,
) -> Result<Vec<Point3>> {
    if !(h_c >= 0.0) {
        return Err(invalid("h_c", format!("cylinder height must be non-negative, got {h_c}")));
    }
    let bottom = h_a - h_c / 2.0;
    if !(bottom > h_u) {
        return Err(invalid(
            "h_c",
            format!("cylinder bottom {bottom} m is not above the user at {h_u} m"),
        ));
    }
    if h_c == 0.0 {
        return Ok(sample_bpp_disc(n, r_d, h_a, rng));
    }
    Ok((0..n)
        .map(|_| {
            let mut p = uniform_on_disc(r_d, h_a, rng);
            p.z = bottom + h_c * rng.random::<f64>();
            p
        })
        .collect())
}

/// Independent LoS/NLoS marks from the horizontal distance of each point.
pub fn classify_los<R: Rng + ?Sized>(points: &[Point3], params: &ValidatedParams, rng: &mut R) -> Vec<LinkState> {
    points
        .iter()
        .map(|p| {
            let pl = los_probability_of_distance(p.horizontal_norm(), params);
            if pl >= 1.0 || (pl > 0.0 && rng.random::<f64>() < pl) {
                LinkState::Los
            } else {
                LinkState::Nlos
            }
        })
        .collect()
}

/// One realisation of both tiers around the user.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub terrestrial: Vec<Point3>,
    pub aerial: Vec<Point3>,
    pub link_states: Vec<LinkState>,
}

impl Deployment {
    /// Samples the terrestrial PPP on a disc of radius `r_sim` and the aerial
    /// BPP on a disc, or in a cylinder of height `h_c` when given.
    pub fn sample<R: Rng + ?Sized>(
        params: &ValidatedParams,
        r_sim: f64,
        h_c: Option<f64>,
        rng: &mut R,
    ) -> Result<Self> {
        let terrestrial = sample_ppp_disc(params.lambda_t(), r_sim, params.h_t(), rng);
        let link_states = classify_los(&terrestrial, params, rng);
        let aerial = match h_c {
            Some(h_c) => sample_bpp_cylinder(params.n(), params.r_d(), params.h_a(), h_c, params.h_u(), rng)?,
            None => sample_bpp_disc(params.n(), params.r_d(), params.h_a(), rng),
        };
        Ok(Deployment {
            terrestrial,
            aerial,
            link_states,
        })
    }

    pub fn user(params: &ValidatedParams) -> Point3 {
        Point3::new(0.0, 0.0, params.h_u())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate, LosModel, NetworkParams};
    use crate::numerics::quadrature::integrate_adaptive;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn distances() {
        let o = Point3::default();
        assert_eq!(distance_3d(o, o), 0.0);
        assert_eq!(distance_3d(o, Point3::new(3.0, 4.0, 0.0)), 5.0);
        let u = Point3::new(0.0, 0.0, 50.0);
        let b = Point3::new(120.0, 0.0, 20.0);
        assert!((distance_3d(u, b) - (120.0f64.powi(2) + 30.0f64.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_ppp() {
        assert!(sample_ppp_disc(0.0, 30_000.0, 20.0, &mut rng(1)).is_empty());
    }

    #[test]
    fn ppp_count_and_radius_moments() {
        let lambda = 5e-6;
        let r_sim = 30_000.0;
        let mut r = rng(2);
        let runs = 10_000;
        let mut total = 0usize;
        for _ in 0..runs {
            total += sample_ppp_disc(lambda, r_sim, 20.0, &mut r).len();
        }
        let mean = total as f64 / runs as f64;
        let expect = lambda * PI * r_sim * r_sim;
        assert!((mean / expect - 1.0).abs() < 0.01, "{mean} vs {expect}");

        let pts = sample_ppp_disc(lambda, r_sim, 20.0, &mut r);
        let sq: Vec<f64> = pts.iter().map(|p| p.horizontal_norm().powi(2)).collect();
        let m = sq.iter().sum::<f64>() / sq.len() as f64;
        // r² is uniform on [0, R²]: variance R⁴/12
        let se = r_sim * r_sim / 12f64.sqrt() / (sq.len() as f64).sqrt();
        assert!((m - r_sim * r_sim / 2.0).abs() < 3.0 * se);
        assert!(pts.iter().all(|p| p.z == 20.0));
    }

    #[test]
    fn bpp_disc_radius_law() {
        let r_d = 2000.0;
        let mut r = rng(3);
        let radii: Vec<f64> = (0..1_000_000)
            .map(|_| sample_bpp_disc(1, r_d, 300.0, &mut r)[0].horizontal_norm())
            .collect();
        let ks = ks_statistic(radii, |x| (x / r_d).powi(2));
        assert!(ks < 0.002, "{ks}");
        let ten = sample_bpp_disc(10, r_d, 300.0, &mut r);
        assert_eq!(ten.len(), 10);
        assert!(ten.iter().all(|p| p.z == 300.0));
    }

    #[test]
    fn cylinder_heights_and_degenerate_case() {
        let mut r = rng(4);
        let mut heights = Vec::new();
        let mut radii = Vec::new();
        for _ in 0..100_000 {
            let p = sample_bpp_cylinder(1, 2000.0, 200.0, 50.0, 70.0, &mut r).unwrap()[0];
            heights.push(p.z);
            radii.push(p.horizontal_norm());
        }
        assert!(heights.iter().all(|&z| (175.0..=225.0).contains(&z)));
        let mean = heights.iter().sum::<f64>() / heights.len() as f64;
        assert!((mean - 200.0).abs() < 0.5);
        assert!(ks_statistic(radii, |x| (x / 2000.0).powi(2)) < 0.01);

        let (mut a, mut b) = (rng(9), rng(9));
        assert_eq!(
            sample_bpp_cylinder(5, 2000.0, 200.0, 0.0, 70.0, &mut a).unwrap(),
            sample_bpp_disc(5, 2000.0, 200.0, &mut b)
        );
        assert!(sample_bpp_cylinder(5, 2000.0, 200.0, 300.0, 70.0, &mut a).is_err());
    }

    #[test]
    fn thinning_degenerate_and_constant() {
        let all = validate(&NetworkParams {
            los_model: LosModel::AlwaysLos,
            ..Default::default()
        })
        .unwrap();
        let mut r = rng(5);
        let pts = sample_ppp_disc(all.lambda_t(), 10_000.0, all.h_t(), &mut r);
        assert!(classify_los(&pts, &all, &mut r).iter().all(|s| *s == LinkState::Los));

        let half = validate(&NetworkParams {
            los_model: LosModel::Constant(0.5),
            ..Default::default()
        })
        .unwrap();
        let pts = sample_ppp_disc(half.lambda_t(), 30_000.0, half.h_t(), &mut r);
        let states = classify_los(&pts, &half, &mut r);
        assert_eq!(states.len(), pts.len());
        let n = states.len() as f64;
        let los = states.iter().filter(|s| **s == LinkState::Los).count() as f64;
        assert!((los / n - 0.5).abs() < 3.0 * (0.25 / n).sqrt());
    }

    #[test]
    fn los_points_follow_thinned_intensity() {
        let p = validate(&NetworkParams::default()).unwrap();
        let mut r = rng(6);
        let r_sim = 3000.0;
        let edges = [0.0, 100.0, 250.0, 500.0, 1000.0, 2000.0, 3000.0];
        let mut counts = vec![0.0; edges.len() - 1];
        let runs = 2000;
        for _ in 0..runs {
            let pts = sample_ppp_disc(p.lambda_t(), r_sim, p.h_t(), &mut r);
            for (pt, s) in pts.iter().zip(classify_los(&pts, &p, &mut r)) {
                if s == LinkState::Los {
                    let z = pt.horizontal_norm();
                    let k = (edges.partition_point(|&e| e <= z) - 1).min(edges.len() - 2);
                    counts[k] += 1.0;
                }
            }
        }
        for k in 0..counts.len() {
            let expect = integrate_adaptive(
                |z| 2.0 * PI * p.lambda_t() * z * los_probability_of_distance(z, &p),
                edges[k],
                edges[k + 1],
                1e-12,
                1e-10,
            )
            .unwrap()
            .value
                * runs as f64;
            let got = counts[k];
            assert!((got - expect).abs() < 4.0 * expect.sqrt() + 1.0, "bin {k}: {got} vs {expect}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn distances_respect_supports(seed in any::<u64>(), h_u in 25.0f64..290.0) {
            let p = validate(&NetworkParams { h_u, ..Default::default() }).unwrap();
            let mut r = rng(seed);
            let dep = Deployment::sample(&p, 5000.0, None, &mut r).unwrap();
            let u = Deployment::user(&p);
            prop_assert_eq!(dep.aerial.len(), p.n() as usize);
            prop_assert_eq!(dep.link_states.len(), dep.terrestrial.len());
            for t in &dep.terrestrial {
                prop_assert!(distance_3d(u, *t) >= p.h_ut() - 1e-9);
                prop_assert!(t.horizontal_norm() <= 5000.0);
            }
            for a in &dep.aerial {
                let dist = distance_3d(u, *a);
                prop_assert!(dist >= p.h_ua() - 1e-9 && dist <= p.d() + 1e-9);
            }
        }
    }
}
