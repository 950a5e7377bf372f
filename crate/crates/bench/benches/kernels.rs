use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use vhetnet_bench::{aerial_request, los_request, reference_params};
use vhetnet_core::association::assoc_probs;
use vhetnet_core::channel::fit_los_parameters;
use vhetnet_core::interference::{laplace_aerial_integral, laplace_aerial_meijerg, laplace_total};
use vhetnet_core::montecarlo::{run_trial_with, trial_rng};
use vhetnet_core::{coverage, db_to_linear, Environment, Method, SimMode, SpectrumPolicy};

fn laplace(c: &mut Criterion) {
    let p = reference_params(50.0);
    let mut g = c.benchmark_group("laplace");
    let req = los_request(&p, SpectrumPolicy::Noss);
    g.bench_function("total_noss_los_served", |b| b.iter(|| laplace_total(black_box(&req), &p).unwrap()));
    let req = aerial_request(&p, SpectrumPolicy::Oss);
    g.bench_function("aerial_meijerg", |b| b.iter(|| laplace_aerial_meijerg(black_box(&req), &p).unwrap()));
    g.bench_function("aerial_quadrature", |b| b.iter(|| laplace_aerial_integral(black_box(&req), &p).unwrap()));
    g.finish();
}

fn analysis(c: &mut Criterion) {
    let mut g = c.benchmark_group("analysis");
    g.sample_size(10);
    g.bench_function("los_fit_urban", |b| {
        let itu = Environment::urban().itu().unwrap();
        b.iter(|| fit_los_parameters(black_box(&itu), 19.0).unwrap())
    });
    for h_u in [50.0, 250.0] {
        g.bench_with_input(BenchmarkId::new("association", h_u), &h_u, |b, &h| {
            // fresh parameters so cached intensity tables are rebuilt each time
            b.iter(|| assoc_probs(&reference_params(h)).unwrap())
        });
        let p = reference_params(h_u);
        for method in [Method::Approx, Method::Exact] {
            g.bench_with_input(BenchmarkId::new(format!("coverage_{method:?}"), h_u), &p, |b, p| {
                b.iter(|| coverage(db_to_linear(5.0), p, method).unwrap())
            });
        }
    }
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulation");
    g.sample_size(20);
    let p = reference_params(50.0);
    let mut i = 0;
    g.bench_function("trial_30km", |b| {
        b.iter(|| {
            i += 1;
            let mut rng = trial_rng(1, i);
            let mut heights = trial_rng(2, i);
            run_trial_with(&p, SimMode::Standard, 30_000.0, &mut rng, &mut heights).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, laplace, analysis, simulation);
criterion_main!(benches);
