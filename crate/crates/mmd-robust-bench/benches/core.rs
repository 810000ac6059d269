//! Benchmarks for the numeric hot paths: single kernel evaluations, the
//! O(n·m) V-statistic, one stochastic-gradient step, and the closed-form
//! gradient the experiment runners lean on.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mmd_robust::estimator::grad_estimate;
use mmd_robust::kernels::Kernel;
use mmd_robust::mmd::{exact_gauss_crit_grad, mmd2_vstat};
use mmd_robust::models::{GenerativeModel, ParamVector};

fn bench_kernel_eval(c: &mut Criterion) {
    let k = Kernel::gaussian(10f64.sqrt()).unwrap();
    let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
    let y: Vec<f64> = (0..10).map(|i| 1.0 - i as f64 * 0.05).collect();
    c.bench_function("kernel_eval_gaussian_d10", |b| {
        b.iter(|| k.eval(black_box(&x), black_box(&y)).unwrap())
    });
}

fn bench_mmd2_vstat(c: &mut Criterion) {
    let k = Kernel::gaussian(10f64.sqrt()).unwrap();
    let model = GenerativeModel::gaussian_location(1.0, 10).unwrap();
    let theta = ParamVector::euclidean(vec![0.0; 10]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = model.sample(&theta, 200, &mut rng).unwrap();
    let y = model.sample(&theta, 200, &mut rng).unwrap();
    c.bench_function("mmd2_vstat_n200_m200_d10", |b| {
        b.iter(|| mmd2_vstat(&k, black_box(&x), black_box(&y)).unwrap())
    });
}

fn bench_grad_estimate(c: &mut Criterion) {
    let k = Kernel::gaussian(10f64.sqrt()).unwrap();
    let model = GenerativeModel::gaussian_location(1.0, 10).unwrap();
    let theta = ParamVector::euclidean(vec![0.2; 10]).unwrap();
    let mut data_rng = ChaCha8Rng::seed_from_u64(2);
    let data = model.sample(&theta, 500, &mut data_rng).unwrap();
    c.bench_function("grad_estimate_m64_n500_d10", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        b.iter(|| grad_estimate(&k, &model, black_box(&theta), &data, 64, &mut rng).unwrap())
    });
}

fn bench_exact_gauss_grad(c: &mut Criterion) {
    let model = GenerativeModel::gaussian_location(1.0, 10).unwrap();
    let theta0 = ParamVector::euclidean(vec![0.0; 10]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = model.sample(&theta0, 5000, &mut rng).unwrap();
    let theta = vec![0.1; 10];
    c.bench_function("exact_gauss_crit_grad_n5000_d10", |b| {
        b.iter(|| exact_gauss_crit_grad(10f64.sqrt(), 1.0, black_box(&theta), &data).unwrap())
    });
}

criterion_group!(
    benches,
    bench_kernel_eval,
    bench_mmd2_vstat,
    bench_grad_estimate,
    bench_exact_gauss_grad
);
criterion_main!(benches);
