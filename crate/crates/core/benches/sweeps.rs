//! Sweep throughput. Run once with default features (rayon) and once with
//! `--no-default-features` (sequential) to compare:
//!
//!     cargo bench -p eit-qfc
//!     cargo bench -p eit-qfc --no-default-features

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use eit_qfc::cli::{run_fig2, run_fig3};
use eit_qfc::noise::{DiffusionMatrix, Kernel, NoiseSpectrum};
use eit_qfc::parallel;
use eit_qfc::SystemParams;

fn mode() -> &'static str {
    if parallel::is_parallel() {
        "rayon"
    } else {
        "sequential"
    }
}

fn fig2_sweep(c: &mut Criterion) {
    let grid: Vec<f64> = (0..=400).map(f64::from).collect();
    c.bench_function(&format!("fig2 401 rows [{}]", mode()), |b| {
        b.iter(|| black_box(run_fig2(black_box(&grid)).unwrap()))
    });
}

fn fig3_sweep(c: &mut Criterion) {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    c.bench_function(&format!("fig3 101 rows [{}]", mode()), |b| {
        b.iter(|| black_box(run_fig3(black_box(&grid)).unwrap()))
    });
}

fn noise_spectrum(c: &mut Criterion) {
    let p = SystemParams::symmetric(4.0, 1.0);
    let mut d = DiffusionMatrix::zero();
    d.entries[(0, 0)] = 0.5.into();
    c.bench_function(&format!("noise spectrum 513x32 [{}]", mode()), |b| {
        b.iter(|| {
            let s = NoiseSpectrum::build(black_box(&p), 10.0, 513, 32).unwrap();
            black_box(s.quadratic_form(Kernel::Q, &d))
        })
    });
}

criterion_group!(benches, fig2_sweep, fig3_sweep, noise_spectrum);
criterion_main!(benches);
