//! Parallel-vs-sequential benchmark of the Monte Carlo kernels.
//!
//! With the default `parallel` feature this compares a single-threaded rayon
//! pool against one sized to the machine; built with `--no-default-features`
//! the same benchmarks exercise the plain sequential fallback. Run with
//! `cargo bench --bench par_vs_seq` (optionally `--no-default-features`).

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use randinfer::estimators::Estimator;
use randinfer::harness::datagen::{draw_reveal_order, gen_population, treated_count};
use randinfer::martingale::{mc_var_range, Budgets, McConfig, RevealOrder};
use randinfer::rng::{derive_rng, tags};
use randinfer::stein::mc_bias;
use randinfer::swap::SwapConfig;

const BENCH_N: usize = 16;
const BENCH_GAMMA: f64 = 1.0;
const BENCH_SEED: u64 = 42;

fn bench_setup() -> (randinfer::estimators::Population, RevealOrder) {
    let pop = gen_population(BENCH_N, BENCH_GAMMA, 0.0, BENCH_SEED).unwrap();
    let n1 = treated_count(BENCH_N, 0.3);
    let mut a_rng = derive_rng(BENCH_SEED, &[tags::ASSIGNMENT, 0]);
    let treated = randinfer::harness::datagen::draw_assignment(BENCH_N, n1, &mut a_rng);
    let mut o_rng = derive_rng(BENCH_SEED, &[tags::REVEAL, 0]);
    let order = draw_reveal_order(BENCH_N, &treated, &mut o_rng).unwrap();
    (pop, order)
}

fn run_var_range(pop: &randinfer::estimators::Population, order: &RevealOrder) -> f64 {
    let mc = McConfig { budgets: Budgets::DESK, ..Default::default() };
    let est = mc_var_range(pop, Estimator::OlsRa, order, &mc, 7).unwrap();
    est.v_hat + est.r_hat()
}

fn run_bias(pop: &randinfer::estimators::Population) -> f64 {
    let n1 = treated_count(BENCH_N, 0.3);
    let budgets = Budgets::DESK;
    mc_bias(pop, Estimator::OlsRa, n1, &budgets, 0, &SwapConfig::default(), 7)
        .unwrap()
        .b_star_hat
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn bench_kernels(c: &mut Criterion) {
    let (pop, order) = bench_setup();

    #[cfg(feature = "parallel")]
    {
        // At least two workers so the comparison is meaningful even on a
        // single-core host.
        let workers = std::thread::available_parallelism().map_or(2, |v| v.get()).max(2);
        let mut group = c.benchmark_group("mc_var_range");
        group.bench_function("pool_1", |b| {
            b.iter(|| with_pool(1, || black_box(run_var_range(&pop, &order))))
        });
        group.bench_function(format!("pool_{workers}"), |b| {
            b.iter(|| with_pool(workers, || black_box(run_var_range(&pop, &order))))
        });
        group.finish();

        let mut group = c.benchmark_group("mc_bias");
        group.bench_function("pool_1", |b| {
            b.iter(|| with_pool(1, || black_box(run_bias(&pop))))
        });
        group.bench_function(format!("pool_{workers}"), |b| {
            b.iter(|| with_pool(workers, || black_box(run_bias(&pop))))
        });
        group.finish();
    }

    #[cfg(not(feature = "parallel"))]
    {
        let mut group = c.benchmark_group("mc_var_range");
        group.bench_function("sequential", |b| {
            b.iter(|| black_box(run_var_range(&pop, &order)))
        });
        group.finish();

        let mut group = c.benchmark_group("mc_bias");
        group.bench_function("sequential", |b| b.iter(|| black_box(run_bias(&pop))));
        group.finish();
    }
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
