use adrkit::adr::{AdrOperator, AdrParams, ProblemParams, StopRule};
use adrkit::operators::{certify, Flavor, OperatorSpec, Property, SamplingConfig};
use adrkit::resolvents::ResolventHandle;
use adrkit::vecspace::{
    project_scaled_diagonal, Euclidean, ProductVector, ScaledDiagonal, Vector, WeightedSpace,
};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;

/// Deterministic monotone matrix `PPᵀ/n + I/10 + skew`.
fn monotone_matrix(n: usize, salt: f64) -> DMatrix<f64> {
    let p = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 13) as f64 + salt).sin());
    let k = DMatrix::from_fn(n, n, |i, j| ((i * 3 + j * 5) as f64 * salt).cos());
    &p * p.transpose() / n as f64 + DMatrix::identity(n, n) * 0.1 + (&k - k.transpose()) * 0.5
}

fn affine_operator(n: usize) -> AdrOperator {
    let a = OperatorSpec::affine(monotone_matrix(n, 0.3), Vector::from_element(n, 1.0)).unwrap();
    let b =
        OperatorSpec::affine(monotone_matrix(n, 1.7), Vector::from_fn(n, |i, _| i as f64)).unwrap();
    // With α = β = 0 the step sizes must agree.
    let params = AdrParams::new(
        ProblemParams::new(0.8, 0.8, 0.0, 0.0, Flavor::Monotone),
        None,
    )
    .unwrap();
    AdrOperator::new(params, a, b).unwrap()
}

fn bench_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("adr_step");
    for n in [2, 16, 64] {
        let op = affine_operator(n);
        let x = Vector::from_fn(n, |i, _| (i as f64).cos());
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| op.step(black_box(x)).unwrap())
        });
    }
    g.finish();
}

fn bench_run(c: &mut Criterion) {
    let mut g = c.benchmark_group("adr_run_to_1e-10");
    for n in [2, 16, 64] {
        let op = affine_operator(n);
        let x0 = Vector::from_element(n, 5.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &x0, |b, x0| {
            b.iter(|| {
                op.run(black_box(x0), StopRule::new(100_000, 1e-10))
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn bench_certify(c: &mut Criterion) {
    let op = OperatorSpec::affine(monotone_matrix(8, 0.9), Vector::zeros(8)).unwrap();
    let h = ResolventHandle::new(op, 0.5).unwrap();
    let tau = h.cocoercivity().unwrap();
    let cfg = SamplingConfig::new(1000, 1);
    c.bench_function("certify_cocoercive_1000_pairs_dim8", |b| {
        b.iter(|| certify(&h, Property::Cocoercive(tau), &cfg, &Euclidean).unwrap())
    });
}

fn bench_projection(c: &mut Criterion) {
    let (n, d) = (8, 8);
    let space = WeightedSpace::new((1..=n).map(|i| i as f64).collect(), d).unwrap();
    let diag = ScaledDiagonal::new((0..n).map(|i| 1.0 + i as f64 / 4.0).collect()).unwrap();
    let x = ProductVector::from_flat(Vector::from_fn(n * d, |i, _| (i as f64).sin()), n).unwrap();
    c.bench_function("project_scaled_diagonal_8x8", |b| {
        b.iter(|| project_scaled_diagonal(black_box(&x), &diag, &space).unwrap())
    });
}

criterion_group!(
    benches,
    bench_step,
    bench_run,
    bench_certify,
    bench_projection
);
criterion_main!(benches);
