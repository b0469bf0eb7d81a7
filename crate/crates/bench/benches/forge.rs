use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use relu_forge::assembly::presets;
use relu_forge::net_ir::EvalScratch;
use relu_forge::primitives::square_approx;
use relu_forge::verify::{build_network, sup_error, GridSpec, Recipe};
use relu_forge::{approx_smooth, BoundKind, SizeBudget, TargetFunction};

fn builders(c: &mut Criterion) {
    let mut g = c.benchmark_group("build");
    for l in [2usize, 4, 8] {
        g.bench_with_input(BenchmarkId::new("square", l), &l, |b, &l| {
            b.iter(|| square_approx(SizeBudget::new(2, l).unwrap()).unwrap())
        });
    }
    for n in [1usize, 2] {
        let r = Recipe::new(BoundKind::PointMatch, 2, 1, n, 2);
        g.bench_with_input(BenchmarkId::new("point-match", n), &r, |b, r| {
            b.iter(|| build_network(r, None, 0).unwrap())
        });
    }
    let f = presets::sinpi(1, 2).unwrap();
    for n in [1usize, 2, 3] {
        g.bench_with_input(BenchmarkId::new("smooth-sinpi", n), &n, |b, &n| {
            b.iter(|| approx_smooth(&f, SizeBudget::new(n, 2).unwrap()).unwrap())
        });
    }
    g.finish();
}

fn evaluation(c: &mut Criterion) {
    let f = presets::sinpi(2, 2).unwrap();
    let net = approx_smooth(&f, SizeBudget::new(1, 2).unwrap()).unwrap();
    let mut scratch = EvalScratch::default();
    c.bench_function("eval/smooth-2d", |b| b.iter(|| net.eval_with(black_box(&[0.3, 0.7]), &mut scratch)[0]));

    let sq = square_approx(SizeBudget::new(2, 6).unwrap()).unwrap();
    let grid = GridSpec::new(1, 10_001, 0).unwrap();
    let target = TargetFunction::new("x^2", 1, 2, 2.0, |x: &[f64]| x[0] * x[0]).unwrap();
    c.bench_function("sup-error/square-1e4", |b| b.iter(|| sup_error(&sq, &target, &grid).unwrap()));
}

criterion_group!(benches, builders, evaluation);
criterion_main!(benches);
