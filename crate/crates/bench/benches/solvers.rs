use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regimesplit::density::{Density1D, EmpiricalDist, FamilySpec, QuadratureConfig};
use regimesplit::geometry::{hexagon, r_polygon, rat};
use regimesplit::linalg::SymMat;
use regimesplit::splitcore::{f_x, solve_empirical, solve_global, solve_logconcave};

fn gaussian() -> Density1D {
    FamilySpec::Gaussian { mu: 0.3, sigma: 1.1 }
        .build(QuadratureConfig::default())
        .unwrap()
}

fn two_peaks() -> Density1D {
    FamilySpec::PiecewiseConst {
        breaks: vec![-2.0, -0.1, 0.1, 2.0],
        values: vec![0.125, 2.625, 0.125],
    }
    .build(QuadratureConfig::default())
    .unwrap()
}

fn random_spd(n: usize, seed: u64) -> SymMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += g[i * n + k] * g[j * n + k];
            }
            data[i * n + j] = s + if i == j { 0.5 } else { 0.0 };
        }
    }
    SymMat::new(n, data).unwrap()
}

fn bench_objective_eval(c: &mut Criterion) {
    let d = gaussian();
    c.bench_function("f_x gaussian", |b| {
        b.iter(|| f_x(&d, black_box(0.7)).unwrap())
    });
}

fn bench_logconcave_solver(c: &mut Criterion) {
    let d = gaussian();
    c.bench_function("solve_logconcave gaussian", |b| {
        b.iter(|| solve_logconcave(black_box(&d)).unwrap())
    });
}

fn bench_global_solver(c: &mut Criterion) {
    let d = two_peaks();
    c.bench_function("solve_global two-peaks grid=512", |b| {
        b.iter(|| solve_global(black_box(&d), 512, 1e-9).unwrap())
    });
}

fn bench_empirical_solver(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let values: Vec<f64> = (0..10_000).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let emp = EmpiricalDist::from_values(&values).unwrap();
    c.bench_function("solve_empirical n=10000", |b| {
        b.iter(|| solve_empirical(black_box(&emp)).unwrap())
    });
}

fn bench_polygon_functional(c: &mut Criterion) {
    let hex = hexagon();
    let t = rat(1);
    c.bench_function("r_polygon hexagon t=1", |b| {
        b.iter(|| r_polygon(black_box(&hex), black_box(&t)).unwrap())
    });
}

fn bench_jacobi(c: &mut Criterion) {
    let m = random_spd(30, 23);
    c.bench_function("jacobi_eigen n=30", |b| {
        b.iter(|| black_box(&m).jacobi_eigen().unwrap())
    });
}

criterion_group!(
    benches,
    bench_objective_eval,
    bench_logconcave_solver,
    bench_global_solver,
    bench_empirical_solver,
    bench_polygon_functional,
    bench_jacobi
);
criterion_main!(benches);
