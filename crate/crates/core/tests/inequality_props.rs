use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regimesplit::density::{FamilySpec, QuadratureConfig};
use regimesplit::inequality::{self, ConvexPotential};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn thousand_random_potentials_satisfy_the_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for i in 0..1000 {
        let v = inequality::random_piecewise_potential(&mut rng, 8);
        let c = inequality::check_lemma(&v, 1e-9).unwrap();
        assert!(c.holds, "instance {i}: slack = {}", c.slack);
        assert!(c.slack >= -1e-9, "instance {i}: slack = {}", c.slack);
    }
}

#[test]
fn near_equality_happens_only_for_affine_potentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..200 {
        let v = inequality::random_piecewise_potential(&mut rng, 8);
        let c = inequality::check_lemma(&v, 1e-9).unwrap();
        let slopes = match &v {
            ConvexPotential::PiecewiseLinear { slopes, .. } => slopes.clone(),
            _ => unreachable!("generator yields piecewise-linear potentials"),
        };
        let spread = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - slopes.iter().copied().fold(f64::INFINITY, f64::min);
        if c.slack < 1e-9 {
            assert!(spread < 1e-12, "tiny slack {} with spread {spread}", c.slack);
        }
    }
}

#[test]
fn affine_potentials_sit_on_the_equality_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..50 {
        let lambda = rng.gen_range(0.05..4.0);
        let v0 = rng.gen_range(-2.0..2.0);
        let v = ConvexPotential::piecewise_linear(vec![0.0], vec![lambda], v0).unwrap();
        let c = inequality::check_lemma(&v, 1e-9).unwrap();
        assert!(c.slack.abs() < 1e-9, "lambda {lambda}: slack {}", c.slack);
    }
}

#[test]
fn visible_convexity_gives_visible_slack() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..50 {
        let s0 = rng.gen_range(0.1..1.5);
        let knot = rng.gen_range(0.3..3.0);
        let jump = rng.gen_range(0.5..2.0);
        let v = ConvexPotential::piecewise_linear(vec![0.0, knot], vec![s0, s0 + jump], 0.0)
            .unwrap();
        let c = inequality::check_lemma(&v, 1e-9).unwrap();
        assert!(c.slack > 1e-6, "slack {} for jump {jump} at {knot}", c.slack);
    }
}

#[test]
fn shifted_potentials_certify_residual_life_slope() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let k_star = regimesplit::density::weibull_mean_median_k().unwrap();
    let laws = vec![
        FamilySpec::Gaussian { mu: 0.0, sigma: 1.0 },
        FamilySpec::Laplace { mu: 0.5, b: 1.2 },
        FamilySpec::Weibull { k: k_star },
        FamilySpec::Uniform { a: -1.0, b: 2.0 },
    ];
    for spec in laws {
        let d = spec.build(cfg()).unwrap();
        for _ in 0..50 {
            let t = d.quantile(rng.gen_range(0.05..0.95)).unwrap();
            let vt = inequality::shifted_potential(&d, t);
            let c = inequality::check_lemma(&vt, 1e-8).unwrap();
            assert!(c.holds, "{spec:?} at t = {t}: slack = {}", c.slack);
        }
    }
}

#[test]
fn residual_life_and_inactivity_time_bound_the_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let d = FamilySpec::Gaussian { mu: 0.0, sigma: 1.0 }.build(cfg()).unwrap();
    for _ in 0..30 {
        let t = d.quantile(rng.gen_range(0.05..0.95)).unwrap();
        let m = inequality::residual_life(&d, t).unwrap();
        let k = inequality::inactivity_time(&d, t).unwrap();
        assert!(m > 0.0 && k > 0.0);
        let gap = regimesplit::splitcore::mk_gap(&d, t).unwrap();
        assert!((gap - (m - k)).abs() < 1e-9);
    }
}
