use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regimesplit::density::{FamilySpec, QuadratureConfig};
use regimesplit::splitcore::{self, SplitMethod};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn random_family(rng: &mut ChaCha8Rng) -> FamilySpec {
    match rng.gen_range(0..4) {
        0 => FamilySpec::Gaussian {
            mu: rng.gen_range(-3.0..3.0),
            sigma: rng.gen_range(0.5..2.5),
        },
        1 => FamilySpec::Laplace {
            mu: rng.gen_range(-3.0..3.0),
            b: rng.gen_range(0.5..2.0),
        },
        2 => {
            let a = rng.gen_range(-4.0..2.0);
            FamilySpec::Uniform {
                a,
                b: a + rng.gen_range(0.5..4.0),
            }
        }
        _ => FamilySpec::Weibull {
            k: rng.gen_range(1.5..5.0),
        },
    }
}

#[test]
fn shift_identity_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let d = random_family(&mut rng).build(cfg()).unwrap();
        let mu = d.mean();
        let centered = d.shifted(-mu).unwrap();
        for _ in 0..20 {
            let t = d.quantile(rng.gen_range(0.02..0.98)).unwrap();
            let lhs = splitcore::f_x(&d, t).unwrap();
            let rhs = splitcore::f_x(&centered, t - mu).unwrap() + mu * mu;
            assert!((lhs - rhs).abs() < 1e-8, "t = {t}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn threshold_is_a_critical_point_and_local_max() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..12 {
        let d = random_family(&mut rng).build(cfg()).unwrap();
        let r = splitcore::solve_logconcave(&d).unwrap();
        let c = r.thresholds[0];
        assert!(
            splitcore::mk_gap(&d, c).unwrap().abs() < 1e-8,
            "gap at threshold: {}",
            splitcore::mk_gap(&d, c).unwrap()
        );
        let iqr = d.quantile(0.75).unwrap() - d.quantile(0.25).unwrap();
        let fc = splitcore::f_x(&d, c).unwrap();
        for h in [1e-3 * iqr, 1e-2 * iqr] {
            assert!(splitcore::f_x(&d, c + h).unwrap() < fc);
            assert!(splitcore::f_x(&d, c - h).unwrap() < fc);
        }
    }
}

#[test]
fn solution_invariants_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..12 {
        let d = random_family(&mut rng).build(cfg()).unwrap();
        let r = splitcore::solve_logconcave(&d).unwrap();
        let c = r.thresholds[0];
        assert!(r.alpha < c && c < r.beta);
        assert!((r.objective - (d.second_moment() - r.fx_value)).abs() < 1e-8);
        assert!(r.fx_value >= d.mean() * d.mean() - 1e-10);
        assert!(r.fx_value <= d.second_moment() + 1e-10);
        assert_eq!(r.method, SplitMethod::LogconcaveBisection);
    }
}

#[test]
fn f_descends_away_from_mean_for_weakly_symmetric_laws() {
    let k_star = regimesplit::density::weibull_mean_median_k().unwrap();
    let laws = vec![
        FamilySpec::Gaussian { mu: 0.5, sigma: 1.2 },
        FamilySpec::Laplace { mu: -1.0, b: 0.9 },
        FamilySpec::Uniform { a: -2.0, b: 2.0 },
        FamilySpec::Weibull { k: k_star },
    ];
    for spec in laws {
        let d = spec.build(cfg()).unwrap();
        let hi = d.quantile(1.0 - 1e-6).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let t = d.mean() + (hi - d.mean()) * i as f64 / 199.0;
            let f = splitcore::f_x(&d, t).unwrap();
            assert!(f <= prev + 1e-8, "{spec:?}: f rose at t = {t}");
            prev = f;
        }
    }
}

#[test]
fn skewed_law_splits_away_from_its_mean() {
    // Exponential(1): mean 1, median ln 2, threshold solves t = 2(1 - e^{-t}).
    let d = FamilySpec::Weibull { k: 1.0 }.build(cfg()).unwrap();
    let r = splitcore::solve_logconcave(&d).unwrap();
    assert!((r.thresholds[0] - d.mean()).abs() > 1e-3);
    assert!((d.cdf(d.mean()) - 0.5).abs() > 1e-3);
    assert!((r.thresholds[0] - 1.59362).abs() < 1e-4);
}

#[test]
fn global_solver_agrees_with_bisection_on_random_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..8 {
        let d = random_family(&mut rng).build(cfg()).unwrap();
        let fast = splitcore::solve_logconcave(&d).unwrap();
        let global = splitcore::solve_global(&d, 128, 1e-9).unwrap();
        let nearest = global
            .thresholds
            .iter()
            .map(|&t| (t - fast.thresholds[0]).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-6, "global thresholds {:?}", global.thresholds);
        assert!((global.fx_value - fast.fx_value).abs() < 1e-9);
    }
}

#[test]
fn empirical_solver_beats_every_other_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for _ in 0..20 {
        let n = rng.gen_range(3..60);
        let values: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let emp = regimesplit::density::EmpiricalDist::from_values(&values).unwrap();
        let r = splitcore::solve_empirical(&emp).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        for w in sorted.windows(2) {
            if w[1] - w[0] < 1e-12 {
                continue;
            }
            let t = 0.5 * (w[0] + w[1]);
            assert!(objective_at(&values, t) >= r.objective - 1e-12);
        }
    }
}

fn objective_at(values: &[f64], t: f64) -> f64 {
    let lower: Vec<f64> = values.iter().copied().filter(|&v| v <= t).collect();
    let upper: Vec<f64> = values.iter().copied().filter(|&v| v > t).collect();
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len().max(1) as f64;
    let (a, b) = (mean(&lower), mean(&upper));
    values
        .iter()
        .map(|&v| {
            let lvl = if v <= t { a } else { b };
            (v - lvl) * (v - lvl)
        })
        .sum::<f64>()
        / values.len() as f64
}
