use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regimesplit::density::{FamilySpec, QuadratureConfig, Side};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn builtin_families() -> Vec<FamilySpec> {
    vec![
        FamilySpec::Gaussian { mu: 0.7, sigma: 1.3 },
        FamilySpec::Laplace { mu: -0.4, b: 0.8 },
        FamilySpec::Uniform { a: -2.0, b: 1.0 },
        FamilySpec::Weibull { k: 2.5 },
        FamilySpec::PiecewiseConst {
            breaks: vec![-2.0, -0.1, 0.1, 2.0],
            values: vec![0.125, 2.625, 0.125],
        },
    ]
}

#[test]
fn every_family_normalizes() {
    for spec in builtin_families() {
        let d = spec.build(cfg()).unwrap();
        let (_, hi) = d.truncated_range();
        assert!(
            (d.cdf(hi) - 1.0).abs() < 1e-9,
            "{spec:?}: total mass {}",
            d.cdf(hi)
        );
    }
}

#[test]
fn partial_moments_add_to_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for spec in builtin_families() {
        let d = spec.build(cfg()).unwrap();
        for _ in 0..50 {
            let t = d.quantile(rng.gen_range(0.001..0.999)).unwrap();
            let lo = d.partial_mean(t, Side::Lower).unwrap();
            let hi = d.partial_mean(t, Side::Upper).unwrap();
            assert!(
                (lo + hi - d.mean()).abs() < 1e-9,
                "{spec:?} at t = {t}: {lo} + {hi} != {}",
                d.mean()
            );
        }
    }
}

#[test]
fn cdf_quantile_round_trip() {
    for spec in builtin_families() {
        let d = spec.build(cfg()).unwrap();
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let q = d.quantile(p).unwrap();
            assert!(
                (d.cdf(q) - p).abs() < 1e-8,
                "{spec:?}: cdf(quantile({p})) = {}",
                d.cdf(q)
            );
        }
    }
}

#[test]
fn symmetric_families_are_weakly_symmetric() {
    let laws = vec![
        FamilySpec::Gaussian { mu: 1.5, sigma: 0.7 },
        FamilySpec::Laplace { mu: -2.0, b: 1.1 },
        FamilySpec::Uniform { a: 0.0, b: 5.0 },
    ];
    for spec in laws {
        let d = spec.build(cfg()).unwrap();
        assert!(
            (d.cdf(d.mean()) - 0.5).abs() < 1e-9,
            "{spec:?}: cdf(mean) = {}",
            d.cdf(d.mean())
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gaussian_moments_match_parameters(
        mu in -5.0f64..5.0,
        sigma in 0.2f64..3.0,
    ) {
        let d = FamilySpec::Gaussian { mu, sigma }.build(cfg()).unwrap();
        prop_assert!((d.mean() - mu).abs() < 1e-8);
        prop_assert!((d.variance() - sigma * sigma).abs() < 1e-7);
    }

    #[test]
    fn uniform_cdf_is_linear(
        a in -4.0f64..0.0,
        width in 0.5f64..6.0,
        p in 0.01f64..0.99,
    ) {
        let d = FamilySpec::Uniform { a, b: a + width }.build(cfg()).unwrap();
        let x = a + p * width;
        prop_assert!((d.cdf(x) - p).abs() < 1e-9);
    }

    #[test]
    fn cdf_is_monotone(
        mu in -3.0f64..3.0,
        b in 0.3f64..2.0,
        t1 in -6.0f64..6.0,
        t2 in -6.0f64..6.0,
    ) {
        let d = FamilySpec::Laplace { mu, b }.build(cfg()).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(d.cdf(lo) <= d.cdf(hi) + 1e-12);
    }
}
