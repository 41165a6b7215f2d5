//! The full verification suite: each check pins one of the headline claims
//! with its stated tolerance and reports computed-vs-expected values. The
//! CLI `verify` command and the acceptance test target both run these.
//!
//! Checks never panic on mathematical failure; they return `passed = false`
//! with the offending values in `details`. Fixed internal seeds make every
//! check deterministic.

use crate::density::{self, FamilySpec, QuadratureConfig};
use crate::error::Result;
use crate::geometry;
use crate::inequality::{self, ConvexPotential};
use crate::linalg::{dot, SymMat};
use crate::multidim::{self, EllipticalModel};
use crate::report::{fmt_f64, json_escape};
use crate::splitcore;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Weibull};
use std::time::{Duration, Instant};

/// Outcome of one verification check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    /// The mathematical claim being tested, printable alongside the result.
    pub claim: &'static str,
    pub passed: bool,
    pub details: String,
    pub elapsed: Duration,
}

impl Check {
    pub fn render(&self, with_claim: bool) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut line = format!(
            "{status} {:<12} [{:7.3} s] {}",
            self.name,
            self.elapsed.as_secs_f64(),
            self.details
        );
        if with_claim {
            line.push_str(&format!("\n     claim: {}", self.claim));
        }
        line
    }

    pub fn to_json(&self) -> String {
        format!(
            "{{\"name\":\"{}\",\"passed\":{},\"details\":\"{}\",\"elapsed_s\":{},\"claim\":\"{}\"}}",
            json_escape(self.name),
            self.passed,
            json_escape(&self.details),
            fmt_f64(self.elapsed.as_secs_f64()),
            json_escape(self.claim)
        )
    }
}

pub const CHECK_NAMES: [&str; 10] = [
    "gaussian-split",
    "two-maxima",
    "hexagon",
    "lemma",
    "monotonicity",
    "weibull-k",
    "elliptical",
    "monte-carlo",
    "oracle",
    "shift",
];

pub fn run_check(name: &str) -> Option<Check> {
    match name {
        "gaussian-split" => Some(check_gaussian_split()),
        "two-maxima" => Some(check_two_maxima()),
        "hexagon" => Some(check_hexagon()),
        "lemma" => Some(check_lemma_suite()),
        "monotonicity" => Some(check_monotonicity()),
        "weibull-k" => Some(check_weibull_k()),
        "elliptical" => Some(check_elliptical()),
        "monte-carlo" => Some(check_monte_carlo()),
        "oracle" => Some(check_oracle()),
        "shift" => Some(check_shift_identity()),
        _ => None,
    }
}

pub fn run_all() -> Vec<Check> {
    CHECK_NAMES
        .iter()
        .map(|n| run_check(n).expect("all listed names are runnable"))
        .collect()
}

fn timed(
    name: &'static str,
    claim: &'static str,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> Check {
    let start = Instant::now();
    let (passed, details) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("errored: {e}")),
    };
    Check {
        name,
        claim,
        passed,
        details,
        elapsed: start.elapsed(),
    }
}

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

pub fn check_gaussian_split() -> Check {
    timed(
        "gaussian-split",
        "a Gaussian law splits optimally at its mean, with levels mu -/+ sigma sqrt(2/pi)",
        || {
            let lvl = (2.0 / std::f64::consts::PI).sqrt();
            let mut worst_t = 0.0f64;
            let mut worst_ab = 0.0f64;
            for &mu in &[0.0, 3.0] {
                for &sigma in &[1.0, 2.0] {
                    let d = FamilySpec::Gaussian { mu, sigma }.build(cfg())?;
                    let r = splitcore::solve_logconcave(&d)?;
                    worst_t = worst_t.max((r.thresholds[0] - mu).abs());
                    worst_ab = worst_ab
                        .max((r.alpha - (mu - sigma * lvl)).abs())
                        .max((r.beta - (mu + sigma * lvl)).abs());
                }
            }
            Ok((
                worst_t < 1e-8 && worst_ab < 1e-7,
                format!(
                    "worst |threshold - mu| = {worst_t:.2e} (tol 1e-8), worst level error = {worst_ab:.2e} (tol 1e-7)"
                ),
            ))
        },
    )
}

fn two_peaks_law() -> Result<crate::density::Density1D> {
    FamilySpec::PiecewiseConst {
        breaks: vec![-2.0, -0.1, 0.1, 2.0],
        values: vec![0.125, 2.625, 0.125],
    }
    .build(cfg())
}

/// Closed form of the split functional for the two-peak law on `[0.1, 2]`.
fn two_peaks_fx(t: f64) -> f64 {
    (2.0 - t) * (t + 2.0) * (t + 2.0) / (4.0 * (6.0 + t))
}

pub fn check_two_maxima() -> Check {
    timed(
        "two-maxima",
        "a symmetric two-peak piecewise-constant law has exactly two optimal thresholds at -/+(2 sqrt(5) - 4)",
        || {
            let d = two_peaks_law()?;
            let r = splitcore::solve_global(&d, 512, 1e-9)?;
            let t_star = 2.0 * 5.0f64.sqrt() - 4.0;
            if r.thresholds.len() != 2 {
                return Ok((
                    false,
                    format!("expected 2 tied thresholds, got {:?}", r.thresholds),
                ));
            }
            let loc_err = (r.thresholds[0] + t_star)
                .abs()
                .max((r.thresholds[1] - t_star).abs());
            let val_err = (r.fx_value - two_peaks_fx(t_star)).abs();
            let beats_inner = r.fx_value > splitcore::f_x(&d, 0.1)?;
            Ok((
                loc_err < 1e-6 && val_err < 1e-7 && beats_inner,
                format!(
                    "thresholds -/+{:.9} vs {t_star:.9} (err {loc_err:.2e}), f = {:.9} (err {val_err:.2e}), beats f(0.1): {beats_inner}",
                    r.thresholds[1], r.fx_value
                ),
            ))
        },
    )
}

pub fn check_hexagon() -> Check {
    timed(
        "hexagon",
        "for the uniform law on a centered integer hexagon the cut at 1 beats the centered cut: R(1) = 9389/4995 > R(0) = 22045/12168",
        || {
            let r = geometry::hexagon_counterexample()?;
            let area_ok = r.area == geometry::rat(104);
            let r0_ok = r.r0 == geometry::rat_frac(22045, 12168);
            let r1_ok = r.r1 == geometry::rat_frac(9389, 4995);
            Ok((
                area_ok && r.centered && r0_ok && r1_ok && r.counterexample_holds,
                format!(
                    "area = {} (want 104), centered = {}, R(0) = {}, R(1) = {}, R(1) > R(0): {}",
                    r.area, r.centered, r.r0, r.r1, r.counterexample_holds
                ),
            ))
        },
    )
}

pub fn check_lemma_suite() -> Check {
    check_lemma_suite_with(1000, 1004)
}

pub fn check_lemma_suite_with(n: usize, seed: u64) -> Check {
    timed(
        "lemma",
        "e^{-V(0)} int y e^{-V} <= (int e^{-V})^2 for convex V on [0, inf), with equality exactly for affine V",
        move || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst_slack = f64::INFINITY;
            for i in 0..n {
                let v = inequality::random_piecewise_potential(&mut rng, 8);
                let c = inequality::check_lemma(&v, 1e-9)?;
                worst_slack = worst_slack.min(c.slack);
                if !c.holds || c.slack < -1e-9 {
                    return Ok((
                        false,
                        format!("instance {i} violates the inequality: slack = {:.3e}", c.slack),
                    ));
                }
            }
            let mut worst_eq = 0.0f64;
            for _ in 0..10 {
                let lambda = rng.gen_range(0.1..3.0);
                let v0 = rng.gen_range(-2.0..2.0);
                let v = ConvexPotential::piecewise_linear(vec![0.0], vec![lambda], v0)?;
                let c = inequality::check_lemma(&v, 1e-9)?;
                worst_eq = worst_eq.max(c.slack.abs());
            }
            Ok((
                worst_eq < 1e-9,
                format!(
                    "{n}/{n} random convex potentials hold (min slack {worst_slack:.3e}); worst affine |slack| = {worst_eq:.2e} (tol 1e-9)"
                ),
            ))
        },
    )
}

pub fn check_monotonicity() -> Check {
    timed(
        "monotonicity",
        "for log-concave laws the mean residual life never increases and the mean inactivity time never decreases",
        || {
            let k_star = density::weibull_mean_median_k()?;
            let laws: Vec<(&str, FamilySpec)> = vec![
                ("gaussian", FamilySpec::Gaussian { mu: 0.0, sigma: 1.0 }),
                ("laplace", FamilySpec::Laplace { mu: 0.0, b: 1.0 }),
                ("uniform", FamilySpec::Uniform { a: -1.0, b: 1.0 }),
                ("weibull", FamilySpec::Weibull { k: k_star }),
            ];
            let mut details = Vec::new();
            let mut all_clean = true;
            for (name, spec) in laws {
                let d = spec.build(cfg())?;
                let r = inequality::monotonicity_probe(&d, 100)?;
                all_clean &= r.m_violations == 0 && r.k_violations == 0;
                details.push(format!(
                    "{name}: {}+{} violations (worst step {:.1e})",
                    r.m_violations, r.k_violations, r.worst
                ));
            }
            Ok((all_clean, details.join("; ")))
        },
    )
}

pub fn check_weibull_k() -> Check {
    timed(
        "weibull-k",
        "the Weibull shape with mean equal to median sits near 3.439, and that law splits optimally at its mean",
        || {
            let k = density::weibull_mean_median_k()?;
            let in_bracket = (3.42..=3.46).contains(&k);
            let d = FamilySpec::Weibull { k }.build(cfg())?;
            let r = splitcore::solve_logconcave(&d)?;
            let mean = libm::tgamma(1.0 + 1.0 / k);
            let gap = (r.thresholds[0] - mean).abs();
            Ok((
                in_bracket && gap < 1e-4,
                format!(
                    "k = {k:.6} (want within [3.42, 3.46]), |threshold - mean| = {gap:.2e} (tol 1e-4)"
                ),
            ))
        },
    )
}

pub fn check_elliptical() -> Check {
    timed(
        "elliptical",
        "the best halfspace normal for an elliptical law is a top eigenvector of the scatter matrix, cut at the mean, with value 4 c0^2 lambda_max",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(1007);
            let mut sigmas: Vec<SymMat> = vec![
                SymMat::diag(&[4.0, 1.0]),
                SymMat::new(2, vec![2.0, 1.0, 1.0, 2.0])?,
            ];
            for _ in 0..5 {
                sigmas.push(multidim::random_spd(&mut rng, 3, 1.0));
            }
            let mut worst_rq = 0.0f64;
            let mut worst_val = 0.0f64;
            let mut worst_t = 0.0f64;
            for sigma in sigmas {
                let d = sigma.n();
                let model = EllipticalModel::gaussian(vec![0.0; d], sigma.clone())?;
                let r = multidim::best_direction(&model)?;
                worst_rq = worst_rq
                    .max((multidim::rayleigh(&sigma, &r.u_star)? - r.lambda_max).abs());
                let via_reduction = multidim::f_tilde(&model, &r.u_star, 0.0)?;
                worst_val = worst_val.max((via_reduction - r.value_at_zero).abs());
                let t = multidim::optimal_t_check(&model, &r.u_star, 64)?;
                worst_t = worst_t.max(t.t_star.abs());
            }
            Ok((
                worst_rq < 1e-8 && worst_val < 1e-8 && worst_t < 1e-6,
                format!(
                    "7 scatter matrices: worst |rayleigh - lambda_max| = {worst_rq:.2e} (tol 1e-8), worst value gap = {worst_val:.2e} (tol 1e-8), worst |t*| = {worst_t:.2e} (tol 1e-6)"
                ),
            ))
        },
    )
}

pub fn check_monte_carlo() -> Check {
    timed(
        "monte-carlo",
        "plug-in Monte Carlo estimates of the halfspace objective and the projection regression slope match the exact reduction",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(1008);
            let n = 200_000;
            let mut worst_f = 0.0f64;
            let mut worst_slope = 0.0f64;
            for case in 0..20u64 {
                let d = rng.gen_range(2..=4);
                let sigma = multidim::random_spd(&mut rng, d, 1.0);
                let mu: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let model = EllipticalModel::gaussian(mu, sigma.clone())?;
                let u = multidim::random_unit(&mut rng, d);
                let s = dot(&u, &sigma.mat_vec(&u)).sqrt();
                let t = rng.gen_range(-1.0..1.0) * s;
                let exact = multidim::f_halfspace(&model, &u, t)?;
                let est = multidim::f_mc(&model, &u, t, n, 9000 + case)?;
                let sigmas_off = (est.value - exact).abs() / est.std_error;
                worst_f = worst_f.max(sigmas_off);
                if sigmas_off >= 4.0 {
                    return Ok((
                        false,
                        format!(
                            "case {case}: F estimate {:.6} vs exact {exact:.6} is {sigmas_off:.2} standard errors off",
                            est.value
                        ),
                    ));
                }
                let v = multidim::random_unit(&mut rng, d);
                let expected = dot(&u, &sigma.mat_vec(&v)) / dot(&v, &sigma.mat_vec(&v));
                let slope = multidim::regression_slope_mc(&model, &u, &v, n, 9100 + case)?;
                let slope_off = (slope.value - expected).abs() / slope.std_error;
                worst_slope = worst_slope.max(slope_off);
                if slope_off >= 4.0 {
                    return Ok((
                        false,
                        format!(
                            "case {case}: slope estimate {:.6} vs exact {expected:.6} is {slope_off:.2} standard errors off",
                            slope.value
                        ),
                    ));
                }
            }
            Ok((
                true,
                format!(
                    "20 random cases, n = {n}: worst F deviation {worst_f:.2} SE, worst slope deviation {worst_slope:.2} SE (limit 4)"
                ),
            ))
        },
    )
}

fn laplace_inverse_cdf(mu: f64, b: f64, u: f64) -> f64 {
    if u < 0.5 {
        mu + b * (2.0 * u).ln()
    } else {
        mu - b * (2.0 * (1.0 - u)).ln()
    }
}

pub fn check_oracle() -> Check {
    timed(
        "oracle",
        "on finite samples, the population-optimal threshold costs at most 2% more than the exact empirical optimum (5% for the two-sided exponential, whose objective is nearly flat around its minimizer)",
        || {
            let k_star = density::weibull_mean_median_k()?;
            type Sampler = Box<dyn Fn(&mut ChaCha8Rng) -> f64>;
            let weibull = Weibull::new(1.0, k_star).expect("valid weibull parameters");
            // The two-sided exponential objective moves under 3% over half a
            // scale unit around its minimizer, so samples of size 1000
            // overfit past 2% in roughly one draw out of seven; the other
            // families stay under 2% with margin.
            let families: Vec<(&str, FamilySpec, f64, Sampler)> = vec![
                (
                    "gaussian",
                    FamilySpec::Gaussian { mu: 1.0, sigma: 2.0 },
                    1.02,
                    Box::new(|r: &mut ChaCha8Rng| 1.0 + 2.0 * r.sample::<f64, _>(StandardNormal)),
                ),
                (
                    "laplace",
                    FamilySpec::Laplace { mu: 0.0, b: 1.0 },
                    1.05,
                    Box::new(|r: &mut ChaCha8Rng| laplace_inverse_cdf(0.0, 1.0, r.gen_range(1e-12..1.0))),
                ),
                (
                    "uniform",
                    FamilySpec::Uniform { a: -1.0, b: 3.0 },
                    1.02,
                    Box::new(|r: &mut ChaCha8Rng| r.gen_range(-1.0..3.0)),
                ),
                (
                    "weibull",
                    FamilySpec::Weibull { k: k_star },
                    1.02,
                    Box::new(move |r: &mut ChaCha8Rng| weibull.sample(r)),
                ),
            ];
            let mut lines = Vec::new();
            let mut all_ok = true;
            for (name, spec, limit, draw) in &families {
                let d = spec.build(cfg())?;
                let t_c = splitcore::solve_logconcave(&d)?.thresholds[0];
                let mut worst = 1.0f64;
                for rep in 0..50u64 {
                    let mut rng = ChaCha8Rng::seed_from_u64(1009);
                    rng.set_stream(rep + 1);
                    let values: Vec<f64> = (0..1000).map(|_| draw(&mut rng)).collect();
                    let emp = crate::density::EmpiricalDist::from_values(&values)?;
                    let opt = splitcore::solve_empirical(&emp)?.objective;
                    worst = worst.max(empirical_objective(&values, t_c) / opt);
                }
                all_ok &= worst <= *limit;
                lines.push(format!("{name} worst ratio {worst:.5} (limit {limit})"));
            }
            Ok((
                all_ok,
                format!("50 samples of size 1000 each: {}", lines.join(", ")),
            ))
        },
    )
}

/// Two-level mean squared error of a sample split at `t` with side means.
fn empirical_objective(values: &[f64], t: f64) -> f64 {
    let (mut nl, mut sl, mut nu, mut su) = (0usize, 0.0f64, 0usize, 0.0f64);
    for &v in values {
        if v <= t {
            nl += 1;
            sl += v;
        } else {
            nu += 1;
            su += v;
        }
    }
    let alpha = if nl > 0 { sl / nl as f64 } else { 0.0 };
    let beta = if nu > 0 { su / nu as f64 } else { 0.0 };
    values
        .iter()
        .map(|&v| {
            let lvl = if v <= t { alpha } else { beta };
            (v - lvl) * (v - lvl)
        })
        .sum::<f64>()
        / values.len() as f64
}

pub fn check_shift_identity() -> Check {
    timed(
        "shift",
        "the split functional obeys f_X(t) = f_{X-mu}(t-mu) + mu^2 where mu is the mean",
        || {
            let mut rng = ChaCha8Rng::seed_from_u64(1010);
            let mut worst = 0.0f64;
            for i in 0..400 {
                let spec = match i % 4 {
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
                };
                let d = spec.build(cfg())?;
                let mu = d.mean();
                let centered = d.shifted(-mu)?;
                let t = d.quantile(rng.gen_range(0.02..0.98))?;
                let lhs = splitcore::f_x(&d, t)?;
                let rhs = splitcore::f_x(&centered, t - mu)? + mu * mu;
                worst = worst.max((lhs - rhs).abs());
            }
            Ok((
                worst < 1e-8,
                format!("400 random (family, mean, t) triples: worst |f_X(t) - f_Y(t - mu) - mu^2| = {worst:.2e} (tol 1e-8)"),
            ))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_runnable() {
        let mut names = CHECK_NAMES.to_vec();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), CHECK_NAMES.len());
        assert!(run_check("hexagon").is_some());
        assert!(run_check("bogus").is_none());
    }

    #[test]
    fn hexagon_check_passes_quickly() {
        let c = check_hexagon();
        assert!(c.passed, "{}", c.details);
        assert!(c.render(false).starts_with("PASS hexagon"));
        assert!(c.render(true).contains("claim:"));
        let j = c.to_json();
        assert!(j.contains("\"name\":\"hexagon\""));
        assert!(j.contains("\"passed\":true"));
    }

    #[test]
    fn gaussian_split_check_passes() {
        let c = check_gaussian_split();
        assert!(c.passed, "{}", c.details);
    }
}
