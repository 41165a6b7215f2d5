//! The one-sided integral inequality behind the uniqueness argument.
//!
//! For a convex potential `V` on `[0, inf)` with integrable `e^{-V}`,
//!
//! ```text
//! e^{-V(0)} * int_0^inf y e^{-V(y)} dy  <=  ( int_0^inf e^{-V(y)} dy )^2
//! ```
//!
//! with equality exactly when `V` is affine. Applied to the shifted potential
//! `V_t(u) = V(t + u) - V(t)` of a log-concave density `e^{-V}`, the left and
//! right sides certify the sign of the mean-residual-life derivative, which
//! is what makes the `m - k` gap monotone and the optimal threshold unique.

use crate::density::Density1D;
use crate::error::{Error, Result};
use crate::quad;
use crate::report::fmt_f64;
use crate::splitcore::split_stats;
use rand::Rng;
use rayon::prelude::*;
use std::sync::Arc;

const REL_TOL: f64 = 1e-10;
const ABS_TOL: f64 = 1e-14;
const MAX_SUBDIV: usize = 200;
const TAIL_EPS: f64 = 1e-13;

/// Slopes flatter than this make `e^{-V}` non-integrable in practice.
const MIN_FINAL_SLOPE: f64 = 1e-6;

/// A convex potential on `[0, inf)`, either a black-box function or an exact
/// piecewise-linear spec (integrated in closed form).
#[derive(Clone)]
pub enum ConvexPotential {
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    PiecewiseLinear {
        /// Segment starts, increasing, `knots[0] == 0`. Slope `i` applies on
        /// `[knots[i], knots[i+1])`, the last slope on `[knots.last(), inf)`.
        knots: Vec<f64>,
        /// Right derivatives per segment, nondecreasing, final slope positive.
        slopes: Vec<f64>,
        /// `V(0)`.
        v0: f64,
    },
}

impl std::fmt::Debug for ConvexPotential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConvexPotential::Func(_) => f.write_str("ConvexPotential::Func(..)"),
            ConvexPotential::PiecewiseLinear { knots, slopes, v0 } => f
                .debug_struct("ConvexPotential::PiecewiseLinear")
                .field("knots", knots)
                .field("slopes", slopes)
                .field("v0", v0)
                .finish(),
        }
    }
}

impl ConvexPotential {
    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        ConvexPotential::Func(Arc::new(f))
    }

    pub fn piecewise_linear(knots: Vec<f64>, slopes: Vec<f64>, v0: f64) -> Result<Self> {
        if knots.is_empty() || knots.len() != slopes.len() {
            return Err(Error::Domain(format!(
                "need matching nonempty knots/slopes, got {} and {}",
                knots.len(),
                slopes.len()
            )));
        }
        if knots[0] != 0.0 {
            return Err(Error::Domain(format!(
                "first knot must be 0, got {}",
                knots[0]
            )));
        }
        if !knots.iter().all(|k| k.is_finite()) || !knots.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Domain("knots must be finite and increasing".into()));
        }
        if !slopes.iter().all(|s| s.is_finite()) || !slopes.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::Domain(
                "slopes must be finite and nondecreasing (convexity)".into(),
            ));
        }
        let last = *slopes.last().unwrap();
        if last <= MIN_FINAL_SLOPE {
            return Err(Error::NonIntegrable(format!(
                "final slope {last:e} gives a non-integrable potential"
            )));
        }
        if !v0.is_finite() {
            return Err(Error::Domain(format!("V(0) must be finite, got {v0}")));
        }
        Ok(ConvexPotential::PiecewiseLinear { knots, slopes, v0 })
    }

    /// `V(y)`; `+inf` left of the origin.
    pub fn value(&self, y: f64) -> f64 {
        if y < 0.0 {
            return f64::INFINITY;
        }
        match self {
            ConvexPotential::Func(f) => f(y),
            ConvexPotential::PiecewiseLinear { knots, slopes, v0 } => {
                let mut v = *v0;
                for i in 0..knots.len() {
                    let seg_end = knots.get(i + 1).copied().unwrap_or(f64::INFINITY);
                    if y <= seg_end {
                        return v + slopes[i] * (y - knots[i]);
                    }
                    v += slopes[i] * (seg_end - knots[i]);
                }
                unreachable!("y exceeds the final (unbounded) segment")
            }
        }
    }

    /// `(int_0^inf e^{-(V - V(0))}, int_0^inf y e^{-(V - V(0))})`.
    ///
    /// Working with `V - V(0)` keeps the integrands O(1) for large offsets;
    /// callers restore the `e^{-V(0)}` factors.
    fn scaled_integrals(&self) -> Result<(f64, f64)> {
        match self {
            ConvexPotential::PiecewiseLinear { knots, slopes, v0: _ } => {
                let mut s0 = 0.0f64;
                let mut s1 = 0.0f64;
                // w(y) = V(y) - V(0) accumulated segment by segment
                let mut w_a = 0.0f64;
                for i in 0..knots.len() {
                    let a = knots[i];
                    let s = slopes[i];
                    let e = (-w_a).exp();
                    if !e.is_finite() {
                        return Err(Error::NonIntegrable(format!(
                            "potential reaches {w_a:e} below its origin value at y = {a}"
                        )));
                    }
                    match knots.get(i + 1) {
                        Some(&b) => {
                            let l = b - a;
                            if s == 0.0 {
                                s0 += e * l;
                                s1 += e * (a * l + 0.5 * l * l);
                            } else {
                                let x = s * l;
                                let grow = -libm::expm1(-x); // 1 - e^{-x}
                                s0 += e * grow / s;
                                s1 += e * (a * grow / s + (grow - x * (-x).exp()) / (s * s));
                            }
                            w_a += s * l;
                        }
                        None => {
                            // final segment [a, inf), slope s > 0
                            s0 += e / s;
                            s1 += e * (a / s + 1.0 / (s * s));
                        }
                    }
                }
                Ok((s0, s1))
            }
            ConvexPotential::Func(_) => {
                let v0 = self.value(0.0);
                if !v0.is_finite() {
                    return Err(Error::Domain(format!("V(0) must be finite, got {v0}")));
                }
                let g = |y: f64| {
                    let w = self.value(y) - v0;
                    if w.is_nan() {
                        f64::NAN
                    } else {
                        (-w).exp()
                    }
                };
                let moment = |y: f64| y * g(y);
                let cut0 =
                    quad::truncate_tail(&g, 0.0, 1.0, TAIL_EPS, REL_TOL, ABS_TOL, MAX_SUBDIV)?;
                let cut1 = quad::truncate_tail(
                    &moment, 0.0, 1.0, TAIL_EPS, REL_TOL, ABS_TOL, MAX_SUBDIV,
                )?;
                let s0 = quad::integrate(&g, 0.0, cut0.cut, REL_TOL, ABS_TOL, MAX_SUBDIV, &[])?
                    .value;
                let s1 =
                    quad::integrate(&moment, 0.0, cut1.cut, REL_TOL, ABS_TOL, MAX_SUBDIV, &[])?
                        .value;
                Ok((s0, s1))
            }
        }
    }
}

/// Both sides of the inequality:
/// `lhs = e^{-V(0)} int_0^inf y e^{-V}`, `rhs = (int_0^inf e^{-V})^2`.
pub fn lemma_sides(v: &ConvexPotential) -> Result<(f64, f64)> {
    let v0 = match v {
        ConvexPotential::PiecewiseLinear { v0, .. } => *v0,
        ConvexPotential::Func(_) => v.value(0.0),
    };
    if !v0.is_finite() {
        return Err(Error::Domain(format!("V(0) must be finite, got {v0}")));
    }
    let (s0, s1) = v.scaled_integrals()?;
    let scale = (-2.0 * v0).exp();
    let lhs = scale * s1;
    let rhs = scale * s0 * s0;
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::NonIntegrable(format!(
            "sides overflow for V(0) = {v0} (lhs {lhs:e}, rhs {rhs:e})"
        )));
    }
    Ok((lhs, rhs))
}

/// Outcome of one inequality check.
#[derive(Clone, Copy, Debug)]
pub struct LemmaCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative up to tolerance when the inequality holds.
    pub slack: f64,
}

impl LemmaCheck {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"holds\":{},\"lhs\":{},\"rhs\":{},\"slack\":{}}}",
            self.holds,
            fmt_f64(self.lhs),
            fmt_f64(self.rhs),
            fmt_f64(self.slack)
        )
    }
}

pub fn check_lemma(v: &ConvexPotential, tol: f64) -> Result<LemmaCheck> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be finite and nonnegative, got {tol}"
        )));
    }
    let (lhs, rhs) = lemma_sides(v)?;
    Ok(LemmaCheck {
        holds: lhs <= rhs + tol,
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

/// Mean residual life `m(t) = E[X - t | X > t]`. Needs only `P(X > t) > 0`.
pub fn residual_life(d: &Density1D, t: f64) -> Result<f64> {
    let s = split_stats(d, t)?;
    if s.q <= d.quad_config().abs_tol {
        return Err(Error::DegenerateRegime {
            threshold: t,
            mass: s.q,
        });
    }
    Ok(s.upper_sum / s.q - t)
}

/// Mean inactivity time `k(t) = E[t - X | X <= t]`. Needs only `P(X <= t) > 0`.
pub fn inactivity_time(d: &Density1D, t: f64) -> Result<f64> {
    let s = split_stats(d, t)?;
    if s.p <= d.quad_config().abs_tol {
        return Err(Error::DegenerateRegime {
            threshold: t,
            mass: s.p,
        });
    }
    Ok(t - s.lower_sum / s.p)
}

/// Counts of monotonicity violations of `m` (must not increase) and `k`
/// (must not decrease) on a quantile grid. `worst` is the largest violating
/// step; it is negative or tiny when both curves are clean.
#[derive(Clone, Copy, Debug)]
pub struct MonotonicityReport {
    pub m_violations: usize,
    pub k_violations: usize,
    pub worst: f64,
}

const MONO_TOL: f64 = 1e-8;

/// Probe `m` and `k` on an `n`-point grid of quantiles `[1e-5, 1 - 1e-5]`.
/// Log-concave laws report zero violations; laws with an interior density
/// valley generally do not.
pub fn monotonicity_probe(d: &Density1D, n: usize) -> Result<MonotonicityReport> {
    if n < 3 {
        return Err(Error::Domain(format!("probe needs n >= 3, got {n}")));
    }
    let lo = d.quantile(1e-5)?;
    let hi = d.quantile(1.0 - 1e-5)?;
    let grid = quad::linspace(lo, hi, n);
    let curves: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| Ok((residual_life(d, t)?, inactivity_time(d, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut m_violations = 0usize;
    let mut k_violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for w in curves.windows(2) {
        let dm = w[1].0 - w[0].0;
        let dk = w[0].1 - w[1].1;
        if dm > MONO_TOL {
            m_violations += 1;
        }
        if dk > MONO_TOL {
            k_violations += 1;
        }
        worst = worst.max(dm).max(dk);
    }
    Ok(MonotonicityReport {
        m_violations,
        k_violations,
        worst,
    })
}

fn exp_sample<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    -u.ln()
}

/// Random piecewise-linear convex potential: knot spacings from a unit-rate
/// process truncated to `[0, 10]`, slopes a cumulative sum of nonnegative
/// increments from a (possibly negative) start, final slope forced positive.
/// Supports non-smooth potentials on purpose.
pub fn random_piecewise_potential<R: Rng>(rng: &mut R, max_knots: usize) -> ConvexPotential {
    let max_knots = max_knots.max(1);
    let mut knots = vec![0.0];
    while knots.len() < max_knots {
        let next = knots.last().unwrap() + exp_sample(rng);
        if next >= 10.0 {
            break;
        }
        knots.push(next);
    }
    let mut slopes = Vec::with_capacity(knots.len());
    let mut s = rng.gen_range(-2.0..2.0);
    for _ in 0..knots.len() {
        slopes.push(s);
        s += 0.5 * exp_sample(rng);
    }
    let last = slopes.last_mut().unwrap();
    if *last <= MIN_FINAL_SLOPE {
        *last = MIN_FINAL_SLOPE + exp_sample(rng);
        // restore monotonicity if the forced slope undercuts its neighbor
        let n = slopes.len();
        if n >= 2 && slopes[n - 1] < slopes[n - 2] {
            slopes[n - 1] = slopes[n - 2] + 0.1;
        }
    }
    let v0 = rng.gen_range(-1.0..1.0);
    ConvexPotential::piecewise_linear(knots, slopes, v0)
        .expect("generator produced an invalid potential")
}

/// `V_t(u) = V(t + u) - V(t)` for a density with potential `V`; the lemma
/// applied to this shift certifies `m'(t) <= 0` at `t`.
pub fn shifted_potential(d: &Density1D, t: f64) -> ConvexPotential {
    let d = d.clone();
    let vt = d.neg_log_density(t);
    ConvexPotential::from_fn(move |u| d.neg_log_density(t + u) - vt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{FamilySpec, QuadratureConfig};
    use crate::splitcore;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn affine_potentials_attain_equality() {
        let v = ConvexPotential::piecewise_linear(vec![0.0], vec![1.0], 0.0).unwrap();
        let (lhs, rhs) = lemma_sides(&v).unwrap();
        assert_eq!(lhs, 1.0);
        assert_eq!(rhs, 1.0);

        let v = ConvexPotential::piecewise_linear(vec![0.0], vec![1.0], 2.0).unwrap();
        let (lhs, rhs) = lemma_sides(&v).unwrap();
        assert!((lhs - (-4.0f64).exp()).abs() < 1e-16);
        assert!((lhs - rhs).abs() < 1e-16);

        let c = check_lemma(&v, 1e-10).unwrap();
        assert!(c.holds);
        assert!(c.slack.abs() < 1e-10);
    }

    #[test]
    fn quadratic_potential_sides() {
        let v = ConvexPotential::from_fn(|y| y * y);
        let (lhs, rhs) = lemma_sides(&v).unwrap();
        assert!((lhs - 0.5).abs() < 1e-9, "lhs = {lhs}");
        assert!((rhs - PI / 4.0).abs() < 1e-9, "rhs = {rhs}");
        let c = check_lemma(&v, 0.0).unwrap();
        assert!(c.holds);
        assert!((c.slack - (PI / 4.0 - 0.5)).abs() < 1e-9);
    }

    #[test]
    fn piecewise_closed_form_matches_quadrature() {
        let knots = vec![0.0, 0.7, 2.5, 4.0];
        let slopes = vec![-0.5, 0.0, 1.25, 3.0];
        let v0 = 0.3;
        let exact =
            ConvexPotential::piecewise_linear(knots.clone(), slopes.clone(), v0).unwrap();
        let clone = exact.clone();
        let via_quad = ConvexPotential::from_fn(move |y| clone.value(y));
        let (l1, r1) = lemma_sides(&exact).unwrap();
        let (l2, r2) = lemma_sides(&via_quad).unwrap();
        assert!((l1 - l2).abs() < 1e-9 * l1.abs(), "{l1} vs {l2}");
        assert!((r1 - r2).abs() < 1e-9 * r1.abs(), "{r1} vs {r2}");
        assert!(l1 < r1);
    }

    #[test]
    fn potential_validation() {
        assert!(ConvexPotential::piecewise_linear(vec![0.0, 1.0], vec![2.0, 1.0], 0.0).is_err());
        assert!(ConvexPotential::piecewise_linear(vec![0.5, 1.0], vec![1.0, 2.0], 0.0).is_err());
        assert!(ConvexPotential::piecewise_linear(vec![0.0, 1.0], vec![1.0], 0.0).is_err());
        assert!(matches!(
            ConvexPotential::piecewise_linear(vec![0.0], vec![1e-9], 0.0),
            Err(Error::NonIntegrable(_))
        ));
        assert!(ConvexPotential::piecewise_linear(vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 3.0], 0.0)
            .is_err());
    }

    #[test]
    fn divergent_functional_potential_rejected() {
        let v = ConvexPotential::from_fn(|y| -y);
        assert!(matches!(lemma_sides(&v), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn residual_life_closed_forms() {
        // weibull k = 1 is exactly exponential(1), which is memoryless
        let d = FamilySpec::Weibull { k: 1.0 }.build(cfg()).unwrap();
        for &t in &[0.0, 0.5, 2.0] {
            assert!(
                (residual_life(&d, t).unwrap() - 1.0).abs() < 1e-8,
                "t = {t}"
            );
        }

        let u = FamilySpec::Uniform { a: 0.0, b: 1.0 }.build(cfg()).unwrap();
        assert!((residual_life(&u, 0.5).unwrap() - 0.25).abs() < 1e-10);
        assert!((inactivity_time(&u, 0.5).unwrap() - 0.25).abs() < 1e-10);

        let g = FamilySpec::Gaussian { mu: 0.0, sigma: 1.0 }.build(cfg()).unwrap();
        assert!((residual_life(&g, 0.0).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn one_sided_definitions_extend_past_the_support() {
        let d = FamilySpec::Uniform { a: 0.0, b: 1.0 }.build(cfg()).unwrap();
        // left of the support: residual life is mean - t, inactivity undefined
        assert!((residual_life(&d, -1.0).unwrap() - 1.5).abs() < 1e-10);
        assert!(matches!(
            inactivity_time(&d, -1.0),
            Err(Error::DegenerateRegime { .. })
        ));
        assert!((inactivity_time(&d, 2.0).unwrap() - 1.5).abs() < 1e-10);
        assert!(matches!(
            residual_life(&d, 2.0),
            Err(Error::DegenerateRegime { .. })
        ));
    }

    #[test]
    fn gap_decomposes_into_m_and_k() {
        let d = FamilySpec::Gaussian { mu: 1.0, sigma: 2.0 }.build(cfg()).unwrap();
        let t = 1.7;
        let gap = splitcore::mk_gap(&d, t).unwrap();
        let m = residual_life(&d, t).unwrap();
        let k = inactivity_time(&d, t).unwrap();
        assert!((gap - (m - k)).abs() < 1e-10);
    }

    #[test]
    fn logconcave_laws_probe_clean() {
        let g = FamilySpec::Gaussian { mu: 0.0, sigma: 1.0 }.build(cfg()).unwrap();
        let r = monotonicity_probe(&g, 100).unwrap();
        assert_eq!(r.m_violations, 0);
        assert_eq!(r.k_violations, 0);

        let l = FamilySpec::Laplace { mu: 0.0, b: 1.0 }.build(cfg()).unwrap();
        let r = monotonicity_probe(&l, 100).unwrap();
        assert_eq!(r.m_violations, 0);
        assert_eq!(r.k_violations, 0);
    }

    #[test]
    fn two_peak_law_violates_residual_monotonicity() {
        let d = FamilySpec::PiecewiseConst {
            breaks: vec![-2.0, -0.1, 0.1, 2.0],
            values: vec![0.125, 2.625, 0.125],
        }
        .build(cfg())
        .unwrap();
        let r = monotonicity_probe(&d, 200).unwrap();
        assert!(r.m_violations > 0, "report: {r:?}");
        assert!(r.worst > MONO_TOL);
    }

    #[test]
    fn random_potentials_satisfy_the_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..100 {
            let v = random_piecewise_potential(&mut rng, 6);
            let c = check_lemma(&v, 1e-9).unwrap();
            assert!(c.holds, "instance {i}: {v:?} gives {c:?}");
            assert!(c.slack >= -1e-9);
            if let ConvexPotential::PiecewiseLinear { slopes, .. } = &v {
                assert!(slopes.windows(2).all(|w| w[0] <= w[1]));
                assert!(*slopes.last().unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn strict_convexity_gives_strict_slack() {
        let v =
            ConvexPotential::piecewise_linear(vec![0.0, 1.0], vec![0.5, 2.0], 0.0).unwrap();
        let c = check_lemma(&v, 0.0).unwrap();
        assert!(c.holds);
        assert!(c.slack > 1e-6);
    }

    #[test]
    fn shifted_potential_certifies_residual_slope() {
        let d = FamilySpec::Gaussian { mu: 0.0, sigma: 1.0 }.build(cfg()).unwrap();
        for &t in &[-1.0, 0.0, 0.7, 2.0] {
            let vt = shifted_potential(&d, t);
            assert_eq!(vt.value(0.0), 0.0);
            let c = check_lemma(&vt, 1e-9).unwrap();
            assert!(c.holds, "t = {t}: {c:?}");
        }
    }

    #[test]
    fn lemma_json_shape() {
        let v = ConvexPotential::from_fn(|y| y * y);
        let j = check_lemma(&v, 0.0).unwrap().to_json();
        for key in ["holds", "lhs", "rhs", "slack"] {
            assert!(j.contains(&format!("\"{key}\"")), "missing {key} in {j}");
        }
        assert!(j.contains("\"holds\":true"));
    }
}
