//! Two-regime splitting in d dimensions under quadratic loss.
//!
//! For halfspace regimes `A = {x : <x - mu, u> <= t}` the objective factors
//! through the one-dimensional projection `Z = <X - mu, u>`, which for an
//! elliptical law equals `sqrt(u' Sigma u) * Z0` in distribution. Everything
//! here reduces to the scaled copy of the standardized law `Z0`:
//!
//! ```text
//! F(u,t) = |mu|^2 + |Sigma u|^2 / (u' Sigma u)^2 * E[Z 1{Z<=t}]^2 / (P(Z<=t) P(Z>t))
//! ```
//!
//! The `t`-factor is maximized at `t = 0` for weakly symmetric log-concave
//! projections, and the direction factor is the Rayleigh quotient of `Sigma`,
//! maximized by a top eigenvector.

use crate::density::{Density1D, FamilySpec, QuadratureConfig, Side};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, normalized, Eigen, SymMat};
use crate::report::fmt_f64;
use crate::splitcore::{solve_global, solve_logconcave, split_stats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Multivariate normal; the only kind with an exact sampler.
    Gaussian,
    /// Any other valid standardized projection law.
    Custom,
}

/// Elliptical location-scatter model with an explicit law for the
/// standardized projection `Z0` (mean 0, median 0).
#[derive(Clone, Debug)]
pub struct EllipticalModel {
    mu: Vec<f64>,
    sigma: SymMat,
    eigen: Eigen,
    z0_law: Density1D,
    kind: ModelKind,
}

impl EllipticalModel {
    pub fn new(
        mu: Vec<f64>,
        sigma: SymMat,
        z0_law: Density1D,
        kind: ModelKind,
    ) -> Result<Self> {
        if mu.len() != sigma.n() {
            return Err(Error::Domain(format!(
                "mean has dimension {} but scatter is {}x{}",
                mu.len(),
                sigma.n(),
                sigma.n()
            )));
        }
        if !mu.iter().all(|x| x.is_finite()) {
            return Err(Error::Domain("mean vector must be finite".into()));
        }
        let eigen = sigma.jacobi_eigen()?;
        let lambda_min = *eigen.values.last().unwrap();
        if lambda_min <= 0.0 {
            return Err(Error::Domain(format!(
                "scatter matrix must be positive definite (smallest eigenvalue {lambda_min:e})"
            )));
        }
        if z0_law.mean().abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "projection law must have mean 0, got {:e}",
                z0_law.mean()
            )));
        }
        let median_gap = z0_law.cdf(0.0) - 0.5;
        if median_gap.abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "projection law must have median 0 (weak symmetry), cdf(0) is off by {median_gap:e}"
            )));
        }
        Ok(EllipticalModel {
            mu,
            sigma,
            eigen,
            z0_law,
            kind,
        })
    }

    /// Multivariate normal with the given mean and covariance.
    pub fn gaussian(mu: Vec<f64>, sigma: SymMat) -> Result<Self> {
        let z0 = FamilySpec::Gaussian { mu: 0.0, sigma: 1.0 }.build(QuadratureConfig::default())?;
        EllipticalModel::new(mu, sigma, z0, ModelKind::Gaussian)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &SymMat {
        &self.sigma
    }

    pub fn z0_law(&self) -> &Density1D {
        &self.z0_law
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Law of `Z = <X - mu, u>` for unit `u`.
    fn projection_law(&self, unit_u: &[f64]) -> Result<Density1D> {
        let s = dot(unit_u, &self.sigma.mat_vec(unit_u));
        self.z0_law.scaled(s.sqrt())
    }
}

/// Halfspace regime `{x : <x - mu, u> <= t}` with unit normal `u`.
#[derive(Clone, Debug)]
pub struct HalfspaceCut {
    u: Vec<f64>,
    t: f64,
}

impl HalfspaceCut {
    pub fn new(u: &[f64], t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("offset must be finite, got {t}")));
        }
        Ok(HalfspaceCut {
            u: normalized(u)?,
            t,
        })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn contains(&self, x: &[f64], mu: &[f64]) -> bool {
        let centered: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
        dot(&centered, &self.u) <= self.t
    }
}

/// The optimal regime for quadratic loss and levels `alpha != beta`:
/// `{x : <x, beta - alpha> <= (|beta|^2 - |alpha|^2) / 2}`, returned in the
/// origin-anchored form (membership tests pass `mu = 0`).
pub fn quad_regime_halfspace(alpha: &[f64], beta: &[f64]) -> Result<HalfspaceCut> {
    if alpha.len() != beta.len() {
        return Err(Error::Domain(format!(
            "level dimensions differ: {} vs {}",
            alpha.len(),
            beta.len()
        )));
    }
    let diff: Vec<f64> = beta.iter().zip(alpha).map(|(b, a)| b - a).collect();
    let diff_norm = norm(&diff);
    if diff_norm == 0.0 {
        return Err(Error::Domain(
            "levels are equal; every regime is optimal".into(),
        ));
    }
    let offset = (dot(beta, beta) - dot(alpha, alpha)) / (2.0 * diff_norm);
    HalfspaceCut::new(&diff, offset)
}

/// Membership in the optimal regime for the non-quadratic loss
/// `G(x, y) = (x - y)^2 + x^4` with levels `(0,0)` and `(1,0)`: the set is
/// the epigraph `y >= 2x^3 - 3x^2 + 3x - 1`, not a halfspace.
pub fn cubic_region_member(x: f64, y: f64) -> bool {
    y >= 2.0 * x * x * x - 3.0 * x * x + 3.0 * x - 1.0
}

/// `c0 = E[(Z0)_+]`, the positive-part mean of the standardized projection.
pub fn c0(model: &EllipticalModel) -> Result<f64> {
    let v = model.z0_law.partial_mean(0.0, Side::Upper)?;
    if !(v > 0.0) {
        return Err(Error::Domain(format!(
            "positive-part mean of the projection law must be positive, got {v:e}"
        )));
    }
    Ok(v)
}

/// Rayleigh quotient `u' Sigma^2 u / (u' Sigma u) = |Sigma u|^2 / (u' Sigma u)`.
pub fn rayleigh(sigma: &SymMat, u: &[f64]) -> Result<f64> {
    let unit = normalized(u)?;
    if unit.len() != sigma.n() {
        return Err(Error::Domain(format!(
            "direction has dimension {} but scatter is {}x{}",
            unit.len(),
            sigma.n(),
            sigma.n()
        )));
    }
    let su = sigma.mat_vec(&unit);
    Ok(dot(&su, &su) / dot(&unit, &su))
}

/// Exact halfspace objective `F(u, t) = |mu|^2 + F~(u, t)` via the
/// one-dimensional reduction; `u` is normalized internally.
pub fn f_halfspace(model: &EllipticalModel, u: &[f64], t: f64) -> Result<f64> {
    Ok(dot(&model.mu, &model.mu) + f_tilde(model, u, t)?)
}

/// The centered factor `F~(u, t)`; invariant under mean shifts of the model.
pub fn f_tilde(model: &EllipticalModel, u: &[f64], t: f64) -> Result<f64> {
    let unit = normalized(u)?;
    if unit.len() != model.dim() {
        return Err(Error::Domain(format!(
            "direction has dimension {} but the model is {}-dimensional",
            unit.len(),
            model.dim()
        )));
    }
    let su = model.sigma.mat_vec(&unit);
    let s = dot(&unit, &su);
    let zlaw = model.projection_law(&unit)?;
    let stats = split_stats(&zlaw, t)?;
    let tol = zlaw.quad_config().abs_tol;
    if stats.p <= tol || stats.q <= tol {
        return Err(Error::DegenerateRegime {
            threshold: t,
            mass: stats.p.min(stats.q),
        });
    }
    Ok(dot(&su, &su) / (s * s) * stats.lower_sum * stats.lower_sum / (stats.p * stats.q))
}

/// Best halfspace normal and the objective value at the centered cut.
#[derive(Clone, Debug)]
pub struct DirectionResult {
    pub u_star: Vec<f64>,
    pub lambda_max: f64,
    pub c0: f64,
    /// `F~(u_star, 0) = 4 c0^2 lambda_max`.
    pub value_at_zero: f64,
}

impl DirectionResult {
    pub fn to_json(&self) -> String {
        let us: Vec<String> = self.u_star.iter().map(|&x| fmt_f64(x)).collect();
        format!(
            "{{\"u_star\":[{}],\"lambda_max\":{},\"c0\":{},\"value_at_zero\":{}}}",
            us.join(","),
            fmt_f64(self.lambda_max),
            fmt_f64(self.c0),
            fmt_f64(self.value_at_zero)
        )
    }
}

/// Top eigenvector of the scatter matrix (sign: first nonzero entry
/// positive) together with `4 c0^2 lambda_max`, cross-checked against the
/// exact reduction at `t = 0`.
pub fn best_direction(model: &EllipticalModel) -> Result<DirectionResult> {
    let lambda_max = model.eigen.values[0];
    let u_star = model.eigen.vectors[0].clone();
    let c0 = c0(model)?;
    let value_at_zero = 4.0 * c0 * c0 * lambda_max;
    let via_reduction = f_tilde(model, &u_star, 0.0)?;
    if (via_reduction - value_at_zero).abs() > 1e-8 * (1.0 + value_at_zero.abs()) {
        return Err(Error::Domain(format!(
            "direction value {value_at_zero:e} disagrees with the reduction {via_reduction:e}; \
             the projection law is not weakly symmetric enough"
        )));
    }
    Ok(DirectionResult {
        u_star,
        lambda_max,
        c0,
        value_at_zero,
    })
}

/// Outcome of maximizing `t -> F~(u, t)` along a fixed direction.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdCheck {
    pub t_star: f64,
    pub max_value: f64,
}

/// Maximize the `t`-factor along `u` with the unique-threshold solver and
/// cross-check on a global grid; for a weakly symmetric log-concave
/// projection the maximizer must sit at `t = 0` and anything else errors.
pub fn optimal_t_check(
    model: &EllipticalModel,
    u: &[f64],
    grid_n: usize,
) -> Result<ThresholdCheck> {
    let unit = normalized(u)?;
    let zlaw = model.projection_law(&unit)?;
    let r = solve_logconcave(&zlaw)?;
    let t_star = r.thresholds[0];
    if grid_n >= 64 {
        let rg = solve_global(&zlaw, grid_n, 1e-9)?;
        let agree = rg.thresholds.iter().any(|&tg| (tg - t_star).abs() < 1e-6);
        if !agree {
            return Err(Error::BracketFailure(format!(
                "grid maximizers {:?} do not contain the bisection threshold {t_star}",
                rg.thresholds
            )));
        }
    }
    if t_star.abs() >= 1e-6 {
        return Err(Error::Domain(format!(
            "weakly symmetric projection must split at 0, solver returned {t_star:e}"
        )));
    }
    let su = model.sigma.mat_vec(&unit);
    let s = dot(&unit, &su);
    Ok(ThresholdCheck {
        t_star,
        max_value: dot(&su, &su) / (s * s) * r.fx_value,
    })
}

/// Monte Carlo estimate with a batch-means standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Samples actually consumed (batch size times batch count).
    pub n: usize,
    pub batches: usize,
}

impl McEstimate {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"value\":{},\"std_error\":{},\"n\":{},\"batches\":{}}}",
            fmt_f64(self.value),
            fmt_f64(self.std_error),
            self.n,
            self.batches
        )
    }
}

const MC_BATCHES: usize = 100;

/// One multivariate normal draw `mu + L xi` appended to `out`.
fn sample_gaussian<R: Rng>(rng: &mut R, mu: &[f64], chol: &[f64], out: &mut [f64]) {
    let d = mu.len();
    let xi: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    for i in 0..d {
        let mut x = mu[i];
        for k in 0..=i {
            x += chol[i * d + k] * xi[k];
        }
        out[i] = x;
    }
}

fn mc_prepare(model: &EllipticalModel, n: usize) -> Result<(Vec<f64>, usize)> {
    if model.kind != ModelKind::Gaussian {
        return Err(Error::Domain(
            "Monte Carlo sampling is defined for the Gaussian kind only".into(),
        ));
    }
    if n < 1000 {
        return Err(Error::Domain(format!(
            "Monte Carlo needs n >= 1000, got {n}"
        )));
    }
    let chol = model.sigma.cholesky()?;
    Ok((chol, n / MC_BATCHES))
}

/// Run `per_batch` once per batch, each on its own deterministic substream
/// (stream `b + 1` of the seed; stream 0 stays reserved). Per-batch streams
/// make results independent of thread count and scheduling.
fn run_batches<T, F>(seed: u64, per_batch: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(ChaCha8Rng) -> Result<T> + Sync,
{
    (0..MC_BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64 + 1);
            per_batch(rng)
        })
        .collect()
}

/// Standard error of the pooled estimate from the spread of batch values:
/// `sd(batch) / sqrt(B)`, since the pooled estimator averages `B` batches.
fn batch_std_error(values: &[f64]) -> f64 {
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

struct HalfspaceSums {
    sum_a: Vec<f64>,
    sum_b: Vec<f64>,
    count_a: usize,
    /// Plug-in value of this batch alone, kept for the standard error.
    value: f64,
}

fn halfspace_value(sum_a: &[f64], sum_b: &[f64], count_a: usize, n: usize, t: f64) -> Result<f64> {
    if count_a == 0 || count_a == n {
        return Err(Error::DegenerateRegime {
            threshold: t,
            mass: count_a as f64 / n as f64,
        });
    }
    let m = n as f64;
    let p = count_a as f64 / m;
    let ea: f64 = sum_a.iter().map(|s| (s / m) * (s / m)).sum();
    let eb: f64 = sum_b.iter().map(|s| (s / m) * (s / m)).sum();
    Ok(ea / p + eb / (1.0 - p))
}

/// Plug-in Monte Carlo estimate of the halfspace objective
/// `|E[X 1_A]|^2 / P(A) + |E[X 1_{A^c}]|^2 / P(A^c)` for
/// `A = {<x - mu, u> <= t}`. Deterministic per seed.
///
/// The point estimate pools all samples (its small-sample bias is O(1/n));
/// only the standard error comes from the per-batch values, whose own O(1/m)
/// bias cancels in the spread.
pub fn f_mc(
    model: &EllipticalModel,
    u: &[f64],
    t: f64,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    let unit = normalized(u)?;
    let (chol, batch_size) = mc_prepare(model, n)?;
    let d = model.dim();
    let mu = &model.mu;
    let batches = run_batches(seed, |mut rng| {
        let mut x = vec![0.0; d];
        let mut sum_a = vec![0.0; d];
        let mut sum_b = vec![0.0; d];
        let mut count_a = 0usize;
        for _ in 0..batch_size {
            sample_gaussian(&mut rng, mu, &chol, &mut x);
            let z = x
                .iter()
                .zip(mu)
                .zip(&unit)
                .map(|((xi, mi), ui)| (xi - mi) * ui)
                .sum::<f64>();
            if z <= t {
                count_a += 1;
                for (s, xi) in sum_a.iter_mut().zip(&x) {
                    *s += xi;
                }
            } else {
                for (s, xi) in sum_b.iter_mut().zip(&x) {
                    *s += xi;
                }
            }
        }
        let value = halfspace_value(&sum_a, &sum_b, count_a, batch_size, t)?;
        Ok(HalfspaceSums {
            sum_a,
            sum_b,
            count_a,
            value,
        })
    })?;
    let mut sum_a = vec![0.0; d];
    let mut sum_b = vec![0.0; d];
    let mut count_a = 0usize;
    for b in &batches {
        count_a += b.count_a;
        for i in 0..d {
            sum_a[i] += b.sum_a[i];
            sum_b[i] += b.sum_b[i];
        }
    }
    let n_used = batch_size * MC_BATCHES;
    let value = halfspace_value(&sum_a, &sum_b, count_a, n_used, t)?;
    let batch_values: Vec<f64> = batches.iter().map(|b| b.value).collect();
    Ok(McEstimate {
        value,
        std_error: batch_std_error(&batch_values),
        n: n_used,
        batches: MC_BATCHES,
    })
}

struct RegressionSums {
    sa: f64,
    sb: f64,
    sab: f64,
    sbb: f64,
    value: f64,
}

/// Sample regression slope of `<X, u>` on `<X, v>`; for an elliptical model
/// the population value is `u' Sigma v / (v' Sigma v)`, linear in the
/// conditioning value, which is what makes the halfspace reduction exact.
pub fn regression_slope_mc(
    model: &EllipticalModel,
    u: &[f64],
    v: &[f64],
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    if u.len() != model.dim() || v.len() != model.dim() {
        return Err(Error::Domain("direction dimensions must match the model".into()));
    }
    if !u.iter().chain(v).all(|x| x.is_finite()) {
        return Err(Error::Domain("directions must be finite".into()));
    }
    if norm(v) == 0.0 {
        return Err(Error::Domain("regressor direction must be nonzero".into()));
    }
    let (chol, batch_size) = mc_prepare(model, n)?;
    let d = model.dim();
    let mu = &model.mu;
    let slope = |sa: f64, sb: f64, sab: f64, sbb: f64, m: f64| -> Result<f64> {
        let cov = sab - sa * sb / m;
        let var = sbb - sb * sb / m;
        if var <= 0.0 {
            return Err(Error::Domain(
                "regressor projection is degenerate in the sample".into(),
            ));
        }
        Ok(cov / var)
    };
    let batches = run_batches(seed, |mut rng| {
        let mut x = vec![0.0; d];
        let (mut sa, mut sb, mut sab, mut sbb) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..batch_size {
            sample_gaussian(&mut rng, mu, &chol, &mut x);
            let a = dot(&x, u);
            let b = dot(&x, v);
            sa += a;
            sb += b;
            sab += a * b;
            sbb += b * b;
        }
        let value = slope(sa, sb, sab, sbb, batch_size as f64)?;
        Ok(RegressionSums { sa, sb, sab, sbb, value })
    })?;
    let (mut sa, mut sb, mut sab, mut sbb) = (0.0, 0.0, 0.0, 0.0);
    for r in &batches {
        sa += r.sa;
        sb += r.sb;
        sab += r.sab;
        sbb += r.sbb;
    }
    let n_used = batch_size * MC_BATCHES;
    let value = slope(sa, sb, sab, sbb, n_used as f64)?;
    let batch_values: Vec<f64> = batches.iter().map(|r| r.value).collect();
    Ok(McEstimate {
        value,
        std_error: batch_std_error(&batch_values),
        n: n_used,
        batches: MC_BATCHES,
    })
}

/// Random symmetric positive-definite matrix `A A' + eps I`; test plumbing.
pub fn random_spd<R: Rng>(rng: &mut R, d: usize, scale: f64) -> SymMat {
    let mut a = vec![0.0; d * d];
    for x in a.iter_mut() {
        *x = scale * rng.sample::<f64, _>(StandardNormal);
    }
    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += a[i * d + k] * a[j * d + k];
            }
            data[i * d + j] = s;
        }
        data[i * d + i] += 0.05 * scale * scale;
    }
    SymMat::new(d, data).expect("generated matrix is symmetric by construction")
}

/// Random direction uniform on the sphere; test plumbing.
pub fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if let Ok(u) = normalized(&v) {
            return u;
        }
    }
}

/// Parse a model description:
///
/// ```text
/// dim = 2
/// mu = 0 0
/// sigma = 4 0 0 1   # row-major
/// z0 = gaussian     # gaussian | uniform | laplace, unit variance
/// ```
pub fn parse_model_config(text: &str) -> Result<EllipticalModel> {
    let mut dim: Option<usize> = None;
    let mut mu: Option<Vec<f64>> = None;
    let mut sigma: Option<Vec<f64>> = None;
    let mut z0_name = "gaussian".to_string();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Domain(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        let parse_list = |v: &str| -> Result<Vec<f64>> {
            v.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::Domain(format!("bad number {s:?} for key {key}")))
                })
                .collect()
        };
        match key {
            "dim" => {
                dim = Some(value.parse().map_err(|_| {
                    Error::Domain(format!("bad dimension {value:?}"))
                })?);
            }
            "mu" => mu = Some(parse_list(value)?),
            "sigma" => sigma = Some(parse_list(value)?),
            "z0" => z0_name = value.to_ascii_lowercase(),
            other => {
                return Err(Error::Domain(format!("unknown model key {other:?}")));
            }
        }
    }
    let dim = dim.ok_or_else(|| Error::Domain("model config is missing `dim`".into()))?;
    if dim == 0 {
        return Err(Error::Domain("model dimension must be positive".into()));
    }
    let mu = mu.unwrap_or_else(|| vec![0.0; dim]);
    let sigma_data =
        sigma.ok_or_else(|| Error::Domain("model config is missing `sigma`".into()))?;
    let sigma = SymMat::new(dim, sigma_data)?;
    let cfg = QuadratureConfig::default();
    let sqrt3 = 3.0f64.sqrt();
    let (z0, kind) = match z0_name.as_str() {
        "gaussian" | "normal" => (
            FamilySpec::Gaussian { mu: 0.0, sigma: 1.0 }.build(cfg)?,
            ModelKind::Gaussian,
        ),
        "uniform" => (
            FamilySpec::Uniform { a: -sqrt3, b: sqrt3 }.build(cfg)?,
            ModelKind::Custom,
        ),
        "laplace" => (
            FamilySpec::Laplace { mu: 0.0, b: std::f64::consts::FRAC_1_SQRT_2 }.build(cfg)?,
            ModelKind::Custom,
        ),
        other => {
            return Err(Error::Domain(format!(
                "unknown projection law {other:?} (expected gaussian, uniform, or laplace)"
            )));
        }
    };
    EllipticalModel::new(mu, sigma, z0, kind)
}
