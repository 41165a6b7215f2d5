//! One-dimensional laws given through a negative log-density.
//!
//! A law is `p(x) = e^{-V(x)} / Z` on a support interval; `V` is an arbitrary
//! real function (finite or `+inf` where the density vanishes). Construction
//! normalizes by adaptive quadrature: unbounded tails are first truncated
//! where the remaining mass falls below `tail_mass_eps`, then the mass, mean
//! and second moment over the truncated range are cached. All later queries
//! (CDF, partial means, quantiles) integrate over that range.

use crate::error::{Error, Result};
use crate::quad;
use crate::roots;
use std::fmt;
use std::sync::Arc;

/// Interval of the real line, possibly unbounded on either side.
#[derive(Clone, Copy, PartialEq)]
pub struct SupportInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SupportInterval {
    /// The whole real line.
    pub const REAL_LINE: SupportInterval = SupportInterval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || !(lo < hi) {
            return Err(Error::Domain(format!(
                "support must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(SupportInterval { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    fn shifted(&self, delta: f64) -> SupportInterval {
        SupportInterval {
            lo: self.lo + delta,
            hi: self.hi + delta,
        }
    }

    fn scaled(&self, c: f64) -> SupportInterval {
        SupportInterval {
            lo: self.lo * c,
            hi: self.hi * c,
        }
    }
}

impl fmt::Debug for SupportInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Tolerances for every quadrature performed on a law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Relative tolerance on each integral.
    pub rel_tol: f64,
    /// Absolute tolerance floor, for integrals whose value is near zero.
    pub abs_tol: f64,
    /// Cap on panel bisections per integral.
    pub max_subdivisions: usize,
    /// Unbounded tails are cut where the remaining mass is below this
    /// fraction of the total.
    pub tail_mass_eps: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 200,
            tail_mass_eps: 1e-13,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol > 0.0
            && self.abs_tol.is_finite()
            && self.max_subdivisions >= 1
            && self.tail_mass_eps > 0.0
            && self.tail_mass_eps < 1e-3;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid quadrature config: {self:?}")))
        }
    }
}

/// Which side of a threshold a partial moment covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `E[X; X <= t]`
    Lower,
    /// `E[X; X > t]`
    Upper,
}

type NegLogDensity = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A normalized 1-D law `e^{-V(x)} / Z` on a support interval.
#[derive(Clone)]
pub struct Density1D {
    v: NegLogDensity,
    support: SupportInterval,
    log_norm: f64,
    mean: f64,
    second_moment: f64,
    trunc: (f64, f64),
    breaks: Vec<f64>,
    cfg: QuadratureConfig,
}

impl fmt::Debug for Density1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density1D")
            .field("support", &self.support)
            .field("log_norm", &self.log_norm)
            .field("mean", &self.mean)
            .field("second_moment", &self.second_moment)
            .field("trunc", &self.trunc)
            .finish()
    }
}

impl Density1D {
    /// Normalize `e^{-v}` on `support` into a law.
    pub fn new<F>(v: F, support: SupportInterval, cfg: QuadratureConfig) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_breaks(v, support, Vec::new(), cfg)
    }

    /// Like [`Density1D::new`], additionally declaring interior points where
    /// `v` is non-smooth so quadrature panels never straddle them.
    pub fn with_breaks<F>(
        v: F,
        support: SupportInterval,
        breaks: Vec<f64>,
        cfg: QuadratureConfig,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(Arc::new(v), support, breaks, cfg)
    }

    fn build(
        v: NegLogDensity,
        support: SupportInterval,
        mut breaks: Vec<f64>,
        cfg: QuadratureConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        breaks.retain(|b| b.is_finite() && *b > support.lo && *b < support.hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let probes = probe_points(support, &breaks);
        let mut v_min = f64::INFINITY;
        let mut anchor = f64::NAN;
        for &x in &probes {
            let vx = v(x);
            if vx.is_finite() && vx < v_min {
                v_min = vx;
                anchor = x;
            }
        }
        if !v_min.is_finite() {
            return Err(Error::Domain(
                "negative log-density is not finite at any probe point".into(),
            ));
        }

        let g = {
            let v = v.clone();
            move |x: f64| {
                if x < support.lo || x > support.hi {
                    return 0.0;
                }
                (-(v(x) - v_min)).exp()
            }
        };

        let lo_t = if support.lo.is_finite() {
            support.lo
        } else {
            quad::truncate_tail(
                &g,
                anchor,
                -1.0,
                cfg.tail_mass_eps,
                cfg.rel_tol,
                cfg.abs_tol,
                cfg.max_subdivisions,
            )?
            .cut
        };
        let hi_t = if support.hi.is_finite() {
            support.hi
        } else {
            quad::truncate_tail(
                &g,
                anchor,
                1.0,
                cfg.tail_mass_eps,
                cfg.rel_tol,
                cfg.abs_tol,
                cfg.max_subdivisions,
            )?
            .cut
        };

        let mass = quad::integrate(
            &g,
            lo_t,
            hi_t,
            cfg.rel_tol,
            cfg.abs_tol,
            cfg.max_subdivisions,
            &breaks,
        )?;
        if !(mass.value.is_finite() && mass.value > 0.0) {
            return Err(Error::NonIntegrable(format!(
                "total mass {} is not a positive finite number",
                mass.value
            )));
        }
        let log_norm = mass.value.ln() - v_min;

        let mut d = Density1D {
            v,
            support,
            log_norm,
            mean: 0.0,
            second_moment: 0.0,
            trunc: (lo_t, hi_t),
            breaks,
            cfg,
        };
        d.mean = d.integral(|x, p| x * p, lo_t, hi_t)?;
        d.second_moment = d.integral(|x, p| x * x * p, lo_t, hi_t)?;
        Ok(d)
    }

    /// Integrate `f(x, pdf(x))` over `[a, b] ∩ trunc`.
    fn integral<F: Fn(f64, f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        let lo = a.max(self.trunc.0);
        let hi = b.min(self.trunc.1);
        if !(lo < hi) {
            return Ok(0.0);
        }
        let integrand = |x: f64| f(x, self.pdf(x));
        let est = quad::integrate(
            &integrand,
            lo,
            hi,
            self.cfg.rel_tol,
            self.cfg.abs_tol,
            self.cfg.max_subdivisions,
            &self.breaks,
        )?;
        Ok(est.value)
    }

    /// Re-run normalization from the stored `V`; a fixed point for an
    /// already-normalized law.
    pub fn normalize(&self) -> Result<Self> {
        Self::build(
            self.v.clone(),
            self.support,
            self.breaks.clone(),
            self.cfg,
        )
    }

    /// The raw negative log-density `V(x)` (without the normalization
    /// shift); infinite outside the support.
    pub fn neg_log_density(&self, x: f64) -> f64 {
        if x < self.support.lo || x > self.support.hi {
            return f64::INFINITY;
        }
        (self.v)(x)
    }

    /// Normalized density value at `x`; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.support.lo || x > self.support.hi {
            return 0.0;
        }
        (-((self.v)(x) + self.log_norm)).exp()
    }

    pub fn support(&self) -> SupportInterval {
        self.support
    }

    pub fn quad_config(&self) -> QuadratureConfig {
        self.cfg
    }

    /// `log Z` where `Z = Int e^{-V}` over the support.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    pub fn variance(&self) -> f64 {
        (self.second_moment - self.mean * self.mean).max(0.0)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Effective integration range after tail truncation.
    pub fn truncated_range(&self) -> (f64, f64) {
        self.trunc
    }

    /// Interior non-smooth points declared at construction.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// `P(X <= t)`, clamped to `[0, 1]`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t.is_nan() {
            return f64::NAN;
        }
        if t <= self.trunc.0 {
            return 0.0;
        }
        if t >= self.trunc.1 {
            return 1.0;
        }
        let mass = self
            .integral(|_, p| p, self.trunc.0, t)
            .expect("CDF quadrature failed on a normalized law");
        mass.clamp(0.0, 1.0)
    }

    /// `E[X; X <= t]` (side = lower) or `E[X; X > t]` (side = upper).
    pub fn partial_mean(&self, t: f64, side: Side) -> Result<f64> {
        if t.is_nan() {
            return Err(Error::Domain("partial_mean threshold is NaN".into()));
        }
        match side {
            Side::Lower => self.integral(|x, p| x * p, self.trunc.0, t),
            Side::Upper => self.integral(|x, p| x * p, t, self.trunc.1),
        }
    }

    /// Inverse CDF for `p` strictly inside `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "quantile probability must lie in (0, 1), got {p}"
            )));
        }
        let (lo, hi) = self.trunc;
        let x_tol = 1e-12 * (hi - lo).max(1.0);
        roots::brent(|x| self.cdf(x) - p, lo, hi, x_tol)
    }

    /// Law of `X + delta`.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::Domain(format!("shift must be finite, got {delta}")));
        }
        let inner = self.v.clone();
        Ok(Density1D {
            v: Arc::new(move |x| inner(x - delta)),
            support: self.support.shifted(delta),
            log_norm: self.log_norm,
            mean: self.mean + delta,
            second_moment: self.second_moment + 2.0 * delta * self.mean + delta * delta,
            trunc: (self.trunc.0 + delta, self.trunc.1 + delta),
            breaks: self.breaks.iter().map(|b| b + delta).collect(),
            cfg: self.cfg,
        })
    }

    /// Law of `c * X` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!(
                "scale must be positive and finite, got {c}"
            )));
        }
        let inner = self.v.clone();
        let log_c = c.ln();
        Ok(Density1D {
            v: Arc::new(move |x| inner(x / c) + log_c),
            support: self.support.scaled(c),
            log_norm: self.log_norm,
            mean: self.mean * c,
            second_moment: self.second_moment * c * c,
            trunc: (self.trunc.0 * c, self.trunc.1 * c),
            breaks: self.breaks.iter().map(|b| b * c).collect(),
            cfg: self.cfg,
        })
    }
}

fn probe_points(support: SupportInterval, breaks: &[f64]) -> Vec<f64> {
    let mut pts = Vec::new();
    if support.is_bounded() {
        let n = 65;
        for i in 0..=n {
            pts.push(support.lo + (support.hi - support.lo) * i as f64 / n as f64);
        }
    } else {
        if support.lo.is_finite() {
            pts.push(support.lo);
        }
        if support.hi.is_finite() {
            pts.push(support.hi);
        }
        if support.contains(0.0) {
            pts.push(0.0);
        }
        for j in -10..=30 {
            let m = 2.0f64.powi(j);
            for x in [m, -m] {
                if support.contains(x) {
                    pts.push(x);
                }
            }
        }
    }
    pts.extend_from_slice(breaks);
    // midpoints between consecutive breakpoints find a positive piece even
    // when the density vanishes on part of the support
    let mut edges: Vec<f64> = breaks.to_vec();
    if support.lo.is_finite() {
        edges.insert(0, support.lo);
    }
    if support.hi.is_finite() {
        edges.push(support.hi);
    }
    for w in edges.windows(2) {
        pts.push(0.5 * (w[0] + w[1]));
    }
    pts.retain(|x| x.is_finite());
    pts
}

/// Report of the convexity probe of `V` on a quantile-bounded grid.
#[derive(Clone, Copy, Debug)]
pub struct LogConcavityReport {
    pub is_plausibly_logconcave: bool,
    /// Most negative second difference of `V` seen on the grid
    /// (the smallest one when none is negative).
    pub worst_violation: f64,
}

/// Probe log-concavity by second differences of `V` on an `n_points` grid
/// spanning the quantile range `[tail_mass_eps, 1 - tail_mass_eps]`.
pub fn logconcavity_probe(d: &Density1D, n_points: usize) -> Result<LogConcavityReport> {
    if n_points < 5 {
        return Err(Error::Domain(format!(
            "log-concavity probe needs at least 5 grid points, got {n_points}"
        )));
    }
    let eps = d.quad_config().tail_mass_eps;
    let lo = d.quantile(eps)?;
    let hi = d.quantile(1.0 - eps)?;
    let xs = quad::linspace(lo, hi, n_points);
    let vs: Vec<f64> = xs.iter().map(|&x| d.neg_log_density(x)).collect();
    let v_scale = vs
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut worst = f64::INFINITY;
    for w in vs.windows(3) {
        let d2 = w[0] - 2.0 * w[1] + w[2];
        let d2 = if d2.is_nan() { f64::NEG_INFINITY } else { d2 };
        worst = worst.min(d2);
    }
    let tol = 1e-9 * (1.0 + v_scale);
    Ok(LogConcavityReport {
        is_plausibly_logconcave: worst >= -tol,
        worst_violation: worst,
    })
}

/// Weighted atoms on the line, sorted by value with duplicates merged.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDist {
    atoms: Vec<(f64, f64)>,
    total_weight: f64,
}

impl EmpiricalDist {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("empirical law needs at least one atom".into()));
        }
        for &(v, w) in &points {
            if !v.is_finite() || !w.is_finite() || w <= 0.0 {
                return Err(Error::Domain(format!(
                    "empirical atom ({v}, {w}) must have finite value and positive weight"
                )));
            }
        }
        let mut sorted = points;
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (v, w) in sorted {
            match atoms.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => atoms.push((v, w)),
            }
        }
        let total_weight = atoms.iter().map(|a| a.1).sum();
        Ok(EmpiricalDist {
            atoms,
            total_weight,
        })
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| (v, 1.0)).collect())
    }

    /// Sorted distinct atoms with merged weights.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, w)| v * w).sum::<f64>() / self.total_weight
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(v, w)| v * v * w).sum::<f64>() / self.total_weight
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let mass: f64 = self
            .atoms
            .iter()
            .take_while(|&&(v, _)| v <= t)
            .map(|&(_, w)| w)
            .sum();
        mass / self.total_weight
    }
}

/// Built-in family descriptors.
///
/// The Weibull family is parameterized by its survival function
/// `P(X > x) = e^{-x^k}`, so the scale is fixed at 1.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Gaussian { mu: f64, sigma: f64 },
    Laplace { mu: f64, b: f64 },
    Uniform { a: f64, b: f64 },
    Weibull { k: f64 },
    PiecewiseConst { breaks: Vec<f64>, values: Vec<f64> },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Gaussian { .. } => "gaussian",
            FamilySpec::Laplace { .. } => "laplace",
            FamilySpec::Uniform { .. } => "uniform",
            FamilySpec::Weibull { .. } => "weibull",
            FamilySpec::PiecewiseConst { .. } => "piecewise",
        }
    }

    /// Build the normalized law for this descriptor.
    pub fn build(&self, cfg: QuadratureConfig) -> Result<Density1D> {
        match self {
            FamilySpec::Gaussian { mu, sigma } => {
                let (mu, sigma) = (*mu, *sigma);
                if !mu.is_finite() || !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::Domain(format!(
                        "gaussian needs finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
                    )));
                }
                Density1D::new(
                    move |x| {
                        let z = (x - mu) / sigma;
                        0.5 * z * z
                    },
                    SupportInterval::REAL_LINE,
                    cfg,
                )
            }
            FamilySpec::Laplace { mu, b } => {
                let (mu, b) = (*mu, *b);
                if !mu.is_finite() || !(b.is_finite() && b > 0.0) {
                    return Err(Error::Domain(format!(
                        "laplace needs finite mu and b > 0, got mu={mu}, b={b}"
                    )));
                }
                Density1D::with_breaks(
                    move |x| (x - mu).abs() / b,
                    SupportInterval::REAL_LINE,
                    vec![mu],
                    cfg,
                )
            }
            FamilySpec::Uniform { a, b } => {
                let (a, b) = (*a, *b);
                let support = SupportInterval::new(a, b)?;
                if !support.is_bounded() {
                    return Err(Error::Domain(format!(
                        "uniform needs finite endpoints, got [{a}, {b}]"
                    )));
                }
                Density1D::new(|_| 0.0, support, cfg)
            }
            FamilySpec::Weibull { k } => {
                let k = *k;
                if !(k.is_finite() && k > 0.0) {
                    return Err(Error::Domain(format!(
                        "weibull needs shape k > 0, got {k}"
                    )));
                }
                let log_k = k.ln();
                Density1D::new(
                    move |x| {
                        if x <= 0.0 {
                            f64::INFINITY
                        } else {
                            x.powf(k) - log_k - (k - 1.0) * x.ln()
                        }
                    },
                    SupportInterval::new(0.0, f64::INFINITY)?,
                    cfg,
                )
            }
            FamilySpec::PiecewiseConst { breaks, values } => {
                if breaks.len() < 2 || values.len() + 1 != breaks.len() {
                    return Err(Error::Domain(format!(
                        "piecewise needs n+1 breakpoints for n values, got {} and {}",
                        breaks.len(),
                        values.len()
                    )));
                }
                if breaks.windows(2).any(|w| !(w[0] < w[1])) || breaks.iter().any(|b| !b.is_finite())
                {
                    return Err(Error::Domain(
                        "piecewise breakpoints must be finite and strictly increasing".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::Domain(
                        "piecewise values must be finite and nonnegative".into(),
                    ));
                }
                if values.iter().all(|&v| v == 0.0) {
                    return Err(Error::Domain(
                        "piecewise values must carry positive total mass".into(),
                    ));
                }
                let breaks_cl = breaks.clone();
                let neg_log: Vec<f64> = values.iter().map(|&v| -v.ln()).collect();
                let support = SupportInterval::new(breaks[0], breaks[breaks.len() - 1])?;
                let interior = breaks[1..breaks.len() - 1].to_vec();
                Density1D::with_breaks(
                    move |x| {
                        // partition_point gives the piece index of x
                        let i = breaks_cl[1..breaks_cl.len() - 1]
                            .iter()
                            .take_while(|&&b| x >= b)
                            .count();
                        neg_log[i]
                    },
                    support,
                    interior,
                    cfg,
                )
            }
        }
    }

    /// Parse a `key = value` descriptor, e.g.
    ///
    /// ```text
    /// family = piecewise
    /// breaks = -2 -0.1 0.1 2
    /// values = 0.125 2.625 0.125
    /// ```
    pub fn parse_config(text: &str) -> Result<FamilySpec> {
        let mut kv = std::collections::BTreeMap::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Domain(format!("line {}: expected `key = value`", line_no + 1))
            })?;
            kv.insert(key.trim().to_ascii_lowercase(), value.trim().to_string());
        }
        let family = kv
            .remove("family")
            .ok_or_else(|| Error::Domain("descriptor is missing `family`".into()))?
            .to_ascii_lowercase();
        let scalar = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<f64> {
            kv.get(key)
                .ok_or_else(|| Error::Domain(format!("{family} descriptor is missing `{key}`")))?
                .parse::<f64>()
                .map_err(|e| Error::Domain(format!("bad value for `{key}`: {e}")))
        };
        let list = |kv: &std::collections::BTreeMap<String, String>, key: &str| -> Result<Vec<f64>> {
            let raw = kv
                .get(key)
                .ok_or_else(|| Error::Domain(format!("{family} descriptor is missing `{key}`")))?;
            raw.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Domain(format!("bad entry in `{key}`: {e}")))
                })
                .collect()
        };
        let spec = match family.as_str() {
            "gaussian" | "normal" => FamilySpec::Gaussian {
                mu: scalar(&kv, "mu")?,
                sigma: scalar(&kv, "sigma")?,
            },
            "laplace" => FamilySpec::Laplace {
                mu: scalar(&kv, "mu")?,
                b: scalar(&kv, "b")?,
            },
            "uniform" => FamilySpec::Uniform {
                a: scalar(&kv, "a")?,
                b: scalar(&kv, "b")?,
            },
            "weibull" => FamilySpec::Weibull {
                k: scalar(&kv, "k")?,
            },
            "piecewise" | "piecewise_const" => FamilySpec::PiecewiseConst {
                breaks: list(&kv, "breaks")?,
                values: list(&kv, "values")?,
            },
            other => {
                return Err(Error::Domain(format!(
                    "unknown family `{other}` (expected gaussian, laplace, uniform, weibull, or piecewise)"
                )))
            }
        };
        Ok(spec)
    }
}

/// Build the normalized law for a family descriptor.
pub fn make_family(spec: &FamilySpec, cfg: QuadratureConfig) -> Result<Density1D> {
    spec.build(cfg)
}

/// Shape `k` at which the Weibull law with survival `e^{-x^k}` has its mean
/// equal to its median, solved on `(1, 20)` to absolute tolerance `1e-6`.
pub fn weibull_mean_median_k() -> Result<f64> {
    let gap = |k: f64| libm::tgamma(1.0 + 1.0 / k) - std::f64::consts::LN_2.powf(1.0 / k);
    roots::brent(gap, 1.0 + 1e-9, 20.0, 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn gaussian() -> Density1D {
        FamilySpec::Gaussian { mu: 0.0, sigma: 1.0 }.build(cfg()).unwrap()
    }

    #[test]
    fn gaussian_normalizer_matches_closed_form() {
        let d = gaussian();
        let expected = (2.0 * std::f64::consts::PI).sqrt().ln();
        assert!((d.log_norm() - expected).abs() < 1e-9);
        assert!(d.mean().abs() < 1e-10);
        assert!((d.second_moment() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_unit_normalizer_is_zero() {
        let d = FamilySpec::Uniform { a: 0.0, b: 1.0 }.build(cfg()).unwrap();
        assert!(d.log_norm().abs() < 1e-12);
        assert!((d.mean() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent() {
        let d = gaussian();
        let d2 = d.normalize().unwrap();
        assert!((d.log_norm() - d2.log_norm()).abs() < 1e-12);
        assert!((d.mean() - d2.mean()).abs() < 1e-12);
    }

    #[test]
    fn anti_gaussian_is_rejected() {
        let err = Density1D::new(|x| -x * x, SupportInterval::REAL_LINE, cfg());
        assert!(matches!(err, Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn cdf_values() {
        let g = gaussian();
        assert!((g.cdf(0.0) - 0.5).abs() < 1e-10);
        let u = FamilySpec::Uniform { a: -1.0, b: 1.0 }.build(cfg()).unwrap();
        assert!((u.cdf(0.5) - 0.75).abs() < 1e-12);
        let l = FamilySpec::Laplace { mu: 0.0, b: 1.0 }.build(cfg()).unwrap();
        let expected = 1.0 - 0.5 * (-1.0f64).exp();
        assert!((l.cdf(1.0) - expected).abs() < 1e-10);
        assert_eq!(g.cdf(-1e9), 0.0);
        assert_eq!(g.cdf(1e9), 1.0);
    }

    #[test]
    fn partial_means() {
        let g = gaussian();
        let expected = -1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((g.partial_mean(0.0, Side::Lower).unwrap() - expected).abs() < 1e-10);
        assert!((g.partial_mean(0.0, Side::Upper).unwrap() + expected).abs() < 1e-10);
        let u = FamilySpec::Uniform { a: -1.0, b: 1.0 }.build(cfg()).unwrap();
        assert!((u.partial_mean(0.0, Side::Lower).unwrap() + 0.25).abs() < 1e-12);
        assert_eq!(u.partial_mean(f64::INFINITY, Side::Upper).unwrap(), 0.0);
    }

    #[test]
    fn quantiles_invert_cdf() {
        let g = gaussian();
        assert!(g.quantile(0.5).unwrap().abs() < 1e-9);
        let u = FamilySpec::Uniform { a: 0.0, b: 1.0 }.build(cfg()).unwrap();
        assert!((u.quantile(0.25).unwrap() - 0.25).abs() < 1e-9);
        let l = FamilySpec::Laplace { mu: 0.0, b: 1.0 }.build(cfg()).unwrap();
        assert!((l.quantile(0.75).unwrap() - std::f64::consts::LN_2).abs() < 1e-9);
        assert!(matches!(g.quantile(0.0), Err(Error::Domain(_))));
        assert!(matches!(g.quantile(1.0), Err(Error::Domain(_))));
        assert!(matches!(g.quantile(-0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn family_validation() {
        assert!(matches!(
            FamilySpec::Gaussian { mu: 0.0, sigma: 0.0 }.build(cfg()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            FamilySpec::Uniform { a: 1.0, b: 1.0 }.build(cfg()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            FamilySpec::Weibull { k: -2.0 }.build(cfg()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            FamilySpec::PiecewiseConst {
                breaks: vec![0.0, 1.0],
                values: vec![-1.0],
            }
            .build(cfg()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            FamilySpec::PiecewiseConst {
                breaks: vec![0.0, 1.0, 2.0],
                values: vec![0.0, 0.0],
            }
            .build(cfg()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn weibull_unit_shape_is_exponential() {
        let d = FamilySpec::Weibull { k: 1.0 }.build(cfg()).unwrap();
        assert!((d.mean() - 1.0).abs() < 1e-9);
        assert!((d.cdf(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn piecewise_example_mass_is_one() {
        let d = FamilySpec::PiecewiseConst {
            breaks: vec![-2.0, -0.1, 0.1, 2.0],
            values: vec![0.125, 2.625, 0.125],
        }
        .build(cfg())
        .unwrap();
        assert!(d.log_norm().abs() < 1e-10);
        assert!(d.mean().abs() < 1e-12);
        assert!((d.cdf(0.0) - 0.5).abs() < 1e-10);
        assert!((d.pdf(0.0) - 2.625).abs() < 1e-10);
        assert!((d.pdf(1.0) - 0.125).abs() < 1e-10);
    }

    #[test]
    fn probe_flags_families_correctly() {
        let g = logconcavity_probe(&gaussian(), 101).unwrap();
        assert!(g.is_plausibly_logconcave);
        let l = FamilySpec::Laplace { mu: 0.0, b: 1.0 }.build(cfg()).unwrap();
        assert!(logconcavity_probe(&l, 101).unwrap().is_plausibly_logconcave);
        let u = FamilySpec::Uniform { a: -1.0, b: 1.0 }.build(cfg()).unwrap();
        assert!(logconcavity_probe(&u, 101).unwrap().is_plausibly_logconcave);
        let p = FamilySpec::PiecewiseConst {
            breaks: vec![-2.0, -0.1, 0.1, 2.0],
            values: vec![0.125, 2.625, 0.125],
        }
        .build(cfg())
        .unwrap();
        let rep = logconcavity_probe(&p, 201).unwrap();
        assert!(!rep.is_plausibly_logconcave);
        assert!(rep.worst_violation < -1.0);
    }

    #[test]
    fn weibull_balance_shape() {
        let k = weibull_mean_median_k().unwrap();
        assert!((3.42..=3.46).contains(&k), "k = {k}");
        let residual = libm::tgamma(1.0 + 1.0 / k) - std::f64::consts::LN_2.powf(1.0 / k);
        assert!(residual.abs() < 1e-6);
        // the bracket endpoints really do straddle the root
        assert!(libm::tgamma(2.0) - std::f64::consts::LN_2 > 0.0);
        assert!(libm::tgamma(1.05) - std::f64::consts::LN_2.powf(0.05) < 0.0);
    }

    #[test]
    fn empirical_atoms_merge_and_sort() {
        let e = EmpiricalDist::new(vec![(1.0, 1.0), (0.0, 2.0), (1.0, 3.0)]).unwrap();
        assert_eq!(e.atoms(), &[(0.0, 2.0), (1.0, 4.0)]);
        assert_eq!(e.total_weight(), 6.0);
        assert!((e.mean() - 4.0 / 6.0).abs() < 1e-15);
        assert!(matches!(
            EmpiricalDist::new(vec![(0.0, -1.0)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(EmpiricalDist::new(vec![]), Err(Error::Domain(_))));
    }

    #[test]
    fn config_parsing_round_trips() {
        let spec = FamilySpec::parse_config(
            "# a law\nfamily = gaussian\nmu = 1.5\nsigma = 2\n",
        )
        .unwrap();
        assert_eq!(spec, FamilySpec::Gaussian { mu: 1.5, sigma: 2.0 });
        let spec = FamilySpec::parse_config(
            "family = piecewise\nbreaks = -2, -0.1, 0.1, 2\nvalues = 0.125 2.625 0.125\n",
        )
        .unwrap();
        assert_eq!(
            spec,
            FamilySpec::PiecewiseConst {
                breaks: vec![-2.0, -0.1, 0.1, 2.0],
                values: vec![0.125, 2.625, 0.125],
            }
        );
        assert!(FamilySpec::parse_config("family = cauchy\n").is_err());
        assert!(FamilySpec::parse_config("mu = 0\n").is_err());
    }

    #[test]
    fn shift_and_scale_transform_moments() {
        let g = gaussian();
        let s = g.shifted(2.0).unwrap();
        assert!((s.mean() - 2.0).abs() < 1e-10);
        assert!((s.cdf(2.0) - 0.5).abs() < 1e-10);
        assert!((s.second_moment() - 5.0).abs() < 1e-9);
        let c = g.scaled(3.0).unwrap();
        assert!((c.second_moment() - 9.0).abs() < 1e-8);
        assert!((c.cdf(0.0) - 0.5).abs() < 1e-10);
    }
}
