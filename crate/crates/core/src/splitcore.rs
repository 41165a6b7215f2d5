//! The two-regime split functional and its solvers.
//!
//! For a law with CDF `P` and threshold `t`, write `p = P(X <= t)`,
//! `L = E[X; X <= t]`, `U = E[X; X > t]`. The split functional is
//!
//! ```text
//! f(t) = L^2 / p + U^2 / (1 - p)
//! ```
//!
//! and the best two-level approximation error is `E[X^2] - max_t f(t)`, with
//! levels `alpha = L/p` and `beta = U/(1-p)` at the optimal `t`. Critical
//! points of `f` are exactly the zeros of the gap between the mean residual
//! life `m(t) = E[X - t | X > t]` and the mean inactivity time
//! `k(t) = E[t - X | X <= t]`; for log-concave laws that gap is strictly
//! decreasing, which gives the bisection solver its bracket.

use crate::density::{logconcavity_probe, Density1D, EmpiricalDist};
use crate::error::{Error, Result};
use crate::quad;
use crate::report::{fmt_f64, json_escape};
use crate::roots;
use rayon::prelude::*;

/// Which solver produced a [`SplitResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitMethod {
    LogconcaveBisection,
    GlobalGrid,
    EmpiricalExact,
}

impl SplitMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitMethod::LogconcaveBisection => "logconcave_bisection",
            SplitMethod::GlobalGrid => "global_grid",
            SplitMethod::EmpiricalExact => "empirical_exact",
        }
    }
}

/// An optimal (or candidate-optimal) two-regime split.
///
/// `thresholds` lists every tied maximizer found, ascending; `alpha`, `beta`,
/// `fx_value` and `objective` are evaluated at `thresholds[0]`. The invariant
/// `objective = E[X^2] - fx_value` holds to 1e-8.
#[derive(Clone, Debug)]
pub struct SplitResult {
    pub thresholds: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Mean squared error `E[(X - alpha 1_{X<=t} - beta 1_{X>t})^2]`.
    pub objective: f64,
    pub fx_value: f64,
    pub method: SplitMethod,
}

impl SplitResult {
    pub fn to_json(&self) -> String {
        let ts: Vec<String> = self.thresholds.iter().map(|&t| fmt_f64(t)).collect();
        format!(
            "{{\"thresholds\":[{}],\"alpha\":{},\"beta\":{},\"objective\":{},\"fx_value\":{},\"method\":\"{}\"}}",
            ts.join(","),
            fmt_f64(self.alpha),
            fmt_f64(self.beta),
            fmt_f64(self.objective),
            fmt_f64(self.fx_value),
            json_escape(self.method.as_str()),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,alpha,beta,objective,fx_value,method\n");
        for &t in &self.thresholds {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_f64(t),
                fmt_f64(self.alpha),
                fmt_f64(self.beta),
                fmt_f64(self.objective),
                fmt_f64(self.fx_value),
                self.method.as_str()
            ));
        }
        out
    }
}

/// Side masses and partial sums at a threshold. All four quantities are
/// integrated directly (the upper mass is not `1 - p`) so each keeps full
/// relative accuracy deep in either tail.
pub(crate) struct SplitStats {
    pub(crate) p: f64,
    pub(crate) q: f64,
    pub(crate) lower_sum: f64,
    pub(crate) upper_sum: f64,
}

pub(crate) fn split_stats(d: &Density1D, t: f64) -> Result<SplitStats> {
    if t.is_nan() {
        return Err(Error::Domain("threshold is NaN".into()));
    }
    let (lo, hi) = d.truncated_range();
    let cfg = d.quad_config();
    let measure = |a: f64, b: f64, moment: bool| -> Result<f64> {
        let a = a.max(lo);
        let b = b.min(hi);
        if !(a < b) {
            return Ok(0.0);
        }
        let integrand = |x: f64| if moment { x * d.pdf(x) } else { d.pdf(x) };
        Ok(quad::integrate(
            &integrand,
            a,
            b,
            cfg.rel_tol,
            cfg.abs_tol,
            cfg.max_subdivisions,
            d.breakpoints(),
        )?
        .value)
    };
    Ok(SplitStats {
        p: measure(lo, t, false)?,
        q: measure(t, hi, false)?,
        lower_sum: measure(lo, t, true)?,
        upper_sum: measure(t, hi, true)?,
    })
}

fn mass_tol(d: &Density1D) -> f64 {
    d.quad_config().abs_tol
}

/// The split functional `f(t)`; at degenerate thresholds (one side carrying
/// no mass) it returns its limit, the squared mean.
pub fn f_x(d: &Density1D, t: f64) -> Result<f64> {
    let s = split_stats(d, t)?;
    let tol = mass_tol(d);
    if s.p <= tol || s.q <= tol {
        return Ok(d.mean() * d.mean());
    }
    Ok(s.lower_sum * s.lower_sum / s.p + s.upper_sum * s.upper_sum / s.q)
}

/// Conditional means `(E[X | X <= c], E[X | X > c])`.
pub fn conditional_levels(d: &Density1D, c: f64) -> Result<(f64, f64)> {
    let s = split_stats(d, c)?;
    let tol = mass_tol(d);
    if s.p <= tol {
        return Err(Error::DegenerateRegime {
            threshold: c,
            mass: s.p,
        });
    }
    if s.q <= tol {
        return Err(Error::DegenerateRegime {
            threshold: c,
            mass: s.q,
        });
    }
    Ok((s.lower_sum / s.p, s.upper_sum / s.q))
}

/// Mean squared error of the best two-level approximation with threshold `c`,
/// i.e. `E[X^2] - f(c)`.
pub fn reduced_objective(d: &Density1D, c: f64) -> Result<f64> {
    Ok(d.second_moment() - f_x(d, c)?)
}

/// Gap `m(t) - k(t)` between mean residual life and mean inactivity time.
///
/// Both quantities are translation equivariant, so this equals the gap of
/// the mean-centered law evaluated at `t - mean`; its zeros are the critical
/// points of `f`, and for log-concave laws it is strictly decreasing.
pub fn mk_gap(d: &Density1D, t: f64) -> Result<f64> {
    let (alpha, beta) = conditional_levels(d, t)?;
    let residual_life = beta - t;
    let inactivity = t - alpha;
    Ok(residual_life - inactivity)
}

fn result_at(d: &Density1D, thresholds: Vec<f64>, method: SplitMethod) -> Result<SplitResult> {
    let c = thresholds[0];
    let (alpha, beta) = conditional_levels(d, c)?;
    let fx_value = f_x(d, c)?;
    Ok(SplitResult {
        thresholds,
        alpha,
        beta,
        objective: d.second_moment() - fx_value,
        fx_value,
        method,
    })
}

/// Solve for the unique optimal threshold of a log-concave law by bisecting
/// the strictly decreasing gap `m - k`.
///
/// The law is first screened with [`logconcavity_probe`]; use
/// [`solve_logconcave_unchecked`] to skip the screen.
pub fn solve_logconcave(d: &Density1D) -> Result<SplitResult> {
    let probe = logconcavity_probe(d, 201)?;
    if !probe.is_plausibly_logconcave {
        return Err(Error::NotLogConcave {
            worst: probe.worst_violation,
        });
    }
    solve_logconcave_unchecked(d)
}

/// [`solve_logconcave`] without the log-concavity screen. The bracket logic
/// still requires a decreasing gap; on laws violating that, bisection may
/// return an arbitrary critical point.
pub fn solve_logconcave_unchecked(d: &Density1D) -> Result<SplitResult> {
    let mean = d.mean();
    let sigma = d.std_dev();
    if !(sigma > 0.0) || sigma < 1e-12 * (1.0 + mean.abs()) {
        return Err(Error::Domain(format!(
            "law is numerically a point mass (std dev {sigma:e})"
        )));
    }
    let g_mean = mk_gap(d, mean)?;
    let (mut lo, mut g_lo, mut hi, mut g_hi);
    if g_mean == 0.0 {
        return result_at(d, vec![mean], SplitMethod::LogconcaveBisection);
    } else if g_mean > 0.0 {
        let cap = d.quantile(1.0 - 1e-12)?;
        lo = mean;
        g_lo = g_mean;
        let mut step = sigma;
        loop {
            let t = (mean + step).min(cap);
            let g = mk_gap(d, t)?;
            if g <= 0.0 {
                hi = t;
                g_hi = g;
                break;
            }
            if t >= cap {
                return Err(Error::BracketFailure(format!(
                    "gap is still {g:e} at the upper quantile guard {t}"
                )));
            }
            lo = t;
            g_lo = g;
            step *= 2.0;
        }
    } else {
        let cap = d.quantile(1e-12)?;
        hi = mean;
        g_hi = g_mean;
        let mut step = sigma;
        loop {
            let t = (mean - step).max(cap);
            let g = mk_gap(d, t)?;
            if g >= 0.0 {
                lo = t;
                g_lo = g;
                break;
            }
            if t <= cap {
                return Err(Error::BracketFailure(format!(
                    "gap is still {g:e} at the lower quantile guard {t}"
                )));
            }
            hi = t;
            g_hi = g;
            step *= 2.0;
        }
    }
    if g_lo == 0.0 {
        return result_at(d, vec![lo], SplitMethod::LogconcaveBisection);
    }
    if g_hi == 0.0 {
        return result_at(d, vec![hi], SplitMethod::LogconcaveBisection);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if !(lo < mid && mid < hi) {
            break;
        }
        let g = mk_gap(d, mid)?;
        if g == 0.0 {
            return result_at(d, vec![mid], SplitMethod::LogconcaveBisection);
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result_at(d, vec![0.5 * (lo + hi)], SplitMethod::LogconcaveBisection)
}

/// Maximize `f` without structural assumptions: evaluate it on a `grid_n`
/// point grid over the `[1e-9, 1 - 1e-9]` quantile range, refine every local
/// maximum by golden section, and return all maximizers whose value ties the
/// best within relative `tie_tol`.
pub fn solve_global(d: &Density1D, grid_n: usize, tie_tol: f64) -> Result<SplitResult> {
    if grid_n < 64 {
        return Err(Error::Domain(format!(
            "global grid needs at least 64 points, got {grid_n}"
        )));
    }
    if !(tie_tol.is_finite() && (0.0..1.0).contains(&tie_tol)) {
        return Err(Error::Domain(format!(
            "tie tolerance must lie in [0, 1), got {tie_tol}"
        )));
    }
    let lo = d.quantile(1e-9)?;
    let hi = d.quantile(1.0 - 1e-9)?;
    let xs = quad::linspace(lo, hi, grid_n);
    let fs: Vec<f64> = xs
        .par_iter()
        .map(|&t| f_x(d, t))
        .collect::<Result<Vec<f64>>>()?;

    let n = xs.len();
    let mut candidates: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || fs[i] >= fs[i - 1];
        let right_ok = i == n - 1 || fs[i] >= fs[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(n - 1)];
        let mut eval_err: Option<Error> = None;
        let (t, ft) = roots::golden_max(
            |t| match f_x(d, t) {
                Ok(v) => v,
                Err(e) => {
                    eval_err = Some(e);
                    f64::NEG_INFINITY
                }
            },
            a,
            b,
            1e-10,
        );
        if let Some(e) = eval_err {
            return Err(e);
        }
        candidates.push((t, ft));
    }
    if candidates.is_empty() {
        return Err(Error::BracketFailure(
            "no local maximum found on the grid".into(),
        ));
    }
    // merge refined candidates that collapsed onto the same point
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let span = hi - lo;
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (t, ft) in candidates {
        match merged.last_mut() {
            Some(last) if (t - last.0).abs() <= 1e-8 * span.max(1.0) => {
                if ft > last.1 {
                    *last = (t, ft);
                }
            }
            _ => merged.push((t, ft)),
        }
    }
    let best = merged.iter().fold(f64::NEG_INFINITY, |m, c| m.max(c.1));
    let cutoff = best - tie_tol * best.abs();
    let mut thresholds: Vec<f64> = merged
        .iter()
        .filter(|c| c.1 >= cutoff)
        .map(|c| c.0)
        .collect();
    thresholds.sort_by(f64::total_cmp);
    result_at(d, thresholds, SplitMethod::GlobalGrid)
}

/// Exact optimal split of a weighted empirical law via one prefix-sum pass
/// over the sorted atoms. Thresholds are reported as midpoints of the gap
/// between consecutive atoms; ties within relative 1e-12 are all returned.
pub fn solve_empirical(e: &EmpiricalDist) -> Result<SplitResult> {
    let atoms = e.atoms();
    if atoms.len() < 2 {
        return Err(Error::Domain(
            "empirical split needs at least two distinct atoms".into(),
        ));
    }
    let w_total = e.total_weight();
    let s_total: f64 = atoms.iter().map(|&(v, w)| v * w).sum();
    let m2: f64 = atoms.iter().map(|&(v, w)| v * v * w).sum::<f64>() / w_total;

    let mut best = f64::NEG_INFINITY;
    let mut fx_at: Vec<f64> = Vec::with_capacity(atoms.len() - 1);
    let mut wl = 0.0;
    let mut sl = 0.0;
    for &(v, w) in &atoms[..atoms.len() - 1] {
        wl += w;
        sl += v * w;
        let p = wl / w_total;
        let q = 1.0 - p;
        let l = sl / w_total;
        let u = s_total / w_total - l;
        let fx = l * l / p + u * u / q;
        fx_at.push(fx);
        best = best.max(fx);
    }
    let cutoff = best - 1e-12 * best.abs();
    let mut thresholds = Vec::new();
    for (i, &fx) in fx_at.iter().enumerate() {
        if fx >= cutoff {
            thresholds.push(0.5 * (atoms[i].0 + atoms[i + 1].0));
        }
    }
    let split = thresholds[0];
    let (mut wl, mut sl) = (0.0, 0.0);
    for &(v, w) in atoms.iter().take_while(|&&(v, _)| v <= split) {
        wl += w;
        sl += v * w;
    }
    let alpha = sl / wl;
    let beta = (s_total - sl) / (w_total - wl);
    Ok(SplitResult {
        thresholds,
        alpha,
        beta,
        objective: m2 - best,
        fx_value: best,
        method: SplitMethod::EmpiricalExact,
    })
}

/// Shape of the optimal-regime set for one threshold problem in 1-D.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    /// `(-inf, boundary]` is assigned to the smaller level.
    HalflineLeft,
    /// The search interval contains no point preferring the smaller level.
    Empty,
    /// Every point of the search interval prefers the smaller level.
    All,
}

/// Where a convex loss `G` prefers level `a = min(alpha, beta)` over
/// `b = max(alpha, beta)`.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryReport {
    pub kind: RegionKind,
    /// Present only for [`RegionKind::HalflineLeft`].
    pub boundary: Option<f64>,
}

/// Locate the boundary of `{x : G(x - a) <= G(x - b)}` for convex `G` and
/// levels `a < b` (inputs are swapped into that order). The difference
/// `D(x) = G(x - a) - G(x - b)` is nondecreasing, so the set is a left
/// half-line within the search interval, found by bisection.
pub fn regime_boundary_convex_1d<G: Fn(f64) -> f64>(
    g: G,
    alpha: f64,
    beta: f64,
    search: (f64, f64),
) -> Result<BoundaryReport> {
    if !alpha.is_finite() || !beta.is_finite() || alpha == beta {
        return Err(Error::Domain(format!(
            "levels must be finite and distinct, got ({alpha}, {beta})"
        )));
    }
    let (s_lo, s_hi) = search;
    if !(s_lo.is_finite() && s_hi.is_finite() && s_lo < s_hi) {
        return Err(Error::Domain(format!(
            "search interval must be finite and increasing, got ({s_lo}, {s_hi})"
        )));
    }
    let a = alpha.min(beta);
    let b = alpha.max(beta);
    let diff = |x: f64| g(x - a) - g(x - b);
    let d_lo = diff(s_lo);
    let d_hi = diff(s_hi);
    if d_lo.is_nan() || d_hi.is_nan() {
        return Err(Error::Domain("loss evaluated to NaN on the search interval".into()));
    }
    if d_lo > 0.0 {
        return Ok(BoundaryReport {
            kind: RegionKind::Empty,
            boundary: None,
        });
    }
    if d_hi <= 0.0 {
        return Ok(BoundaryReport {
            kind: RegionKind::All,
            boundary: None,
        });
    }
    // invariant: diff(lo) <= 0 < diff(hi); converge to sup{x : diff(x) <= 0}
    let mut lo = s_lo;
    let mut hi = s_hi;
    let x_tol = 1e-12 * (s_hi - s_lo).max(1.0);
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if !(lo < mid && mid < hi) {
            break;
        }
        if diff(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BoundaryReport {
        kind: RegionKind::HalflineLeft,
        boundary: Some(0.5 * (lo + hi)),
    })
}

/// One row of a threshold sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepRow {
    pub t: f64,
    pub fx: f64,
    /// `None` where a side mass vanishes and the gap is undefined.
    pub mk_gap: Option<f64>,
    pub cdf: f64,
}

/// Evenly spaced sweep of `f`, the `m - k` gap, and the CDF.
#[derive(Clone, Debug)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,fx,mk_gap,cdf\n");
        for r in &self.rows {
            out.push_str(&fmt_f64(r.t));
            out.push(',');
            out.push_str(&fmt_f64(r.fx));
            out.push(',');
            if let Some(g) = r.mk_gap {
                out.push_str(&fmt_f64(g));
            }
            out.push(',');
            out.push_str(&fmt_f64(r.cdf));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{{\"t\":{},\"fx\":{},\"mk_gap\":{},\"cdf\":{}}}",
                    fmt_f64(r.t),
                    fmt_f64(r.fx),
                    r.mk_gap.map_or("null".to_string(), fmt_f64),
                    fmt_f64(r.cdf)
                )
            })
            .collect();
        format!("{{\"rows\":[{}]}}", rows.join(","))
    }
}

/// Sweep `n` evenly spaced thresholds over `[t_lo, t_hi]`.
pub fn sweep(d: &Density1D, t_lo: f64, t_hi: f64, n: usize) -> Result<SweepTable> {
    if !(t_lo.is_finite() && t_hi.is_finite() && t_lo < t_hi) {
        return Err(Error::Domain(format!(
            "sweep range must be finite and increasing, got [{t_lo}, {t_hi}]"
        )));
    }
    if n < 2 {
        return Err(Error::Domain(format!("sweep needs at least 2 rows, got {n}")));
    }
    let tol = mass_tol(d);
    let mean2 = d.mean() * d.mean();
    let rows = quad::linspace(t_lo, t_hi, n)
        .par_iter()
        .map(|&t| {
            let s = split_stats(d, t)?;
            let degenerate = s.p <= tol || s.q <= tol;
            let fx = if degenerate {
                mean2
            } else {
                s.lower_sum * s.lower_sum / s.p + s.upper_sum * s.upper_sum / s.q
            };
            let mk_gap = if degenerate {
                None
            } else {
                let alpha = s.lower_sum / s.p;
                let beta = s.upper_sum / s.q;
                Some((beta - t) - (t - alpha))
            };
            Ok(SweepRow {
                t,
                fx,
                mk_gap,
                cdf: s.p.clamp(0.0, 1.0),
            })
        })
        .collect::<Result<Vec<SweepRow>>>()?;
    Ok(SweepTable { rows })
}
