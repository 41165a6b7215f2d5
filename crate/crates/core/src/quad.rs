//! Adaptive Gauss-Kronrod quadrature on finite intervals.
//!
//! A 7-point Gauss rule embedded in a 15-point Kronrod rule gives each panel
//! a value and an error estimate; the panel with the worst error is bisected
//! until the summed error meets the requested tolerance. Known interior
//! breakpoints (density kinks, jumps) can be passed as hints so panels never
//! straddle them.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Positive Kronrod abscissae; Gauss-7 nodes are the odd-indexed entries.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate {
    pub value: f64,
    pub abs_error: f64,
    /// Number of panel bisections performed.
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, &x) in XGK.iter().enumerate() {
        let dx = half * x;
        let fsum = if i == 7 {
            f(mid)
        } else {
            f(mid - dx) + f(mid + dx)
        };
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Panel { a, b, value, error }
}

/// Integrate `f` over `[a, b]`, subdividing until the absolute error estimate
/// drops below `max(abs_tol, rel_tol * |integral|)`.
///
/// `hints` lists interior points where `f` is known to be non-smooth; panels
/// are aligned to them up front. Fails with [`Error::NonIntegrable`] when the
/// integrand produces non-finite values or the subdivision budget runs out
/// before the tolerance is met.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
    hints: &[f64],
) -> Result<QuadEstimate> {
    if a == b {
        return Ok(QuadEstimate {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        });
    }
    if !(a < b) {
        return Err(Error::Domain(format!(
            "integration range is inverted or non-finite: [{a}, {b}]"
        )));
    }

    let mut cuts: Vec<f64> = hints.iter().copied().filter(|&h| h > a && h < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.insert(0, a);
    cuts.push(b);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in cuts.windows(2) {
        let panel = gauss_kronrod(f, w[0], w[1]);
        total += panel.value;
        total_err += panel.error;
        heap.push(panel);
    }

    let mut subdivisions = 0;
    loop {
        if !total.is_finite() {
            return Err(Error::NonIntegrable(format!(
                "integrand is non-finite on [{a}, {b}]"
            )));
        }
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(QuadEstimate {
                value: total,
                abs_error: total_err,
                subdivisions,
            });
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::NonIntegrable(format!(
                "quadrature on [{a}, {b}] still has error {total_err:e} after {subdivisions} subdivisions"
            )));
        }
        let worst = heap.pop().expect("panel heap cannot be empty");
        // Splitting a panel narrower than a few ulps cannot improve anything.
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            return Err(Error::NonIntegrable(format!(
                "panel at [{}, {}] cannot be subdivided further (error {:e})",
                worst.a, worst.b, worst.error
            )));
        }
        let left = gauss_kronrod(f, worst.a, mid);
        let right = gauss_kronrod(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}

/// Outcome of the doubling-window scan of a one-sided tail.
#[derive(Debug, Clone, Copy)]
pub struct TailCut {
    /// Coordinate beyond which the remaining mass is below the requested cap.
    pub cut: f64,
    /// Mass accumulated between the anchor and the cut.
    pub mass: f64,
}

/// Scan `f >= 0` rightward (`dir = +1`) or leftward (`dir = -1`) from
/// `anchor` in doubling windows until one window contributes less than
/// `tail_eps` of the running total, then report the truncation point.
///
/// Divergence (windows that keep growing, or an unbounded running total)
/// reports [`Error::NonIntegrable`].
pub fn truncate_tail<F: Fn(f64) -> f64>(
    f: &F,
    anchor: f64,
    dir: f64,
    tail_eps: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<TailCut> {
    let mut width = 1.0f64.max(anchor.abs() * 1e-3);
    let mut lo = anchor;
    let mut total = 0.0f64;
    let mut prev_window = f64::INFINITY;
    let mut growth_streak = 0usize;
    for _ in 0..64 {
        let hi = lo + dir * width;
        let (wa, wb) = if dir > 0.0 { (lo, hi) } else { (hi, lo) };
        // A loose per-window tolerance is enough: the final pass re-integrates
        // the whole truncated range at full accuracy.
        let window = integrate(f, wa, wb, rel_tol.max(1e-8), abs_tol, max_subdivisions, &[])?;
        if !window.value.is_finite() || total > 1e300 {
            return Err(Error::NonIntegrable(
                "tail mass diverges during truncation scan".into(),
            ));
        }
        total += window.value;
        if window.value > prev_window && window.value > abs_tol {
            growth_streak += 1;
            if growth_streak >= 8 {
                return Err(Error::NonIntegrable(
                    "tail windows keep growing; integrand is not integrable".into(),
                ));
            }
        } else {
            growth_streak = 0;
        }
        if total > 0.0 && window.value <= tail_eps * total {
            return Ok(TailCut { cut: hi, mass: total });
        }
        prev_window = window.value;
        lo = hi;
        width *= 2.0;
    }
    Err(Error::NonIntegrable(
        "tail mass did not settle within the window budget".into(),
    ))
}
