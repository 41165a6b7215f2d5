//! Exact convex-polygon computations over arbitrary-precision rationals.
//!
//! For the uniform law on a convex polygon `K` and a vertical cut at `x = t`,
//! the halfspace objective reduces (constants cancelling) to
//!
//! ```text
//! R(t) = |(Mx+, My+)|^2 / (A+ * A-)
//! ```
//!
//! where `A+-` are the areas of the two sides and `(Mx+, My+)` the first
//! moments of the `x > t` side. A centrally symmetric hexagon with integer
//! vertices gives `R(1) > R(0)`: the centered cut is not optimal, so the
//! one-dimensional "split at the mean" picture does not survive in the plane
//! for non-elliptical laws. Everything here is exact; floats only appear in
//! decimal renderings.

use crate::error::{Error, Result};
use crate::report::fmt_f64;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};
use rand::Rng;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parse "p/q", an integer, or an exact decimal ("-1.25" -> -5/4).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Domain("empty rational".into()));
    }
    if s.contains('/') {
        return s
            .parse::<Rational>()
            .map_err(|e| Error::Domain(format!("bad rational {s:?}: {e}")));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let (sign, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        let int_digits = if int_digits.is_empty() { "0" } else { int_digits };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Domain(format!("bad decimal {s:?}")));
        }
        let whole: BigInt = int_digits
            .parse()
            .map_err(|_| Error::Domain(format!("bad decimal {s:?}")))?;
        let frac: BigInt = frac_part
            .parse()
            .map_err(|_| Error::Domain(format!("bad decimal {s:?}")))?;
        let scale = BigInt::from(10).pow(frac_part.len() as u32);
        let numer = (whole * &scale + frac) * BigInt::from(sign);
        return Ok(Rational::new(numer, scale));
    }
    s.parse::<Rational>()
        .map_err(|e| Error::Domain(format!("bad rational {s:?}: {e}")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `(a - o) x (b - o)`; positive for a counterclockwise turn.
fn cross(o: &(Rational, Rational), a: &(Rational, Rational), b: &(Rational, Rational)) -> Rational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

/// Convex polygon with counterclockwise vertices and positive area.
/// Collinear interior vertices are tolerated on input; clipping output is
/// canonicalized to have none.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<(Rational, Rational)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClipSide {
    XGt,
    XLt,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<(Rational, Rational)>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegeneratePolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::DegeneratePolygon(format!(
                    "repeated consecutive vertex at index {i}"
                )));
            }
        }
        let mut strict_turns = 0usize;
        for i in 0..n {
            let c = cross(&vertices[i], &vertices[(i + 1) % n], &vertices[(i + 2) % n]);
            if c.is_negative() {
                return Err(Error::DegeneratePolygon(
                    "vertices must wind counterclockwise around a convex boundary".into(),
                ));
            }
            if c.is_positive() {
                strict_turns += 1;
            }
        }
        if strict_turns < 3 {
            return Err(Error::DegeneratePolygon(
                "vertices are collinear (zero area)".into(),
            ));
        }
        let p = ConvexPolygon { vertices };
        if !p.area().is_positive() {
            return Err(Error::DegeneratePolygon("polygon has zero area".into()));
        }
        Ok(p)
    }

    /// Canonicalize a clip output: drop consecutive duplicates and collinear
    /// middles; `None` when fewer than 3 distinct corners remain.
    fn from_loop(points: Vec<(Rational, Rational)>) -> Option<Self> {
        let mut pts: Vec<(Rational, Rational)> = Vec::with_capacity(points.len());
        for p in points {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        loop {
            if pts.len() < 3 {
                return None;
            }
            let n = pts.len();
            let mut removed = false;
            for i in 0..n {
                let c = cross(&pts[(i + n - 1) % n], &pts[i], &pts[(i + 1) % n]);
                if c.is_zero() {
                    pts.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
        }
        Some(ConvexPolygon::new(pts).expect("clip of a convex polygon stays convex"))
    }

    pub fn vertices(&self) -> &[(Rational, Rational)] {
        &self.vertices
    }

    /// Exact shoelace area.
    pub fn area(&self) -> Rational {
        let n = self.vertices.len();
        let mut twice: Rational = Rational::zero();
        for i in 0..n {
            let (x0, y0) = &self.vertices[i];
            let (x1, y1) = &self.vertices[(i + 1) % n];
            twice += x0 * y1 - x1 * y0;
        }
        twice / rat(2)
    }

    /// Exact first moments `(integral of x dA, integral of y dA)` via the
    /// Green's-theorem vertex sums.
    pub fn first_moments(&self) -> (Rational, Rational) {
        let n = self.vertices.len();
        let mut mx = Rational::zero();
        let mut my = Rational::zero();
        for i in 0..n {
            let (x0, y0) = &self.vertices[i];
            let (x1, y1) = &self.vertices[(i + 1) % n];
            let c = x0 * y1 - x1 * y0;
            mx += (x0 + x1) * &c;
            my += (y0 + y1) * &c;
        }
        (mx / rat(6), my / rat(6))
    }

    /// Exact intersection with the halfplane `x > t` (or `x < t`), closed by
    /// the boundary segment; `None` when the intersection has no area.
    pub fn clip_vertical(&self, t: &Rational, side: ClipSide) -> Option<ConvexPolygon> {
        let inside = |p: &(Rational, Rational)| match side {
            ClipSide::XGt => p.0 > *t,
            ClipSide::XLt => p.0 < *t,
        };
        let intersect = |a: &(Rational, Rational), b: &(Rational, Rational)| {
            let y = &a.1 + (t - &a.0) * (&b.1 - &a.1) / (&b.0 - &a.0);
            (t.clone(), y)
        };
        let n = self.vertices.len();
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(n + 2);
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            match (inside(a), inside(b)) {
                (true, true) => out.push(b.clone()),
                (true, false) => out.push(intersect(a, b)),
                (false, true) => {
                    out.push(intersect(a, b));
                    out.push(b.clone());
                }
                (false, false) => {}
            }
        }
        ConvexPolygon::from_loop(out)
    }

    pub fn translated(&self, dx: &Rational, dy: &Rational) -> ConvexPolygon {
        ConvexPolygon {
            vertices: self
                .vertices
                .iter()
                .map(|(x, y)| (x + dx, y + dy))
                .collect(),
        }
    }
}

/// Exact halfspace functional of the uniform law on `p` at the vertical cut
/// `x = t`; both sides must have positive area.
pub fn r_polygon(p: &ConvexPolygon, t: &Rational) -> Result<Rational> {
    let upper = p
        .clip_vertical(t, ClipSide::XGt)
        .ok_or_else(|| Error::DegenerateCut(t.to_string()))?;
    let lower = p
        .clip_vertical(t, ClipSide::XLt)
        .ok_or_else(|| Error::DegenerateCut(t.to_string()))?;
    let (mx, my) = upper.first_moments();
    Ok((&mx * &mx + &my * &my) / (upper.area() * lower.area()))
}

/// The integer-vertex hexagon `A(-3,0) B(-1,-12) C(3,-8) D(3,0) E(1,12)
/// F(-3,8)`: centrally symmetric, centered, but `R(1) > R(0)`.
pub fn hexagon() -> ConvexPolygon {
    let v = [(-3, 0), (-1, -12), (3, -8), (3, 0), (1, 12), (-3, 8)];
    ConvexPolygon::new(v.iter().map(|&(x, y)| (rat(x), rat(y))).collect())
        .expect("hexagon vertices are a valid convex loop")
}

/// Full audit of the hexagon: exact area, centering, both cut values, and
/// the strict comparison between them.
#[derive(Clone, Debug)]
pub struct HexagonReport {
    pub area: Rational,
    pub moments: (Rational, Rational),
    pub centered: bool,
    pub r0: Rational,
    pub r1: Rational,
    pub counterexample_holds: bool,
}

impl HexagonReport {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"area\":\"{}\",\"moments\":[\"{}\",\"{}\"],\"centered\":{},\
             \"r0\":\"{}\",\"r0_decimal\":{},\"r1\":\"{}\",\"r1_decimal\":{},\
             \"counterexample_holds\":{}}}",
            self.area,
            self.moments.0,
            self.moments.1,
            self.centered,
            self.r0,
            fmt_f64(rational_to_f64(&self.r0)),
            self.r1,
            fmt_f64(rational_to_f64(&self.r1)),
            self.counterexample_holds
        )
    }
}

pub fn hexagon_counterexample() -> Result<HexagonReport> {
    let hex = hexagon();
    let area = hex.area();
    let moments = hex.first_moments();
    let centered = moments.0.is_zero() && moments.1.is_zero();
    let r0 = r_polygon(&hex, &rat(0))?;
    let r1 = r_polygon(&hex, &rat(1))?;
    let counterexample_holds = centered && r1 > r0;
    Ok(HexagonReport {
        area,
        moments,
        centered,
        r0,
        r1,
        counterexample_holds,
    })
}

/// One row of an exact `R` sweep; a degenerate cut reports its error text
/// instead of a value.
#[derive(Clone, Debug)]
pub struct RSweepRow {
    pub t: Rational,
    pub r: Option<Rational>,
    pub error: Option<String>,
}

impl RSweepRow {
    pub fn to_json(&self) -> String {
        match (&self.r, &self.error) {
            (Some(r), _) => format!(
                "{{\"t\":\"{}\",\"r\":\"{}\",\"r_decimal\":{}}}",
                self.t,
                r,
                fmt_f64(rational_to_f64(r))
            ),
            (None, Some(e)) => format!(
                "{{\"t\":\"{}\",\"error\":\"{}\"}}",
                self.t,
                crate::report::json_escape(e)
            ),
            (None, None) => unreachable!("row carries either a value or an error"),
        }
    }
}

pub fn r_sweep(p: &ConvexPolygon, ts: &[Rational]) -> Vec<RSweepRow> {
    ts.iter()
        .map(|t| match r_polygon(p, t) {
            Ok(r) => RSweepRow {
                t: t.clone(),
                r: Some(r),
                error: None,
            },
            Err(e) => RSweepRow {
                t: t.clone(),
                r: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// Parse one "x y" pair per line, counterclockwise; values are rationals,
/// integers, or exact decimals. Blank lines and `#` comments are skipped.
pub fn parse_polygon(text: &str) -> Result<ConvexPolygon> {
    let mut vertices = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (x, y) = match (parts.next(), parts.next(), parts.next()) {
            (Some(x), Some(y), None) => (x, y),
            _ => {
                return Err(Error::Domain(format!(
                    "line {}: expected exactly two coordinates",
                    lineno + 1
                )));
            }
        };
        vertices.push((parse_rational(x)?, parse_rational(y)?));
    }
    ConvexPolygon::new(vertices)
}

/// Convex hull of `n_points` random integer points in `[-50, 50]^2`,
/// retried until the hull has positive area; test plumbing.
pub fn random_convex_polygon<R: Rng>(rng: &mut R, n_points: usize) -> ConvexPolygon {
    let n_points = n_points.max(3);
    loop {
        let mut pts: Vec<(i64, i64)> = (0..n_points)
            .map(|_| (rng.gen_range(-50..=50), rng.gen_range(-50..=50)))
            .collect();
        pts.sort();
        pts.dedup();
        if pts.len() < 3 {
            continue;
        }
        let hull = monotone_chain(&pts);
        if hull.len() < 3 {
            continue;
        }
        let vertices = hull.into_iter().map(|(x, y)| (rat(x), rat(y))).collect();
        match ConvexPolygon::new(vertices) {
            Ok(p) => return p,
            Err(_) => continue,
        }
    }
}

/// Andrew's monotone chain over pre-sorted deduplicated integer points;
/// strict turns only, so the hull has no collinear triples.
fn monotone_chain(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let turn = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
    };
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
