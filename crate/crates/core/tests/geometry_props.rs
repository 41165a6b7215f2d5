use num::{BigInt, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regimesplit::geometry::{
    self, hexagon, random_convex_polygon, rat, rational_to_f64, ClipSide, Rational,
};

/// Random rational strictly inside the polygon's x-range, with a modest
/// denominator so both clip paths stay cheap.
fn random_interior_t(rng: &mut ChaCha8Rng, p: &geometry::ConvexPolygon) -> Rational {
    let lo = p.vertices().iter().map(|(x, _)| x.clone()).min().unwrap();
    let hi = p.vertices().iter().map(|(x, _)| x.clone()).max().unwrap();
    let den = rng.gen_range(2i64..16);
    let num = rng.gen_range(1..den);
    &lo + (&hi - &lo) * Rational::new(BigInt::from(num), BigInt::from(den))
}

#[test]
fn clips_partition_area_and_moments_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..50 {
        let p = random_convex_polygon(&mut rng, 12);
        for _ in 0..2 {
            let t = random_interior_t(&mut rng, &p);
            let left = p.clip_vertical(&t, ClipSide::XLt);
            let right = p.clip_vertical(&t, ClipSide::XGt);
            let area_sum = left.as_ref().map_or_else(Rational::zero, |q| q.area())
                + right.as_ref().map_or_else(Rational::zero, |q| q.area());
            assert_eq!(area_sum, p.area(), "t = {t} on {:?}", p.vertices());
            let zero = (Rational::zero(), Rational::zero());
            let ml = left.as_ref().map_or(zero.clone(), |q| q.first_moments());
            let mr = right.as_ref().map_or(zero, |q| q.first_moments());
            let whole = p.first_moments();
            assert_eq!(ml.0 + mr.0, whole.0);
            assert_eq!(ml.1 + mr.1, whole.1);
        }
    }
}

#[test]
fn translation_shifts_moments_by_area_times_offset() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..25 {
        let p = random_convex_polygon(&mut rng, 10);
        let (a, b) = (rng.gen_range(-20i64..20), rng.gen_range(-20i64..20));
        let q = p.translated(&rat(a), &rat(b));
        assert_eq!(q.area(), p.area());
        let (mx, my) = p.first_moments();
        let (qx, qy) = q.first_moments();
        assert_eq!(qx, mx + rat(a) * p.area());
        assert_eq!(qy, my + rat(b) * p.area());
    }
}

fn hexagon_contains(p: &geometry::ConvexPolygon, x: f64, y: f64) -> bool {
    let vs: Vec<(f64, f64)> = p
        .vertices()
        .iter()
        .map(|(a, b)| (rational_to_f64(a), rational_to_f64(b)))
        .collect();
    vs.iter().zip(vs.iter().cycle().skip(1)).all(|(&(ax, ay), &(bx, by))| {
        (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= 0.0
    })
}

#[test]
fn rejection_sampling_reproduces_the_exact_ratios() {
    let hex = hexagon();
    let exact_r0 = rational_to_f64(&geometry::r_polygon(&hex, &rat(0)).unwrap());
    let exact_r1 = rational_to_f64(&geometry::r_polygon(&hex, &rat(1)).unwrap());
    for (cut, exact) in [(0.0, exact_r0), (1.0, exact_r1)] {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let batches = 10usize;
        let per_batch = 100_000usize;
        let box_area = 6.0 * 24.0;
        let mut values = Vec::with_capacity(batches);
        for _ in 0..batches {
            let (mut n_in, mut n_plus) = (0u64, 0u64);
            let (mut sx, mut sy) = (0.0f64, 0.0f64);
            for _ in 0..per_batch {
                let x = rng.gen_range(-3.0..3.0);
                let y = rng.gen_range(-12.0..12.0);
                if !hexagon_contains(&hex, x, y) {
                    continue;
                }
                n_in += 1;
                if x > cut {
                    n_plus += 1;
                    sx += x;
                    sy += y;
                }
            }
            let scale = box_area / per_batch as f64;
            let a_plus = scale * n_plus as f64;
            let a_minus = scale * (n_in - n_plus) as f64;
            let (mx, my) = (scale * sx, scale * sy);
            values.push((mx * mx + my * my) / (a_plus * a_minus));
        }
        let mean = values.iter().sum::<f64>() / batches as f64;
        let var =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt();
        assert!(
            (mean - exact).abs() < 3.0 * se,
            "cut {cut}: {mean} vs {exact} (se {se})"
        );
    }
}

#[test]
fn clipping_at_a_vertex_coordinate_stays_exact() {
    // Cuts through vertices exercise the boundary convention: boundary points
    // belong to neither open side, so collinear chains collapse cleanly.
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..25 {
        let p = random_convex_polygon(&mut rng, 8);
        for (vx, _) in p.vertices() {
            let left = p.clip_vertical(vx, ClipSide::XLt);
            let right = p.clip_vertical(vx, ClipSide::XGt);
            let area_sum = left.map_or_else(Rational::zero, |q| q.area())
                + right.map_or_else(Rational::zero, |q| q.area());
            assert_eq!(area_sum, p.area());
        }
    }
}

#[test]
fn r_is_positive_and_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    for _ in 0..20 {
        let p = random_convex_polygon(&mut rng, 10);
        let t = random_interior_t(&mut rng, &p);
        match geometry::r_polygon(&p, &t) {
            Ok(r) => {
                assert!(r.is_positive() || r.is_zero());
                let plus = p.clip_vertical(&t, ClipSide::XGt).unwrap();
                let minus = p.clip_vertical(&t, ClipSide::XLt).unwrap();
                let (mx, my) = plus.first_moments();
                let direct =
                    (&mx * &mx + &my * &my) / (plus.area() * minus.area());
                assert_eq!(r, direct);
            }
            Err(_) => {
                // Degenerate cut: one side vanished; t brushed the hull edge.
                let left = p.clip_vertical(&t, ClipSide::XLt);
                let right = p.clip_vertical(&t, ClipSide::XGt);
                assert!(left.is_none() || right.is_none());
            }
        }
    }
}
