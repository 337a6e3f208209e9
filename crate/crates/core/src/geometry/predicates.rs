use super::contour::{edges, segments_intersect};
use super::{PlacedShape, Point};

/// Ray-casting parity test. Points exactly on the boundary may land on
/// either side; callers that need strictness check boundary distance too.
pub fn point_in_polygon(p: Point, polygon: &[Point]) -> bool {
    let mut inside = false;
    for (a, b) in edges(polygon) {
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

pub fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

fn polyline_distance(a: &[Point], b: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for (p, q) in edges(a) {
        for (r, s) in edges(b) {
            best = best.min(segment_distance(p, q, r, s));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

/// Minimum distance between the two transformed outlines.
pub fn min_separation(a: &PlacedShape, b: &PlacedShape) -> f64 {
    polyline_distance(&a.points(), &b.points())
}

/// True iff every transformed vertex of `inner` lies strictly inside
/// `outer`'s polygon.
pub fn contains(outer: &PlacedShape, inner: &PlacedShape) -> bool {
    let poly = outer.points();
    inner.points().into_iter().all(|p| {
        point_in_polygon(p, &poly)
            && edges(&poly).all(|(a, b)| point_segment_distance(p, a, b) > 1e-9)
    })
}

/// Least-squares fit of `b ≈ z·a + w` over corresponding points, with `z`
/// and `w` complex (rotation + uniform scale + translation). With
/// `reflect`, `a` is conjugated first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityFit {
    /// Uniform scale factor `|z|` taking `a` to `b`.
    pub scale: f64,
    /// Rotation angle `arg z`.
    pub rotation: f64,
    /// RMS residual divided by the RMS radius of `b`.
    pub relative_residual: f64,
}

pub fn similarity_fit(a: &[Point], b: &[Point], reflect: bool) -> Option<SimilarityFit> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let conj = if reflect { -1.0 } else { 1.0 };
    let a: Vec<(f64, f64)> = a.iter().map(|p| (p.x, conj * p.y)).collect();
    let mean = |v: &[(f64, f64)]| {
        let (sx, sy) = v.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        (sx / n, sy / n)
    };
    let b: Vec<(f64, f64)> = b.iter().map(|p| (p.x, p.y)).collect();
    let (ma, mb) = (mean(&a), mean(&b));
    let (mut num_re, mut num_im, mut den, mut rb) = (0.0, 0.0, 0.0, 0.0);
    for (pa, pb) in a.iter().zip(&b) {
        let (ax, ay) = (pa.0 - ma.0, pa.1 - ma.1);
        let (bx, by) = (pb.0 - mb.0, pb.1 - mb.1);
        // conj(a) * b
        num_re += ax * bx + ay * by;
        num_im += ax * by - ay * bx;
        den += ax * ax + ay * ay;
        rb += bx * bx + by * by;
    }
    if den == 0.0 || rb == 0.0 {
        return None;
    }
    let (zr, zi) = (num_re / den, num_im / den);
    let mut res = 0.0;
    for (pa, pb) in a.iter().zip(&b) {
        let (ax, ay) = (pa.0 - ma.0, pa.1 - ma.1);
        let (bx, by) = (pb.0 - mb.0, pb.1 - mb.1);
        let ex = bx - (zr * ax - zi * ay);
        let ey = by - (zr * ay + zi * ax);
        res += ex * ex + ey * ey;
    }
    Some(SimilarityFit {
        scale: zr.hypot(zi),
        rotation: zi.atan2(zr),
        relative_residual: (res / rb).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{random_contour, Contour, Mirror, Transform};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square(x0: f64, y0: f64, side: f64) -> PlacedShape {
        let contour = Contour {
            points: vec![
                Point::new(0.0, 0.0),
                Point::new(side, 0.0),
                Point::new(side, side),
                Point::new(0.0, side),
            ],
            id: 0,
        };
        PlacedShape::new(
            contour,
            Transform {
                translate: Point::new(x0, y0),
                ..Transform::identity()
            },
        )
    }

    #[test]
    fn small_centered_square_is_contained() {
        assert!(contains(&square(0.0, 0.0, 10.0), &square(3.0, 3.0, 4.0)));
        assert!(!contains(&square(3.0, 3.0, 4.0), &square(0.0, 0.0, 10.0)));
    }

    #[test]
    fn disjoint_shapes_are_not_contained() {
        assert!(!contains(&square(0.0, 0.0, 5.0), &square(20.0, 20.0, 5.0)));
    }

    #[test]
    fn separation_of_axis_aligned_squares() {
        let a = square(0.0, 0.0, 1.0);
        assert_eq!(min_separation(&a, &a), 0.0);
        let b = square(11.0, 0.0, 1.0);
        assert!((min_separation(&a, &b) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_fit_recovers_scale_and_reflection() {
        let c = random_contour(&mut ChaCha8Rng::seed_from_u64(5), 12).unwrap();
        let t = Transform::new(Point::new(3.0, -4.0), 2.5, 0.7, Mirror::None).unwrap();
        let moved: Vec<Point> = c.points.iter().map(|&p| t.apply(p)).collect();
        let fit = similarity_fit(&c.points, &moved, false).unwrap();
        assert!(fit.relative_residual < 1e-12);
        assert!((fit.scale - 2.5).abs() < 1e-12);

        let m = Transform::new(Point::new(0.0, 0.0), 1.0, 0.3, Mirror::HorizontalAxis).unwrap();
        let mirrored: Vec<Point> = c.points.iter().map(|&p| m.apply(p)).collect();
        assert!(similarity_fit(&c.points, &mirrored, false).unwrap().relative_residual > 1e-3);
        assert!(similarity_fit(&c.points, &mirrored, true).unwrap().relative_residual < 1e-12);
    }
}
