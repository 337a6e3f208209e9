use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::{point_in_polygon, BBox, Point};
use crate::{Error, Result};

pub const MIN_COMPLEXITY: usize = 8;
pub const MAX_COMPLEXITY: usize = 64;

const MAX_ATTEMPTS: usize = 200;
const JITTER: f64 = 0.04;

/// An ordered closed polyline in the shape's local frame. The last point
/// connects back to the first.
///
/// Contours produced by [`random_contour`] are centred on their bounding-box
/// centre and scaled so the larger bounding-box side is exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub points: Vec<Point>,
    /// Seed the contour was generated from; regenerating from it is exact.
    pub id: u64,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.points)
    }

    /// Edges as `(start, end)` pairs, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        edges(&self.points)
    }

    /// Area-weighted centroid of the enclosed region.
    pub fn centroid(&self) -> Point {
        polygon_centroid(&self.points)
    }
}

pub(crate) fn edges(points: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = points.len();
    (0..n).map(move |i| (points[i], points[(i + 1) % n]))
}

/// Sample a random simple polygon with `complexity` vertices.
///
/// A single `u64` is drawn from `rng` and becomes the contour id; the
/// polygon itself is a pure function of that id. Vertices sit at sorted
/// random angles with radii in `[0.3, 1.0]`, then receive a small jitter;
/// candidates that self-intersect are resampled.
pub fn random_contour<R: RngCore + ?Sized>(rng: &mut R, complexity: usize) -> Result<Contour> {
    if !(MIN_COMPLEXITY..=MAX_COMPLEXITY).contains(&complexity) {
        return Err(Error::InvalidArgument(format!(
            "contour complexity must lie in [{MIN_COMPLEXITY}, {MAX_COMPLEXITY}], got {complexity}"
        )));
    }
    let id = rng.next_u64();
    contour_from_id(id, complexity)
}

pub(crate) fn contour_from_id(id: u64, complexity: usize) -> Result<Contour> {
    let mut local = ChaCha8Rng::seed_from_u64(id);
    for _ in 0..MAX_ATTEMPTS {
        let gaps: Vec<f64> = (0..complexity).map(|_| local.gen_range(0.5..1.5)).collect();
        let total: f64 = gaps.iter().sum();
        let mut angle = local.gen_range(0.0..TAU);
        let mut points = Vec::with_capacity(complexity);
        for gap in &gaps {
            let radius = local.gen_range(0.3..=1.0);
            let jx = local.gen_range(-JITTER..=JITTER);
            let jy = local.gen_range(-JITTER..=JITTER);
            points.push(Point::new(radius * angle.cos() + jx, radius * angle.sin() + jy));
            angle += gap / total * TAU;
        }
        let bbox = BBox::of(&points);
        let side = bbox.max_side();
        let center = bbox.center();
        for p in &mut points {
            p.x = (p.x - center.x) / side;
            p.y = (p.y - center.y) / side;
        }
        if is_simple(&points) {
            return Ok(Contour { points, id });
        }
    }
    Err(Error::ContourRejected {
        attempts: MAX_ATTEMPTS,
        complexity,
    })
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub(crate) fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// True when the closed polyline has at least three distinct consecutive
/// vertices, no edge folds back onto its neighbour, and no two
/// non-adjacent edges touch.
pub fn is_simple(points: &[Point]) -> bool {
    let n = points.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let c = points[(i + 2) % n];
        if a == b {
            return false;
        }
        // Adjacent edges may only share their common vertex.
        let cross = orient(a, b, c);
        let dot = (a.x - b.x) * (c.x - b.x) + (a.y - b.y) * (c.y - b.y);
        if cross == 0.0 && dot > 0.0 {
            return false;
        }
    }
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (points[j], points[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

pub(crate) fn polygon_area(points: &[Point]) -> f64 {
    0.5 * edges(points)
        .map(|(a, b)| a.x * b.y - b.x * a.y)
        .sum::<f64>()
}

pub(crate) fn polygon_centroid(points: &[Point]) -> Point {
    let area = polygon_area(points);
    if area.abs() < 1e-12 {
        let n = points.len() as f64;
        return Point::new(
            points.iter().map(|p| p.x).sum::<f64>() / n,
            points.iter().map(|p| p.y).sum::<f64>() / n,
        );
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for (a, b) in edges(points) {
        let w = a.x * b.y - b.x * a.y;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
    }
    Point::new(cx / (6.0 * area), cy / (6.0 * area))
}

const IOU_GRID: usize = 48;
const IOU_SCALE: f64 = 40.0;

fn filled_mask(contour: &Contour) -> Vec<bool> {
    let c = contour.centroid();
    let half = IOU_GRID as f64 / 2.0;
    let pts: Vec<Point> = contour
        .points
        .iter()
        .map(|p| Point::new((p.x - c.x) * IOU_SCALE + half, (p.y - c.y) * IOU_SCALE + half))
        .collect();
    let mut mask = vec![false; IOU_GRID * IOU_GRID];
    for j in 0..IOU_GRID {
        for i in 0..IOU_GRID {
            let q = Point::new(i as f64 + 0.5, j as f64 + 0.5);
            mask[j * IOU_GRID + i] = point_in_polygon(q, &pts);
        }
    }
    mask
}

/// Intersection over union of the two contours' filled regions after
/// aligning their centroids, measured on a fixed raster in local units.
pub fn shape_iou(a: &Contour, b: &Contour) -> f64 {
    let ma = filled_mask(a);
    let mb = filled_mask(b);
    let (mut inter, mut union) = (0usize, 0usize);
    for (x, y) in ma.iter().zip(&mb) {
        inter += usize::from(*x && *y);
        union += usize::from(*x || *y);
    }
    if union == 0 {
        return 1.0;
    }
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_rng_state_gives_same_contour() {
        let a = random_contour(&mut ChaCha8Rng::seed_from_u64(7), 16).unwrap();
        let b = random_contour(&mut ChaCha8Rng::seed_from_u64(7), 16).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn complexity_sets_vertex_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in [8, 9, 20, 64] {
            assert_eq!(random_contour(&mut rng, k).unwrap().len(), k);
        }
    }

    #[test]
    fn complexity_out_of_range_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(random_contour(&mut rng, 7).is_err());
        assert!(random_contour(&mut rng, 65).is_err());
    }

    #[test]
    fn contour_is_normalised() {
        let c = random_contour(&mut ChaCha8Rng::seed_from_u64(9), 12).unwrap();
        let b = c.bbox();
        assert!((b.max_side() - 1.0).abs() < 1e-12);
        assert!(b.center().x.abs() < 1e-12 && b.center().y.abs() < 1e-12);
    }

    #[test]
    fn bowtie_is_not_simple() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(!is_simple(&pts));
        let square = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert!(is_simple(&square));
    }

    #[test]
    fn iou_of_a_contour_with_itself_is_one() {
        let c = random_contour(&mut ChaCha8Rng::seed_from_u64(4), 10).unwrap();
        assert_eq!(shape_iou(&c, &c), 1.0);
    }
}
