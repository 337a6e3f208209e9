//! Random closed shapes, rigid/similarity transforms, outline rasterization
//! and the spatial predicates the problem definitions are built from.
//!
//! Coordinates are continuous canvas units with the origin at the top-left
//! corner and `y` growing downwards. Pixel `(i, j)` is centred on the point
//! `(i, j)`.

mod contour;
mod predicates;
mod raster;

pub use contour::{is_simple, random_contour, shape_iou, Contour, MAX_COMPLEXITY, MIN_COMPLEXITY};
pub use predicates::{
    contains, min_separation, point_in_polygon, point_segment_distance, segment_distance,
    similarity_fit, SimilarityFit,
};
pub use raster::{equal_up_to_translation, rasterize, render_shape, Bitmap, Region};

use serde::{Deserialize, Serialize};

/// Margin, in pixels, every shape keeps from the canvas border.
pub const CANVAS_MARGIN: f64 = 2.0;
/// Minimum outline-to-outline distance between shapes that are not nested.
pub const MIN_SEPARATION: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mirror {
    #[default]
    None,
    /// Reflect across the horizontal axis: `y -> -y`.
    HorizontalAxis,
    /// Reflect across the vertical axis: `x -> -x`.
    VerticalAxis,
}

/// Similarity transform applied to a contour in its local frame.
///
/// Composition order is fixed: mirror, then rotation, then scale, then
/// translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub translate: Point,
    pub scale: f64,
    pub rotate: f64,
    pub mirror: Mirror,
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub const fn identity() -> Self {
        Self {
            translate: Point::new(0.0, 0.0),
            scale: 1.0,
            rotate: 0.0,
            mirror: Mirror::None,
        }
    }

    pub fn new(translate: Point, scale: f64, rotate: f64, mirror: Mirror) -> crate::Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(crate::Error::InvalidArgument(format!(
                "transform scale must be positive and finite, got {scale}"
            )));
        }
        if !translate.is_finite() || !rotate.is_finite() {
            return Err(crate::Error::InvalidArgument(
                "transform components must be finite".into(),
            ));
        }
        Ok(Self {
            translate,
            scale,
            rotate,
            mirror,
        })
    }

    /// The linear part (mirror, rotation, scale) without translation.
    pub fn apply_linear(&self, p: Point) -> Point {
        let (mx, my) = match self.mirror {
            Mirror::None => (p.x, p.y),
            Mirror::HorizontalAxis => (p.x, -p.y),
            Mirror::VerticalAxis => (-p.x, p.y),
        };
        let (sin, cos) = self.rotate.sin_cos();
        let rx = cos * mx - sin * my;
        let ry = sin * mx + cos * my;
        Point::new(self.scale * rx, self.scale * ry)
    }

    pub fn apply(&self, p: Point) -> Point {
        let q = self.apply_linear(p);
        Point::new(q.x + self.translate.x, q.y + self.translate.y)
    }
}

/// Map every contour point through `t`. Point count and order are preserved.
pub fn apply_transform(contour: &Contour, t: &Transform) -> Contour {
    Contour {
        points: contour.points.iter().map(|&p| t.apply(p)).collect(),
        id: contour.id,
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(points: &[Point]) -> Self {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    pub fn max_side(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn min_side(&self) -> f64 {
        self.width().min(self.height())
    }
}

/// A contour together with the transform that places it on the canvas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedShape {
    pub contour: Contour,
    pub transform: Transform,
}

impl PlacedShape {
    pub fn new(contour: Contour, transform: Transform) -> Self {
        Self { contour, transform }
    }

    /// Canvas-space vertices.
    pub fn points(&self) -> Vec<Point> {
        self.contour
            .points
            .iter()
            .map(|&p| self.transform.apply(p))
            .collect()
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(&self.points())
    }

    /// Bounding-box centre; the position used by every distance-based cue.
    pub fn center(&self) -> Point {
        self.bbox().center()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let mut out = self.clone();
        out.transform.translate.x += dx;
        out.transform.translate.y += dy;
        out
    }

    /// True when the shape keeps `margin` units from every canvas border.
    pub fn fits(&self, width: u32, height: u32, margin: f64) -> bool {
        let b = self.bbox();
        b.min.x >= margin
            && b.min.y >= margin
            && b.max.x <= f64::from(width) - 1.0 - margin
            && b.max.y <= f64::from(height) - 1.0 - margin
    }
}
