use rand::{Rng, RngCore};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::{ClassLabel, CueMetadata, LeakKind, ProblemId, Tolerances, VariantKind};
use crate::geometry::{
    contains, min_separation, random_contour, shape_iou, BBox, Contour, Mirror, PlacedShape, Point,
    Transform, CANVAS_MARGIN, MIN_SEPARATION,
};

/// A failed sampling attempt, naming the constraint that could not be met.
pub(super) type Attempt<T> = std::result::Result<T, &'static str>;

const LOOK_TRIES: usize = 60;
const PLACE_TRIES: usize = 80;
const MAX_IOU: f64 = 0.7;
/// Smallest allowed bounding-box side of a placed shape, in pixels.
pub(super) const MIN_SHAPE_SIDE: f64 = 8.0;
const LEAK_SCALE: f64 = 1.2;
const LEAK_SHIFT: f64 = 6.0;

/// Appearance of a shape before it is positioned: contour plus the linear
/// part of its transform.
#[derive(Debug, Clone)]
pub(super) struct Look {
    pub contour: Contour,
    pub rotate: f64,
    pub mirror: Mirror,
    pub scale: f64,
}

impl Look {
    fn linear(&self) -> Transform {
        Transform {
            translate: Point::new(0.0, 0.0),
            scale: self.scale,
            rotate: self.rotate,
            mirror: self.mirror,
        }
    }

    pub fn linear_bbox(&self) -> BBox {
        let t = self.linear();
        BBox::of(&self.contour.points.iter().map(|&p| t.apply_linear(p)).collect::<Vec<_>>())
    }

    /// Rescale so the placed bounding box has the given larger side.
    pub fn with_size(&self, size: f64) -> Look {
        let unit = Look {
            scale: 1.0,
            ..self.clone()
        };
        let side = unit.linear_bbox().max_side();
        Look {
            scale: size / side,
            ..unit
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Control {
    Off,
    /// Contour, rotation and size shared by every shape.
    SharedLook,
    /// Contour and rotation shared; sizes as requested (nesting problems).
    SharedContour,
}

/// Shapes and annotations produced by one successful attempt.
#[derive(Debug, Default)]
pub(super) struct Drawn {
    pub shapes: Vec<PlacedShape>,
    pub groups: Vec<usize>,
    pub quantities: BTreeMap<String, f64>,
}

impl Drawn {
    pub fn push(&mut self, shape: PlacedShape, group: usize) {
        self.shapes.push(shape);
        self.groups.push(group);
    }

    pub fn note(&mut self, key: &str, value: f64) {
        self.quantities.insert(key.to_string(), value);
    }

    pub fn into_cue(self) -> (Vec<PlacedShape>, CueMetadata) {
        (
            self.shapes,
            CueMetadata {
                groups: self.groups,
                quantities: self.quantities,
            },
        )
    }
}

pub(super) struct Builder<'a> {
    rng: &'a mut dyn RngCore,
    /// Canvas size relative to the 64 px baseline.
    pub k: f64,
    pub tol: Tolerances,
    /// Allowed region for shape bounding boxes: (min x, min y, max x, max y).
    frame: (f64, f64, f64, f64),
    size_factor: f64,
    /// Sub-pixel offset shared by every translation in the scene, so equal
    /// looks always rasterize to equal pixel sets.
    phase: (f64, f64),
    control: Control,
    shared: Option<Look>,
}

impl<'a> Builder<'a> {
    pub fn new(
        rng: &'a mut dyn RngCore,
        canvas: u32,
        problem: ProblemId,
        variant: VariantKind,
        label: ClassLabel,
    ) -> Self {
        let hi = f64::from(canvas) - 1.0 - CANVAS_MARGIN;
        let mut frame = (CANVAS_MARGIN, CANVAS_MARGIN, hi, hi);
        let mut size_factor = 1.0;
        match variant {
            VariantKind::Leak(LeakKind::SizeBias) if label == ClassLabel::ONE => {
                size_factor = LEAK_SCALE;
            }
            VariantKind::Leak(LeakKind::PositionBias) => {
                if label == ClassLabel::ONE {
                    frame.2 -= LEAK_SHIFT;
                    frame.3 -= LEAK_SHIFT;
                } else {
                    frame.0 += LEAK_SHIFT;
                    frame.1 += LEAK_SHIFT;
                }
            }
            _ => {}
        }
        let control = match variant {
            VariantKind::IdenticalControl if problem.get() == 8 => Control::SharedContour,
            VariantKind::IdenticalControl => Control::SharedLook,
            _ => Control::Off,
        };
        let phase = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        Self {
            rng,
            k: f64::from(canvas) / f64::from(Tolerances::BASE_CANVAS),
            tol: Tolerances::for_canvas(canvas),
            frame,
            size_factor,
            phase,
            control,
            shared: None,
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        self.rng.gen_range(lo..hi)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    pub fn angle(&mut self) -> f64 {
        self.rng.gen_range(0.0..TAU)
    }

    /// A 64 px baseline length expressed at the current canvas size.
    pub fn px(&self, v: f64) -> f64 {
        v * self.k
    }

    /// Uniform length drawn from a 64 px baseline range.
    pub fn upx(&mut self, lo: f64, hi: f64) -> f64 {
        self.uniform(lo, hi) * self.k
    }

    /// Shape size drawn from a 64 px baseline range, including any size bias.
    pub fn size(&mut self, lo: f64, hi: f64) -> f64 {
        let s = self.uniform(lo, hi);
        s * self.k * self.size_factor
    }

    pub fn frame(&self) -> (f64, f64, f64, f64) {
        self.frame
    }

    pub fn frame_center(&self) -> Point {
        let (x0, y0, x1, y1) = self.frame;
        Point::new(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }

    fn fresh_look(&mut self, size: f64) -> Attempt<Look> {
        for _ in 0..LOOK_TRIES {
            let complexity = self.rng.gen_range(8..=16);
            let contour = random_contour(&mut *self.rng, complexity).map_err(|_| "contour sampling")?;
            let look = Look {
                contour,
                rotate: self.angle(),
                mirror: Mirror::None,
                scale: 1.0,
            }
            .with_size(size);
            if look.linear_bbox().min_side() >= MIN_SHAPE_SIDE {
                return Ok(look);
            }
        }
        Err("shape bounding box at least 8 px on each side")
    }

    /// A new appearance whose larger bounding-box side equals `size`.
    pub fn look(&mut self, size: f64) -> Attempt<Look> {
        match self.control {
            Control::Off => self.fresh_look(size),
            Control::SharedLook => {
                if self.shared.is_none() {
                    self.shared = Some(self.fresh_look(size)?);
                }
                Ok(self.shared.clone().expect("set above"))
            }
            Control::SharedContour => {
                if self.shared.is_none() {
                    self.shared = Some(self.fresh_look(size)?);
                }
                let look = self.shared.as_ref().expect("set above").with_size(size);
                if look.linear_bbox().min_side() < MIN_SHAPE_SIDE {
                    return Err("shape bounding box at least 8 px on each side");
                }
                Ok(look)
            }
        }
    }

    /// A new appearance whose contour overlaps every contour in `others` by
    /// at most 0.7 IoU. Under the identical-shape control this is the
    /// shared look.
    pub fn distinct_look(&mut self, size: f64, others: &[&Look]) -> Attempt<Look> {
        if self.control != Control::Off {
            return self.look(size);
        }
        for _ in 0..LOOK_TRIES {
            let look = self.fresh_look(size)?;
            if others.iter().all(|o| shape_iou(&o.contour, &look.contour) <= MAX_IOU) {
                return Ok(look);
            }
        }
        Err("distinct shapes overlap by at most 0.7 IoU")
    }

    fn quantize(&self, t: Point) -> Point {
        Point::new(
            (t.x - self.phase.0).round() + self.phase.0,
            (t.y - self.phase.1).round() + self.phase.1,
        )
    }

    /// Place `look` with its bounding-box centre near `center`. Translations
    /// are snapped to the scene's sub-pixel phase.
    pub fn place_at(&self, look: &Look, center: Point) -> PlacedShape {
        let c = look.linear_bbox().center();
        let t = self.quantize(Point::new(center.x - c.x, center.y - c.y));
        PlacedShape::new(
            look.contour.clone(),
            Transform {
                translate: t,
                scale: look.scale,
                rotate: look.rotate,
                mirror: look.mirror,
            },
        )
    }

    pub fn fits(&self, shape: &PlacedShape) -> bool {
        let b = shape.bbox();
        let (x0, y0, x1, y1) = self.frame;
        b.min.x >= x0 && b.min.y >= y0 && b.max.x <= x1 && b.max.y <= y1
    }

    /// Non-overlapping and non-nested with respect to every shape in `others`.
    pub fn clear_of(&self, shape: &PlacedShape, others: &[PlacedShape]) -> bool {
        others.iter().all(|o| {
            min_separation(shape, o) >= MIN_SEPARATION && !contains(o, shape) && !contains(shape, o)
        })
    }

    /// Uniform centre such that a box of the given size stays in the frame.
    pub fn random_center(&mut self, width: f64, height: f64) -> Option<Point> {
        let (x0, y0, x1, y1) = self.frame;
        let (lx, hx) = (x0 + 0.5 * width + 0.5, x1 - 0.5 * width - 0.5);
        let (ly, hy) = (y0 + 0.5 * height + 0.5, y1 - 0.5 * height - 0.5);
        if hx < lx || hy < ly {
            return None;
        }
        Some(Point::new(self.uniform(lx, hx), self.uniform(ly, hy)))
    }

    pub fn place_random(&mut self, look: &Look, others: &[PlacedShape]) -> Attempt<PlacedShape> {
        let b = look.linear_bbox();
        for _ in 0..PLACE_TRIES {
            let Some(c) = self.random_center(b.width(), b.height()) else {
                return Err("shape fits inside the canvas margin");
            };
            let s = self.place_at(look, c);
            if self.fits(&s) && self.clear_of(&s, others) {
                return Ok(s);
            }
        }
        Err("random placement without overlap")
    }

    /// Place at a random angle and a distance in `[lo, hi]` from `anchor`.
    pub fn place_near(
        &mut self,
        look: &Look,
        anchor: Point,
        (lo, hi): (f64, f64),
        others: &[PlacedShape],
    ) -> Attempt<PlacedShape> {
        for _ in 0..PLACE_TRIES {
            let a = self.angle();
            let d = self.uniform(lo, hi);
            let s = self.place_at(look, Point::new(anchor.x + d * a.cos(), anchor.y + d * a.sin()));
            if self.fits(&s) && self.clear_of(&s, others) {
                return Ok(s);
            }
        }
        Err("placement at the requested distance")
    }

    /// Place strictly inside `container`, keeping the minimum separation from
    /// its outline.
    pub fn place_inside(
        &mut self,
        look: &Look,
        container: &PlacedShape,
        others: &[PlacedShape],
    ) -> Attempt<PlacedShape> {
        let cb = container.bbox();
        for _ in 0..PLACE_TRIES {
            let c = Point::new(
                self.uniform(cb.min.x, cb.max.x),
                self.uniform(cb.min.y, cb.max.y),
            );
            let s = self.place_at(look, c);
            if contains(container, &s)
                && min_separation(container, &s) >= MIN_SEPARATION
                && self.clear_of(&s, others)
            {
                return Ok(s);
            }
        }
        Err("small shape strictly inside the container")
    }
}
