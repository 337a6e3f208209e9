use serde::{Deserialize, Serialize};

use super::{PlacedShape, Point};
use crate::{Error, Result};

pub const BACKGROUND: u8 = 255;
pub const INK: u8 = 0;

/// Binary grayscale image: 255 is background, 0 is a drawn outline pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bitmap {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Bitmap {
    pub fn blank(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            pixels: vec![BACKGROUND; width as usize * height as usize],
        }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidArgument(format!(
                "{} pixels for a {width}x{height} bitmap",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[(y * self.width + x) as usize]
    }

    fn ink(&mut self, x: i64, y: i64) {
        if x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height {
            let idx = y as usize * self.width as usize + x as usize;
            self.pixels[idx] = INK;
        }
    }

    /// Coordinates of every drawn pixel in row-major order.
    pub fn ink_pixels(&self) -> Vec<(i32, i32)> {
        let w = self.width as usize;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == INK)
            .map(|(i, _)| ((i % w) as i32, (i / w) as i32))
            .collect()
    }

    pub fn is_binary(&self) -> bool {
        self.pixels.iter().all(|&v| v == INK || v == BACKGROUND)
    }

    /// 8-connected components of drawn pixels, ordered by their first pixel
    /// in row-major order.
    pub fn components(&self) -> Vec<Region> {
        let (w, h) = (self.width as i32, self.height as i32);
        let mut seen = vec![false; self.pixels.len()];
        let mut out = Vec::new();
        for start in 0..self.pixels.len() {
            if seen[start] || self.pixels[start] != INK {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut pixels = Vec::new();
            while let Some(i) = stack.pop() {
                let (x, y) = ((i as i32) % w, (i as i32) / w);
                pixels.push((x, y));
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w || ny >= h {
                            continue;
                        }
                        let j = (ny * w + nx) as usize;
                        if !seen[j] && self.pixels[j] == INK {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
            out.push(Region::new(pixels));
        }
        out
    }
}

/// A set of pixel coordinates, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Region {
    pixels: Vec<(i32, i32)>,
}

impl Region {
    pub fn new(mut pixels: Vec<(i32, i32)>) -> Self {
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        Self { pixels }
    }

    pub fn pixels(&self) -> &[(i32, i32)] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn shifted(&self, dx: i32, dy: i32) -> Self {
        Self::new(self.pixels.iter().map(|&(x, y)| (x + dx, y + dy)).collect())
    }

    /// Reflection `x -> -x` (across a vertical axis).
    pub fn mirrored_x(&self) -> Self {
        Self::new(self.pixels.iter().map(|&(x, y)| (-x, y)).collect())
    }

    /// Reflection `y -> -y` (across a horizontal axis).
    pub fn mirrored_y(&self) -> Self {
        Self::new(self.pixels.iter().map(|&(x, y)| (x, -y)).collect())
    }

    fn min_corner(&self) -> (i32, i32) {
        let mx = self.pixels.iter().map(|p| p.0).min().unwrap_or(0);
        let my = self.pixels.iter().map(|p| p.1).min().unwrap_or(0);
        (mx, my)
    }

    fn normalized(&self) -> Vec<(i32, i32)> {
        let (mx, my) = self.min_corner();
        let mut v: Vec<(i32, i32)> = self.pixels.iter().map(|&(x, y)| (x - mx, y - my)).collect();
        v.sort_unstable_by_key(|&(x, y)| (y, x));
        v
    }
}

/// True iff some integer offset maps the pixel set of `a` exactly onto `b`.
///
/// Any such offset must carry the bounding-box corner of `a` onto that of
/// `b`, so comparing corner-normalised sets is both sound and complete.
pub fn equal_up_to_translation(a: &Region, b: &Region) -> bool {
    a.len() == b.len() && a.normalized() == b.normalized()
}

/// Symmetric rounding of `num / den` (halves away from zero); `den > 0`.
fn div_round(num: i64, den: i64) -> i64 {
    let q = (2 * num.abs() + den) / (2 * den);
    if num < 0 {
        -q
    } else {
        q
    }
}

/// Integer line stepping between two pixel centres. The pixel set is the
/// same whichever endpoint the line starts from, and mirrors exactly under
/// `x -> -x` and `y -> -y`.
fn draw_line(bm: &mut Bitmap, (x0, y0): (i64, i64), (x1, y1): (i64, i64)) {
    let (dx, dy) = (x1 - x0, y1 - y0);
    let n = dx.abs().max(dy.abs());
    if n == 0 {
        bm.ink(x0, y0);
        return;
    }
    for i in 0..=n {
        bm.ink(x0 + div_round(i * dx, n), y0 + div_round(i * dy, n));
    }
}

fn pixel_of(p: Point) -> (i64, i64) {
    (p.x.round() as i64, p.y.round() as i64)
}

/// Draw every shape's outline as 1-pixel lines between rounded vertices.
pub fn rasterize(shapes: &[PlacedShape], width: u32, height: u32) -> Result<Bitmap> {
    let mut bm = Bitmap::blank(width, height);
    for (index, shape) in shapes.iter().enumerate() {
        let pts: Vec<(i64, i64)> = shape.points().into_iter().map(pixel_of).collect();
        let inside = pts
            .iter()
            .all(|&(x, y)| x >= 0 && y >= 0 && x < i64::from(width) && y < i64::from(height));
        if !inside {
            return Err(Error::OutOfBounds {
                index,
                width,
                height,
            });
        }
        for i in 0..pts.len() {
            draw_line(&mut bm, pts[i], pts[(i + 1) % pts.len()]);
        }
    }
    Ok(bm)
}

/// Pixel set of one shape drawn alone. No canvas clipping is applied.
pub fn render_shape(shape: &PlacedShape) -> Region {
    let pts: Vec<(i64, i64)> = shape.points().into_iter().map(pixel_of).collect();
    let (min_x, min_y) = pts
        .iter()
        .fold((i64::MAX, i64::MAX), |(a, b), &(x, y)| (a.min(x), b.min(y)));
    let (max_x, max_y) = pts
        .iter()
        .fold((i64::MIN, i64::MIN), |(a, b), &(x, y)| (a.max(x), b.max(y)));
    let w = (max_x - min_x + 1) as u32;
    let h = (max_y - min_y + 1) as u32;
    let mut bm = Bitmap::blank(w, h);
    for i in 0..pts.len() {
        let a = (pts[i].0 - min_x, pts[i].1 - min_y);
        let j = (i + 1) % pts.len();
        let b = (pts[j].0 - min_x, pts[j].1 - min_y);
        draw_line(&mut bm, a, b);
    }
    Region::new(
        bm.ink_pixels()
            .into_iter()
            .map(|(x, y)| (x + min_x as i32, y + min_y as i32))
            .collect(),
    )
}
