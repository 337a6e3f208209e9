//! Class-conditional samplers. Sizes and distances are written for a 64 px
//! canvas and scaled by `Builder::px` / `Builder::size`.

use rand::RngCore;
use std::f64::consts::{PI, SQRT_2, TAU};

use super::builder::{Attempt, Builder, Drawn, Look};
use super::{ClassLabel, ProblemSpec, SceneSpec, VariantKind};
use crate::geometry::{
    equal_up_to_translation, render_shape, Mirror, PlacedShape, Point, Transform,
};
use crate::{Error, Result};

const MAX_SCENE_ATTEMPTS: usize = 400;

const NORMAL: (f64, f64) = (12.0, 16.0);
const MEDIUM: (f64, f64) = (10.0, 13.0);
const SMALL: (f64, f64) = (10.0, 12.0);
const LARGE: (f64, f64) = (26.0, 32.0);

pub(super) fn sample(
    spec: &ProblemSpec,
    label: ClassLabel,
    rng: &mut dyn RngCore,
    canvas: u32,
) -> Result<SceneSpec> {
    let draw_as = if spec.variant == VariantKind::Null {
        ClassLabel::ZERO
    } else {
        label
    };
    let mut last = "";
    for _ in 0..MAX_SCENE_ATTEMPTS {
        let mut b = Builder::new(rng, canvas, spec.id, spec.variant, label);
        let one = draw_as == ClassLabel::ONE;
        let attempt = match spec.id.get() {
            1 => p1(&mut b, one),
            2 => p2(&mut b, one),
            4 => p4(&mut b, one),
            5 => p5(&mut b, one),
            6 => p6(&mut b, one),
            7 => p7(&mut b, one),
            8 => p8(&mut b, one),
            9 => p9(&mut b, one),
            10 => p10(&mut b, one),
            12 => p12(&mut b, one),
            14 => p14(&mut b, one),
            15 => p15(&mut b, one),
            16 => p16(&mut b, one),
            17 => p17(&mut b, one),
            18 => p18(&mut b, one),
            19 => p19(&mut b, one),
            20 => p20(&mut b, one),
            21 => p21(&mut b, one),
            22 => p22(&mut b, one),
            23 => p23(&mut b, one),
            other => return Err(Error::UnknownProblem(u32::from(other))),
        };
        match attempt {
            Ok(drawn) => {
                let (shapes, cue) = drawn.into_cue();
                return Ok(SceneSpec {
                    problem: spec.id,
                    label,
                    variant: spec.variant,
                    canvas,
                    shapes,
                    cue,
                });
            }
            Err(constraint) => last = constraint,
        }
    }
    Err(Error::SamplingFailed {
        problem: spec.id.get(),
        label: label.get(),
        constraint: last.to_string(),
        attempts: MAX_SCENE_ATTEMPTS,
    })
}

fn sized(b: &mut Builder, range: (f64, f64)) -> Attempt<Look> {
    let s = b.size(range.0, range.1);
    b.look(s)
}

fn sized_distinct(b: &mut Builder, range: (f64, f64), others: &[&Look]) -> Attempt<Look> {
    let s = b.size(range.0, range.1);
    b.distinct_look(s, others)
}

fn place_checked(
    b: &Builder,
    look: &Look,
    center: Point,
    others: &[PlacedShape],
    constraint: &'static str,
) -> Attempt<PlacedShape> {
    let s = b.place_at(look, center);
    if b.fits(&s) && b.clear_of(&s, others) {
        Ok(s)
    } else {
        Err(constraint)
    }
}

fn rotated(v: (f64, f64), angle: f64) -> (f64, f64) {
    let (s, c) = angle.sin_cos();
    (c * v.0 - s * v.1, s * v.0 + c * v.1)
}

fn offset(p: Point, v: (f64, f64)) -> Point {
    Point::new(p.x + v.0, p.y + v.1)
}

fn require(ok: bool, constraint: &'static str) -> Attempt<()> {
    if ok {
        Ok(())
    } else {
        Err(constraint)
    }
}

/// Two shapes: different (label 0) or identical (label 1).
fn p1(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let a = sized(b, NORMAL)?;
    let second = if one { a.clone() } else { sized_distinct(b, NORMAL, &[&a])? };
    let sa = b.place_random(&a, &[])?;
    let sb = b.place_random(&second, std::slice::from_ref(&sa))?;
    let mut d = Drawn::default();
    d.push(sa, 0);
    d.push(sb, usize::from(!one));
    Ok(d)
}

/// Small shape inside (0) or outside (1) a large one.
fn p2(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let big = sized(b, LARGE)?;
    let small = sized(b, SMALL)?;
    let sbig = b.place_random(&big, &[])?;
    let ssmall = if one {
        b.place_random(&small, std::slice::from_ref(&sbig))?
    } else {
        b.place_inside(&small, &sbig, &[])?
    };
    let mut d = Drawn::default();
    d.push(sbig, 0);
    d.push(ssmall, 1);
    Ok(d)
}

/// Two shapes aligned vertically (0) or horizontally (1).
fn p4(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let a = sized(b, NORMAL)?;
    let c = sized(b, NORMAL)?;
    let sa = b.place_random(&a, &[])?;
    let along = b.upx(17.0, 40.0) * if b.coin() { 1.0 } else { -1.0 };
    let across = b.upx(-2.0, 2.0);
    let v = if one { (along, across) } else { (across, along) };
    let sc = place_checked(b, &c, offset(sa.center(), v), std::slice::from_ref(&sa), "aligned placement")?;
    let (dx, dy) = (
        (sa.center().x - sc.center().x).abs(),
        (sa.center().y - sc.center().y).abs(),
    );
    let (near, far) = (b.px(3.0), b.px(16.0));
    if one {
        require(dy <= near && dx >= far, "horizontal alignment")?;
    } else {
        require(dx <= near && dy >= far, "vertical alignment")?;
    }
    let mut d = Drawn::default();
    d.push(sa, 0);
    d.push(sc, 1);
    d.note("dx", dx);
    d.note("dy", dy);
    Ok(d)
}

/// Two identical pairs; each shape's nearest neighbour is its twin (0) or a
/// shape from the other pair (1).
fn p5(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let la = sized(b, MEDIUM)?;
    let lb = sized_distinct(b, MEDIUM, &[&la])?;
    let near = (b.px(14.0), b.px(18.0));
    let mut placed: Vec<PlacedShape> = Vec::new();
    let groups;
    if one {
        let a1 = b.place_random(&la, &placed)?;
        placed.push(a1.clone());
        let b1 = b.place_near(&lb, a1.center(), near, &placed)?;
        placed.push(b1);
        let a2 = b.place_random(&la, &placed)?;
        placed.push(a2.clone());
        let b2 = b.place_near(&lb, a2.center(), near, &placed)?;
        placed.push(b2);
        groups = [0, 1, 0, 1];
    } else {
        let a1 = b.place_random(&la, &placed)?;
        placed.push(a1.clone());
        let a2 = b.place_near(&la, a1.center(), near, &placed)?;
        placed.push(a2);
        let b1 = b.place_random(&lb, &placed)?;
        placed.push(b1.clone());
        let b2 = b.place_near(&lb, b1.center(), near, &placed)?;
        placed.push(b2);
        groups = [0, 0, 1, 1];
    }
    let c: Vec<Point> = placed.iter().map(PlacedShape::center).collect();
    for i in 0..4 {
        let mut d_twin = f64::INFINITY;
        let mut d_other = f64::INFINITY;
        for j in 0..4 {
            if j == i {
                continue;
            }
            let dist = c[i].distance(c[j]);
            if groups[j] == groups[i] {
                d_twin = dist;
            } else {
                d_other = d_other.min(dist);
            }
        }
        if one {
            require(d_other + b.tol.sep <= d_twin, "nearest neighbour is a non-twin")?;
        } else {
            require(d_twin + b.tol.sep <= d_other, "nearest neighbour is the twin")?;
        }
    }
    let mut d = Drawn::default();
    for (s, g) in placed.into_iter().zip(groups) {
        d.push(s, g);
    }
    Ok(d)
}

/// Two identical pairs whose within-pair distances are equal (0) or differ
/// by at least the separation margin (1).
fn p6(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let la = sized(b, MEDIUM)?;
    let lb = sized_distinct(b, MEDIUM, &[&la])?;
    let d1 = b.upx(14.0, 30.0);
    let d2 = if one {
        let delta = b.upx(9.0, 16.0);
        if d1 + delta <= b.px(40.0) && (b.coin() || d1 - delta < b.px(14.0)) {
            d1 + delta
        } else {
            d1 - delta
        }
    } else {
        d1 + b.upx(-0.5, 0.5)
    };
    require(d2 >= b.px(13.0), "pair distance range")?;
    let a1 = b.place_random(&la, &[])?;
    let a2 = b.place_near(&la, a1.center(), (d1, d1), std::slice::from_ref(&a1))?;
    let others = vec![a1.clone(), a2.clone()];
    let b1 = b.place_random(&lb, &others)?;
    let mut others = others;
    others.push(b1.clone());
    let b2 = b.place_near(&lb, b1.center(), (d2, d2), &others)?;
    let da = a1.center().distance(a2.center());
    let db = b1.center().distance(b2.center());
    let delta = (da - db).abs();
    if one {
        require(delta >= b.tol.sep, "pair distances differ")?;
    } else {
        require(delta <= b.tol.eq, "pair distances equal")?;
    }
    let mut d = Drawn::default();
    d.push(a1, 0);
    d.push(a2, 0);
    d.push(b1, 1);
    d.push(b2, 1);
    d.note("pair_distance_a", da);
    d.note("pair_distance_b", db);
    Ok(d)
}

/// Six shapes: three identical pairs (0) or two identical triplets (1).
fn p7(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let n_looks = if one { 2 } else { 3 };
    let mut looks: Vec<Look> = Vec::new();
    for _ in 0..n_looks {
        let refs: Vec<&Look> = looks.iter().collect();
        let l = sized_distinct(b, MEDIUM, &refs)?;
        looks.push(l);
    }
    let mut d = Drawn::default();
    for i in 0..6 {
        let g = i % n_looks;
        let s = b.place_random(&looks[g], &d.shapes)?;
        d.push(s, g);
    }
    Ok(d)
}

/// Small shape inside a scaled-up copy of itself (0); otherwise a small
/// shape inside a different large shape, or two same-size identical shapes
/// side by side (1).
fn p8(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let mut d = Drawn::default();
    if one && b.coin() {
        let l = sized(b, NORMAL)?;
        let s1 = b.place_random(&l, &[])?;
        let s2 = b.place_random(&l, std::slice::from_ref(&s1))?;
        d.push(s1, 0);
        d.push(s2, 0);
        d.note("subcase", 1.0);
        return Ok(d);
    }
    let small = sized(b, SMALL)?;
    let big_size = b.size(LARGE.0, LARGE.1);
    let big = if one {
        b.distinct_look(big_size, &[&small])?
    } else {
        let big = small.with_size(big_size);
        require(big.linear_bbox().min_side() >= 8.0, "shape bounding box at least 8 px")?;
        big
    };
    let sbig = b.place_random(&big, &[])?;
    let ssmall = b.place_inside(&small, &sbig, &[])?;
    d.push(sbig, 0);
    d.push(ssmall, usize::from(one));
    d.note("subcase", 0.0);
    Ok(d)
}

/// Larger shape above (0) or below (1) a shape at least 1.5 times smaller.
fn p9(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let big_size = b.size(20.0, 26.0);
    let ratio = b.uniform(1.5, 1.9);
    let big = b.look(big_size)?;
    let small = b.look(big_size / ratio)?;
    let sbig = b.place_random(&big, &[])?;
    let dy = b.upx(12.0, 34.0) * if one { -1.0 } else { 1.0 };
    let dx = b.upx(-16.0, 16.0);
    let ssmall = place_checked(b, &small, offset(sbig.center(), (dx, dy)), std::slice::from_ref(&sbig), "vertical offset placement")?;
    let measured = ssmall.center().y - sbig.center().y;
    if one {
        require(-measured >= b.tol.sep, "larger shape below")?;
    } else {
        require(measured >= b.tol.sep, "larger shape above")?;
    }
    let mut d = Drawn::default();
    d.push(sbig, 0);
    d.push(ssmall, 1);
    d.note("size_ratio", ratio);
    Ok(d)
}

fn square_deviation(p: &[Point]) -> f64 {
    let mut dist = Vec::new();
    for i in 0..p.len() {
        for j in (i + 1)..p.len() {
            dist.push(p[i].distance(p[j]));
        }
    }
    dist.sort_by(f64::total_cmp);
    let side = dist[..4].iter().sum::<f64>() / 4.0;
    let mut dev: f64 = 0.0;
    for v in &dist[..4] {
        dev = dev.max((v - side).abs());
    }
    for v in &dist[4..] {
        dev = dev.max((v / SQRT_2 - side).abs());
    }
    dev
}

/// Four shapes at the corners of a square (0) or clearly not (1).
fn p10(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let mut looks = Vec::new();
    for _ in 0..4 {
        looks.push(sized(b, MEDIUM)?);
    }
    let mut d = Drawn::default();
    if one {
        for (g, l) in looks.iter().enumerate() {
            let s = b.place_random(l, &d.shapes)?;
            d.push(s, g);
        }
    } else {
        let side = b.upx(22.0, 34.0);
        let theta = b.angle();
        let extent = side * SQRT_2 + b.px(14.0);
        let center = b.random_center(extent, extent).ok_or("square fits on the canvas")?;
        for (g, l) in looks.iter().enumerate() {
            let corner = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)][g];
            let v = rotated((corner.0 * side, corner.1 * side), theta);
            let s = place_checked(b, l, offset(center, v), &d.shapes, "square corner placement")?;
            d.push(s, g);
        }
    }
    let c: Vec<Point> = d.shapes.iter().map(PlacedShape::center).collect();
    let dev = square_deviation(&c);
    if one {
        require(dev >= b.tol.sep, "centres far from a square")?;
    } else {
        require(dev <= b.tol.eq, "centres form a square")?;
    }
    d.note("square_deviation", dev);
    Ok(d)
}

/// Large shape whose centre projects inside (0) or clearly outside (1) the
/// segment joining two small shapes.
fn p12(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let l1 = sized(b, SMALL)?;
    let l2 = sized(b, SMALL)?;
    let big = sized(b, (20.0, 26.0))?;
    let s1 = b.place_random(&l1, &[])?;
    let span = if one { (b.px(16.0), b.px(30.0)) } else { (b.px(42.0), b.px(56.0)) };
    let s2 = b.place_near(&l2, s1.center(), span, std::slice::from_ref(&s1))?;
    let (p1, p2) = (s1.center(), s2.center());
    let len = p1.distance(p2);
    let u = ((p2.x - p1.x) / len, (p2.y - p1.y) / len);
    let n = (-u.1, u.0);
    let target = if one {
        // Extend past whichever end leads toward the frame centre.
        let fc = b.frame_center();
        let toward = (fc.x - 0.5 * (p1.x + p2.x)) * u.0 + (fc.y - 0.5 * (p1.y + p2.y)) * u.1;
        let (from, dir) = if toward >= 0.0 { (p2, u) } else { (p1, (-u.0, -u.1)) };
        let along = b.upx(14.0, 30.0);
        let across = b.upx(-8.0, 8.0);
        offset(from, (dir.0 * along + n.0 * across, dir.1 * along + n.1 * across))
    } else {
        let t = b.uniform(0.35, 0.65);
        let across = b.upx(-6.0, 6.0);
        offset(p1, (u.0 * t * len + n.0 * across, u.1 * t * len + n.1 * across))
    };
    let others = [s1.clone(), s2.clone()];
    let sbig = place_checked(b, &big, target, &others, "large shape placement")?;
    let c = sbig.center();
    let t = ((c.x - p1.x) * u.0 + (c.y - p1.y) * u.1) / len;
    let overshoot = (-t).max(t - 1.0) * len;
    if one {
        require(overshoot >= b.tol.sep, "projection outside the segment")?;
    } else {
        require(overshoot <= 0.0, "projection inside the segment")?;
    }
    let mut d = Drawn::default();
    d.push(sbig, 0);
    d.push(s1, 1);
    d.push(s2, 2);
    d.note("overshoot", overshoot);
    Ok(d)
}

fn line_deviation(p: &[Point]) -> f64 {
    let mut best = (0, 1, 2);
    let mut far = -1.0;
    for (i, j, m) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        let dist = p[i].distance(p[j]);
        if dist > far {
            far = dist;
            best = (i, j, m);
        }
    }
    let (a, c, q) = (p[best.0], p[best.1], p[best.2]);
    ((c.x - a.x) * (q.y - a.y) - (c.y - a.y) * (q.x - a.x)).abs() / far
}

/// Three shapes on a line (0) or with one clearly off it (1).
fn p14(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let mut looks = Vec::new();
    for _ in 0..3 {
        looks.push(sized(b, MEDIUM)?);
    }
    let g1 = b.upx(17.0, 24.0);
    let g2 = b.upx(17.0, 24.0);
    let theta = b.angle();
    let u = (theta.cos(), theta.sin());
    let n = (-u.1, u.0);
    let span = g1 + g2;
    let pad = b.px(14.0);
    let center = b
        .random_center(span * u.0.abs() + pad, span * u.1.abs() + pad)
        .ok_or("line fits on the canvas")?;
    let p0 = offset(center, (-u.0 * span / 2.0, -u.1 * span / 2.0));
    let mut pts = [p0, offset(p0, (u.0 * g1, u.1 * g1)), offset(p0, (u.0 * span, u.1 * span))];
    if one {
        let off = b.upx(10.0, 16.0) * if b.coin() { 1.0 } else { -1.0 };
        pts[1] = offset(pts[1], (n.0 * off, n.1 * off));
    }
    let mut d = Drawn::default();
    for (g, (l, p)) in looks.iter().zip(pts).enumerate() {
        let s = place_checked(b, l, p, &d.shapes, "placement along the line")?;
        d.push(s, g);
    }
    let c: Vec<Point> = d.shapes.iter().map(PlacedShape::center).collect();
    let dev = line_deviation(&c);
    if one {
        require(dev >= b.tol.sep, "centres off the line")?;
    } else {
        require(dev <= b.tol.col, "centres collinear")?;
    }
    d.note("line_deviation", dev);
    Ok(d)
}

/// Four shapes, all identical (0) or all pairwise different (1).
fn p15(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let mut looks: Vec<Look> = Vec::new();
    if one {
        for _ in 0..4 {
            let refs: Vec<&Look> = looks.iter().collect();
            let l = sized_distinct(b, MEDIUM, &refs)?;
            looks.push(l);
        }
    } else {
        let l = sized(b, MEDIUM)?;
        looks = vec![l; 4];
    }
    let mut d = Drawn::default();
    for (i, l) in looks.iter().enumerate() {
        let s = b.place_random(l, &d.shapes)?;
        d.push(s, if one { i } else { 0 });
    }
    Ok(d)
}

/// A shape left of the frame's vertical midline and a partner at the
/// mirrored position: an identical copy (0) or its mirror image (1).
fn p16(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let l = sized(b, NORMAL)?;
    let probe = b.place_at(&l, Point::new(0.0, 0.0));
    let r = render_shape(&probe);
    require(!equal_up_to_translation(&r, &r.mirrored_x()), "mirror-asymmetric shape")?;
    let axis = b.frame_center().x;
    let bb = l.linear_bbox();
    let (x0, y0, _, y1) = b.frame();
    let gap = b.px(3.0);
    let cx = b.uniform(x0 + bb.width() / 2.0 + 1.0, axis - gap - bb.width() / 2.0);
    let cy = b.uniform(y0 + bb.height() / 2.0 + 1.0, y1 - bb.height() / 2.0 - 1.0);
    let left = place_checked(b, &l, Point::new(cx, cy), &[], "left placement")?;
    let right = if one {
        let t = left.transform;
        PlacedShape::new(
            left.contour.clone(),
            Transform {
                translate: Point::new(2.0 * axis - t.translate.x, t.translate.y),
                scale: t.scale,
                rotate: -t.rotate,
                mirror: Mirror::VerticalAxis,
            },
        )
    } else {
        let dx = (2.0 * axis - 2.0 * left.center().x).round();
        left.translated(dx, 0.0)
    };
    require(b.fits(&right) && b.clear_of(&right, std::slice::from_ref(&left)), "right placement")?;
    require(right.center().x > axis && left.center().x < axis, "shapes on both sides of the midline")?;
    let mut d = Drawn::default();
    d.push(left, 0);
    d.push(right, 0);
    Ok(d)
}

/// Three identical shapes plus a different one; the three pairwise
/// distances among the identical shapes are equal (0) or not (1).
fn p17(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let la = sized(b, MEDIUM)?;
    let lb = sized_distinct(b, MEDIUM, &[&la])?;
    let side = b.upx(20.0, 30.0);
    let radius = side / 3f64.sqrt();
    let theta = b.angle();
    let extent = 2.0 * radius + b.px(14.0);
    let center = b.random_center(extent, extent).ok_or("triangle fits on the canvas")?;
    let mut pts: Vec<Point> = (0..3)
        .map(|i| {
            let a = theta + TAU * f64::from(i) / 3.0;
            offset(center, (radius * a.cos(), radius * a.sin()))
        })
        .collect();
    if one {
        let push = b.upx(11.0, 18.0) * if b.coin() { 1.0 } else { -0.6 };
        let a = theta;
        pts[0] = offset(pts[0], (push * a.cos(), push * a.sin()));
    }
    let mut d = Drawn::default();
    for p in pts {
        let s = place_checked(b, &la, p, &d.shapes, "triangle vertex placement")?;
        d.push(s, 0);
    }
    let c: Vec<Point> = d.shapes.iter().map(PlacedShape::center).collect();
    let dist = [c[0].distance(c[1]), c[0].distance(c[2]), c[1].distance(c[2])];
    let spread = dist.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - dist.iter().copied().fold(f64::INFINITY, f64::min);
    if one {
        require(spread >= b.tol.sep, "unequal distances among identical shapes")?;
    } else {
        require(spread <= b.tol.eq, "equal distances among identical shapes")?;
    }
    let odd = b.place_random(&lb, &d.shapes)?;
    d.push(odd, 1);
    d.note("distance_spread", spread);
    Ok(d)
}

fn split_gap(p: &[Point]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a in 1..6 {
        for c in (a + 1)..6 {
            let first = [0, a, c];
            let second: Vec<usize> = (0..6).filter(|i| !first.contains(i)).collect();
            let mut intra: f64 = 0.0;
            for group in [&first[..], &second[..]] {
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        intra = intra.max(p[group[i]].distance(p[group[j]]));
                    }
                }
            }
            let mut inter = f64::INFINITY;
            for &i in &first {
                for &j in &second {
                    inter = inter.min(p[i].distance(p[j]));
                }
            }
            best = best.max(inter - intra);
        }
    }
    best
}

/// Six shapes forming two separated clusters of three (0) or spread without
/// such a split (1).
fn p18(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let mut looks = Vec::new();
    for _ in 0..6 {
        looks.push(sized(b, (10.0, 11.0))?);
    }
    let mut d = Drawn::default();
    if one {
        for (g, l) in looks.iter().enumerate() {
            let s = b.place_random(l, &d.shapes)?;
            d.push(s, g);
        }
    } else {
        // Triangles face each other edge to edge.
        let rho = b.upx(7.0, 8.0);
        let dist = b.upx(30.0, 36.0);
        let phi = b.angle();
        let pad = 2.0 * rho + b.px(12.0);
        let mid = b
            .random_center(dist * phi.cos().abs() + pad, dist * phi.sin().abs() + pad)
            .ok_or("clusters fit on the canvas")?;
        let u = (phi.cos(), phi.sin());
        for (cluster, sign, facing) in [(0usize, -0.5, PI), (1usize, 0.5, 0.0)] {
            let cc = offset(mid, (sign * dist * u.0, sign * dist * u.1));
            let psi = phi + facing + b.uniform(-0.2, 0.2);
            for i in 0..3 {
                let a = psi + TAU * i as f64 / 3.0;
                let p = offset(cc, (rho * a.cos(), rho * a.sin()));
                let s = place_checked(b, &looks[cluster * 3 + i], p, &d.shapes, "cluster placement")?;
                d.push(s, cluster * 3 + i);
            }
        }
    }
    let c: Vec<Point> = d.shapes.iter().map(PlacedShape::center).collect();
    let gap = split_gap(&c);
    if one {
        require(gap <= 0.0, "no two-cluster split")?;
    } else {
        require(gap >= b.tol.sep, "two separated clusters")?;
    }
    d.note("split_gap", gap);
    Ok(d)
}

/// Two shapes at a scale ratio in [1.5, 2.5]: the same contour (0) or
/// different contours (1).
fn p19(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let s = b.size(SMALL.0, SMALL.1);
    let ratio = b.uniform(1.5, 2.3);
    let small = b.look(s)?;
    let big = if one {
        b.distinct_look(s * ratio, &[&small])?
    } else {
        small.with_size(s * ratio)
    };
    let sbig = b.place_random(&big, &[])?;
    let ssmall = b.place_random(&small, std::slice::from_ref(&sbig))?;
    let mut d = Drawn::default();
    d.push(sbig, 0);
    d.push(ssmall, usize::from(one));
    d.note("scale_ratio", ratio);
    Ok(d)
}

/// Two shapes: identical (0) or mirror images across a horizontal axis (1).
fn p20(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let l = sized(b, NORMAL)?;
    let probe = b.place_at(&l, Point::new(0.0, 0.0));
    let r = render_shape(&probe);
    require(!equal_up_to_translation(&r, &r.mirrored_y()), "mirror-asymmetric shape")?;
    let a = b.place_random(&l, &[])?;
    let bb = l.linear_bbox();
    let target = b
        .random_center(bb.width(), bb.height())
        .ok_or("shape fits inside the canvas margin")?;
    let ac = a.center();
    let partner = if one {
        let t = a.transform;
        let dx = (target.x - ac.x).round();
        let axis = (target.y + ac.y).round();
        PlacedShape::new(
            a.contour.clone(),
            Transform {
                translate: Point::new(t.translate.x + dx, axis - t.translate.y),
                scale: t.scale,
                rotate: -t.rotate,
                mirror: Mirror::HorizontalAxis,
            },
        )
    } else {
        a.translated((target.x - ac.x).round(), (target.y - ac.y).round())
    };
    require(b.fits(&partner) && b.clear_of(&partner, std::slice::from_ref(&a)), "partner placement")?;
    let mut d = Drawn::default();
    d.push(a, 0);
    d.push(partner, 0);
    Ok(d)
}

fn reoriented(l: &Look, rotate: f64, size: f64) -> Attempt<Look> {
    let look = Look {
        rotate,
        ..l.clone()
    }
    .with_size(size);
    require(look.linear_bbox().min_side() >= 8.0, "shape bounding box at least 8 px")?;
    Ok(look)
}

/// Two shapes under independent rotation and scaling: the same contour (0)
/// or different contours (1).
fn p21(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let s1 = b.size(11.0, 16.0);
    let ratio = b.uniform(1.0, 1.6);
    let s2 = if b.coin() { s1 * ratio } else { s1 / ratio };
    require(s2 >= b.px(10.0), "shape size range")?;
    let first = b.look(s1)?;
    let second = if one {
        b.distinct_look(s2, &[&first])?
    } else {
        let rot = b.angle();
        reoriented(&first, rot, s2)?
    };
    let sa = b.place_random(&first, &[])?;
    let sb = b.place_random(&second, std::slice::from_ref(&sa))?;
    let mut d = Drawn::default();
    d.push(sa, 0);
    d.push(sb, usize::from(one));
    Ok(d)
}

/// Three shapes: all identical (0) or exactly two identical (1).
fn p22(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let a = sized(b, (12.0, 15.0))?;
    let looks = if one {
        let c = sized_distinct(b, (12.0, 15.0), &[&a])?;
        vec![(a.clone(), 0), (a, 0), (c, 1)]
    } else {
        vec![(a.clone(), 0), (a.clone(), 0), (a, 0)]
    };
    let mut d = Drawn::default();
    for (l, g) in &looks {
        let s = b.place_random(l, &d.shapes)?;
        d.push(s, *g);
    }
    Ok(d)
}

/// Two large shapes and a small one that is inside one of them (0) or
/// outside both (1).
fn p23(b: &mut Builder, one: bool) -> Attempt<Drawn> {
    let l1 = sized(b, (22.0, 26.0))?;
    let l2 = sized(b, (22.0, 26.0))?;
    let small = sized(b, SMALL)?;
    let s1 = b.place_random(&l1, &[])?;
    let s2 = b.place_random(&l2, std::slice::from_ref(&s1))?;
    let ssmall = if one {
        b.place_random(&small, &[s1.clone(), s2.clone()])?
    } else if b.coin() {
        b.place_inside(&small, &s1, std::slice::from_ref(&s2))?
    } else {
        b.place_inside(&small, &s2, std::slice::from_ref(&s1))?
    };
    let mut d = Drawn::default();
    d.push(s1, 0);
    d.push(s2, 1);
    d.push(ssmall, 2);
    Ok(d)
}

