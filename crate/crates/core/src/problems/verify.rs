//! Independent class checks. Everything here is re-derived from the placed
//! geometry; the sampler's cue metadata is never consulted.

use super::{ClassLabel, SceneSpec, Tolerances, VariantKind};
use crate::geometry::{
    contains, equal_up_to_translation, min_separation, render_shape, similarity_fit, PlacedShape,
    Point, Region, CANVAS_MARGIN, MIN_SEPARATION,
};

const SLACK: f64 = 1e-9;
/// Relative residual under which two outlines count as one contour under a
/// similarity transform.
const SIMILAR: f64 = 1e-6;
/// Relative residual above which two outlines are certainly different.
const DISSIMILAR: f64 = 1e-3;

/// Partition shapes into classes of pixel-identical (up to integer
/// translation) outlines. Classes are ordered by their first member.
pub fn identity_classes(shapes: &[PlacedShape]) -> Vec<Vec<usize>> {
    let regions: Vec<Region> = shapes.iter().map(render_shape).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, r) in regions.iter().enumerate() {
        match classes
            .iter_mut()
            .find(|c| equal_up_to_translation(&regions[c[0]], r))
        {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    classes
}

fn class_sizes(shapes: &[PlacedShape]) -> Vec<usize> {
    let mut sizes: Vec<usize> = identity_classes(shapes).iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

fn nesting_allowed(problem: u8) -> bool {
    matches!(problem, 2 | 8 | 23)
}

/// Canvas margins, minimum bounding-box size, separation, and the
/// per-problem nesting contract.
pub fn check_layout(scene: &SceneSpec) -> std::result::Result<(), String> {
    let n = scene.shapes.len();
    for (i, s) in scene.shapes.iter().enumerate() {
        if !s.fits(scene.canvas, scene.canvas, CANVAS_MARGIN - SLACK) {
            return Err(format!("shape {i} violates the canvas margin"));
        }
        if s.bbox().min_side() < super::builder::MIN_SHAPE_SIDE - SLACK {
            return Err(format!("shape {i} is smaller than 8 px"));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&scene.shapes[i], &scene.shapes[j]);
            if min_separation(a, b) < MIN_SEPARATION - SLACK {
                return Err(format!("shapes {i} and {j} are closer than the minimum separation"));
            }
            if (contains(a, b) || contains(b, a)) && !nesting_allowed(scene.problem.get()) {
                return Err(format!("shapes {i} and {j} are nested"));
            }
        }
    }
    Ok(())
}

/// True iff the geometry of `scene` exhibits its label's defining property,
/// with inequality cues clear of the ambiguous band.
///
/// Identical-shape control scenes are checked for their construction
/// instead (one shared contour); null scenes are checked as label 0.
pub fn verify_scene(scene: &SceneSpec) -> bool {
    if check_layout(scene).is_err() {
        return false;
    }
    let label = match scene.variant {
        VariantKind::IdenticalControl => return verify_control(scene),
        VariantKind::Null => ClassLabel::ZERO,
        _ => scene.label,
    };
    let tol = Tolerances::for_canvas(scene.canvas);
    match derive_label(scene, &tol) {
        Some(derived) => derived == label,
        None => false,
    }
}

fn verify_control(scene: &SceneSpec) -> bool {
    let first = &scene.shapes[0].contour.points;
    if scene.problem.get() == 8 {
        return scene.shapes.iter().all(|s| &s.contour.points == first);
    }
    class_sizes(&scene.shapes) == vec![scene.shapes.len()]
}

fn centers(shapes: &[PlacedShape]) -> Vec<Point> {
    shapes.iter().map(PlacedShape::center).collect()
}

fn size(s: &PlacedShape) -> f64 {
    s.bbox().max_side()
}

fn decide(zero: bool, one: bool) -> Option<ClassLabel> {
    match (zero, one) {
        (true, false) => Some(ClassLabel::ZERO),
        (false, true) => Some(ClassLabel::ONE),
        _ => None,
    }
}

fn similar(a: &PlacedShape, b: &PlacedShape, reflect: bool) -> Option<f64> {
    similarity_fit(&a.points(), &b.points(), reflect)
        .filter(|f| f.relative_residual < SIMILAR)
        .map(|f| f.scale)
}

fn dissimilar(a: &PlacedShape, b: &PlacedShape) -> bool {
    similarity_fit(&a.points(), &b.points(), false)
        .is_none_or(|f| f.relative_residual > DISSIMILAR)
}

/// Index order by size, largest first.
fn by_size_desc(shapes: &[PlacedShape]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..shapes.len()).collect();
    idx.sort_by(|&a, &b| size(&shapes[b]).total_cmp(&size(&shapes[a])));
    idx
}

fn derive_label(scene: &SceneSpec, tol: &Tolerances) -> Option<ClassLabel> {
    let s = &scene.shapes;
    let c = centers(s);
    let k = f64::from(scene.canvas) / f64::from(Tolerances::BASE_CANVAS);
    let need = |n: usize| s.len() == n;
    match scene.problem.get() {
        1 => {
            if !need(2) {
                return None;
            }
            let same = class_sizes(s) == vec![2];
            decide(!same, same)
        }
        2 => {
            if !need(2) {
                return None;
            }
            let o = by_size_desc(s);
            let (big, small) = (&s[o[0]], &s[o[1]]);
            let inside = contains(big, small);
            let outside = !inside && !contains(small, big);
            decide(inside, outside)
        }
        4 => {
            if !need(2) {
                return None;
            }
            let (dx, dy) = ((c[0].x - c[1].x).abs(), (c[0].y - c[1].y).abs());
            let (near, far) = (3.0 * k + SLACK, 16.0 * k - SLACK);
            decide(dx <= near && dy >= far, dy <= near && dx >= far)
        }
        5 => {
            if !need(4) {
                return None;
            }
            let classes = identity_classes(s);
            if classes.len() != 2 || classes.iter().any(|c| c.len() != 2) {
                return None;
            }
            let twin = |i: usize| {
                classes
                    .iter()
                    .find(|cl| cl.contains(&i))
                    .and_then(|cl| cl.iter().copied().find(|&j| j != i))
                    .expect("every shape has a twin")
            };
            let mut zero = true;
            let mut one = true;
            for i in 0..4 {
                let t = twin(i);
                let d_twin = c[i].distance(c[t]);
                let d_other = (0..4)
                    .filter(|&j| j != i && j != t)
                    .map(|j| c[i].distance(c[j]))
                    .fold(f64::INFINITY, f64::min);
                zero &= d_twin + tol.sep <= d_other + SLACK;
                one &= d_other + tol.sep <= d_twin + SLACK;
            }
            decide(zero, one)
        }
        6 => {
            if !need(4) {
                return None;
            }
            let classes = identity_classes(s);
            if classes.len() != 2 || classes.iter().any(|c| c.len() != 2) {
                return None;
            }
            let d: Vec<f64> = classes.iter().map(|cl| c[cl[0]].distance(c[cl[1]])).collect();
            let delta = (d[0] - d[1]).abs();
            decide(delta <= tol.eq + SLACK, delta >= tol.sep - SLACK)
        }
        7 => {
            if !need(6) {
                return None;
            }
            let sizes = class_sizes(s);
            decide(sizes == vec![2, 2, 2], sizes == vec![3, 3])
        }
        8 => {
            if !need(2) {
                return None;
            }
            let o = by_size_desc(s);
            let (big, small) = (&s[o[0]], &s[o[1]]);
            let nested = contains(big, small);
            let fit = similar(small, big, false);
            let same_scaled = fit.is_some_and(|sc| sc > 1.2);
            let same_unscaled = fit.is_some_and(|sc| (sc - 1.0).abs() < 1e-6);
            let zero = nested && same_scaled;
            let one = (nested && dissimilar(small, big))
                || (!nested && !contains(small, big) && same_unscaled);
            decide(zero, one)
        }
        9 => {
            if !need(2) {
                return None;
            }
            let o = by_size_desc(s);
            let (big, small) = (o[0], o[1]);
            if size(&s[big]) < 1.5 * size(&s[small]) - 1e-6 {
                return None;
            }
            let dy = c[small].y - c[big].y;
            decide(dy >= tol.sep - SLACK, -dy >= tol.sep - SLACK)
        }
        10 => {
            if !need(4) {
                return None;
            }
            let dev = square_deviation(&c);
            decide(dev <= tol.eq + SLACK, dev >= tol.sep - SLACK)
        }
        12 => {
            if !need(3) {
                return None;
            }
            let o = by_size_desc(s);
            if size(&s[o[0]]) <= size(&s[o[1]]) + SLACK {
                return None;
            }
            let q = projection_overshoot(c[o[1]], c[o[2]], c[o[0]]);
            decide(q <= 0.0, q >= tol.sep - SLACK)
        }
        14 => {
            if !need(3) {
                return None;
            }
            let dev = collinearity_deviation(&c);
            decide(dev <= tol.col + SLACK, dev >= tol.sep - SLACK)
        }
        15 => {
            if !need(4) {
                return None;
            }
            let sizes = class_sizes(s);
            decide(sizes == vec![4], sizes == vec![1, 1, 1, 1])
        }
        16 | 20 => {
            if !need(2) {
                return None;
            }
            let (a, b) = if scene.problem.get() == 16 {
                // Left shape first.
                if c[0].x <= c[1].x {
                    (0, 1)
                } else {
                    (1, 0)
                }
            } else {
                (0, 1)
            };
            if scene.problem.get() == 16 && c[b].x - c[a].x < SLACK {
                return None;
            }
            let ra = render_shape(&s[a]);
            let rb = render_shape(&s[b]);
            let mirrored = if scene.problem.get() == 16 {
                ra.mirrored_x()
            } else {
                ra.mirrored_y()
            };
            let same = equal_up_to_translation(&ra, &rb);
            let mirror = equal_up_to_translation(&mirrored, &rb);
            decide(same && !mirror, mirror && !same)
        }
        17 => {
            if !need(4) {
                return None;
            }
            let classes = identity_classes(s);
            let triple = classes.iter().find(|cl| cl.len() == 3)?;
            if classes.len() != 2 {
                return None;
            }
            let d = [
                c[triple[0]].distance(c[triple[1]]),
                c[triple[0]].distance(c[triple[2]]),
                c[triple[1]].distance(c[triple[2]]),
            ];
            let spread = d.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - d.iter().copied().fold(f64::INFINITY, f64::min);
            decide(spread <= tol.eq + SLACK, spread >= tol.sep - SLACK)
        }
        18 => {
            if !need(6) {
                return None;
            }
            let gap = best_split_gap(&c);
            decide(gap >= tol.sep - SLACK, gap <= 0.0)
        }
        19 => {
            if !need(2) {
                return None;
            }
            let o = by_size_desc(s);
            let (big, small) = (&s[o[0]], &s[o[1]]);
            let ratio = size(big) / size(small);
            if !(1.5 - 1e-6..=2.5 + 1e-6).contains(&ratio) {
                return None;
            }
            let same = similar(small, big, false).is_some();
            decide(same, !same && dissimilar(small, big))
        }
        21 => {
            if !need(2) {
                return None;
            }
            let same = similar(&s[0], &s[1], false).is_some();
            decide(same, !same && dissimilar(&s[0], &s[1]))
        }
        22 => {
            if !need(3) {
                return None;
            }
            let sizes = class_sizes(s);
            decide(sizes == vec![3], sizes == vec![2, 1])
        }
        23 => {
            if !need(3) {
                return None;
            }
            let o = by_size_desc(s);
            let (l1, l2, small) = (&s[o[0]], &s[o[1]], &s[o[2]]);
            if contains(l1, l2) || contains(l2, l1) {
                return None;
            }
            let inside = usize::from(contains(l1, small)) + usize::from(contains(l2, small));
            decide(inside == 1, inside == 0)
        }
        _ => None,
    }
}

/// Largest deviation of four points from a square: the four shortest
/// pairwise distances are the sides, the two longest the diagonals.
fn square_deviation(p: &[Point]) -> f64 {
    let mut d = Vec::with_capacity(6);
    for i in 0..4 {
        for j in (i + 1)..4 {
            d.push(p[i].distance(p[j]));
        }
    }
    d.sort_by(f64::total_cmp);
    let side = d[..4].iter().sum::<f64>() / 4.0;
    d[..4]
        .iter()
        .map(|v| (v - side).abs())
        .chain(d[4..].iter().map(|v| (v / std::f64::consts::SQRT_2 - side).abs()))
        .fold(0.0, f64::max)
}

/// Signed distance by which the projection of `p` onto segment `ab` falls
/// outside the segment; negative when it falls inside.
fn projection_overshoot(a: Point, b: Point, p: Point) -> f64 {
    let (ux, uy) = (b.x - a.x, b.y - a.y);
    let len = ux.hypot(uy);
    let t = ((p.x - a.x) * ux + (p.y - a.y) * uy) / (len * len);
    (-t).max(t - 1.0) * len
}

/// Distance of the middle point from the line through the two points that
/// are furthest apart.
fn collinearity_deviation(p: &[Point]) -> f64 {
    let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
    let &(i, j, m) = pairs
        .iter()
        .max_by(|a, b| p[a.0].distance(p[a.1]).total_cmp(&p[b.0].distance(p[b.1])))
        .expect("three pairs");
    let (a, b, q) = (p[i], p[j], p[m]);
    ((b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x)).abs() / a.distance(b)
}

/// Over all splits of six points into two triples, the best value of
/// (smallest between-triple distance) − (largest within-triple distance).
fn best_split_gap(p: &[Point]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a in 1..6 {
        for b in (a + 1)..6 {
            let first = [0, a, b];
            let second: Vec<usize> = (0..6).filter(|i| !first.contains(i)).collect();
            let intra = [
                p[first[0]].distance(p[first[1]]),
                p[first[0]].distance(p[first[2]]),
                p[first[1]].distance(p[first[2]]),
                p[second[0]].distance(p[second[1]]),
                p[second[0]].distance(p[second[2]]),
                p[second[1]].distance(p[second[2]]),
            ]
            .into_iter()
            .fold(0.0, f64::max);
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
