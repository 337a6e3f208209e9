use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svrt_core::geometry::{
    apply_transform, contains, equal_up_to_translation, random_contour, render_shape, Mirror,
    PlacedShape, Point, Transform,
};
use svrt_core::problems::{
    category_of, identity_classes, verify_scene, Category, ClassLabel, CueMetadata, LeakKind,
    ProblemId, ProblemSpec, SceneSpec, VariantKind,
};

fn pid(v: u32) -> ProblemId {
    ProblemId::new(v).unwrap()
}

fn draw(spec: &ProblemSpec, label: ClassLabel, n: usize, seed: u64) -> Vec<SceneSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| spec.sample(label, &mut rng, 64).unwrap()).collect()
}

fn scene_centroid(s: &SceneSpec) -> Point {
    let n = s.shapes.len() as f64;
    let (x, y) = s
        .shapes
        .iter()
        .map(PlacedShape::center)
        .fold((0.0, 0.0), |acc, c| (acc.0 + c.x, acc.1 + c.y));
    Point::new(x / n, y / n)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Standard error of the difference of two sample means.
fn diff_se(a: &[f64], b: &[f64]) -> f64 {
    let var = |v: &[f64]| {
        let m = mean(v);
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    (var(a) / a.len() as f64 + var(b) / b.len() as f64).sqrt()
}

#[test]
fn sampled_scenes_verify_at_every_resolution() {
    for canvas in [64u32, 128, 224] {
        for id in ProblemId::all() {
            let spec = ProblemSpec::original(id);
            let mut rng = ChaCha8Rng::seed_from_u64(u64::from(id.get()) * 31 + u64::from(canvas));
            for label in ClassLabel::both() {
                for _ in 0..20 {
                    let mut s = spec.sample(label, &mut rng, canvas).unwrap();
                    assert!(verify_scene(&s), "p{} label {} at {canvas}", id.get(), label.get());
                    s.label = s.label.flipped();
                    assert!(!verify_scene(&s), "p{} flipped label verified", id.get());
                }
            }
        }
    }
}

#[test]
fn leak_variants_keep_the_cue() {
    for kind in [LeakKind::SizeBias, LeakKind::PositionBias] {
        for id in ProblemId::all() {
            let spec = ProblemSpec::with_variant(id, VariantKind::Leak(kind)).unwrap();
            for label in ClassLabel::both() {
                for s in draw(&spec, label, 20, 5) {
                    assert!(verify_scene(&s), "p{} {kind:?}", id.get());
                }
            }
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    for id in ProblemId::all() {
        let spec = ProblemSpec::original(id);
        for label in ClassLabel::both() {
            let a = draw(&spec, label, 5, 77);
            let b = draw(&spec, label, 5, 77);
            assert_eq!(a, b);
            let ra: Vec<_> = a.iter().map(|s| s.render().unwrap()).collect();
            let rb: Vec<_> = b.iter().map(|s| s.render().unwrap()).collect();
            assert_eq!(ra, rb);
        }
    }
}

#[test]
fn canvas_below_minimum_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let spec = ProblemSpec::original(pid(1));
    assert!(spec.sample(ClassLabel::ZERO, &mut rng, 40).is_err());
}

#[test]
fn p1_identical_pair_is_one_raster_component_class() {
    for s in draw(&ProblemSpec::original(pid(1)), ClassLabel::ONE, 50, 3) {
        let bm = s.render().unwrap();
        let comps = bm.components();
        assert_eq!(comps.len(), 2);
        assert!(equal_up_to_translation(&comps[0], &comps[1]));
    }
    for s in draw(&ProblemSpec::original(pid(1)), ClassLabel::ZERO, 50, 3) {
        assert_eq!(identity_classes(&s.shapes).len(), 2);
    }
}

#[test]
fn p8_label_zero_nests_a_scaled_copy() {
    for s in draw(&ProblemSpec::original(pid(8)), ClassLabel::ZERO, 50, 4) {
        let (big, small) = (&s.shapes[0], &s.shapes[1]);
        assert!(contains(big, small));
        assert_eq!(big.contour, small.contour);
        assert!(big.transform.scale > small.transform.scale * 1.5);
    }
}

#[test]
fn p16_label_one_is_a_vertical_mirror() {
    for s in draw(&ProblemSpec::original(pid(16)), ClassLabel::ONE, 50, 6) {
        let (l, r) = (render_shape(&s.shapes[0]), render_shape(&s.shapes[1]));
        assert!(s.shapes[0].center().x < 31.5 && s.shapes[1].center().x > 31.5);
        assert!(equal_up_to_translation(&l.mirrored_x(), &r));
        assert!(!equal_up_to_translation(&l, &r));
    }
}

fn medium_shape(seed: u64, at: Point) -> PlacedShape {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = random_contour(&mut rng, 10).unwrap();
    PlacedShape::new(c, Transform::new(at, 11.0, 0.3, Mirror::None).unwrap())
}

#[test]
fn hand_built_p17_scene() {
    let center = Point::new(32.0, 30.0);
    let radius = 14.0;
    let mut shapes = Vec::new();
    // Integer offsets from a common anchor keep the three copies pixel-identical.
    let offsets = [(0.0, -radius), (12.0, 7.0), (-12.0, 7.0)];
    for (dx, dy) in offsets {
        shapes.push(medium_shape(1, Point::new(center.x + dx, center.y + dy)));
    }
    shapes.push(medium_shape(9, Point::new(52.0, 52.0)));
    let d01 = shapes[0].center().distance(shapes[1].center());
    let d12 = shapes[1].center().distance(shapes[2].center());
    assert!((d01 - d12).abs() <= 2.0, "{d01} {d12}");
    let mut scene = SceneSpec {
        problem: pid(17),
        label: ClassLabel::ZERO,
        variant: VariantKind::Original,
        canvas: 64,
        shapes,
        cue: CueMetadata::default(),
    };
    assert_eq!(svrt_core::problems::check_layout(&scene), Ok(()));
    assert!(verify_scene(&scene));
    scene.label = ClassLabel::ONE;
    assert!(!verify_scene(&scene));
    // Push one identical shape far off the triangle: now label 1.
    scene.shapes[1] = scene.shapes[1].translated(10.0, 0.0);
    assert!(verify_scene(&scene));
}

#[test]
fn hand_built_scene_with_overlap_fails_layout() {
    let a = medium_shape(1, Point::new(30.0, 30.0));
    let b = a.translated(1.0, 0.0);
    let scene = SceneSpec {
        problem: pid(1),
        label: ClassLabel::ONE,
        variant: VariantKind::Original,
        canvas: 64,
        shapes: vec![a, b],
        cue: CueMetadata::default(),
    };
    assert!(!verify_scene(&scene));
}

#[test]
fn control_scenes_share_one_contour() {
    for id in [1u32, 6, 17] {
        let spec = ProblemSpec::with_variant(pid(id), VariantKind::IdenticalControl).unwrap();
        for label in ClassLabel::both() {
            for s in draw(&spec, label, 30, 8) {
                assert_eq!(identity_classes(&s.shapes).len(), 1, "p{id}");
                assert!(verify_scene(&s));
            }
        }
    }
    let spec = ProblemSpec::with_variant(pid(8), VariantKind::IdenticalControl).unwrap();
    for s in draw(&spec, ClassLabel::ZERO, 30, 8) {
        assert!(contains(&s.shapes[0], &s.shapes[1]));
        assert_eq!(s.shapes[0].contour, s.shapes[1].contour);
    }
    assert!(ProblemSpec::with_variant(pid(2), VariantKind::IdenticalControl).is_err());
}

#[test]
fn control_p1_classes_are_statistically_indistinguishable() {
    let spec = ProblemSpec::with_variant(pid(1), VariantKind::IdenticalControl).unwrap();
    let stats = |label| {
        let scenes = draw(&spec, label, 1500, 21 + u64::from(label.get()));
        let ink: Vec<f64> = scenes
            .iter()
            .map(|s| s.render().unwrap().ink_pixels().len() as f64)
            .collect();
        let area: Vec<f64> = scenes.iter().map(|s| s.shapes[0].bbox().area()).collect();
        let cx: Vec<f64> = scenes.iter().map(|s| scene_centroid(s).x).collect();
        let cy: Vec<f64> = scenes.iter().map(|s| scene_centroid(s).y).collect();
        [ink, area, cx, cy]
    };
    let (a, b) = (stats(ClassLabel::ZERO), stats(ClassLabel::ONE));
    for (x, y) in a.iter().zip(&b) {
        let z = (mean(x) - mean(y)).abs() / diff_se(x, y);
        assert!(z < 4.0, "class difference z = {z}");
    }
}

#[test]
fn size_bias_scales_label_one_area() {
    let spec = ProblemSpec::with_variant(pid(1), VariantKind::Leak(LeakKind::SizeBias)).unwrap();
    let area = |label| {
        let v: Vec<f64> = draw(&spec, label, 1000, 40)
            .iter()
            .flat_map(|s| s.shapes.iter().map(|p| p.bbox().area()).collect::<Vec<_>>())
            .collect();
        mean(&v)
    };
    let ratio = area(ClassLabel::ONE) / area(ClassLabel::ZERO);
    assert!((ratio - 1.44).abs() < 0.06, "{ratio}");
}

fn centroid_difference(spec: &ProblemSpec, n: usize) -> (f64, f64) {
    let c = |label| {
        let scenes = draw(spec, label, n, 50 + u64::from(label.get()));
        let pts: Vec<Point> = scenes.iter().map(scene_centroid).collect();
        (
            mean(&pts.iter().map(|p| p.x).collect::<Vec<_>>()),
            mean(&pts.iter().map(|p| p.y).collect::<Vec<_>>()),
        )
    };
    let (a, b) = (c(ClassLabel::ZERO), c(ClassLabel::ONE));
    (b.0 - a.0, b.1 - a.1)
}

#[test]
fn position_bias_shifts_label_one_toward_top_left() {
    let spec =
        ProblemSpec::with_variant(pid(1), VariantKind::Leak(LeakKind::PositionBias)).unwrap();
    let (dx, dy) = centroid_difference(&spec, 2000);
    assert!((dx + 6.0).abs() < 1.0 && (dy + 6.0).abs() < 1.0, "{dx} {dy}");
}

#[test]
fn original_classes_share_a_centroid() {
    for id in [1u32, 2, 16, 20, 21] {
        let (dx, dy) = centroid_difference(&ProblemSpec::original(pid(id)), 2000);
        assert!(dx.abs() <= 1.0 && dy.abs() <= 1.0, "p{id}: {dx} {dy}");
    }
}

#[test]
fn null_variant_draws_both_classes_from_label_zero() {
    let spec = ProblemSpec::with_variant(pid(2), VariantKind::Null).unwrap();
    for s in draw(&spec, ClassLabel::ONE, 30, 60) {
        assert_eq!(s.label, ClassLabel::ONE);
        assert!(contains(&s.shapes[0], &s.shapes[1]));
        assert!(verify_scene(&s));
    }
}

#[test]
fn categories_match_reference() {
    assert_eq!(category_of(pid(1)), Category::Compare);
    assert_eq!(category_of(pid(6)), Category::CompareGrouping);
    assert_eq!(category_of(pid(9)), Category::SizeRelativePosition);
    assert_eq!(category_of(pid(14)), Category::Alignment);
    assert_eq!(category_of(pid(18)), Category::Grouping);
    assert!(ProblemId::new(3).is_err() && ProblemId::new(11).is_err() && ProblemId::new(13).is_err());
}

#[test]
fn mirror_helper_matches_transform_mirror() {
    // The P20 construction: a horizontal-axis mirror of a placed shape.
    let s = medium_shape(4, Point::new(20.3, 18.6));
    let t = s.transform;
    let m = PlacedShape::new(
        s.contour.clone(),
        Transform::new(Point::new(t.translate.x, 50.0 - t.translate.y), t.scale, -t.rotate, Mirror::HorizontalAxis)
            .unwrap(),
    );
    let pts = apply_transform(&s.contour, &t);
    let mpts = m.points();
    for (p, q) in pts.points.iter().zip(&mpts) {
        assert!((p.x - q.x).abs() < 1e-9 && (p.y + q.y - 50.0).abs() < 1e-9);
    }
    assert!(equal_up_to_translation(&render_shape(&s).mirrored_y(), &render_shape(&m)));
}
