use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;
use svrt_core::dataset::{materialize, DatasetConfig, Split};
use svrt_core::geometry::{rasterize, Bitmap};
use svrt_core::nn::{to_batch, Network};
use svrt_core::problems::{ClassLabel, ProblemId, ProblemSpec, VariantKind};

fn pid(p: u32) -> ProblemId {
    ProblemId::new(p).unwrap()
}

fn sample_scene(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_scene");
    for p in [1, 2, 16, 23] {
        let spec = ProblemSpec::original(pid(p));
        group.bench_with_input(BenchmarkId::from_parameter(p), &spec, |b, spec| {
            let mut seed = 0;
            b.iter(|| {
                seed += 1;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                black_box(spec.sample(ClassLabel::ONE, &mut rng, 64).unwrap())
            })
        });
    }
    group.finish();
}

fn rasterize_scene(c: &mut Criterion) {
    let mut group = c.benchmark_group("rasterize");
    for size in [64, 128] {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let scene = ProblemSpec::original(pid(2)).sample(ClassLabel::ZERO, &mut rng, size).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(size), &scene, |b, scene| {
            b.iter(|| black_box(rasterize(&scene.shapes, size, size).unwrap()))
        });
    }
    group.finish();
}

fn network(c: &mut Criterion) {
    let mut cfg = DatasetConfig::new(pid(2), VariantKind::Original);
    cfg.n_train = 16;
    cfg.n_test = 1;
    let data = materialize(&cfg, Split::Train).unwrap();
    let refs: Vec<&Bitmap> = data.iter().map(|(b, _)| b).collect();
    let labels: Vec<usize> = data.iter().map(|(_, l)| l.index()).collect();
    let batch = to_batch::<f32>(&refs).unwrap();
    let net = Network::<f32>::lenet64(64, 0).unwrap();

    let mut group = c.benchmark_group("lenet64_batch32");
    group.sample_size(10);
    group.bench_function("forward", |b| b.iter(|| black_box(net.forward(&batch).unwrap())));
    group.bench_function("forward_backward", |b| {
        b.iter(|| {
            let (_, cache) = net.forward(&batch).unwrap();
            black_box(net.backward(&cache, &labels).unwrap())
        })
    });
    group.finish();
}

criterion_group!(benches, sample_scene, rasterize_scene, network);
criterion_main!(benches);
