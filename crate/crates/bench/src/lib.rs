//! Criterion benchmarks for scene sampling, rasterization and the network; see `benches/`.
