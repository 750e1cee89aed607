//! Criterion benchmarks for the szlab kernels; see `benches/`.
