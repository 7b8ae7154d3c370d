//! Criterion benchmarks for detproc; see `benches/`.
