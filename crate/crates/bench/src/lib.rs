//! Criterion benchmarks for the metrology core live in `benches/`.
