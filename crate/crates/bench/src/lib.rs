//! Criterion benchmarks for `progfree-core`; see `benches/`.
