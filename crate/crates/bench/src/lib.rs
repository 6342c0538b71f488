//! Criterion benchmarks for `autobid-core`; see `benches/`.
