//! Criterion benchmarks for `heatlab-core`; see `benches/`.
