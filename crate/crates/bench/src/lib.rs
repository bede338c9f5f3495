//! Criterion benchmarks for the ngsent pipeline; see `benches/`.
