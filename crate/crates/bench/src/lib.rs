//! Benchmarks for `mecs-core`; see `benches/`.
