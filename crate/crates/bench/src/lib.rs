//! Criterion benchmarks for the moevcs core; see `benches/`.
