//! Criterion benchmarks for the statistics and simulation hot paths; see
//! `benches/`.
