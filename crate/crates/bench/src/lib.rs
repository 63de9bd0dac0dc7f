//! Criterion benchmarks for the per-column detectors and the model; see
//! `benches/`.
