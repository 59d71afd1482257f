//! Criterion benchmarks for the flow solvers live in `benches/`.
