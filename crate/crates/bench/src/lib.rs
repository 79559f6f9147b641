//! Benchmarks for the `sphere-periods` solvers live in `benches/`.
