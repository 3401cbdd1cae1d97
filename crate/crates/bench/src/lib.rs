//! Benchmark-only crate; see the `benches/` directory for Criterion targets.
