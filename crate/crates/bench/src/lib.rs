//! Benchmark harness for the solver crate; see `benches/`.
