//! Criterion benchmarks for the solvers. Run `cargo bench -p quasar-ppa-bench`.
