//! Criterion benchmarks for `papsim-core`; run with `cargo bench -p papsim-bench`.
