//! Criterion benchmarks for the locapart integral and dynamics kernels.
