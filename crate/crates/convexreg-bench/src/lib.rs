//! Criterion benchmarks for the hull and smoothing kernels; see benches/.
