//! Benchmark-only crate; see benches/flows.rs.
