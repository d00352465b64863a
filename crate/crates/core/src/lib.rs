//! Discrete-event simulation of HPC resilience.
//!
//! Faults are injected into a modeled component hierarchy and propagate as
//! fault -> error -> failure chains. Resilience patterns (monitoring,
//! checkpoint/rollback, N-modular redundancy, ...) react through activation
//! and response interfaces, and every run reports reliability, availability
//! and detection metrics.

pub mod config;
pub mod engine;
pub mod metrics;
pub mod model;
pub mod patterns;
pub mod scenarios;
pub mod taxonomy;
