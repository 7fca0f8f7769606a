//! Discrete-time quantum walks on graphs in the single-excitation edge encoding.
//!
//! The pipeline is: [`graph`] → [`walk`] (exact reference) and
//! [`encoding`] (gate program) → [`transpile`] (layout, routing, native
//! lowering) → [`sim`] (dense, bounded-weight and noisy backends) →
//! [`metrics`] (raw and postselected estimates, fidelities) →
//! [`prioritize`] (interference index and node scores).

pub mod circuit;
pub mod encoding;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod prioritize;
pub mod qasm;
pub mod sim;
pub mod tolerance;
pub mod transpile;
pub mod walk;

pub use error::{Error, ErrorKind, Result};

/// Crate version embedded in output provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
