//! Numerical tolerances shared across the crate.

/// State norms in the edge-space oracle.
pub const NORM: f64 = 1e-12;
/// Node distributions must sum to one within this bound.
pub const DISTRIBUTION_SUM: f64 = 1e-9;
/// Unitarity check for gate matrices.
pub const UNITARY: f64 = 1e-10;
/// Inputs to fidelity metrics may deviate from normalization by at most this much.
pub const METRIC_INPUT: f64 = 1e-6;
/// Amplitude magnitude above which leakage out of the bounded-weight sector is an error.
pub const WEIGHT_LEAKAGE: f64 = 1e-9;
/// Amplitudes below this magnitude are dropped from sparse states.
pub const SPARSE_PRUNE: f64 = 1e-15;
