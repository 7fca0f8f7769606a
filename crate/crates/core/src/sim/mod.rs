//! Gate-program execution backends.

pub mod dense;
pub mod noise;
pub mod shots;
pub mod sparse;

pub use dense::{program_unitary, simulate_dense, DenseState, DEFAULT_DENSE_CAP};
pub use noise::{simulate_noisy_fused, simulate_noisy_sampled, simulate_noisy_trajectories, FusedBlock, NoiseModel, TrajectoryRun};
pub use shots::{sample_shots, shot_schedule, ShotTable};
pub use sparse::{simulate_bounded, BoundedWeightState};

use crate::circuit::Gate;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
}

/// Operations the trajectory engine needs from a statevector.
pub trait QuantumState {
    fn qubit_count(&self) -> usize;
    fn apply_gate(&mut self, gate: &Gate) -> Result<()>;
    fn apply_pauli(&mut self, qubit: usize, p: Pauli);
    /// Probability that `qubit` reads 1.
    fn excited_population(&self, qubit: usize) -> f64;
    /// Multiplies every amplitude with `qubit` = 1 by `factor` (no renormalization).
    fn scale_excited(&mut self, qubit: usize, factor: f64);
    /// Applies σ⁻ on `qubit` without renormalizing.
    fn lower(&mut self, qubit: usize);
    fn norm_sqr(&self) -> f64;
    fn normalize(&mut self);
    /// Basis states with nonzero probability, as (basis index, probability).
    fn support(&self) -> Vec<(u128, f64)>;
}
