use num_complex::Complex64;

use super::{Pauli, QuantumState};
use crate::circuit::{Gate, GateProgram};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};

/// Largest register the dense backend accepts by default (2^24 amplitudes).
pub const DEFAULT_DENSE_CAP: usize = 24;

/// Full statevector over `2^n` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

/// Inserts zero bits at the (ascending) `positions` of `x`.
#[inline]
fn spread(mut x: usize, positions: &[usize]) -> usize {
    for &p in positions {
        let low = x & ((1 << p) - 1);
        x = ((x >> p) << (p + 1)) | low;
    }
    x
}

impl DenseState {
    pub fn zero(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        assert!(amps.len().is_power_of_two());
        let n = amps.len().trailing_zeros() as usize;
        Self { n, amps }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, basis: usize) -> Complex64 {
        self.amps[basis]
    }

    /// Applies `m` with `qubits[k]` as bit `k` of the matrix index.
    pub fn apply_matrix(&mut self, qubits: &[usize], m: &CMatrix) {
        let k = qubits.len();
        let dim = 1 << k;
        debug_assert_eq!(m.dim(), dim);
        let mut sorted = qubits.to_vec();
        sorted.sort_unstable();
        let offsets: Vec<usize> = (0..dim)
            .map(|j| {
                qubits
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| j >> b & 1 == 1)
                    .map(|(_, &q)| 1 << q)
                    .sum()
            })
            .collect();
        let mut buf = vec![ZERO; dim];
        let data = m.data();
        for i in 0..(1usize << (self.n - k)) {
            let base = spread(i, &sorted);
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let row = &data[r * dim..(r + 1) * dim];
                self.amps[base | off] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
            }
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let (c, t) = (1 << control, 1 << target);
        for x in 0..self.amps.len() {
            if x & c != 0 && x & t == 0 {
                self.amps.swap(x, x | t);
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let (ma, mb) = (1 << a, 1 << b);
        for x in 0..self.amps.len() {
            if x & ma != 0 && x & mb == 0 {
                self.amps.swap(x, (x & !ma) | mb);
            }
        }
    }
}

impl QuantumState for DenseState {
    fn qubit_count(&self) -> usize {
        self.n
    }

    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::Cnot { control, target } => self.apply_cnot(*control, *target),
            Gate::Swap { a, b } => self.apply_swap(*a, *b),
            Gate::MeasureAll => {}
            other => {
                let m = other.matrix().expect("unitary gate");
                self.apply_matrix(&other.qubits(), &m);
            }
        }
        Ok(())
    }

    fn apply_pauli(&mut self, qubit: usize, p: Pauli) {
        let bit = 1 << qubit;
        match p {
            Pauli::I => {}
            Pauli::X => {
                for x in 0..self.amps.len() {
                    if x & bit == 0 {
                        self.amps.swap(x, x | bit);
                    }
                }
            }
            Pauli::Z => {
                for (x, a) in self.amps.iter_mut().enumerate() {
                    if x & bit != 0 {
                        *a = -*a;
                    }
                }
            }
            Pauli::Y => {
                // Y|0> = i|1>, Y|1> = -i|0>
                let i = Complex64::new(0.0, 1.0);
                for x in 0..self.amps.len() {
                    if x & bit == 0 {
                        let (a0, a1) = (self.amps[x], self.amps[x | bit]);
                        self.amps[x] = -i * a1;
                        self.amps[x | bit] = i * a0;
                    }
                }
            }
        }
    }

    fn excited_population(&self, qubit: usize) -> f64 {
        let bit = 1 << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(x, _)| x & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn scale_excited(&mut self, qubit: usize, factor: f64) {
        let bit = 1 << qubit;
        for (x, a) in self.amps.iter_mut().enumerate() {
            if x & bit != 0 {
                *a *= factor;
            }
        }
    }

    fn lower(&mut self, qubit: usize) {
        let bit = 1 << qubit;
        for x in 0..self.amps.len() {
            if x & bit == 0 {
                self.amps[x] = self.amps[x | bit];
                self.amps[x | bit] = ZERO;
            }
        }
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        for a in &mut self.amps {
            *a /= n;
        }
    }

    fn support(&self) -> Vec<(u128, f64)> {
        self.amps
            .iter()
            .enumerate()
            .map(|(x, a)| (x as u128, a.norm_sqr()))
            .filter(|(_, p)| *p > 0.0)
            .collect()
    }
}

/// Runs every gate of `p` on `|0…0>`; `MeasureAll` is a no-op.
pub fn simulate_dense(p: &GateProgram, cap: usize) -> Result<DenseState> {
    if p.qubit_count > cap {
        return Err(Error::Capability(format!(
            "{} qubits exceed the dense cap of {cap}; use the bounded-weight backend for ideal walk circuits",
            p.qubit_count
        )));
    }
    let mut s = DenseState::zero(p.qubit_count);
    for g in &p.gates {
        s.apply_gate(g)?;
    }
    Ok(s)
}

/// Full `2^n × 2^n` unitary of a gate list, column by column.
pub fn program_unitary(qubits: usize, gates: &[Gate]) -> CMatrix {
    let dim = 1 << qubits;
    let mut u = CMatrix::zeros(dim);
    for col in 0..dim {
        let mut amps = vec![ZERO; dim];
        amps[col] = Complex64::new(1.0, 0.0);
        let mut s = DenseState::from_amplitudes(amps);
        for g in gates {
            s.apply_gate(g).expect("dense gate application");
        }
        for row in 0..dim {
            u[(row, col)] = s.amps[row];
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gates;

    #[test]
    fn x_on_qubit_zero_sets_lowest_bit() {
        let mut s = DenseState::zero(2);
        s.apply_gate(&Gate::x(0)).unwrap();
        assert_eq!(s.amplitude(0b01), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn generic_matrix_agrees_with_fast_paths() {
        let mut a = DenseState::zero(3);
        a.apply_gate(&Gate::ry(0, 0.7)).unwrap();
        a.apply_gate(&Gate::ry(2, 1.3)).unwrap();
        let mut b = a.clone();
        a.apply_gate(&Gate::cnot(2, 1)).unwrap();
        b.apply_matrix(&[2, 1], &gates::cnot());
        assert_eq!(a, b);
        a.apply_gate(&Gate::Swap { a: 0, b: 1 }).unwrap();
        b.apply_matrix(&[0, 1], &gates::swap());
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn operand_order_follows_matrix_bits() {
        // cnot with control operand 0 = qubit 1, target operand 1 = qubit 0
        let mut s = DenseState::zero(2);
        s.apply_gate(&Gate::x(1)).unwrap();
        s.apply_matrix(&[1, 0], &gates::cnot());
        assert_eq!(s.amplitude(0b11).re, 1.0);
    }

    #[test]
    fn norm_is_conserved_over_many_gates() {
        let mut s = DenseState::zero(5);
        for k in 0..250 {
            let q = k % 5;
            s.apply_gate(&Gate::ry(q, 0.1 * k as f64)).unwrap();
            s.apply_gate(&Gate::PartialSwap {
                a: q,
                b: (q + 2) % 5,
                alpha: 0.37,
            })
            .unwrap();
            s.apply_gate(&Gate::cnot(q, (q + 1) % 5)).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cap_is_enforced() {
        let p = GateProgram::new(30);
        assert!(matches!(simulate_dense(&p, 24), Err(Error::Capability(_))));
    }
}
