//! Small dense complex matrices for gate definitions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::Mul;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged or not square.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            assert_eq!(row.len(), dim, "matrix must be square");
            data.extend_from_slice(row);
        }
        Self { dim, data }
    }

    pub fn from_real(dim: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), dim * dim);
        Self {
            dim,
            data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Permutation matrix sending basis state `x` to `perm[x]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let mut m = Self::zeros(perm.len());
        for (col, &row) in perm.iter().enumerate() {
            m[(row, col)] = ONE;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Number of qubits, if the dimension is a power of two.
    pub fn arity(&self) -> Option<usize> {
        self.dim
            .is_power_of_two()
            .then(|| self.dim.trailing_zeros() as usize)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                self.data[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim)) <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.dim).all(|r| (0..self.dim).all(|c| r == c || self[(r, c)].norm() <= tol))
    }

    /// Restriction to the listed basis states: entry (a, b) = <rows[a]| M |rows[b]>.
    pub fn restrict(&self, basis: &[usize]) -> Self {
        let mut m = Self::zeros(basis.len());
        for (a, &r) in basis.iter().enumerate() {
            for (b, &c) in basis.iter().enumerate() {
                m[(a, b)] = self[(r, c)];
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }
}

pub mod gates {
    //! Standard single- and two-qubit matrices. Two-qubit matrices use the
    //! basis order |q1 q0> with operand 0 as the least significant bit.
    use super::*;

    pub fn x() -> CMatrix {
        CMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn ry(theta: f64) -> CMatrix {
        let (s, c) = (theta / 2.0).sin_cos();
        CMatrix::from_real(2, &[c, -s, s, c])
    }

    /// diag(e^{-iθ/2}, e^{iθ/2})
    pub fn rz(theta: f64) -> CMatrix {
        CMatrix::diagonal(&[
            Complex64::from_polar(1.0, -theta / 2.0),
            Complex64::from_polar(1.0, theta / 2.0),
        ])
    }

    /// diag(e^{iφ}, e^{iφ})
    pub fn global_phase(phi: f64) -> CMatrix {
        let p = Complex64::from_polar(1.0, phi);
        CMatrix::diagonal(&[p, p])
    }

    /// Controlled-U with operand 0 as control and operand 1 as target.
    pub fn controlled(u: &CMatrix) -> CMatrix {
        assert_eq!(u.dim(), 2);
        let mut m = CMatrix::identity(4);
        // target is bit 1; control bit 0 must be set: states 0b01 and 0b11
        m[(0b01, 0b01)] = u[(0, 0)];
        m[(0b01, 0b11)] = u[(0, 1)];
        m[(0b11, 0b01)] = u[(1, 0)];
        m[(0b11, 0b11)] = u[(1, 1)];
        m
    }

    /// Partial swap: identity on |00>, |11>; on the single-excitation pair
    /// each state keeps `i·sqrt(alpha)` and transfers `sqrt(1 - alpha)` to the other.
    pub fn partial_swap(alpha: f64) -> CMatrix {
        let stay = I * alpha.sqrt();
        let hop = Complex64::new((1.0 - alpha).sqrt(), 0.0);
        let mut m = CMatrix::identity(4);
        m[(0b01, 0b01)] = stay;
        m[(0b10, 0b10)] = stay;
        m[(0b10, 0b01)] = hop;
        m[(0b01, 0b10)] = hop;
        m
    }

    pub fn swap() -> CMatrix {
        CMatrix::permutation(&[0b00, 0b10, 0b01, 0b11])
    }

    pub fn cnot() -> CMatrix {
        // control operand 0, target operand 1
        CMatrix::permutation(&[0b00, 0b11, 0b10, 0b01])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_gates_are_unitary() {
        for m in [
            gates::x(),
            gates::y(),
            gates::z(),
            gates::ry(0.3),
            gates::rz(1.1),
            gates::swap(),
            gates::cnot(),
            gates::partial_swap(0.5),
            gates::partial_swap(0.0),
            gates::partial_swap(1.0),
            gates::controlled(&gates::ry(0.7)),
        ] {
            assert!(m.is_unitary(1e-12), "{m:?}");
        }
    }

    #[test]
    fn partial_swap_at_zero_is_swap() {
        assert!(gates::partial_swap(0.0).max_abs_diff(&gates::swap()) < 1e-15);
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let m = gates::cnot();
        let mut v = vec![ZERO; 4];
        v[0b01] = ONE;
        let out = m.apply(&v);
        assert_eq!(out[0b11], ONE);
    }

    #[test]
    fn restrict_picks_sub_block() {
        let m = CMatrix::from_real(3, &[1., 2., 3., 4., 5., 6., 7., 8., 9.]);
        let r = m.restrict(&[0, 2]);
        assert_eq!(r[(0, 1)].re, 3.0);
        assert_eq!(r[(1, 0)].re, 7.0);
    }
}
