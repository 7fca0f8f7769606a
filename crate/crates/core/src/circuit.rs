//! Hardware-agnostic gate programs.
//!
//! Qubit 0 is the least significant bit of every basis-state index. For a
//! multi-qubit matrix, operand `k` of the gate is bit `k` of the row/column
//! index.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{gates, CMatrix};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gate {
    OneQubit {
        qubit: usize,
        name: String,
        matrix: CMatrix,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// Excitation-preserving exchange between two qubits, see [`gates::partial_swap`].
    PartialSwap {
        a: usize,
        b: usize,
        alpha: f64,
    },
    /// Full SWAP, emitted by routing.
    Swap {
        a: usize,
        b: usize,
    },
    /// Dense unitary on a few qubits; `qubits[k]` is bit `k` of the matrix index.
    Unitary {
        qubits: Vec<usize>,
        name: String,
        matrix: CMatrix,
    },
    MeasureAll,
}

impl Gate {
    pub fn one(qubit: usize, name: &str, matrix: CMatrix) -> Self {
        Gate::OneQubit {
            qubit,
            name: name.to_string(),
            matrix,
        }
    }

    pub fn x(qubit: usize) -> Self {
        Self::one(qubit, "x", gates::x())
    }

    pub fn ry(qubit: usize, theta: f64) -> Self {
        Self::one(qubit, "ry", gates::ry(theta))
    }

    pub fn rz(qubit: usize, theta: f64) -> Self {
        Self::one(qubit, "rz", gates::rz(theta))
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn unitary(qubits: Vec<usize>, name: &str, matrix: CMatrix) -> Self {
        Gate::Unitary {
            qubits,
            name: name.to_string(),
            matrix,
        }
    }

    /// Operand qubits in matrix-bit order. Empty for `MeasureAll`.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::OneQubit { qubit, .. } => vec![*qubit],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::PartialSwap { a, b, .. } | Gate::Swap { a, b } => vec![*a, *b],
            Gate::Unitary { qubits, .. } => qubits.clone(),
            Gate::MeasureAll => Vec::new(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Gate::OneQubit { .. } => 1,
            Gate::Cnot { .. } | Gate::PartialSwap { .. } | Gate::Swap { .. } => 2,
            Gate::Unitary { qubits, .. } => qubits.len(),
            Gate::MeasureAll => 0,
        }
    }

    pub fn is_entangling(&self) -> bool {
        self.arity() >= 2
    }

    /// Matrix on the operands; `None` for measurement.
    pub fn matrix(&self) -> Option<CMatrix> {
        Some(match self {
            Gate::OneQubit { matrix, .. } | Gate::Unitary { matrix, .. } => matrix.clone(),
            Gate::Cnot { .. } => gates::cnot(),
            Gate::PartialSwap { alpha, .. } => gates::partial_swap(*alpha),
            Gate::Swap { .. } => gates::swap(),
            Gate::MeasureAll => return None,
        })
    }

    /// Same gate acting on relabelled qubits.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::OneQubit {
                qubit,
                name,
                matrix,
            } => Gate::OneQubit {
                qubit: f(*qubit),
                name: name.clone(),
                matrix: matrix.clone(),
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(*control),
                target: f(*target),
            },
            Gate::PartialSwap { a, b, alpha } => Gate::PartialSwap {
                a: f(*a),
                b: f(*b),
                alpha: *alpha,
            },
            Gate::Swap { a, b } => Gate::Swap { a: f(*a), b: f(*b) },
            Gate::Unitary {
                qubits,
                name,
                matrix,
            } => Gate::Unitary {
                qubits: qubits.iter().map(|&q| f(q)).collect(),
                name: name.clone(),
                matrix: matrix.clone(),
            },
            Gate::MeasureAll => Gate::MeasureAll,
        }
    }

    /// Inverse gate.
    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::OneQubit {
                qubit,
                name,
                matrix,
            } => Gate::OneQubit {
                qubit: *qubit,
                name: format!("{name}_dg"),
                matrix: matrix.adjoint(),
            },
            Gate::Cnot { .. } | Gate::Swap { .. } | Gate::MeasureAll => self.clone(),
            Gate::PartialSwap { a, b, alpha } => Gate::Unitary {
                qubits: vec![*a, *b],
                name: "pswap_dg".into(),
                matrix: gates::partial_swap(*alpha).adjoint(),
            },
            Gate::Unitary {
                qubits,
                name,
                matrix,
            } => Gate::Unitary {
                qubits: qubits.clone(),
                name: format!("{name}_dg"),
                matrix: matrix.adjoint(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Prep,
    Shift,
    Coin,
    Measure,
}

/// Step marker: a contiguous run of gates with one role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    /// Walk step the segment belongs to (0 for preparation).
    pub step: usize,
    pub range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateProgram {
    pub qubit_count: usize,
    pub gates: Vec<Gate>,
    pub segments: Vec<Segment>,
}

impl GateProgram {
    pub fn new(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            gates: Vec::new(),
            segments: Vec::new(),
        }
    }

    /// Wraps a bare gate list as a single segment.
    pub fn from_gates(qubit_count: usize, kind: SegmentKind, gates: Vec<Gate>) -> Self {
        let mut p = Self::new(qubit_count);
        p.push_segment(kind, 0, gates);
        p
    }

    pub fn push_segment(&mut self, kind: SegmentKind, step: usize, gates: Vec<Gate>) {
        let start = self.gates.len();
        self.gates.extend(gates);
        self.segments.push(Segment {
            kind,
            step,
            range: start..self.gates.len(),
        });
    }

    /// Number of walk steps (shift segments).
    pub fn steps(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.kind == SegmentKind::Shift)
            .count()
    }

    /// Index one past the last gate of step `t` (its coin segment), or of the
    /// preparation for `t = 0`.
    pub fn step_end(&self, t: usize) -> Option<usize> {
        let kind = if t == 0 {
            SegmentKind::Prep
        } else {
            SegmentKind::Coin
        };
        self.segments
            .iter()
            .find(|s| s.kind == kind && s.step == t)
            .map(|s| s.range.end)
    }

    /// Program with gates after `step_end(t)` removed and a final measurement.
    pub fn truncate_to_step(&self, t: usize) -> Option<GateProgram> {
        let end = self.step_end(t)?;
        let mut p = GateProgram::new(self.qubit_count);
        p.gates = self.gates[..end].to_vec();
        p.segments = self
            .segments
            .iter()
            .filter(|s| s.range.end <= end && s.kind != SegmentKind::Measure)
            .cloned()
            .collect();
        p.push_segment(SegmentKind::Measure, t, vec![Gate::MeasureAll]);
        Some(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (n, gate) in self.gates.iter().enumerate() {
            let qs = gate.qubits();
            for (i, &q) in qs.iter().enumerate() {
                if q >= self.qubit_count {
                    return Err(Error::Validation(format!(
                        "gate {n} uses qubit {q} outside 0..{}",
                        self.qubit_count
                    )));
                }
                if qs[..i].contains(&q) {
                    return Err(Error::Validation(format!("gate {n} repeats qubit {q}")));
                }
            }
            if let Some(m) = gate.matrix() {
                if m.dim() != 1 << qs.len() {
                    return Err(Error::Validation(format!(
                        "gate {n} matrix has dimension {} for {} qubits",
                        m.dim(),
                        qs.len()
                    )));
                }
                if !m.is_unitary(tolerance::UNITARY) {
                    return Err(Error::Validation(format!("gate {n} matrix is not unitary")));
                }
            }
        }
        let mut cursor = 0;
        for s in &self.segments {
            if s.range.start != cursor || s.range.end < s.range.start {
                return Err(Error::Validation(format!(
                    "segments do not partition the gate list at {cursor}"
                )));
            }
            cursor = s.range.end;
        }
        if cursor != self.gates.len() {
            return Err(Error::Validation("segments do not cover every gate".into()));
        }
        Ok(())
    }

    pub fn count(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g)).count()
    }

    /// SHA-256 over the JSON encoding, hex-encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("program serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_bad_operands() {
        let p = GateProgram::from_gates(2, SegmentKind::Prep, vec![Gate::cnot(0, 2)]);
        assert!(p.validate().is_err());
        let p = GateProgram::from_gates(2, SegmentKind::Prep, vec![Gate::cnot(1, 1)]);
        assert!(p.validate().is_err());
        let p = GateProgram::from_gates(
            2,
            SegmentKind::Prep,
            vec![Gate::unitary(vec![0], "bad", CMatrix::from_real(2, &[1.0, 1.0, 0.0, 1.0]))],
        );
        assert!(p.validate().is_err());
    }

    #[test]
    fn validate_checks_segments() {
        let mut p = GateProgram::from_gates(2, SegmentKind::Prep, vec![Gate::x(0)]);
        assert!(p.validate().is_ok());
        p.gates.push(Gate::x(1));
        assert!(p.validate().is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = GateProgram::from_gates(2, SegmentKind::Prep, vec![Gate::x(0)]);
        let b = GateProgram::from_gates(2, SegmentKind::Prep, vec![Gate::x(1)]);
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
    }
}
