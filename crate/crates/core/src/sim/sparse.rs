use num_complex::Complex64;
use rustc_hash::FxHashMap;

use super::{Pauli, QuantumState};
use crate::circuit::{Gate, GateProgram};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE, ZERO};
use crate::tolerance;

/// Largest register addressable by the sparse backend.
pub const MAX_SPARSE_QUBITS: usize = 64;

type Basis = u64;

/// Sparse statevector holding only basis states of Hamming weight at most
/// `max_weight`.
///
/// Walk circuits keep a single excitation between blocks and never exceed the
/// largest node degree inside a coin block, so the stored support stays
/// polynomial in the qubit count. Any gate that pushes non-negligible
/// amplitude above the cap is reported as an error instead of being dropped.
#[derive(Debug, Clone)]
pub struct BoundedWeightState {
    n: usize,
    max_weight: usize,
    amps: FxHashMap<Basis, Complex64>,
}

impl BoundedWeightState {
    pub fn zero(n: usize, max_weight: usize) -> Result<Self> {
        if n > MAX_SPARSE_QUBITS {
            return Err(Error::Capability(format!(
                "{n} qubits exceed the sparse backend limit of {MAX_SPARSE_QUBITS}"
            )));
        }
        let mut amps = FxHashMap::default();
        amps.insert(0, Complex64::new(1.0, 0.0));
        Ok(Self {
            n,
            max_weight,
            amps,
        })
    }

    /// Sparse state without a weight cap.
    pub fn unbounded(n: usize) -> Result<Self> {
        Self::zero(n, n)
    }

    pub fn max_weight(&self) -> usize {
        self.max_weight
    }

    pub fn amplitude(&self, basis: u128) -> Complex64 {
        Basis::try_from(basis)
            .ok()
            .and_then(|b| self.amps.get(&b).copied())
            .unwrap_or(ZERO)
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u128, Complex64)> + '_ {
        self.amps.iter().map(|(&k, &v)| (k as u128, v))
    }

    /// Applies the basis permutation `f`, touching only entries it moves.
    fn rekey(&mut self, f: impl Fn(Basis) -> Basis) {
        let moved: Vec<(Basis, Complex64)> = self
            .amps
            .iter()
            .filter(|(&k, _)| f(k) != k)
            .map(|(&k, &v)| (k, v))
            .collect();
        for (k, _) in &moved {
            self.amps.remove(k);
        }
        for (k, v) in moved {
            self.amps.insert(f(k), v);
        }
    }

    fn check_weights(&mut self) -> Result<()> {
        if self.max_weight >= self.n {
            return Ok(());
        }
        let cap = self.max_weight as u32;
        let mut leaked = 0.0f64;
        self.amps.retain(|k, v| {
            if k.count_ones() > cap {
                leaked = leaked.max(v.norm());
                false
            } else {
                true
            }
        });
        if leaked > tolerance::WEIGHT_LEAKAGE {
            return Err(Error::Capability(format!(
                "amplitude {leaked:.3e} leaked above Hamming weight {}; program does not conform to the bounded-weight contract",
                self.max_weight
            )));
        }
        Ok(())
    }

    pub fn apply_matrix(&mut self, qubits: &[usize], m: &CMatrix) -> Result<()> {
        let k = qubits.len();
        let dim = 1usize << k;
        let mask: Basis = qubits.iter().map(|&q| (1 as Basis) << q).sum();
        let offsets: Vec<Basis> = (0..dim)
            .map(|j| {
                qubits
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| j >> b & 1 == 1)
                    .map(|(_, &q)| (1 as Basis) << q)
                    .sum()
            })
            .collect();
        let local = |x: Basis| -> usize {
            qubits
                .iter()
                .enumerate()
                .map(|(b, &q)| (((x >> q) & 1) as usize) << b)
                .sum()
        };
        let data = m.data();
        // Local states whose row and column are zero off the diagonal only
        // pick up a phase; the rest mix within their group.
        let isolated: Vec<bool> = (0..dim)
            .map(|j| (0..dim).all(|i| i == j || (data[j * dim + i] == ZERO && data[i * dim + j] == ZERO)))
            .collect();
        let active: Vec<usize> = (0..dim).filter(|&j| !isolated[j]).collect();
        let mut pending = Vec::new();
        for (x, a) in self.amps.iter_mut() {
            let j = local(*x);
            if isolated[j] {
                let d = data[j * dim + j];
                if d != ONE {
                    *a *= d;
                }
            } else {
                pending.push((*x & !mask, j));
            }
        }
        let mut updates = Vec::with_capacity(pending.len() * 2);
        let mut v = vec![ZERO; dim];
        for (base, j) in pending {
            // each group is handled once, by its present member with the
            // smallest active local index
            if active
                .iter()
                .take_while(|&&i| i < j)
                .any(|&i| self.amps.contains_key(&(base | offsets[i])))
            {
                continue;
            }
            for &i in &active {
                v[i] = self.amps.get(&(base | offsets[i])).copied().unwrap_or(ZERO);
            }
            for &r in &active {
                let row = &data[r * dim..(r + 1) * dim];
                let amp: Complex64 = active.iter().map(|&c| row[c] * v[c]).sum();
                updates.push((base | offsets[r], amp));
            }
        }
        let prune = tolerance::SPARSE_PRUNE * tolerance::SPARSE_PRUNE;
        for (k, a) in updates {
            if a.norm_sqr() > prune {
                self.amps.insert(k, a);
            } else {
                self.amps.remove(&k);
            }
        }
        self.check_weights()
    }
}

impl QuantumState for BoundedWeightState {
    fn qubit_count(&self) -> usize {
        self.n
    }

    fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::Cnot { control, target } => {
                let (c, t) = ((1 as Basis) << control, (1 as Basis) << target);
                self.rekey(|x| if x & c != 0 { x ^ t } else { x });
                self.check_weights()
            }
            Gate::Swap { a, b } => {
                let (ma, mb) = ((1 as Basis) << a, (1 as Basis) << b);
                self.rekey(|x| {
                    if ((x & ma) != 0) != ((x & mb) != 0) {
                        x ^ ma ^ mb
                    } else {
                        x
                    }
                });
                Ok(())
            }
            Gate::MeasureAll => Ok(()),
            other => {
                let m = other.matrix().expect("unitary gate");
                if m.is_diagonal(0.0) {
                    let qs = other.qubits();
                    for (x, a) in self.amps.iter_mut() {
                        let j: usize = qs
                            .iter()
                            .enumerate()
                            .map(|(b, &q)| (((x >> q) & 1) as usize) << b)
                            .sum();
                        *a *= m[(j, j)];
                    }
                    Ok(())
                } else {
                    self.apply_matrix(&other.qubits(), &m)
                }
            }
        }
    }

    fn apply_pauli(&mut self, qubit: usize, p: Pauli) {
        let bit = (1 as Basis) << qubit;
        let i = Complex64::new(0.0, 1.0);
        match p {
            Pauli::I => {}
            Pauli::X => self.rekey(|x| x ^ bit),
            Pauli::Z => {
                for (x, a) in self.amps.iter_mut() {
                    if x & bit != 0 {
                        *a = -*a;
                    }
                }
            }
            Pauli::Y => {
                self.amps = self
                    .amps
                    .drain()
                    .map(|(x, a)| {
                        if x & bit == 0 {
                            (x | bit, i * a)
                        } else {
                            (x & !bit, -i * a)
                        }
                    })
                    .collect();
            }
        }
    }

    fn excited_population(&self, qubit: usize) -> f64 {
        let bit = (1 as Basis) << qubit;
        self.amps
            .iter()
            .filter(|(x, _)| *x & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn scale_excited(&mut self, qubit: usize, factor: f64) {
        let bit = (1 as Basis) << qubit;
        for (x, a) in self.amps.iter_mut() {
            if x & bit != 0 {
                *a *= factor;
            }
        }
    }

    fn lower(&mut self, qubit: usize) {
        let bit = (1 as Basis) << qubit;
        self.amps = self
            .amps
            .drain()
            .filter(|(x, _)| x & bit != 0)
            .map(|(x, a)| (x & !bit, a))
            .collect();
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        for a in self.amps.values_mut() {
            *a /= n;
        }
    }

    fn support(&self) -> Vec<(u128, f64)> {
        let mut v: Vec<(u128, f64)> = self.amps.iter().map(|(&x, a)| (x as u128, a.norm_sqr())).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }
}

/// Exact simulation restricted to Hamming weight `max_weight`.
pub fn simulate_bounded(p: &GateProgram, max_weight: usize) -> Result<BoundedWeightState> {
    let mut s = BoundedWeightState::zero(p.qubit_count, max_weight)?;
    for g in &p.gates {
        s.apply_gate(g)?;
    }
    Ok(s)
}
