//! Lowering to the native set {arbitrary single-qubit gate, CNOT}.
//!
//! Every rule is exact, including global phase:
//!
//! * `Swap`: three CNOTs.
//! * `PartialSwap`: three CNOTs with Ry/Rz dressing.
//! * `Unitary` recognised as identity, CNOT (either orientation) or SWAP.
//! * Diagonal `Unitary`: phase polynomial over parities (CNOT ladders
//!   around Rz).
//! * Real orthogonal `Unitary` on up to three qubits: two-level Givens
//!   rotations between Hamming-adjacent basis states, each a (multi-)
//!   controlled Ry, followed by a ±1 diagonal.
//!
//! Anything else is reported as a capability error.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::circuit::{Gate, GateProgram};
use crate::error::{Error, Result};
use crate::linalg::{gates, CMatrix};

const EXACT: f64 = 1e-12;

pub fn is_native(g: &Gate) -> bool {
    matches!(g, Gate::OneQubit { .. } | Gate::Cnot { .. } | Gate::MeasureAll)
}

fn ry(q: usize, theta: f64) -> Gate {
    Gate::ry(q, theta)
}

fn rz(q: usize, theta: f64) -> Gate {
    Gate::rz(q, theta)
}

fn phase(q: usize, phi: f64) -> Gate {
    Gate::one(q, "gphase", gates::global_phase(phi))
}

fn swap3(a: usize, b: usize) -> Vec<Gate> {
    vec![Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)]
}

/// Three-CNOT circuit for [`gates::partial_swap`] on operands `(a, b)`.
pub fn partial_swap_circuit(a: usize, b: usize, alpha: f64) -> Vec<Gate> {
    let theta = alpha.sqrt().acos();
    let mut last = gates::rz(FRAC_PI_2);
    for v in [(0, 0), (1, 1)] {
        last[v] *= Complex64::new(0.0, 1.0);
    }
    vec![
        rz(a, -FRAC_PI_2),
        Gate::cnot(b, a),
        ry(b, FRAC_PI_2 + theta),
        Gate::cnot(a, b),
        rz(a, PI),
        ry(b, -theta - FRAC_PI_2),
        Gate::cnot(b, a),
        Gate::one(b, "rz", last),
    ]
}

/// Phase-polynomial circuit for `diag(exp(i φ(x)))` over `qubits`.
pub fn diagonal_circuit(qubits: &[usize], phases: &[f64]) -> Vec<Gate> {
    let n = qubits.len();
    let dim = 1usize << n;
    debug_assert_eq!(phases.len(), dim);
    let mut out = Vec::new();
    for s in 0..dim {
        let w: f64 = (0..dim)
            .map(|x| {
                let sign = if (s & x).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sign * phases[x]
            })
            .sum::<f64>()
            / dim as f64;
        if w.abs() < EXACT {
            continue;
        }
        if s == 0 {
            out.push(phase(qubits[0], w));
            continue;
        }
        let bits: Vec<usize> = (0..n).filter(|b| s >> b & 1 == 1).collect();
        let target = qubits[*bits.last().unwrap()];
        let ladder: Vec<Gate> = bits[..bits.len() - 1]
            .iter()
            .map(|&b| Gate::cnot(qubits[b], target))
            .collect();
        out.extend(ladder.iter().cloned());
        out.push(rz(target, -2.0 * w));
        out.extend(ladder.into_iter().rev());
    }
    out
}

/// Ry(θ) on `target` when every `(qubit, value)` control matches.
fn controlled_ry(controls: &[(usize, bool)], target: usize, theta: f64) -> Result<Vec<Gate>> {
    let flips: Vec<Gate> = controls
        .iter()
        .filter(|(_, v)| !v)
        .map(|&(q, _)| Gate::x(q))
        .collect();
    let body = match controls {
        [] => vec![ry(target, theta)],
        [(c, _)] => vec![
            ry(target, theta / 2.0),
            Gate::cnot(*c, target),
            ry(target, -theta / 2.0),
            Gate::cnot(*c, target),
        ],
        [(c1, _), (c2, _)] => vec![
            ry(target, theta / 4.0),
            Gate::cnot(*c1, target),
            ry(target, -theta / 4.0),
            Gate::cnot(*c2, target),
            ry(target, theta / 4.0),
            Gate::cnot(*c1, target),
            ry(target, -theta / 4.0),
            Gate::cnot(*c2, target),
        ],
        _ => {
            return Err(Error::Capability(format!(
                "controlled rotation with {} controls is not supported",
                controls.len()
            )))
        }
    };
    let mut out = flips.clone();
    out.extend(body);
    out.extend(flips);
    Ok(out)
}

fn permuted(m: &CMatrix, perm: &[usize]) -> CMatrix {
    // operand k of `m` becomes operand perm[k]
    let dim = m.dim();
    let map = |x: usize| -> usize {
        perm.iter()
            .enumerate()
            .map(|(k, &p)| (x >> k & 1) << p)
            .sum()
    };
    let mut out = CMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            out[(map(r), map(c))] = m[(r, c)];
        }
    }
    out
}

fn is_real(m: &CMatrix) -> bool {
    m.data().iter().all(|z| z.im.abs() < EXACT)
}

/// Orders `states` into a path where neighbours differ in one bit, if possible.
fn hamming_path(states: &[usize]) -> Option<Vec<usize>> {
    fn extend(path: &mut Vec<usize>, used: &mut [bool], states: &[usize]) -> bool {
        if path.len() == states.len() {
            return true;
        }
        let last = *path.last().unwrap();
        for (i, &s) in states.iter().enumerate() {
            if !used[i] && (s ^ last).count_ones() == 1 {
                used[i] = true;
                path.push(s);
                if extend(path, used, states) {
                    return true;
                }
                path.pop();
                used[i] = false;
            }
        }
        false
    }
    for (i, &s) in states.iter().enumerate() {
        let mut used = vec![false; states.len()];
        used[i] = true;
        let mut path = vec![s];
        if extend(&mut path, &mut used, states) {
            return Some(path);
        }
    }
    None
}

fn gray_code(n: usize) -> Vec<usize> {
    (0..1usize << n).map(|i| i ^ (i >> 1)).collect()
}

fn orthogonal_circuit(qubits: &[usize], m: &CMatrix) -> Result<Vec<Gate>> {
    let n = qubits.len();
    let dim = m.dim();
    let re = |r: usize, c: usize| m[(r, c)].re;
    let support: Vec<usize> = (0..dim)
        .filter(|&x| (0..dim).any(|y| (re(x, y) - f64::from(x == y)).abs() > EXACT))
        .collect();
    if support.is_empty() {
        return Ok(Vec::new());
    }
    let path = if support.len() == 1 {
        support.clone()
    } else {
        hamming_path(&support).unwrap_or_else(|| gray_code(n))
    };
    let len = path.len();
    let mut a: Vec<Vec<f64>> = path
        .iter()
        .map(|&r| path.iter().map(|&c| re(r, c)).collect())
        .collect();
    // (i, g): rotation g on path rows i - 1 and i
    let mut rotations: Vec<(usize, [[f64; 2]; 2])> = Vec::new();
    for j in 0..len {
        for i in (j + 1..len).rev() {
            let (x, y) = (a[i - 1][j], a[i][j]);
            if y.abs() < EXACT {
                continue;
            }
            let r = x.hypot(y);
            let (c, s) = (x / r, y / r);
            let g = [[c, s], [-s, c]];
            for col in 0..len {
                let (u, v) = (a[i - 1][col], a[i][col]);
                a[i - 1][col] = g[0][0] * u + g[0][1] * v;
                a[i][col] = g[1][0] * u + g[1][1] * v;
            }
            rotations.push((i, g));
        }
    }
    let mut out = Vec::new();
    let signs: Vec<f64> = (0..len).map(|i| a[i][i]).collect();
    if signs.iter().any(|&d| d < 0.0) {
        let mut phases = vec![0.0; dim];
        for (i, &d) in signs.iter().enumerate() {
            if d < 0.0 {
                phases[path[i]] = PI;
            }
        }
        out.extend(diagonal_circuit(qubits, &phases));
    }
    // M = G_1^T … G_r^T D, so after D the transposes run from G_r to G_1.
    for &(i, g) in rotations.iter().rev() {
        let (p, q) = (path[i - 1], path[i]);
        let bit = (p ^ q).trailing_zeros() as usize;
        // 2x2 of G^T in (bit = 0, bit = 1) order
        let gt = [[g[0][0], g[1][0]], [g[0][1], g[1][1]]];
        let m2 = if p >> bit & 1 == 0 {
            gt
        } else {
            [[gt[1][1], gt[1][0]], [gt[0][1], gt[0][0]]]
        };
        let theta = 2.0 * m2[1][0].atan2(m2[0][0]);
        let controls: Vec<(usize, bool)> = (0..n)
            .filter(|&b| b != bit)
            .map(|b| (qubits[b], p >> b & 1 == 1))
            .collect();
        out.extend(controlled_ry(&controls, qubits[bit], theta)?);
    }
    Ok(out)
}

/// Native circuit for one gate.
pub fn lower_gate(g: &Gate) -> Result<Vec<Gate>> {
    Ok(match g {
        Gate::OneQubit { .. } | Gate::Cnot { .. } | Gate::MeasureAll => vec![g.clone()],
        Gate::Swap { a, b } => swap3(*a, *b),
        Gate::PartialSwap { a, b, alpha } => partial_swap_circuit(*a, *b, *alpha),
        Gate::Unitary {
            qubits,
            name,
            matrix,
        } => {
            let n = qubits.len();
            if n == 1 {
                return Ok(vec![Gate::one(qubits[0], name, matrix.clone())]);
            }
            let dim = matrix.dim();
            if matrix.max_abs_diff(&CMatrix::identity(dim)) < EXACT {
                return Ok(Vec::new());
            }
            if n == 2 {
                if matrix.max_abs_diff(&gates::cnot()) < EXACT {
                    return Ok(vec![Gate::cnot(qubits[0], qubits[1])]);
                }
                if matrix.max_abs_diff(&permuted(&gates::cnot(), &[1, 0])) < EXACT {
                    return Ok(vec![Gate::cnot(qubits[1], qubits[0])]);
                }
                if matrix.max_abs_diff(&gates::swap()) < EXACT {
                    return Ok(swap3(qubits[0], qubits[1]));
                }
            }
            if matrix.is_diagonal(EXACT) {
                let phases: Vec<f64> = (0..dim).map(|x| matrix[(x, x)].arg()).collect();
                return Ok(diagonal_circuit(qubits, &phases));
            }
            if is_real(matrix) && n <= 3 {
                return orthogonal_circuit(qubits, matrix);
            }
            return Err(Error::Capability(format!(
                "no native decomposition for {n}-qubit unitary `{name}`"
            )));
        }
    })
}

/// Lowers every gate; segment markers are carried over.
pub fn lower_program(p: &GateProgram) -> Result<GateProgram> {
    let lower_all = |gs: &[Gate]| -> Result<Vec<Gate>> {
        let mut out = Vec::new();
        for g in gs {
            out.extend(lower_gate(g)?);
        }
        Ok(out)
    };
    let mut out = GateProgram::new(p.qubit_count);
    if p.segments.is_empty() {
        out.gates = lower_all(&p.gates)?;
        return Ok(out);
    }
    for s in &p.segments {
        out.push_segment(s.kind, s.step, lower_all(&p.gates[s.range.clone()])?);
    }
    Ok(out)
}

/// Two-qubit gate count of a lowered program, with SWAPs counted as three.
pub fn cnot_count(p: &GateProgram) -> usize {
    p.gates
        .iter()
        .map(|g| match g {
            Gate::Cnot { .. } => 1,
            Gate::Swap { .. } => 3,
            _ => 0,
        })
        .sum()
}
