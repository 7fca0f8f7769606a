//! Walk compilation into the single-excitation encoding: one qubit per
//! directed edge, the walker at edge `q` being the basis state with only
//! qubit `q` set.
//!
//! A node's outgoing edges form a qubit group. Its coin acts on the group's
//! one-hot ("bracelet") states as the Grover matrix and as identity on
//! `|0…0>`, which is the group's state whenever the walker is elsewhere.

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateProgram, SegmentKind};
use crate::error::{Error, Result};
use crate::graph::{DirectedEdgeIndex, Graph};
use crate::linalg::{gates, CMatrix, ONE};
use crate::sim::dense::program_unitary;
use crate::transpile::schedule::{program_layers, ProgramLayers};

/// Largest degree handled by the domain-wall construction.
pub const DOMAIN_WALL_MAX_DEGREE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitAssignment {
    /// `qubit[q]`: logical qubit of directed edge `q`.
    qubit: Vec<usize>,
    /// Qubits of each node's outgoing edges, in edge-index order.
    groups: Vec<Vec<usize>>,
}

impl QubitAssignment {
    /// Directed edge `q` on qubit `q`.
    pub fn identity(idx: &DirectedEdgeIndex) -> Self {
        Self {
            qubit: (0..idx.len()).collect(),
            groups: idx.blocks().iter().map(|b| b.clone().collect()).collect(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit.len()
    }

    pub fn qubit(&self, edge: usize) -> usize {
        self.qubit[edge]
    }

    pub fn group(&self, node: usize) -> &[usize] {
        &self.groups[node]
    }

    /// Directed edge stored on each qubit.
    pub fn edge_of_qubit(&self) -> Vec<usize> {
        let mut inv = vec![0; self.qubit.len()];
        for (e, &q) in self.qubit.iter().enumerate() {
            inv[q] = e;
        }
        inv
    }
}

fn cry(control: usize, target: usize, theta: f64) -> Gate {
    Gate::unitary(vec![control, target], "cry", gates::controlled(&gates::ry(theta)))
}

/// Cascade mapping `|1 0…0>` (first qubit set) to the uniform one-hot
/// superposition of `group`, and `|0…0>` to itself.
fn w_cascade(group: &[usize]) -> Vec<Gate> {
    let k = group.len();
    let mut out = Vec::new();
    for j in 1..k {
        let theta = 2.0 * (1.0 / ((k - j + 1) as f64).sqrt()).acos();
        out.push(cry(group[j - 1], group[j], theta));
        out.push(Gate::cnot(group[j], group[j - 1]));
    }
    out
}

fn inverse(gs: &[Gate]) -> Vec<Gate> {
    gs.iter().rev().map(Gate::adjoint).collect()
}

/// Uniform one-hot state on the seed's group: X then the W cascade.
pub fn build_wstate_prep(g: &Graph, assignment: &QubitAssignment, seed: usize) -> Result<Vec<Gate>> {
    if seed >= g.num_nodes() {
        return Err(Error::UnknownNode(format!("#{seed}")));
    }
    let group = assignment.group(seed);
    let mut out = vec![Gate::x(group[0])];
    out.extend(w_cascade(group));
    Ok(out)
}

/// One partial swap per undirected edge, between the qubits of its two
/// directions. The gates act on disjoint pairs.
pub fn build_shift_layer(idx: &DirectedEdgeIndex, assignment: &QubitAssignment, alpha: f64) -> Result<Vec<Gate>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, 1]")));
    }
    Ok(idx
        .undirected_pairs()
        .into_iter()
        .map(|(q, r)| Gate::PartialSwap {
            a: assignment.qubit(q),
            b: assignment.qubit(r),
            alpha,
        })
        .collect())
}

/// `k × k` Grover matrix `2/k − δ`.
pub fn grover_matrix(k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|n| (0..k).map(|m| 2.0 / k as f64 - f64::from(n == m)).collect())
        .collect()
}

/// Grover coin embedded on `k` qubits: acts on one-hot states as the Grover
/// matrix, identity on every other basis state.
pub fn embedded_coin(k: usize) -> CMatrix {
    let mut m = CMatrix::identity(1 << k);
    let c = grover_matrix(k);
    for (n, row) in c.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[(1 << n, 1 << j)] = v.into();
        }
    }
    m
}

/// CNOT cascade taking the `n`-th one-hot state of `group` to the `n`-th
/// domain-wall state (first `n + 1` qubits set).
pub fn domain_wall_cascade(group: &[usize]) -> Vec<Gate> {
    (1..group.len()).rev().map(|j| Gate::cnot(group[j], group[j - 1])).collect()
}

/// Coin for degree ≤ 3: cascade, dense block in the domain-wall basis, and
/// the inverse cascade.
pub fn build_coin_block_small(group: &[usize]) -> Result<Vec<Gate>> {
    let k = group.len();
    if !(1..=DOMAIN_WALL_MAX_DEGREE).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "domain-wall coin supports degree 1..={DOMAIN_WALL_MAX_DEGREE}, got {k}"
        )));
    }
    if k == 1 {
        return Ok(Vec::new());
    }
    let local: Vec<usize> = (0..k).collect();
    let p = program_unitary(k, &domain_wall_cascade(&local));
    let c_dw = &(&p * &embedded_coin(k)) * &p.adjoint();
    let cascade = domain_wall_cascade(group);
    let mut out = cascade.clone();
    out.push(Gate::unitary(group.to_vec(), &format!("coin_dw{k}"), c_dw));
    out.extend(inverse(&cascade));
    Ok(out)
}

/// Coin for degree > 3: undo the W cascade, reflect, redo the cascade.
///
/// The cascade `V` (the W preparation without its X) maps the first one-hot
/// state to the uniform state `|s>` and fixes `|0…0>`. The middle gate is
/// `2|0><0| − I` on every qubit of the group except the first, i.e.
/// `2(|0…0><0…0| + |1 0…0><1 0…0|) − I` on the group, so the composite is
/// `2(|0><0| + |s><s|) − I`: the Grover reflection on one-hot states and the
/// identity on `|0…0>`.
pub fn build_coin_block_reflection(group: &[usize]) -> Result<Vec<Gate>> {
    let k = group.len();
    if k <= DOMAIN_WALL_MAX_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "reflection coin is for degree > {DOMAIN_WALL_MAX_DEGREE}, got {k}"
        )));
    }
    let v = w_cascade(group);
    let mut diag = vec![-ONE; 1 << (k - 1)];
    diag[0] = ONE;
    let mut out = inverse(&v);
    out.push(Gate::unitary(group[1..].to_vec(), &format!("reflect{}", k - 1), CMatrix::diagonal(&diag)));
    out.extend(v);
    Ok(out)
}

pub fn build_coin_block(group: &[usize]) -> Result<Vec<Gate>> {
    if group.len() <= DOMAIN_WALL_MAX_DEGREE {
        build_coin_block_small(group)
    } else {
        build_coin_block_reflection(group)
    }
}

/// Preparation, `steps` × (shift layer, coin blocks), measurement.
pub fn compile_walk(
    g: &Graph,
    idx: &DirectedEdgeIndex,
    assignment: &QubitAssignment,
    seed: usize,
    alpha: f64,
    steps: usize,
) -> Result<GateProgram> {
    let mut p = GateProgram::new(assignment.qubit_count());
    p.push_segment(SegmentKind::Prep, 0, build_wstate_prep(g, assignment, seed)?);
    let shift = build_shift_layer(idx, assignment, alpha)?;
    let mut coins = Vec::new();
    for node in 0..g.num_nodes() {
        coins.extend(build_coin_block(assignment.group(node))?);
    }
    for t in 1..=steps {
        p.push_segment(SegmentKind::Shift, t, shift.clone());
        p.push_segment(SegmentKind::Coin, t, coins.clone());
    }
    p.push_segment(SegmentKind::Measure, steps, vec![Gate::MeasureAll]);
    Ok(p)
}

/// Identity assignment plus compilation, from a graph and seed index.
pub fn compile(g: &Graph, seed: usize, alpha: f64, steps: usize) -> Result<GateProgram> {
    let idx = DirectedEdgeIndex::new(g);
    compile_walk(g, &idx, &QubitAssignment::identity(&idx), seed, alpha, steps)
}

/// Greedy layer counts with multi-qubit blocks as single gates.
pub fn count_logical_layers(p: &GateProgram) -> ProgramLayers {
    program_layers(p)
}
