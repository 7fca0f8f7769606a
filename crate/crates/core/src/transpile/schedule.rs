use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateProgram};

/// Earliest-possible layer of every gate: one past the latest layer that
/// touched any of its operands. `MeasureAll` gets no layer (`None`).
pub fn asap_layers(qubit_count: usize, gates: &[Gate]) -> Vec<Option<usize>> {
    let mut front = vec![0usize; qubit_count];
    gates
        .iter()
        .map(|g| {
            let qs = g.qubits();
            if qs.is_empty() {
                return None;
            }
            let layer = qs.iter().map(|&q| front[q]).max().unwrap_or(0);
            for &q in &qs {
                front[q] = layer + 1;
            }
            Some(layer)
        })
        .collect()
}

/// Number of layers when only gates satisfying `keep` are scheduled.
pub fn depth_of(qubit_count: usize, gates: &[Gate], keep: impl Fn(&Gate) -> bool) -> usize {
    let mut front = vec![0usize; qubit_count];
    let mut depth = 0;
    for g in gates.iter().filter(|g| keep(g)) {
        let qs = g.qubits();
        let layer = qs.iter().map(|&q| front[q]).max().unwrap_or(0);
        for &q in &qs {
            front[q] = layer + 1;
        }
        depth = depth.max(layer + 1);
    }
    depth
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerCounts {
    pub total_layers: usize,
    pub entangling_layers: usize,
    pub gates: usize,
    pub entangling_gates: usize,
}

pub fn layer_counts(qubit_count: usize, gates: &[Gate]) -> LayerCounts {
    LayerCounts {
        total_layers: depth_of(qubit_count, gates, |g| g.arity() > 0),
        entangling_layers: depth_of(qubit_count, gates, Gate::is_entangling),
        gates: gates.iter().filter(|g| g.arity() > 0).count(),
        entangling_gates: gates.iter().filter(|g| g.is_entangling()).count(),
    }
}

/// Layer counts of the whole program and of each walk step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProgramLayers {
    pub total: LayerCounts,
    pub prep: LayerCounts,
    /// Entry `t - 1` covers the shift and coin segments of step `t`.
    pub per_step: Vec<LayerCounts>,
}

impl ProgramLayers {
    /// Difference of cumulative entangling layers between consecutive step ends.
    pub fn entangling_increments(&self) -> Vec<usize> {
        self.per_step.iter().map(|c| c.entangling_layers).collect()
    }
}

pub fn program_layers(p: &GateProgram) -> ProgramLayers {
    let mut out = ProgramLayers {
        total: layer_counts(p.qubit_count, &p.gates),
        ..Default::default()
    };
    let steps = p.steps();
    let end = |t: usize| p.step_end(t).unwrap_or(0);
    let prep_end = end(0);
    out.prep = layer_counts(p.qubit_count, &p.gates[..prep_end]);
    // Cumulative counts so that layers overlapping a step boundary are
    // attributed to the step in which they complete.
    let mut prev = out.prep;
    for t in 1..=steps {
        let c = layer_counts(p.qubit_count, &p.gates[..end(t)]);
        out.per_step.push(LayerCounts {
            total_layers: c.total_layers - prev.total_layers,
            entangling_layers: c.entangling_layers - prev.entangling_layers,
            gates: c.gates - prev.gates,
            entangling_gates: c.entangling_gates - prev.entangling_gates,
        });
        prev = c;
    }
    out
}
