use serde::{Deserialize, Serialize};

use super::coupling::CouplingMap;
use super::schedule::depth_of;
use crate::circuit::{Gate, GateProgram};
use crate::error::{Error, Result};

/// Injective map logical qubit → physical qubit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub physical: Vec<usize>,
}

impl Layout {
    pub fn new(physical: Vec<usize>) -> Self {
        Self { physical }
    }

    pub fn trivial(n: usize) -> Self {
        Self::new((0..n).collect())
    }

    pub fn validate(&self, cm: &CouplingMap) -> Result<()> {
        let mut seen = vec![false; cm.qubit_count()];
        for (l, &p) in self.physical.iter().enumerate() {
            if p >= cm.qubit_count() {
                return Err(Error::Validation(format!(
                    "logical qubit {l} mapped to missing physical qubit {p}"
                )));
            }
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::Validation(format!("physical qubit {p} assigned twice")));
            }
        }
        Ok(())
    }
}

/// Program over physical qubits in which every entangling gate acts on a
/// connected set of the coupling map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedProgram {
    pub program: GateProgram,
    pub swaps: usize,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    /// Layout after each segment of `program`, in segment order.
    pub segment_layouts: Vec<Layout>,
}

impl RoutedProgram {
    /// Layout in force at the end of walk step `t` (0 = after preparation).
    pub fn layout_at_step(&self, t: usize) -> Option<&Layout> {
        let end = self.program.step_end(t)?;
        self.program
            .segments
            .iter()
            .zip(&self.segment_layouts)
            .filter(|(s, _)| s.range.end <= end)
            .next_back()
            .map(|(_, l)| l)
    }

    /// Restricts the program to the physical qubits it touches, renumbered
    /// in ascending order. Returns the program and the old index of each new
    /// qubit.
    pub fn compact(&self) -> (GateProgram, Vec<usize>) {
        let n = self.program.qubit_count;
        let mut used = vec![false; n];
        for g in &self.program.gates {
            for q in g.qubits() {
                used[q] = true;
            }
        }
        for l in std::iter::once(&self.initial_layout).chain(&self.segment_layouts) {
            for &p in &l.physical {
                used[p] = true;
            }
        }
        let kept: Vec<usize> = (0..n).filter(|&q| used[q]).collect();
        let mut new_index = vec![usize::MAX; n];
        for (i, &q) in kept.iter().enumerate() {
            new_index[q] = i;
        }
        let mut p = GateProgram::new(kept.len());
        p.gates = self.program.gates.iter().map(|g| g.remap(|q| new_index[q])).collect();
        p.segments = self.program.segments.clone();
        (p, kept)
    }
}

struct Router<'a> {
    cm: &'a CouplingMap,
    log2phys: Vec<usize>,
    phys2log: Vec<Option<usize>>,
    out: Vec<Gate>,
    swaps: usize,
}

impl Router<'_> {
    fn swap(&mut self, a: usize, b: usize) {
        self.out.push(Gate::Swap { a, b });
        self.swaps += 1;
        let (la, lb) = (self.phys2log[a], self.phys2log[b]);
        self.phys2log[a] = lb;
        self.phys2log[b] = la;
        if let Some(l) = la {
            self.log2phys[l] = b;
        }
        if let Some(l) = lb {
            self.log2phys[l] = a;
        }
    }

    /// Moves logical `l` one hop toward physical `target`.
    fn step_toward(&mut self, l: usize, target: usize) {
        let from = self.log2phys[l];
        let hop = self.cm.next_hop(from, target);
        self.swap(from, hop);
    }

    fn gather(&mut self, operands: &[usize]) {
        if operands.len() == 2 {
            let (a, b) = (operands[0], operands[1]);
            while self.cm.distance(self.log2phys[a], self.log2phys[b]) > 1 {
                self.step_toward(a, self.log2phys[b]);
            }
            return;
        }
        // Grow a cluster around the first operand: repeatedly move the
        // outside operand closest to the cluster one hop toward it.
        let mut cluster = vec![operands[0]];
        loop {
            let mut outside: Vec<usize> = operands
                .iter()
                .copied()
                .filter(|l| !cluster.contains(l))
                .collect();
            if outside.is_empty() {
                break;
            }
            // absorb anything already adjacent
            let mut grew = true;
            while grew {
                grew = false;
                outside.retain(|&l| {
                    let p = self.log2phys[l];
                    if cluster.iter().any(|&c| self.cm.are_adjacent(p, self.log2phys[c])) {
                        cluster.push(l);
                        grew = true;
                        false
                    } else {
                        true
                    }
                });
            }
            let Some((l, target)) = outside
                .iter()
                .flat_map(|&l| cluster.iter().map(move |&c| (l, c)))
                .map(|(l, c)| (self.cm.distance(self.log2phys[l], self.log2phys[c]), l, c))
                .min()
                .map(|(_, l, c)| (l, self.log2phys[c]))
            else {
                break;
            };
            self.step_toward(l, target);
        }
    }
}

/// Inserts SWAPs so that every entangling gate of `p` acts on a connected
/// set of physical qubits.
///
/// Two-qubit gates move their first operand along a shortest path until it
/// is adjacent to the second (distance − 1 SWAPs). Wider gates pull their
/// operands one hop at a time toward a cluster grown from the first operand.
pub fn route(p: &GateProgram, layout: &Layout, cm: &CouplingMap) -> Result<RoutedProgram> {
    if layout.physical.len() != p.qubit_count {
        return Err(Error::Validation(format!(
            "layout covers {} qubits but the program has {}",
            layout.physical.len(),
            p.qubit_count
        )));
    }
    layout.validate(cm)?;
    let mut phys2log = vec![None; cm.qubit_count()];
    for (l, &ph) in layout.physical.iter().enumerate() {
        phys2log[ph] = Some(l);
    }
    let mut r = Router {
        cm,
        log2phys: layout.physical.clone(),
        phys2log,
        out: Vec::with_capacity(p.gates.len()),
        swaps: 0,
    };
    let mut program = GateProgram::new(cm.qubit_count());
    let mut segment_layouts = Vec::with_capacity(p.segments.len());
    let segments: Vec<_> = if p.segments.is_empty() {
        vec![None]
    } else {
        p.segments.iter().map(Some).collect()
    };
    for seg in segments {
        let range = seg.map_or(0..p.gates.len(), |s| s.range.clone());
        for g in &p.gates[range] {
            let operands = g.qubits();
            if operands.len() >= 2 {
                r.gather(&operands);
            }
            let l2p = &r.log2phys;
            r.out.push(g.remap(|q| l2p[q]));
        }
        let gates = std::mem::take(&mut r.out);
        match seg {
            Some(s) => program.push_segment(s.kind, s.step, gates),
            None => program.gates = gates,
        }
        segment_layouts.push(Layout::new(r.log2phys.clone()));
    }
    Ok(RoutedProgram {
        program,
        swaps: r.swaps,
        initial_layout: layout.clone(),
        final_layout: Layout::new(r.log2phys),
        segment_layouts,
    })
}

/// Greedy-scheduled depth counting only entangling gates (SWAPs included).
pub fn entangling_layer_count(rp: &RoutedProgram) -> usize {
    depth_of(rp.program.qubit_count, &rp.program.gates, Gate::is_entangling)
}

/// Checks that every entangling gate acts on a connected set.
pub fn check_connectivity(p: &GateProgram, cm: &CouplingMap) -> Result<()> {
    for (i, g) in p.gates.iter().enumerate() {
        let qs = g.qubits();
        if qs.len() >= 2 && !cm.is_connected_set(&qs) {
            return Err(Error::Validation(format!(
                "gate {i} acts on non-adjacent physical qubits {qs:?}"
            )));
        }
    }
    Ok(())
}
