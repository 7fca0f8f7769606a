//! End-to-end compositions: compile and route a walk, run it on a backend,
//! score nodes.

use serde::{Deserialize, Serialize};

use crate::circuit::GateProgram;
use crate::encoding::{compile_walk, count_logical_layers, QubitAssignment};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, load_labels, DirectedEdgeIndex, Graph};
use crate::metrics::{exponential_fit, step_metrics, ExpFit, StepMetrics};
use crate::prioritize::{qii, rank_report, score, QiiSeries, RankReport, ScoreTable};
use crate::sim::shots::ShotMetadata;
use crate::sim::{
    sample_shots, shot_schedule, simulate_bounded, simulate_dense, simulate_noisy_sampled, FusedBlock, NoiseModel,
    ShotTable, DEFAULT_DENSE_CAP,
};
use crate::transpile::synth::lower_gate;
use crate::transpile::{
    cnot_count, entangling_layer_count, layout_search, lower_program, program_layers, route, CouplingMap,
    LayoutParams, LayoutReport, ProgramLayers, RoutedProgram,
};
use crate::walk::{classical_walk, stationary_distribution, walk_distributions, EdgeStateVector, NodeDistribution};

/// Small reference networks shipped with the crate.
pub mod reference {
    use super::*;

    /// 11 genes, 12 interactions, 24 qubits; seed node `7`.
    pub const BIO11: &str = include_str!("../../../data/bio11.tsv");
    pub const BIO11_LABELS: &str = include_str!("../../../data/bio11.labels.tsv");
    pub const BIO11_SEED: &str = "7";
    /// 15 nodes, 18 edges, 36 qubits.
    pub const BIO15: &str = include_str!("../../../data/bio15.tsv");
    /// 17 nodes, 20 edges, 40 qubits.
    pub const BIO17: &str = include_str!("../../../data/bio17.tsv");
    /// 8 nodes, 8 edges.
    pub const EIGHT: &str = include_str!("../../../data/eight.tsv");
    /// 4 nodes with degrees 1, 3, 2, 2.
    pub const FOUR: &str = include_str!("../../../data/four.tsv");

    pub fn bio11() -> Graph {
        let mut g = load_edge_list(BIO11).expect("bundled graph parses");
        g.set_labels(&load_labels(BIO11_LABELS).expect("bundled labels parse"));
        g
    }

    pub fn bio15() -> Graph {
        load_edge_list(BIO15).expect("bundled graph parses")
    }

    pub fn bio17() -> Graph {
        load_edge_list(BIO17).expect("bundled graph parses")
    }

    pub fn eight() -> Graph {
        load_edge_list(EIGHT).expect("bundled graph parses")
    }

    pub fn four() -> Graph {
        load_edge_list(FOUR).expect("bundled graph parses")
    }
}

/// Compilation at both counting levels.
///
/// `logical` and `routed` keep coin blocks as single multi-qubit gates;
/// `native` is the routed program lowered to single-qubit gates and CNOTs and
/// restricted to the physical qubits it touches.
#[derive(Debug, Clone)]
pub struct CompiledWalk {
    pub logical: GateProgram,
    pub logical_layers: ProgramLayers,
    pub layout: LayoutReport,
    pub routed: RoutedProgram,
    pub routed_layers: ProgramLayers,
    pub native: GateProgram,
    /// Physical qubit of each `native` qubit.
    pub native_physical: Vec<usize>,
    pub native_layers: ProgramLayers,
    pub native_cnots: usize,
    /// Native gate range of every multi-gate lowering, with its source gate.
    pub blocks: Vec<FusedBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileSummary {
    pub logical_qubits: usize,
    pub physical_qubits_used: usize,
    pub coupling_map: String,
    pub swaps: usize,
    pub logical_entangling_layers: usize,
    pub logical_step_increments: Vec<usize>,
    pub routed_entangling_layers: usize,
    pub routed_step_increments: Vec<usize>,
    pub native_entangling_layers: usize,
    pub native_step_increments: Vec<usize>,
    pub native_cnots: usize,
    pub layout: Vec<usize>,
}

impl CompiledWalk {
    pub fn summary(&self, cm: &CouplingMap) -> CompileSummary {
        CompileSummary {
            logical_qubits: self.logical.qubit_count,
            physical_qubits_used: self.native.qubit_count,
            coupling_map: cm.name().to_string(),
            swaps: self.routed.swaps,
            logical_entangling_layers: self.logical_layers.total.entangling_layers,
            logical_step_increments: self.logical_layers.entangling_increments(),
            routed_entangling_layers: entangling_layer_count(&self.routed),
            routed_step_increments: self.routed_layers.entangling_increments(),
            native_entangling_layers: self.native_layers.total.entangling_layers,
            native_step_increments: self.native_layers.entangling_increments(),
            native_cnots: self.native_cnots,
            layout: self.layout.layout.physical.clone(),
        }
    }

    /// Qubit of `native` holding logical qubit `q` at the end of step `t`.
    pub fn measure_map(&self, t: usize) -> Result<Vec<usize>> {
        let layout = self
            .routed
            .layout_at_step(t)
            .ok_or_else(|| Error::InvalidParameter(format!("program has no step {t}")))?;
        layout
            .physical
            .iter()
            .map(|p| {
                self.native_physical
                    .iter()
                    .position(|x| x == p)
                    .ok_or_else(|| Error::Validation(format!("physical qubit {p} missing from compacted program")))
            })
            .collect()
    }
}

pub fn compile_and_route(
    g: &Graph,
    seed: usize,
    alpha: f64,
    steps: usize,
    cm: &CouplingMap,
    params: &LayoutParams,
) -> Result<CompiledWalk> {
    let idx = DirectedEdgeIndex::new(g);
    let logical = compile_walk(g, &idx, &QubitAssignment::identity(&idx), seed, alpha, steps)?;
    let layout = layout_search(&logical, cm, params)?;
    let routed = route(&logical, &layout.layout, cm)?;
    let (compact, native_physical) = routed.compact();
    let native = lower_program(&compact)?;
    let mut blocks = Vec::new();
    let mut pos = 0;
    for seg in &compact.segments {
        for g in &compact.gates[seg.range.clone()] {
            let len = lower_gate(g)?.len();
            if len > 1 {
                blocks.push(FusedBlock {
                    range: pos..pos + len,
                    gate: g.clone(),
                });
            }
            pos += len;
        }
    }
    debug_assert_eq!(pos, native.gates.len());
    Ok(CompiledWalk {
        blocks,
        logical_layers: count_logical_layers(&logical),
        routed_layers: program_layers(&routed.program),
        native_layers: program_layers(&native),
        native_cnots: cnot_count(&native),
        logical,
        layout,
        routed,
        native,
        native_physical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Oracle,
    Dense,
    Bounded,
    Noisy,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Self::Oracle),
            "dense" => Ok(Self::Dense),
            "bounded" => Ok(Self::Bounded),
            "noisy" => Ok(Self::Noisy),
            _ => Err(Error::InvalidParameter(format!(
                "unknown backend `{s}` (expected oracle, dense, bounded or noisy)"
            ))),
        }
    }
}

fn distribution_from_amplitudes(
    idx: &DirectedEdgeIndex,
    step: usize,
    amp: impl Fn(usize) -> num_complex::Complex64,
) -> NodeDistribution {
    EdgeStateVector {
        amplitudes: (0..idx.len()).map(amp).collect(),
        step,
    }
    .node_distribution(idx)
}

/// Ideal node distributions for `t = 0..=steps` from circuit simulation.
///
/// Each step is simulated from scratch on the truncated program so the state
/// at a step boundary is read off exactly.
pub fn simulate_walk_ideal(
    g: &Graph,
    seed: usize,
    alpha: f64,
    steps: usize,
    backend: Backend,
) -> Result<Vec<NodeDistribution>> {
    if backend == Backend::Oracle {
        return walk_distributions(g, seed, alpha, steps);
    }
    let idx = DirectedEdgeIndex::new(g);
    let p = compile_walk(g, &idx, &QubitAssignment::identity(&idx), seed, alpha, steps)?;
    if backend == Backend::Dense && p.qubit_count > DEFAULT_DENSE_CAP {
        return Err(Error::Capability(format!(
            "{} qubits exceed the dense cap of {DEFAULT_DENSE_CAP}; use the bounded backend",
            p.qubit_count
        )));
    }
    let w_max = g.max_degree();
    let mut out = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        let sub = p.truncate_to_step(t).expect("step exists");
        let d = match backend {
            Backend::Dense => {
                let s = simulate_dense(&sub, DEFAULT_DENSE_CAP)?;
                distribution_from_amplitudes(&idx, t, |q| s.amplitude(1 << q))
            }
            Backend::Bounded => {
                let s = simulate_bounded(&sub, w_max)?;
                distribution_from_amplitudes(&idx, t, |q| s.amplitude(1u128 << q))
            }
            _ => unreachable!(),
        };
        out.push(d);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyConfig {
    pub noise: NoiseModel,
    pub trajectories: usize,
    pub shot_base: f64,
    pub shot_growth: f64,
    pub rng_seed: u64,
}

impl Default for NoisyConfig {
    fn default() -> Self {
        Self {
            noise: NoiseModel::default(),
            trajectories: 2000,
            shot_base: 5.3e5,
            shot_growth: 1.1,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NoisyWalkReport {
    /// Metrics for `t = 1..=steps`.
    pub steps: Vec<StepMetrics>,
    pub shot_tables: Vec<ShotTable>,
    /// Exponential fit of retention against `t`.
    pub retention_fit: Option<ExpFit>,
}

/// Noisy execution of a compiled walk, scored against the exact walk.
///
/// Snapshots are taken at the end of every step of the native program, so
/// one trajectory ensemble serves all steps. Shots for step `t` follow the
/// schedule; basis outcomes are drawn inside the trajectories and readout
/// flips use seed `rng_seed + t`.
pub fn noisy_walk(
    g: &Graph,
    seed: usize,
    alpha: f64,
    compiled: &CompiledWalk,
    cfg: &NoisyConfig,
) -> Result<NoisyWalkReport> {
    let steps = compiled.native.steps();
    if steps == 0 {
        return Err(Error::InvalidParameter("noisy backend needs at least one step".into()));
    }
    let idx = DirectedEdgeIndex::new(g);
    let ideal = walk_distributions(g, seed, alpha, steps)?;
    let baseline = stationary_distribution(g).probabilities;
    let snapshots: Vec<usize> = (1..=steps)
        .map(|t| compiled.native.step_end(t).expect("step exists"))
        .collect();
    let shots: Vec<u64> = (1..=steps)
        .map(|t| shot_schedule(cfg.shot_base, cfg.shot_growth, t))
        .collect();
    let run = simulate_noisy_sampled(
        &compiled.native,
        &compiled.blocks,
        &cfg.noise,
        cfg.trajectories,
        cfg.rng_seed,
        &snapshots,
        &shots,
    )?;
    let mut rows = Vec::with_capacity(steps);
    let mut tables = Vec::with_capacity(steps);
    for t in 1..=steps {
        let measure = compiled.measure_map(t)?;
        let shot_seed = cfg.rng_seed.wrapping_add(t as u64);
        let mut st = sample_shots(&run, t - 1, shots[t - 1], &cfg.noise, &measure, shot_seed)?;
        st.metadata = ShotMetadata {
            program_hash: Some(compiled.native.hash()),
            seeds: vec![cfg.rng_seed, shot_seed],
            noise: Some(cfg.noise.clone()),
            step: Some(t),
        };
        rows.push(step_metrics(t, &st, &idx, &ideal[t].probabilities, &baseline)?);
        tables.push(st);
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.step as f64).collect();
    let rs: Vec<f64> = rows.iter().map(|r| r.retention).collect();
    Ok(NoisyWalkReport {
        retention_fit: exponential_fit(&ts, &rs),
        steps: rows,
        shot_tables: tables,
    })
}

#[derive(Debug, Clone)]
pub struct Prioritization {
    pub qii: QiiSeries,
    pub scores: ScoreTable,
    pub report: RankReport,
}

/// QII scores and ranking from quantum distributions `pq[t]` for
/// `t = 0..=T`, against the classical lazy walk from the same seed.
pub fn prioritize_from_distributions(
    g: &Graph,
    seed: usize,
    alpha: f64,
    pq: &[Vec<f64>],
    t_min: usize,
    t_max: Option<usize>,
    exclude_seed: bool,
) -> Result<Prioritization> {
    if pq.is_empty() {
        return Err(Error::InvalidParameter("no quantum distributions given".into()));
    }
    let steps = pq.len() - 1;
    let pcl: Vec<Vec<f64>> = classical_walk(g, seed, alpha, steps)?
        .into_iter()
        .map(|s| s.probabilities)
        .collect();
    let q = qii(pq, &pcl)?;
    let scores = score(&q, t_min, t_max.unwrap_or(steps))?;
    let ids: Vec<String> = g.nodes().iter().map(|n| n.id.clone()).collect();
    let labels: Vec<String> = (0..g.num_nodes()).map(|i| g.label(i).to_string()).collect();
    let report = rank_report(&scores, &ids, &labels, Some(seed), exclude_seed);
    Ok(Prioritization { qii: q, scores, report })
}

/// Postselected node distributions for `t = 0..=T` from a noisy run; `t = 0`
/// is the exact point mass at the seed.
pub fn noisy_distributions(g: &Graph, seed: usize, report: &NoisyWalkReport) -> Vec<Vec<f64>> {
    let mut p0 = vec![0.0; g.num_nodes()];
    p0[seed] = 1.0;
    std::iter::once(p0)
        .chain(report.steps.iter().map(|m| m.postselected.clone()))
        .collect()
}
