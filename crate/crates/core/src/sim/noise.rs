//! Monte Carlo trajectories for stochastic Pauli and amplitude-damping noise.
//!
//! Depolarizing noise with probability `p` on a `k`-qubit gate is applied as:
//! with probability `p`, pick one of the `4^k` Pauli strings uniformly
//! (identity included), which averages to `(1 - p) ρ + p I / 2^k`.
//! Amplitude damping acts on every qubit after each layer that contains an
//! entangling gate, unravelled as quantum jumps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shots::draw;
use super::sparse::BoundedWeightState;
use super::{Pauli, QuantumState};
use crate::circuit::{Gate, GateProgram};
use crate::error::{Error, Result};
use crate::transpile::schedule::asap_layers;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutError {
    /// Probability of reading 1 when the qubit is 0.
    pub p01: f64,
    /// Probability of reading 0 when the qubit is 1.
    pub p10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    #[serde(default)]
    pub gamma: f64,
    pub readout_p01: f64,
    pub readout_p10: f64,
    /// Overrides of the uniform readout error, indexed by simulated qubit.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_qubit_readout: Vec<ReadoutError>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::kingston()
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            gamma: 0.0,
            readout_p01: 0.0,
            readout_p10: 0.0,
            per_qubit_readout: Vec::new(),
        }
    }

    /// Median calibration of ibm_kingston (Heron r2).
    pub fn kingston() -> Self {
        Self::uniform(2.2e-4, 2.1e-3, 8.4e-3)
    }

    /// Median calibration of ibm_pittsburgh (Heron r3).
    pub fn pittsburgh() -> Self {
        Self::uniform(2.1e-4, 1.7e-3, 4.1e-3)
    }

    /// Symmetric readout error `readout` and no damping.
    pub fn uniform(p1: f64, p2: f64, readout: f64) -> Self {
        Self {
            p1,
            p2,
            gamma: 0.0,
            readout_p01: readout,
            readout_p10: readout,
            per_qubit_readout: Vec::new(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "kingston" | "ibm_kingston" => Some(Self::kingston()),
            "pittsburgh" | "ibm_pittsburgh" => Some(Self::pittsburgh()),
            "noiseless" | "ideal" => Some(Self::noiseless()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut all = vec![
            ("p1", self.p1),
            ("p2", self.p2),
            ("gamma", self.gamma),
            ("readout_p01", self.readout_p01),
            ("readout_p10", self.readout_p10),
        ];
        for r in &self.per_qubit_readout {
            all.push(("per-qubit p01", r.p01));
            all.push(("per-qubit p10", r.p10));
        }
        for (name, v) in all {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "noise parameter {name} = {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn readout(&self, qubit: usize) -> ReadoutError {
        self.per_qubit_readout.get(qubit).copied().unwrap_or(ReadoutError {
            p01: self.readout_p01,
            p10: self.readout_p10,
        })
    }

    fn gate_error(&self, g: &Gate) -> f64 {
        match g.arity() {
            0 => 0.0,
            1 => self.p1,
            _ => self.p2,
        }
    }
}

/// Per-trajectory probability distributions at the requested snapshots.
#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    pub qubit_count: usize,
    /// Gate positions (exclusive ends) at which snapshots were taken.
    pub snapshots: Vec<usize>,
    /// `trajectories[k][s]`: (basis state, probability) pairs of trajectory
    /// `k` at snapshot `s`.
    pub trajectories: Vec<Vec<Vec<(u128, f64)>>>,
    /// `samples[k][s]`: (basis state, count) pairs drawn from trajectory `k`
    /// at snapshot `s`; filled instead of `trajectories` by
    /// [`simulate_noisy_sampled`].
    pub samples: Vec<Vec<Vec<(u128, u64)>>>,
    pub rng_seed: u64,
}

impl TrajectoryRun {
    pub fn snapshot_count(&self) -> usize {
        self.snapshots.len()
    }

    /// Trajectory-averaged probability of every basis state at snapshot `s`.
    pub fn mean_distribution(&self, s: usize) -> Vec<(u128, f64)> {
        let mut acc = std::collections::BTreeMap::new();
        for t in &self.trajectories {
            for &(b, p) in &t[s] {
                *acc.entry(b).or_insert(0.0) += p;
            }
        }
        let n = self.trajectories.len() as f64;
        acc.into_iter().map(|(b, p)| (b, p / n)).collect()
    }
}

/// Execution plan: gates reordered layer by layer between snapshot barriers.
struct Plan<'a> {
    order: Vec<&'a Gate>,
    /// `damp_after[i]`: an entangling layer finishes after `order[i]`.
    damp_after: Vec<bool>,
    /// Position in `order` of each snapshot.
    snap_at: Vec<usize>,
}

fn plan<'a>(p: &'a GateProgram, snapshots: &[usize]) -> Plan<'a> {
    let mut order = Vec::with_capacity(p.gates.len());
    let mut damp_after = Vec::with_capacity(p.gates.len());
    let mut snap_at = Vec::with_capacity(snapshots.len());
    let mut start = 0;
    for &end in snapshots {
        let chunk: Vec<&Gate> = p.gates[start..end]
            .iter()
            .filter(|g| g.arity() > 0)
            .collect();
        let owned: Vec<Gate> = chunk.iter().map(|g| (*g).clone()).collect();
        let layers = asap_layers(p.qubit_count, &owned);
        let depth = layers.iter().flatten().map(|l| l + 1).max().unwrap_or(0);
        let mut by_layer: Vec<Vec<&Gate>> = vec![Vec::new(); depth];
        for (g, l) in chunk.iter().zip(&layers) {
            by_layer[l.expect("non-measure gate")].push(g);
        }
        for layer in by_layer {
            let entangling = layer.iter().any(|g| g.is_entangling());
            let n = layer.len();
            for (i, g) in layer.into_iter().enumerate() {
                order.push(g);
                damp_after.push(entangling && i + 1 == n);
            }
        }
        snap_at.push(order.len());
        start = end;
    }
    Plan {
        order,
        damp_after,
        snap_at,
    }
}

const PAULIS: [Pauli; 4] = Pauli::ALL;

fn apply_random_pauli(s: &mut BoundedWeightState, g: &Gate, rng: &mut ChaCha8Rng) {
    for q in g.qubits() {
        let p = PAULIS[rng.random_range(0..4)];
        s.apply_pauli(q, p);
    }
}

fn damp(s: &mut BoundedWeightState, gamma: f64, rng: &mut ChaCha8Rng) {
    for q in 0..s.qubit_count() {
        let pop = s.excited_population(q);
        if pop == 0.0 {
            continue;
        }
        if rng.random::<f64>() < gamma * pop {
            s.lower(q);
        } else {
            s.scale_excited(q, (1.0 - gamma).sqrt());
        }
        s.normalize();
    }
}

/// Consecutive gates `range` of a program whose product is `gate`.
///
/// Trajectories apply `gate` in one go whenever no error falls inside the
/// range, which is exact because the noise is drawn per original gate.
#[derive(Debug, Clone)]
pub struct FusedBlock {
    pub range: std::ops::Range<usize>,
    pub gate: Gate,
}

/// Runs `n_traj` noisy trajectories of `p` and records the state distribution
/// at each gate position in `snapshots` (ascending; empty means the end).
///
/// Trajectory `k` draws from the ChaCha8 stream `k` of `rng_seed`, so results
/// do not depend on execution order. The state is stored sparsely without a
/// weight cap, which keeps memory proportional to the populated support.
pub fn simulate_noisy_trajectories(
    p: &GateProgram,
    noise: &NoiseModel,
    n_traj: usize,
    rng_seed: u64,
    snapshots: &[usize],
) -> Result<TrajectoryRun> {
    simulate_noisy_fused(p, &[], noise, n_traj, rng_seed, snapshots)
}

/// As [`simulate_noisy_trajectories`], with error-free stretches of `blocks`
/// applied as single gates. Blocks are ignored when damping is on, since
/// damping acts between scheduling layers that cut across them.
pub fn simulate_noisy_fused(
    p: &GateProgram,
    blocks: &[FusedBlock],
    noise: &NoiseModel,
    n_traj: usize,
    rng_seed: u64,
    snapshots: &[usize],
) -> Result<TrajectoryRun> {
    let snapshots = check_run(p, noise, n_traj, snapshots)?;
    let record = |s: &BoundedWeightState, _: usize, _: usize| s.support();
    let trajectories = if noise.gamma > 0.0 {
        run_damped(p, noise, n_traj, rng_seed, &snapshots, &record)?
    } else {
        run_pauli(p, blocks, noise, n_traj, rng_seed, &snapshots, &record)?
    };
    Ok(TrajectoryRun {
        qubit_count: p.qubit_count,
        snapshots,
        trajectories,
        samples: Vec::new(),
        rng_seed,
    })
}

/// As [`simulate_noisy_fused`], but instead of whole distributions each
/// trajectory keeps only basis states drawn at the snapshots: `draws[s]`
/// outcomes at snapshot `s`, split evenly over trajectories with the first
/// `draws[s] mod n_traj` taking one extra. Memory no longer grows with the
/// support of the noisy states.
pub fn simulate_noisy_sampled(
    p: &GateProgram,
    blocks: &[FusedBlock],
    noise: &NoiseModel,
    n_traj: usize,
    rng_seed: u64,
    snapshots: &[usize],
    draws: &[u64],
) -> Result<TrajectoryRun> {
    let snapshots = check_run(p, noise, n_traj, snapshots)?;
    if draws.len() != snapshots.len() {
        return Err(Error::InvalidParameter(format!(
            "{} draw counts for {} snapshots",
            draws.len(),
            snapshots.len()
        )));
    }
    let n = n_traj as u64;
    let record = |s: &BoundedWeightState, k: usize, j: usize| -> Vec<(u128, u64)> {
        let quota = draws[j] / n + u64::from((k as u64) < draws[j] % n);
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ SAMPLE_SALT);
        rng.set_stream((k * snapshots.len() + j) as u64);
        let dist = s.support();
        let mut cdf = Vec::with_capacity(dist.len());
        let mut acc = 0.0;
        for &(_, p) in &dist {
            acc += p;
            cdf.push(acc);
        }
        let mut out = std::collections::BTreeMap::new();
        for _ in 0..quota {
            *out.entry(dist[draw(&cdf, rng.random::<f64>() * acc)].0).or_insert(0u64) += 1;
        }
        out.into_iter().collect()
    };
    let samples = if noise.gamma > 0.0 {
        run_damped(p, noise, n_traj, rng_seed, &snapshots, &record)?
    } else {
        run_pauli(p, blocks, noise, n_traj, rng_seed, &snapshots, &record)?
    };
    Ok(TrajectoryRun {
        qubit_count: p.qubit_count,
        snapshots,
        trajectories: Vec::new(),
        samples,
        rng_seed,
    })
}

const SAMPLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn check_run(p: &GateProgram, noise: &NoiseModel, n_traj: usize, snapshots: &[usize]) -> Result<Vec<usize>> {
    noise.validate()?;
    if n_traj == 0 {
        return Err(Error::InvalidParameter("trajectory count must be at least 1".into()));
    }
    let snapshots: Vec<usize> = if snapshots.is_empty() {
        vec![p.gates.len()]
    } else {
        snapshots.to_vec()
    };
    if snapshots.windows(2).any(|w| w[0] > w[1]) || snapshots.last() > Some(&p.gates.len()) {
        return Err(Error::InvalidParameter("snapshots must be ascending gate positions".into()));
    }
    Ok(snapshots)
}

fn trajectory_rng(rng_seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(k as u64);
    rng
}

/// Depolarizing only: errors are independent of the state, so each
/// trajectory draws its error list first, starts from the shared ideal state
/// at its first error and fuses error-free blocks afterwards.
fn run_pauli<T: Send>(
    p: &GateProgram,
    blocks: &[FusedBlock],
    noise: &NoiseModel,
    n_traj: usize,
    rng_seed: u64,
    snapshots: &[usize],
    record: &(impl Fn(&BoundedWeightState, usize, usize) -> T + Sync),
) -> Result<Vec<Vec<T>>> {
    let n = p.qubit_count;
    let len = p.gates.len();
    // block_at[i]: index of the block starting at gate i
    let mut block_at = vec![None; len];
    for (b, blk) in blocks.iter().enumerate() {
        if blk.range.start < len && blk.range.end <= len && !blk.range.is_empty() {
            block_at[blk.range.start] = Some(b);
        }
    }
    let mut ideal = Vec::with_capacity(len + 1);
    let mut s = BoundedWeightState::unbounded(n)?;
    ideal.push(s.clone());
    for g in &p.gates {
        s.apply_gate(g)?;
        ideal.push(s.clone());
    }
    let rates: Vec<f64> = p.gates.iter().map(|g| noise.gate_error(g)).collect();

    (0..n_traj)
        .into_par_iter()
        .map(|k| -> Result<Vec<T>> {
            let mut rng = trajectory_rng(rng_seed, k);
            let mut events: Vec<(usize, Vec<(usize, Pauli)>)> = Vec::new();
            for (i, g) in p.gates.iter().enumerate() {
                if rates[i] > 0.0 && rng.random::<f64>() < rates[i] {
                    let paulis = g.qubits().into_iter().map(|q| (q, PAULIS[rng.random_range(0..4)])).collect();
                    events.push((i, paulis));
                }
            }
            let mut snaps = Vec::with_capacity(snapshots.len());
            let Some(&(first, _)) = events.first() else {
                snaps.extend(snapshots.iter().enumerate().map(|(j, &e)| record(&ideal[e], k, j)));
                return Ok(snaps);
            };
            let mut next_snap = 0;
            while next_snap < snapshots.len() && snapshots[next_snap] <= first {
                snaps.push(record(&ideal[snapshots[next_snap]], k, next_snap));
                next_snap += 1;
            }
            let mut state = ideal[first + 1].clone();
            let mut ev = 0;
            let mut i = first;
            loop {
                // gate i has been applied
                if ev < events.len() && events[ev].0 == i {
                    for &(q, pl) in &events[ev].1 {
                        state.apply_pauli(q, pl);
                    }
                    ev += 1;
                }
                i += 1;
                while next_snap < snapshots.len() && snapshots[next_snap] == i {
                    snaps.push(record(&state, k, next_snap));
                    next_snap += 1;
                }
                if i >= len || next_snap == snapshots.len() {
                    break;
                }
                let next_event = events.get(ev).map_or(usize::MAX, |e| e.0);
                let next_cut = snapshots.get(next_snap).copied().unwrap_or(usize::MAX);
                match block_at[i].map(|b| &blocks[b]) {
                    Some(blk) if next_event.saturating_add(1) >= blk.range.end && next_cut >= blk.range.end => {
                        state.apply_gate(&blk.gate)?;
                        i = blk.range.end - 1;
                    }
                    _ => state.apply_gate(&p.gates[i])?,
                }
            }
            Ok(snaps)
        })
        .collect()
}

fn run_damped<T: Send>(
    p: &GateProgram,
    noise: &NoiseModel,
    n_traj: usize,
    rng_seed: u64,
    snapshots: &[usize],
    record: &(impl Fn(&BoundedWeightState, usize, usize) -> T + Sync),
) -> Result<Vec<Vec<T>>> {
    let plan = plan(p, snapshots);
    let n = p.qubit_count;
    let errors: Vec<f64> = plan.order.iter().map(|g| noise.gate_error(g)).collect();
    (0..n_traj)
        .into_par_iter()
        .map(|k| -> Result<Vec<T>> {
            let mut rng = trajectory_rng(rng_seed, k);
            let mut snaps = Vec::with_capacity(plan.snap_at.len());
            let mut next_snap = 0;
            let mut s = BoundedWeightState::unbounded(n)?;
            for (i, g) in plan.order.iter().enumerate() {
                while next_snap < plan.snap_at.len() && plan.snap_at[next_snap] == i {
                    snaps.push(record(&s, k, next_snap));
                    next_snap += 1;
                }
                s.apply_gate(g)?;
                if errors[i] > 0.0 && rng.random::<f64>() < errors[i] {
                    apply_random_pauli(&mut s, g, &mut rng);
                }
                if plan.damp_after[i] {
                    damp(&mut s, noise.gamma, &mut rng);
                }
            }
            while next_snap < plan.snap_at.len() {
                snaps.push(record(&s, k, next_snap));
                next_snap += 1;
            }
            Ok(snaps)
        })
        .collect()
}
