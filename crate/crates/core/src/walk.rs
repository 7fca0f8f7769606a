//! Exact edge-space walk: the reference against which compiled circuits are
//! checked, plus the lazy classical walk used as an interference baseline.
//!
//! The walker lives on directed edges: basis state `q = (i, j)` means "at node
//! `i`, about to hop to `j`". One step applies the shift and then the coin.
//!
//! Shift convention: on each pair `{(i,j), (j,i)}`
//!
//! ```text
//! S|i→j> = sqrt(1 - α) |j→i> + i·sqrt(α) |i→j>
//! ```
//!
//! so `α = 0` exchanges the two directions completely and `α = 1` leaves the
//! walker in place with a phase `i`. Prose descriptions that call `α = 0`
//! "no transitions" have the two limits the other way round; this module
//! follows the formula.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedEdgeIndex, Graph};
use crate::linalg::{I, ZERO};

/// Walker amplitudes indexed by [`DirectedEdgeIndex`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStateVector {
    pub amplitudes: Vec<Complex64>,
    pub step: usize,
}

impl EdgeStateVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability per node: sum of |ψ_ij|² over the node's outgoing edges.
    pub fn node_distribution(&self, idx: &DirectedEdgeIndex) -> NodeDistribution {
        let probabilities = idx
            .blocks()
            .iter()
            .map(|b| self.amplitudes[b.clone()].iter().map(|a| a.norm_sqr()).sum())
            .collect();
        NodeDistribution {
            probabilities,
            step: self.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDistribution {
    pub probabilities: Vec<f64>,
    pub step: usize,
}

impl NodeDistribution {
    pub fn sum(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &NodeDistribution) -> f64 {
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalWalkState {
    pub probabilities: Vec<f64>,
    pub alpha: f64,
    pub step: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    Ok(())
}

/// Uniform superposition over the seed's outgoing edges.
pub fn initial_state(g: &Graph, idx: &DirectedEdgeIndex, seed: usize) -> Result<EdgeStateVector> {
    if seed >= g.num_nodes() {
        return Err(Error::UnknownNode(format!("#{seed}")));
    }
    let block = idx.block(seed);
    let amp = Complex64::new(1.0 / (block.len() as f64).sqrt(), 0.0);
    let mut amplitudes = vec![ZERO; idx.len()];
    for q in block {
        amplitudes[q] = amp;
    }
    Ok(EdgeStateVector { amplitudes, step: 0 })
}

pub fn apply_shift(
    s: &EdgeStateVector,
    idx: &DirectedEdgeIndex,
    alpha: f64,
) -> Result<EdgeStateVector> {
    check_alpha(alpha)?;
    let stay = I * alpha.sqrt();
    let hop = (1.0 - alpha).sqrt();
    let a = &s.amplitudes;
    let amplitudes = (0..idx.len())
        .map(|q| stay * a[q] + hop * a[idx.reverse(q)])
        .collect();
    Ok(EdgeStateVector {
        amplitudes,
        step: s.step,
    })
}

/// Grover coin: on each node block, `2|s_i><s_i| - I`, i.e. entries `2/k - δ`.
pub fn apply_coin(s: &EdgeStateVector, idx: &DirectedEdgeIndex) -> EdgeStateVector {
    let mut amplitudes = s.amplitudes.clone();
    for block in idx.blocks() {
        let k = block.len() as f64;
        let mean: Complex64 = s.amplitudes[block.clone()].iter().sum::<Complex64>() * (2.0 / k);
        for q in block.clone() {
            amplitudes[q] = mean - s.amplitudes[q];
        }
    }
    EdgeStateVector {
        amplitudes,
        step: s.step,
    }
}

/// One walk step: shift followed by coin.
pub fn step(s: &EdgeStateVector, idx: &DirectedEdgeIndex, alpha: f64) -> Result<EdgeStateVector> {
    let mut next = apply_coin(&apply_shift(s, idx, alpha)?, idx);
    next.step = s.step + 1;
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct WalkStep {
    pub state: EdgeStateVector,
    pub distribution: NodeDistribution,
}

/// States and node distributions for `t = 0..=steps`.
pub fn run_walk(
    g: &Graph,
    idx: &DirectedEdgeIndex,
    seed: usize,
    alpha: f64,
    steps: usize,
) -> Result<Vec<WalkStep>> {
    check_alpha(alpha)?;
    let mut state = initial_state(g, idx, seed)?;
    let mut out = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        let distribution = if t == 0 {
            // exact point mass; summing k terms of 1/k can round below 1
            let mut probabilities = vec![0.0; g.num_nodes()];
            probabilities[seed] = 1.0;
            NodeDistribution { probabilities, step: 0 }
        } else {
            state = step(&state, idx, alpha)?;
            state.node_distribution(idx)
        };
        out.push(WalkStep {
            distribution,
            state: state.clone(),
        });
    }
    Ok(out)
}

/// Convenience: node distributions only.
pub fn walk_distributions(
    g: &Graph,
    seed: usize,
    alpha: f64,
    steps: usize,
) -> Result<Vec<NodeDistribution>> {
    let idx = DirectedEdgeIndex::new(g);
    Ok(run_walk(g, &idx, seed, alpha, steps)?
        .into_iter()
        .map(|s| s.distribution)
        .collect())
}

/// Lazy-walk transition matrix `M_ij = α δ_ij + (1 - α) [i~j] / k_i`.
pub fn transition_matrix(g: &Graph, alpha: f64) -> Vec<Vec<f64>> {
    let n = g.num_nodes();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = alpha;
        let k = g.degree(i) as f64;
        for &j in g.neighbors(i) {
            row[j] += (1.0 - alpha) / k;
        }
    }
    m
}

/// Classical lazy walk from a point mass: `P_j(t+1) = Σ_i M_ij P_i(t)`.
pub fn classical_walk(
    g: &Graph,
    seed: usize,
    alpha: f64,
    steps: usize,
) -> Result<Vec<ClassicalWalkState>> {
    check_alpha(alpha)?;
    if seed >= g.num_nodes() {
        return Err(Error::UnknownNode(format!("#{seed}")));
    }
    let m = transition_matrix(g, alpha);
    let n = g.num_nodes();
    let mut p = vec![0.0; n];
    p[seed] = 1.0;
    let mut out = Vec::with_capacity(steps + 1);
    for t in 0..=steps {
        if t > 0 {
            let mut next = vec![0.0; n];
            for (i, row) in m.iter().enumerate() {
                for (j, &w) in row.iter().enumerate() {
                    next[j] += w * p[i];
                }
            }
            p = next;
        }
        out.push(ClassicalWalkState {
            probabilities: p.clone(),
            alpha,
            step: t,
        });
    }
    Ok(out)
}

/// Degree-proportional distribution `R_i = k_i / Σ k_j`.
pub fn stationary_distribution(g: &Graph) -> NodeDistribution {
    let total = 2.0 * g.num_edges() as f64;
    NodeDistribution {
        probabilities: g.degrees().iter().map(|&k| k as f64 / total).collect(),
        step: 0,
    }
}

/// Long-format CSV with columns `step,node,probability`.
pub fn trajectory_csv(g: &Graph, dists: &[NodeDistribution]) -> String {
    let mut out = String::from("step,node,probability\n");
    for d in dists {
        for (i, p) in d.probabilities.iter().enumerate() {
            out.push_str(&format!("{},{},{:.17e}\n", d.step, g.id(i), p));
        }
    }
    out
}

/// JSON document with node ids and one probability array per step.
pub fn trajectory_json(g: &Graph, dists: &[NodeDistribution]) -> serde_json::Value {
    serde_json::json!({
        "nodes": g.nodes().iter().map(|n| n.id.clone()).collect::<Vec<_>>(),
        "steps": dists.iter().map(|d| serde_json::json!({
            "step": d.step,
            "probabilities": d.probabilities,
        })).collect::<Vec<_>>(),
    })
}

/// Parses the long-format CSV written by [`trajectory_csv`] back into per-step
/// distributions ordered like the graph's nodes.
pub fn parse_trajectory_csv(g: &Graph, text: &str) -> Result<Vec<NodeDistribution>> {
    let mut steps: Vec<NodeDistribution> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("step") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse_err = |message: String| Error::Parse {
            line: n + 1,
            message,
        };
        if cols.len() != 3 {
            return Err(parse_err(format!("expected `step,node,probability`, got `{line}`")));
        }
        let t: usize = cols[0]
            .parse()
            .map_err(|_| parse_err(format!("bad step `{}`", cols[0])))?;
        let node = g.index_of(cols[1])?;
        let p: f64 = cols[2]
            .parse()
            .map_err(|_| parse_err(format!("bad probability `{}`", cols[2])))?;
        while steps.len() <= t {
            steps.push(NodeDistribution {
                probabilities: vec![0.0; g.num_nodes()],
                step: steps.len(),
            });
        }
        steps[t].probabilities[node] = p;
    }
    Ok(steps)
}
