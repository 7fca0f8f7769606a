use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-qubit readout error and per-edge two-qubit error of a device.
///
/// JSON form: `{"readout": {"0": 0.01, ...}, "two_qubit": {"0-1": 0.002, ...}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationData {
    #[serde(default)]
    pub readout: BTreeMap<usize, f64>,
    #[serde(default)]
    pub two_qubit: BTreeMap<String, f64>,
}

impl CalibrationData {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: CalibrationData = serde_json::from_str(text)?;
        for (&q, &e) in &c.readout {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Validation(format!(
                    "readout error {e} of qubit {q} outside [0, 1]"
                )));
            }
        }
        for (k, &e) in &c.two_qubit {
            parse_edge_key(k)?;
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::Validation(format!("two-qubit error {e} of {k} outside [0, 1]")));
            }
        }
        Ok(c)
    }

    pub fn readout_error(&self, q: usize) -> Option<f64> {
        self.readout.get(&q).copied()
    }

    pub fn two_qubit_error(&self, a: usize, b: usize) -> Option<f64> {
        self.two_qubit
            .get(&format!("{a}-{b}"))
            .or_else(|| self.two_qubit.get(&format!("{b}-{a}")))
            .copied()
    }
}

fn parse_edge_key(k: &str) -> Result<(usize, usize)> {
    let bad = || Error::Validation(format!("edge key `{k}` is not of the form `a-b`"));
    let (a, b) = k.split_once('-').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Undirected physical connectivity with all-pairs hop distances.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMap {
    name: String,
    adjacency: Vec<Vec<usize>>,
    distances: Vec<Vec<u32>>,
    pub calibration: Option<CalibrationData>,
}

const UNREACHABLE: u32 = u32::MAX;

impl CouplingMap {
    pub fn from_edges(name: &str, qubits: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); qubits];
        for &(a, b) in edges {
            if a >= qubits || b >= qubits || a == b {
                return Err(Error::Validation(format!("bad coupling edge {a}-{b}")));
            }
            if !adjacency[a].contains(&b) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for n in &mut adjacency {
            n.sort_unstable();
        }
        let distances = (0..qubits).map(|s| bfs(&adjacency, s)).collect::<Vec<_>>();
        if qubits > 0 && distances[0].contains(&UNREACHABLE) {
            return Err(Error::Validation(format!("coupling map `{name}` is not connected")));
        }
        Ok(Self {
            name: name.to_string(),
            adjacency,
            distances,
            calibration: None,
        })
    }

    pub fn all_to_all(qubits: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..qubits)
            .flat_map(|a| (a + 1..qubits).map(move |b| (a, b)))
            .collect();
        Self::from_edges("all-to-all", qubits, &edges).expect("complete graph")
    }

    pub fn line(qubits: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..qubits).map(|q| (q - 1, q)).collect();
        Self::from_edges("line", qubits, &edges).expect("path graph")
    }

    /// Heavy-hexagon lattice with `distance + 1` rows of `2·distance + 2`
    /// qubits, consecutive rows joined by bridge qubits every fourth column
    /// (columns ≡ 0 mod 4 below even rows, ≡ 2 mod 4 below odd rows).
    ///
    /// `distance = 7` gives the 156-qubit layout of current 156-qubit devices.
    pub fn heavy_hex(distance: usize) -> Result<Self> {
        if distance == 0 {
            return Err(Error::InvalidParameter("heavy-hex distance must be at least 1".into()));
        }
        let rows = distance + 1;
        let width = 2 * distance + 2;
        let row_q = |r: usize, c: usize| r * width + c;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 1..width {
                edges.push((row_q(r, c - 1), row_q(r, c)));
            }
        }
        let mut next = rows * width;
        for gap in 0..distance {
            let offset = if gap % 2 == 0 { 0 } else { 2 };
            for c in (offset..width).step_by(4) {
                edges.push((row_q(gap, c), next));
                edges.push((next, row_q(gap + 1, c)));
                next += 1;
            }
        }
        Self::from_edges(&format!("heavy-hex-{distance}"), next, &edges)
    }

    pub fn with_calibration(mut self, c: CalibrationData) -> Self {
        self.calibration = Some(c);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn qubit_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        self.distances[a][b] as usize
    }

    /// Next hop from `from` on a shortest path to `to` (smallest index on ties).
    pub fn next_hop(&self, from: usize, to: usize) -> usize {
        let d = self.distances[from][to];
        *self.adjacency[from]
            .iter()
            .find(|&&n| self.distances[n][to] + 1 == d)
            .expect("connected map")
    }

    /// Whether `qubits` induce a connected subgraph.
    pub fn is_connected_set(&self, qubits: &[usize]) -> bool {
        if qubits.len() <= 1 {
            return true;
        }
        let mut seen = vec![false; qubits.len()];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            for (j, &q) in qubits.iter().enumerate() {
                if !seen[j] && self.are_adjacent(qubits[i], q) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn readout_error(&self, q: usize) -> Option<f64> {
        self.calibration.as_ref().and_then(|c| c.readout_error(q))
    }
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<u32> {
    let mut d = vec![UNREACHABLE; adj.len()];
    d[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if d[v] == UNREACHABLE {
                d[v] = d[u] + 1;
                queue.push_back(v);
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heavy_hex_sizes_and_degrees() {
        let small = CouplingMap::heavy_hex(1).unwrap();
        assert_eq!(small.qubit_count(), 9);
        assert!((0..9).all(|q| (1..=3).contains(&small.degree(q))));
        let big = CouplingMap::heavy_hex(7).unwrap();
        assert_eq!(big.qubit_count(), 156);
        for d in 1..=9 {
            let m = CouplingMap::heavy_hex(d).unwrap();
            assert!(m.max_degree() <= 3);
            assert!(m.edges().iter().all(|&(a, b)| m.distance(a, b) == 1));
        }
    }

    #[test]
    fn disconnected_map_is_rejected() {
        assert!(CouplingMap::from_edges("x", 4, &[(0, 1), (2, 3)]).is_err());
    }

    #[test]
    fn next_hop_walks_a_shortest_path() {
        let m = CouplingMap::line(5);
        assert_eq!(m.next_hop(0, 4), 1);
        assert_eq!(m.next_hop(4, 1), 3);
    }

    #[test]
    fn calibration_json() {
        let c = CalibrationData::from_json(r#"{"readout": {"0": 0.01, "3": 0.2}, "two_qubit": {"0-1": 0.003}}"#)
            .unwrap();
        assert_eq!(c.readout_error(3), Some(0.2));
        assert_eq!(c.two_qubit_error(1, 0), Some(0.003));
        assert!(CalibrationData::from_json(r#"{"readout": {"0": 1.5}}"#).is_err());
        assert!(CalibrationData::from_json(r#"{"two_qubit": {"01": 0.1}}"#).is_err());
    }

    #[test]
    fn connected_sets() {
        let m = CouplingMap::line(5);
        assert!(m.is_connected_set(&[2, 1, 3]));
        assert!(!m.is_connected_set(&[0, 2]));
    }
}
