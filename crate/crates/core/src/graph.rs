//! Undirected interaction networks, directed-edge indexing and constrained
//! subgraph sampling.

use std::collections::{HashMap, HashSet, VecDeque};
use std::ops::Range;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: Option<String>,
}

/// Simple, connected, undirected graph. Nodes keep their first-appearance
/// order and are addressed internally by dense indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    nodes: Vec<Node>,
    lookup: HashMap<String, usize>,
    /// Normalized `(min, max)` pairs in insertion order.
    edges: Vec<(usize, usize)>,
    /// Neighbor lists sorted by node index.
    adjacency: Vec<Vec<usize>>,
}

/// Unvalidated builder used by the parser and the sampler.
#[derive(Debug, Default)]
struct GraphBuilder {
    nodes: Vec<Node>,
    lookup: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    seen: HashSet<(usize, usize)>,
}

impl GraphBuilder {
    fn node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.lookup.get(id) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(Node {
            id: id.to_string(),
            label: None,
        });
        self.lookup.insert(id.to_string(), i);
        i
    }

    fn edge(&mut self, u: &str, v: &str, line: Option<usize>) -> Result<()> {
        let at = line.map(|l| format!(" at line {l}")).unwrap_or_default();
        if u == v {
            return Err(Error::Validation(format!("self-loop on node `{u}`{at}")));
        }
        let (a, b) = (self.node(u), self.node(v));
        let key = (a.min(b), a.max(b));
        if !self.seen.insert(key) {
            return Err(Error::Validation(format!("duplicate edge `{u}`-`{v}`{at}")));
        }
        self.edges.push(key);
        Ok(())
    }

    fn build(self) -> Result<Graph> {
        let n = self.nodes.len();
        if n == 0 || self.edges.is_empty() {
            return Err(Error::Validation("graph has no edges".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let g = Graph {
            nodes: self.nodes,
            lookup: self.lookup,
            edges: self.edges,
            adjacency,
        };
        if let Some(i) = (0..n).find(|&i| g.degree(i) == 0) {
            return Err(Error::Validation(format!(
                "node `{}` has degree 0",
                g.nodes[i].id
            )));
        }
        let reached = g.bfs_distances(0).iter().filter(|d| d.is_some()).count();
        if reached != n {
            return Err(Error::Validation(format!(
                "graph is disconnected ({reached} of {n} nodes reachable from `{}`)",
                g.nodes[0].id
            )));
        }
        Ok(g)
    }
}

impl Graph {
    /// Builds and validates a graph from identifier pairs.
    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self> {
        let mut b = GraphBuilder::default();
        for (u, v) in edges {
            b.edge(u.as_ref(), v.as_ref(), None)?;
        }
        b.build()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes()).map(|i| self.degree(i)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_nodes()).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn id(&self, i: usize) -> &str {
        &self.nodes[i].id
    }

    /// Human-readable label, falling back to the identifier.
    pub fn label(&self, i: usize) -> &str {
        self.nodes[i].label.as_deref().unwrap_or(&self.nodes[i].id)
    }

    /// Attaches labels; identifiers missing from the graph are ignored.
    pub fn set_labels(&mut self, labels: &HashMap<String, String>) {
        for node in &mut self.nodes {
            if let Some(l) = labels.get(&node.id) {
                node.label = Some(l.clone());
            }
        }
    }

    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_nodes()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn diameter(&self) -> usize {
        (0..self.num_nodes())
            .flat_map(|s| self.bfs_distances(s))
            .map(|d| d.unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Edge density 2|E| / (N (N - 1)).
    pub fn density(&self) -> f64 {
        let n = self.num_nodes() as f64;
        2.0 * self.num_edges() as f64 / (n * (n - 1.0))
    }
}

fn split_columns(line: &str) -> Vec<&str> {
    let sep = if line.contains('\t') { '\t' } else { ',' };
    line.split(sep).map(str::trim).collect()
}

const HEADER_PAIRS: &[(&str, &str)] = &[
    ("source", "target"),
    ("src", "dst"),
    ("from", "to"),
    ("u", "v"),
    ("node1", "node2"),
    ("gene1", "gene2"),
];

fn is_header(cols: &[&str]) -> bool {
    cols.len() >= 2
        && HEADER_PAIRS.iter().any(|(a, b)| {
            cols[0].eq_ignore_ascii_case(a) && cols[1].eq_ignore_ascii_case(b)
        })
}

/// Parses an edge list: one edge per line, tab- or comma-separated, `#`
/// comments and blank lines skipped. An optional header (`source/target`,
/// `u/v`, ...) may open the document. Optional third and fourth columns carry
/// labels for the first and second node.
pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut b = GraphBuilder::default();
    let mut labels: Vec<(String, String)> = Vec::new();
    let mut first_data = true;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols = split_columns(line);
        if first_data {
            first_data = false;
            if is_header(&cols) {
                continue;
            }
        }
        if cols.len() < 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected two node columns, found `{line}`"),
            });
        }
        let (u, v) = (cols[0], cols[1]);
        if u.is_empty() || v.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty node identifier".into(),
            });
        }
        b.edge(u, v, Some(line_no))?;
        for (id, col) in [(u, 2), (v, 3)] {
            if let Some(l) = cols.get(col).filter(|l| !l.is_empty()) {
                labels.push((id.to_string(), l.to_string()));
            }
        }
    }
    let mut g = b.build()?;
    g.set_labels(&labels.into_iter().collect());
    Ok(g)
}

/// Parses a two-column `id<TAB>label` sidecar.
pub fn load_labels(text: &str) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols = split_columns(line);
        if cols.len() < 2 {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("expected `id<TAB>label`, found `{line}`"),
            });
        }
        out.insert(cols[0].to_string(), cols[1].to_string());
    }
    Ok(out)
}

/// Serializes a graph back into the tab-separated edge-list format.
pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::from("source\ttarget\n");
    for &(a, b) in g.edges() {
        out.push_str(g.id(a));
        out.push('\t');
        out.push_str(g.id(b));
        out.push('\n');
    }
    out
}

/// Bijection between directed edges `(source, target)` and `0..2|E|`.
///
/// Edges leaving the same node occupy a contiguous block, blocks follow node
/// order and targets within a block are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedEdgeIndex {
    pairs: Vec<(usize, usize)>,
    forward: HashMap<(usize, usize), usize>,
    reverse: Vec<usize>,
    blocks: Vec<Range<usize>>,
}

impl DirectedEdgeIndex {
    pub fn new(g: &Graph) -> Self {
        let mut pairs = Vec::with_capacity(2 * g.num_edges());
        let mut blocks = Vec::with_capacity(g.num_nodes());
        for i in 0..g.num_nodes() {
            let start = pairs.len();
            pairs.extend(g.neighbors(i).iter().map(|&j| (i, j)));
            blocks.push(start..pairs.len());
        }
        let forward: HashMap<_, _> = pairs.iter().enumerate().map(|(q, &p)| (p, q)).collect();
        let reverse = pairs.iter().map(|&(i, j)| forward[&(j, i)]).collect();
        Self {
            pairs,
            forward,
            reverse,
            blocks,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn index(&self, source: usize, target: usize) -> Option<usize> {
        self.forward.get(&(source, target)).copied()
    }

    pub fn edge(&self, q: usize) -> (usize, usize) {
        self.pairs[q]
    }

    pub fn source(&self, q: usize) -> usize {
        self.pairs[q].0
    }

    /// Index of the opposite direction of edge `q`.
    pub fn reverse(&self, q: usize) -> usize {
        self.reverse[q]
    }

    /// Indices of the edges leaving node `i`.
    pub fn block(&self, i: usize) -> Range<usize> {
        self.blocks[i].clone()
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    /// One `(q, reverse(q))` pair per undirected edge, with `q < reverse(q)`.
    pub fn undirected_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .filter_map(|q| {
                let r = self.reverse[q];
                (q < r).then_some((q, r))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleParams {
    pub max_degree: usize,
    pub max_edges: usize,
    /// Stop growing once this many nodes are included.
    pub target_nodes: Option<usize>,
    pub trials: usize,
}

impl Default for SampleParams {
    fn default() -> Self {
        Self {
            max_degree: 3,
            max_edges: 20,
            target_nodes: None,
            trials: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampledSubgraph {
    pub graph: Graph,
    /// Identifier of the chosen seed node.
    pub seed: String,
    pub rng_seed: u64,
    /// Trial (zero-based) that produced the subgraph.
    pub trial: usize,
}

/// Grows random connected subgraphs from random start nodes until one
/// satisfies the degree and edge caps and contains a seed candidate.
///
/// Each trial picks a random start node and repeatedly adds a random frontier
/// node together with all its edges into the current set, skipping additions
/// that would break a cap. The result is the subgraph induced by the chosen
/// nodes.
pub fn sample_subgraph(
    g: &Graph,
    seed_candidates: &[String],
    params: &SampleParams,
    rng_seed: u64,
) -> Result<SampledSubgraph> {
    if seed_candidates.is_empty() {
        return Err(Error::InvalidParameter("seed candidate set is empty".into()));
    }
    if params.max_degree == 0 || params.max_edges == 0 {
        return Err(Error::InvalidParameter(
            "max_degree and max_edges must be at least 1".into(),
        ));
    }
    let seeds: HashSet<usize> = seed_candidates
        .iter()
        .map(|s| g.index_of(s))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = g.num_nodes();

    for trial in 0..params.trials {
        let start = rng.random_range(0..n);
        let mut chosen = vec![start];
        let mut in_set = vec![false; n];
        in_set[start] = true;
        let mut degree = vec![0usize; n];
        let mut edges = 0usize;
        let mut rejected = vec![false; n];

        loop {
            if params.target_nodes.is_some_and(|t| chosen.len() >= t) {
                break;
            }
            let mut frontier: Vec<usize> = chosen
                .iter()
                .flat_map(|&u| g.neighbors(u).iter().copied())
                .filter(|&v| !in_set[v] && !rejected[v])
                .collect();
            frontier.sort_unstable();
            frontier.dedup();
            let Some(&v) = frontier.choose(&mut rng) else {
                break;
            };
            let links: Vec<usize> = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| in_set[u])
                .collect();
            let fits = links.len() <= params.max_degree
                && edges + links.len() <= params.max_edges
                && links.iter().all(|&u| degree[u] < params.max_degree);
            if !fits {
                rejected[v] = true;
                continue;
            }
            in_set[v] = true;
            chosen.push(v);
            degree[v] = links.len();
            for &u in &links {
                degree[u] += 1;
            }
            edges += links.len();
        }

        let present: Vec<usize> = chosen.iter().copied().filter(|v| seeds.contains(v)).collect();
        if edges == 0 || present.is_empty() {
            continue;
        }
        let seed = *present.choose(&mut rng).unwrap();

        let mut b = GraphBuilder::default();
        for &u in &chosen {
            b.node(g.id(u));
        }
        let order: HashMap<usize, usize> =
            chosen.iter().enumerate().map(|(k, &u)| (u, k)).collect();
        let mut induced: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .filter(|(a, b)| in_set[*a] && in_set[*b])
            .map(|&(a, b)| {
                let (x, y) = (order[&a], order[&b]);
                (x.min(y), x.max(y))
            })
            .collect();
        induced.sort_unstable();
        for (x, y) in induced {
            b.edge(g.id(chosen[x]), g.id(chosen[y]), None)?;
        }
        let mut sub = b.build()?;
        let labels: HashMap<String, String> = chosen
            .iter()
            .filter_map(|&u| g.nodes()[u].label.clone().map(|l| (g.id(u).to_string(), l)))
            .collect();
        sub.set_labels(&labels);
        return Ok(SampledSubgraph {
            graph: sub,
            seed: g.id(seed).to_string(),
            rng_seed,
            trial,
        });
    }
    Err(Error::Infeasible(format!(
        "no subgraph with max degree {} and at most {} edges containing a seed candidate found in {} trials",
        params.max_degree, params.max_edges, params.trials
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn four_node() -> Graph {
        load_edge_list("1\t2\n2\t3\n2\t4\n3\t4\n").unwrap()
    }

    #[test]
    fn parses_path() {
        let g = load_edge_list("1\t2\n2\t3").unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn self_loop_is_rejected_with_line() {
        let err = load_edge_list("1\t1").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("self-loop") && msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn duplicate_edge_is_rejected() {
        let err = load_edge_list("a,b\nb,a\n").unwrap_err();
        assert!(err.to_string().contains("duplicate edge"));
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let err = load_edge_list("1\t2\n3\t4\n").unwrap_err();
        assert!(err.to_string().contains("disconnected"));
    }

    #[test]
    fn missing_column_is_a_parse_error() {
        match load_edge_list("1\t2\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_comments_and_labels() {
        let text = "# comment\nsource,target\nA,B,alpha,beta\nB,C\n";
        let g = load_edge_list(text).unwrap();
        assert_eq!(g.num_nodes(), 3);
        assert_eq!(g.label(0), "alpha");
        assert_eq!(g.label(1), "beta");
        assert_eq!(g.label(2), "C");
    }

    #[test]
    fn four_node_degrees() {
        assert_eq!(four_node().degrees(), vec![1, 3, 2, 2]);
    }

    #[test]
    fn path_directed_edges_are_grouped() {
        let g = load_edge_list("1\t2\n2\t3").unwrap();
        let idx = DirectedEdgeIndex::new(&g);
        assert_eq!(idx.len(), 4);
        let a = idx.index(1, 0).unwrap();
        let b = idx.index(1, 2).unwrap();
        assert_eq!(b, a + 1);
    }

    #[test]
    fn four_node_has_eight_directed_edges() {
        let g = four_node();
        let idx = DirectedEdgeIndex::new(&g);
        assert_eq!(idx.len(), 8);
        assert_eq!(idx.block(1).len(), 3);
        for q in idx.block(1) {
            assert_eq!(idx.source(q), 1);
        }
    }

    #[test]
    fn labels_sidecar() {
        let labels = load_labels("1\tPON2\n2\tVAMP5\n").unwrap();
        assert_eq!(labels["2"], "VAMP5");
    }

    #[test]
    fn write_then_load_preserves_edges() {
        let g = four_node();
        let h = load_edge_list(&write_edge_list(&g)).unwrap();
        assert_eq!(g.edges(), h.edges());
    }

    #[test]
    fn sampler_respects_caps_and_is_deterministic() {
        // ladder with 20 rungs: degrees up to 3
        let mut edges = Vec::new();
        for i in 0..20 {
            edges.push((format!("a{i}"), format!("b{i}")));
            if i + 1 < 20 {
                edges.push((format!("a{i}"), format!("a{}", i + 1)));
                edges.push((format!("b{i}"), format!("b{}", i + 1)));
            }
        }
        let g = Graph::from_edges(&edges).unwrap();
        let params = SampleParams {
            max_degree: 2,
            max_edges: 7,
            ..Default::default()
        };
        let seeds = vec!["a5".to_string(), "b9".to_string()];
        let s1 = sample_subgraph(&g, &seeds, &params, 42).unwrap();
        let s2 = sample_subgraph(&g, &seeds, &params, 42).unwrap();
        assert_eq!(s1.graph, s2.graph);
        assert_eq!(s1.seed, s2.seed);
        assert!(s1.graph.max_degree() <= 2);
        assert!(s1.graph.num_edges() <= 7);
        assert!(seeds.contains(&s1.seed));
    }

    #[test]
    fn sampler_can_return_whole_graph() {
        let g = four_node();
        let seeds: Vec<String> = g.nodes().iter().map(|n| n.id.clone()).collect();
        let params = SampleParams {
            max_degree: 3,
            max_edges: 10,
            ..Default::default()
        };
        let s = sample_subgraph(&g, &seeds, &params, 7).unwrap();
        assert_eq!(s.graph.num_edges(), 4);
        assert_eq!(s.graph.num_nodes(), 4);
    }

    #[test]
    fn sampler_reports_exhaustion() {
        let g = four_node();
        // a single-node target can never carry an edge
        let params = SampleParams {
            max_degree: 3,
            max_edges: 4,
            target_nodes: Some(1),
            trials: 50,
        };
        assert!(matches!(
            sample_subgraph(&g, &["3".to_string()], &params, 1),
            Err(Error::Infeasible(_))
        ));
    }
}
