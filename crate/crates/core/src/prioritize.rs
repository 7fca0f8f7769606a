//! Quantum interference index and node scores.
//!
//! `I_i(t) = |P_i^q(t) − P_i^cl(t)| / Σ_j P_j^q(t)²` compares the quantum walk
//! against the lazy classical walk from the same seed; a node's score is the
//! largest index it reaches over a range of steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiiSeries {
    /// `values[t][i]`.
    pub values: Vec<Vec<f64>>,
    /// `Σ_j P_j^q(t)²` per step.
    pub collision: Vec<f64>,
}

impl QiiSeries {
    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn nodes(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// `node,t0,t1,…` matrix for heatmaps; one row per node.
    pub fn heatmap_csv(&self, node_labels: &[String]) -> String {
        let mut s = String::from("node");
        for t in 0..self.steps() {
            s.push_str(&format!(",t{t}"));
        }
        s.push('\n');
        for (i, label) in node_labels.iter().enumerate() {
            s.push_str(label);
            for row in &self.values {
                s.push_str(&format!(",{:.6}", row[i]));
            }
            s.push('\n');
        }
        s
    }
}

/// Index series from per-step quantum and classical node distributions.
pub fn qii(pq: &[Vec<f64>], pcl: &[Vec<f64>]) -> Result<QiiSeries> {
    if pq.len() != pcl.len() {
        return Err(Error::InvalidParameter(format!(
            "quantum series has {} steps, classical {}",
            pq.len(),
            pcl.len()
        )));
    }
    let mut values = Vec::with_capacity(pq.len());
    let mut collision = Vec::with_capacity(pq.len());
    for (t, (q, c)) in pq.iter().zip(pcl).enumerate() {
        if q.len() != c.len() {
            return Err(Error::InvalidParameter(format!("node count differs at step {t}")));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > tolerance::METRIC_INPUT {
            return Err(Error::NotNormalized(sum));
        }
        let col: f64 = q.iter().map(|p| p * p).sum();
        if col <= 0.0 {
            return Err(Error::InvalidParameter(format!("zero collision probability at step {t}")));
        }
        values.push(q.iter().zip(c).map(|(a, b)| (a - b).abs() / col).collect());
        collision.push(col);
    }
    Ok(QiiSeries { values, collision })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub scores: Vec<f64>,
    /// Node indices by descending score; ties keep node order.
    pub ranking: Vec<usize>,
    pub t_min: usize,
    pub t_max: usize,
}

pub const DEFAULT_T_MIN: usize = 2;

/// Maximum index over steps `t_min..=t_max`.
pub fn score(q: &QiiSeries, t_min: usize, t_max: usize) -> Result<ScoreTable> {
    if t_min > t_max || t_max >= q.steps() {
        return Err(Error::EmptyRange(t_min, t_max));
    }
    let scores: Vec<f64> = (0..q.nodes())
        .map(|i| (t_min..=t_max).map(|t| q.values[t][i]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(ScoreTable {
        ranking: rank(&scores),
        scores,
        t_min,
        t_max,
    })
}

/// Descending order, stable on ties.
pub fn rank(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub rank: usize,
    pub node: String,
    pub label: String,
    pub score: f64,
    pub is_seed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rows: Vec<RankRow>,
}

impl RankReport {
    /// `rank,node,label,score` rows; the seed's label is suffixed with ` (seed)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rank,node,label,score\n");
        for r in &self.rows {
            let label = if r.is_seed { format!("{} (seed)", r.label) } else { r.label.clone() };
            s.push_str(&format!("{},{},{},{:.6}\n", r.rank, r.node, label, r.score));
        }
        s
    }

    pub fn top(&self, n: usize) -> Vec<&str> {
        self.rows.iter().take(n).map(|r| r.label.as_str()).collect()
    }
}

/// Ranked report. `labels` may be empty (ids are used); with `exclude_seed`
/// the seed is left out of the ranking.
pub fn rank_report(
    s: &ScoreTable,
    ids: &[String],
    labels: &[String],
    seed: Option<usize>,
    exclude_seed: bool,
) -> RankReport {
    let rows = s
        .ranking
        .iter()
        .filter(|&&i| !(exclude_seed && Some(i) == seed))
        .enumerate()
        .map(|(r, &i)| RankRow {
            rank: r + 1,
            node: ids[i].clone(),
            label: labels.get(i).cloned().unwrap_or_else(|| ids[i].clone()),
            score: s.scores[i],
            is_seed: Some(i) == seed,
        })
        .collect();
    RankReport { rows }
}
