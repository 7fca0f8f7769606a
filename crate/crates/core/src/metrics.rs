//! Edge and node estimates from shot tables, with and without
//! Hamming-weight-1 postselection, and fidelity measures between node
//! distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedEdgeIndex;
use crate::sim::shots::ShotTable;
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    Raw,
    Postselected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub mode: EstimateMode,
    /// Indexed by directed edge (= qubit under the identity assignment).
    pub edge_probabilities: Vec<f64>,
    pub node_probabilities: Vec<f64>,
    /// Weight-1 shots over all shots.
    pub retention: f64,
    pub total_shots: u64,
    pub qualified_shots: u64,
}

fn node_marginals(edges: &[f64], idx: &DirectedEdgeIndex) -> Vec<f64> {
    idx.blocks().iter().map(|b| edges[b.clone()].iter().sum()).collect()
}

fn check_width(st: &ShotTable, idx: &DirectedEdgeIndex) -> Result<()> {
    if st.width() != idx.len() {
        return Err(Error::InvalidParameter(format!(
            "bitstrings have {} bits but the graph has {} directed edges",
            st.width(),
            idx.len()
        )));
    }
    Ok(())
}

fn retention(st: &ShotTable) -> (u64, u64) {
    let total = st.total();
    let kept = st.iter().filter(|(b, _)| b.count_ones() == 1).map(|(_, n)| n).sum();
    (kept, total)
}

/// Set-bit frequency of every qubit over the total number of set bits.
pub fn raw_probabilities(st: &ShotTable, idx: &DirectedEdgeIndex) -> Result<ProbabilityEstimate> {
    check_width(st, idx)?;
    let mut ones = vec![0u64; idx.len()];
    for (b, n) in st.iter() {
        for (q, c) in ones.iter_mut().enumerate() {
            if b >> q & 1 == 1 {
                *c += n;
            }
        }
    }
    let total_bits: u64 = ones.iter().sum();
    if total_bits == 0 {
        return Err(Error::UndefinedEstimate);
    }
    let edge_probabilities: Vec<f64> = ones.iter().map(|&c| c as f64 / total_bits as f64).collect();
    let (kept, total) = retention(st);
    Ok(ProbabilityEstimate {
        mode: EstimateMode::Raw,
        node_probabilities: node_marginals(&edge_probabilities, idx),
        edge_probabilities,
        retention: kept as f64 / total as f64,
        total_shots: total,
        qualified_shots: kept,
    })
}

/// Frequencies among weight-1 bitstrings only.
pub fn postselected_probabilities(st: &ShotTable, idx: &DirectedEdgeIndex) -> Result<ProbabilityEstimate> {
    check_width(st, idx)?;
    let mut counts = vec![0u64; idx.len()];
    for (b, n) in st.iter() {
        if b.count_ones() == 1 {
            counts[b.trailing_zeros() as usize] += n;
        }
    }
    let (kept, total) = retention(st);
    if kept == 0 {
        return Err(Error::EmptyPostselection);
    }
    let edge_probabilities: Vec<f64> = counts.iter().map(|&c| c as f64 / kept as f64).collect();
    Ok(ProbabilityEstimate {
        mode: EstimateMode::Postselected,
        node_probabilities: node_marginals(&edge_probabilities, idx),
        edge_probabilities,
        retention: kept as f64 / total as f64,
        total_shots: total,
        qualified_shots: kept,
    })
}

fn check_distribution(p: &[f64]) -> Result<()> {
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tolerance::METRIC_INPUT || p.iter().any(|&x| x < -tolerance::METRIC_INPUT) {
        return Err(Error::NotNormalized(s));
    }
    Ok(())
}

fn same_support(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::InvalidParameter(format!(
            "distributions have different lengths ({} and {})",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// `(Σ √(p_i q_i))²`.
pub fn hellinger_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    same_support(p, q)?;
    check_distribution(p)?;
    check_distribution(q)?;
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt()).sum();
    Ok((bc * bc).min(1.0))
}

/// `(F(P, Q) − F(R, Q)) / (1 − F(R, Q))`: 1 for a perfect match, 0 for no
/// better than the baseline `R`.
pub fn baseline_corrected_fidelity(p: &[f64], q: &[f64], r: &[f64]) -> Result<f64> {
    let base = hellinger_fidelity(r, q)?;
    if (1.0 - base).abs() < 1e-15 {
        return Err(Error::DegenerateBaseline);
    }
    Ok((hellinger_fidelity(p, q)? - base) / (1.0 - base))
}

/// Five-number summary; quartiles by linear interpolation between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn quantile(sorted: &[f64], f: f64) -> f64 {
    let pos = f * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsErrorStats {
    pub errors: Vec<f64>,
    pub summary: Quartiles,
}

pub fn absolute_error_stats(p_exp: &[f64], p_ideal: &[f64]) -> Result<AbsErrorStats> {
    same_support(p_exp, p_ideal)?;
    let errors: Vec<f64> = p_exp.iter().zip(p_ideal).map(|(a, b)| (a - b).abs()).collect();
    let summary = Quartiles::of(&errors)
        .ok_or_else(|| Error::InvalidParameter("empty distributions".into()))?;
    Ok(AbsErrorStats { errors, summary })
}

/// Per-step comparison of raw and postselected estimates against the ideal
/// distribution, with the stationary distribution as baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: usize,
    pub shots: u64,
    pub f_h_raw: f64,
    pub f_h_ps: f64,
    pub f_hbc_raw: f64,
    pub f_hbc_ps: f64,
    pub retention: f64,
    /// Binomial standard error of the retention ratio.
    pub retention_se: f64,
    pub abs_error_raw: AbsErrorStats,
    pub abs_error_ps: AbsErrorStats,
    pub ideal: Vec<f64>,
    pub raw: Vec<f64>,
    pub postselected: Vec<f64>,
}

pub fn step_metrics(
    step: usize,
    st: &ShotTable,
    idx: &DirectedEdgeIndex,
    ideal: &[f64],
    baseline: &[f64],
) -> Result<StepMetrics> {
    let raw = raw_probabilities(st, idx)?;
    let ps = postselected_probabilities(st, idx)?;
    let n = st.total() as f64;
    let r = ps.retention;
    Ok(StepMetrics {
        step,
        shots: st.total(),
        f_h_raw: hellinger_fidelity(&raw.node_probabilities, ideal)?,
        f_h_ps: hellinger_fidelity(&ps.node_probabilities, ideal)?,
        f_hbc_raw: baseline_corrected_fidelity(&raw.node_probabilities, ideal, baseline)?,
        f_hbc_ps: baseline_corrected_fidelity(&ps.node_probabilities, ideal, baseline)?,
        retention: r,
        retention_se: (r * (1.0 - r) / n).sqrt(),
        abs_error_raw: absolute_error_stats(&raw.node_probabilities, ideal)?,
        abs_error_ps: absolute_error_stats(&ps.node_probabilities, ideal)?,
        ideal: ideal.to_vec(),
        raw: raw.node_probabilities,
        postselected: ps.node_probabilities,
    })
}

/// `step,F_H_raw,F_H_ps,F_HBC_raw,F_HBC_ps,retention` rows.
pub fn metrics_csv(rows: &[StepMetrics]) -> String {
    let mut s = String::from("step,F_H_raw,F_H_ps,F_HBC_raw,F_HBC_ps,retention\n");
    for m in rows {
        s.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            m.step, m.f_h_raw, m.f_h_ps, m.f_hbc_raw, m.f_hbc_ps, m.retention
        ));
    }
    s
}

/// Long format for per-node absolute-error boxplots: `step,mode,node,abs_error`.
pub fn boxplot_csv(rows: &[StepMetrics], node_ids: &[&str]) -> String {
    let mut s = String::from("step,mode,node,abs_error\n");
    for m in rows {
        for (mode, stats) in [("raw", &m.abs_error_raw), ("postselected", &m.abs_error_ps)] {
            for (i, e) in stats.errors.iter().enumerate() {
                s.push_str(&format!("{},{mode},{},{e:.6}\n", m.step, node_ids[i]));
            }
        }
    }
    s
}

/// Exponential fit `r(t) = a·exp(−λ t)` by least squares on `ln r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub amplitude: f64,
    pub rate: f64,
    /// Coefficient of determination of the log-linear fit.
    pub r_squared: f64,
}

pub fn exponential_fit(t: &[f64], r: &[f64]) -> Option<ExpFit> {
    if t.len() < 2 || t.len() != r.len() || r.iter().any(|&x| x <= 0.0) {
        return None;
    }
    let y: Vec<f64> = r.iter().map(|x| x.ln()).collect();
    let n = t.len() as f64;
    let (mt, my) = (t.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = t.iter().map(|x| (x - mt).powi(2)).sum();
    let sxy: f64 = t.iter().zip(&y).map(|(x, v)| (x - mt) * (v - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(ExpFit {
        amplitude: (my - slope * mt).exp(),
        rate: -slope,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn one_edge() -> DirectedEdgeIndex {
        DirectedEdgeIndex::new(&Graph::from_edges(&[("a", "b")]).unwrap())
    }

    fn worked_example() -> ShotTable {
        ShotTable::from_strings(&[("01", 5), ("10", 3), ("11", 2), ("00", 1)]).unwrap()
    }

    #[test]
    fn raw_counts_set_bits() {
        let e = raw_probabilities(&worked_example(), &one_edge()).unwrap();
        assert_eq!(e.edge_probabilities, vec![7.0 / 12.0, 5.0 / 12.0]);
        let single = ShotTable::from_strings(&[("10", 1)]).unwrap();
        assert_eq!(raw_probabilities(&single, &one_edge()).unwrap().edge_probabilities, vec![0.0, 1.0]);
        let zeros = ShotTable::from_strings(&[("00", 4)]).unwrap();
        assert!(matches!(raw_probabilities(&zeros, &one_edge()), Err(Error::UndefinedEstimate)));
    }

    #[test]
    fn postselection_keeps_weight_one() {
        let e = postselected_probabilities(&worked_example(), &one_edge()).unwrap();
        assert_eq!(e.edge_probabilities, vec![5.0 / 8.0, 3.0 / 8.0]);
        assert_eq!(e.retention, 8.0 / 11.0);
        let bad = ShotTable::from_strings(&[("11", 10)]).unwrap();
        assert!(matches!(postselected_probabilities(&bad, &one_edge()), Err(Error::EmptyPostselection)));
    }

    #[test]
    fn clean_data_raw_equals_postselected() {
        let t = ShotTable::from_strings(&[("01", 4), ("10", 9)]).unwrap();
        let idx = one_edge();
        assert_eq!(
            raw_probabilities(&t, &idx).unwrap().edge_probabilities,
            postselected_probabilities(&t, &idx).unwrap().edge_probabilities
        );
    }

    #[test]
    fn fidelity_cases() {
        assert!((hellinger_fidelity(&[0.2, 0.8], &[0.2, 0.8]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(hellinger_fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((hellinger_fidelity(&[0.5, 0.5], &[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(hellinger_fidelity(&[0.5, 0.6], &[1.0, 0.0]), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn baseline_correction_cases() {
        let q = [0.7, 0.2, 0.1];
        let r = [1.0 / 3.0; 3];
        assert!((baseline_corrected_fidelity(&q, &q, &r).unwrap() - 1.0).abs() < 1e-12);
        assert!(baseline_corrected_fidelity(&r, &q, &r).unwrap().abs() < 1e-12);
        assert!(baseline_corrected_fidelity(&[0.0, 0.0, 1.0], &q, &r).unwrap() < 0.0);
        assert!(matches!(baseline_corrected_fidelity(&q, &q, &q), Err(Error::DegenerateBaseline)));
    }

    #[test]
    fn abs_errors() {
        let s = absolute_error_stats(&[0.6, 0.4], &[0.5, 0.5]).unwrap();
        assert!(s.errors.iter().all(|e| (e - 0.1).abs() < 1e-12));
        let z = absolute_error_stats(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_eq!(z.summary.max, 0.0);
    }

    #[test]
    fn quartiles_interpolate() {
        let q = Quartiles::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((q.min, q.q1, q.median, q.q3, q.max), (1.0, 1.75, 2.5, 3.25, 4.0));
    }

    #[test]
    fn exponential_fit_recovers_rate() {
        let t: Vec<f64> = (1..=7).map(f64::from).collect();
        let r: Vec<f64> = t.iter().map(|x| 0.9 * (-0.12 * x).exp()).collect();
        let f = exponential_fit(&t, &r).unwrap();
        assert!((f.rate - 0.12).abs() < 1e-12 && (f.amplitude - 0.9).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }
}
