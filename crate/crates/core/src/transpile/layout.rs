use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coupling::CouplingMap;
use super::route::{route, Layout};
use crate::circuit::{Gate, GateProgram};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub trials: usize,
    /// Largest allowed hop distance between the two operands of any
    /// partial-swap gate, before routing.
    pub max_pair_distance: usize,
    /// Physical qubits with a larger calibrated readout error are never used.
    /// Ignored when the coupling map carries no calibration.
    pub readout_threshold: Option<f64>,
    pub rng_seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            trials: 100,
            max_pair_distance: 8,
            readout_threshold: None,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutReport {
    pub layout: Layout,
    /// SWAPs inserted when routing the program with this layout.
    pub swaps: usize,
    /// Sum of calibrated readout errors of the assigned qubits (0 without calibration).
    pub readout_sum: f64,
    /// Trial that produced the layout.
    pub trial: usize,
    pub feasible_trials: usize,
    pub rejected_pair_distance: usize,
    pub max_pair_distance_used: usize,
}

/// Weighted logical interaction graph: one unit per qubit pair per gate.
fn interactions(p: &GateProgram) -> Vec<Vec<(usize, usize)>> {
    let n = p.qubit_count;
    let mut w = vec![vec![0usize; n]; n];
    for g in &p.gates {
        let qs = g.qubits();
        for i in 0..qs.len() {
            for j in i + 1..qs.len() {
                w[qs[i]][qs[j]] += 1;
                w[qs[j]][qs[i]] += 1;
            }
        }
    }
    w.into_iter()
        .map(|row| row.into_iter().enumerate().filter(|&(_, c)| c > 0).collect())
        .collect()
}

fn partial_swap_pairs(p: &GateProgram) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = p
        .gates
        .iter()
        .filter_map(|g| match g {
            Gate::PartialSwap { a, b, .. } => Some((*a.min(b), *a.max(b))),
            _ => None,
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// One randomized greedy placement: logical qubits in shuffled BFS order over
/// the interaction graph, each put on the free allowed physical qubit that
/// minimises the weighted distance to its already placed partners.
fn place(
    inter: &[Vec<(usize, usize)>],
    cm: &CouplingMap,
    allowed: &[bool],
    rng: &mut ChaCha8Rng,
) -> Option<Layout> {
    let n = inter.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut starts: Vec<usize> = (0..n).collect();
    starts.shuffle(rng);
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut next: Vec<usize> = inter[u].iter().map(|&(v, _)| v).filter(|&v| !seen[v]).collect();
            next.shuffle(rng);
            for v in next {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }

    let phys_n = cm.qubit_count();
    let mut phys: Vec<Option<usize>> = vec![None; n];
    let mut free: Vec<bool> = allowed.to_vec();
    for l in order {
        let placed: Vec<(usize, usize)> = inter[l]
            .iter()
            .filter_map(|&(v, w)| phys[v].map(|p| (p, w)))
            .collect();
        let mut candidates: Vec<usize> = (0..phys_n).filter(|&p| free[p]).collect();
        if candidates.is_empty() {
            return None;
        }
        candidates.shuffle(rng);
        let cost = |c: usize| -> usize {
            if placed.is_empty() {
                // new component: stay close to what is already placed
                phys.iter()
                    .flatten()
                    .map(|&p| cm.distance(c, p))
                    .min()
                    .unwrap_or(0)
            } else {
                placed.iter().map(|&(p, w)| w * cm.distance(c, p)).sum()
            }
        };
        let best = if placed.is_empty() && phys.iter().all(Option::is_none) {
            candidates[rng.random_range(0..candidates.len())]
        } else {
            *candidates.iter().min_by_key(|&&c| cost(c)).expect("nonempty")
        };
        free[best] = false;
        phys[l] = Some(best);
    }
    Some(Layout::new(phys.into_iter().map(|p| p.expect("placed")).collect()))
}

/// Randomized layout search under the pair-distance and readout filters.
///
/// Each trial draws from ChaCha8 stream `trial` of `rng_seed`; the best trial
/// by (routed SWAP count, readout-error sum), then trial index, is returned.
pub fn layout_search(p: &GateProgram, cm: &CouplingMap, params: &LayoutParams) -> Result<LayoutReport> {
    let n = p.qubit_count;
    if n > cm.qubit_count() {
        return Err(Error::Infeasible(format!(
            "{n} logical qubits do not fit on {} physical qubits",
            cm.qubit_count()
        )));
    }
    if params.trials == 0 {
        return Err(Error::InvalidParameter("layout trial count must be at least 1".into()));
    }
    let allowed: Vec<bool> = (0..cm.qubit_count())
        .map(|q| match (params.readout_threshold, cm.readout_error(q)) {
            (Some(t), Some(e)) => e <= t,
            _ => true,
        })
        .collect();
    let usable = allowed.iter().filter(|&&a| a).count();
    if usable < n {
        return Err(Error::Infeasible(format!(
            "readout_threshold {:?} leaves {usable} usable physical qubits for {n} logical qubits",
            params.readout_threshold
        )));
    }
    let inter = interactions(p);
    let pairs = partial_swap_pairs(p);

    let results: Vec<Result<Option<LayoutReport>>> = (0..params.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
            rng.set_stream(trial as u64);
            let Some(layout) = place(&inter, cm, &allowed, &mut rng) else {
                return Ok(None);
            };
            let worst = pairs
                .iter()
                .map(|&(a, b)| cm.distance(layout.physical[a], layout.physical[b]))
                .max()
                .unwrap_or(0);
            if worst > params.max_pair_distance {
                return Ok(Some(LayoutReport {
                    layout,
                    swaps: usize::MAX,
                    readout_sum: f64::INFINITY,
                    trial,
                    feasible_trials: 0,
                    rejected_pair_distance: 1,
                    max_pair_distance_used: worst,
                }));
            }
            let routed = route(p, &layout, cm)?;
            let readout_sum = layout
                .physical
                .iter()
                .filter_map(|&q| cm.readout_error(q))
                .sum();
            Ok(Some(LayoutReport {
                layout,
                swaps: routed.swaps,
                readout_sum,
                trial,
                feasible_trials: 1,
                rejected_pair_distance: 0,
                max_pair_distance_used: worst,
            }))
        })
        .collect();

    let mut best: Option<LayoutReport> = None;
    let (mut feasible, mut rejected) = (0, 0);
    for r in results {
        let Some(r) = r? else { continue };
        feasible += r.feasible_trials;
        rejected += r.rejected_pair_distance;
        if r.feasible_trials == 0 {
            continue;
        }
        let better = best.as_ref().is_none_or(|b| {
            (r.swaps, r.readout_sum)
                .partial_cmp(&(b.swaps, b.readout_sum))
                .is_some_and(|o| o.is_lt())
        });
        if better {
            best = Some(r);
        }
    }
    match best {
        Some(mut b) => {
            b.feasible_trials = feasible;
            b.rejected_pair_distance = rejected;
            Ok(b)
        }
        None => Err(Error::Infeasible(format!(
            "no layout within {} trials satisfies max_pair_distance = {} ({rejected} trials rejected by the partial-swap pair distance)",
            params.trials, params.max_pair_distance
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::SegmentKind;
    use crate::transpile::coupling::CalibrationData;

    fn ring_program(n: usize) -> GateProgram {
        let gates = (0..n)
            .map(|q| Gate::PartialSwap {
                a: q,
                b: (q + 1) % n,
                alpha: 0.5,
            })
            .collect();
        GateProgram::from_gates(n, SegmentKind::Shift, gates)
    }

    #[test]
    fn embeddable_program_gets_zero_swaps() {
        // a path of 5 interactions embeds in a heavy-hex row
        let gates = (0..5).map(|q| Gate::cnot(q, q + 1)).collect();
        let p = GateProgram::from_gates(6, SegmentKind::Prep, gates);
        let cm = CouplingMap::heavy_hex(2).unwrap();
        let r = layout_search(&p, &cm, &LayoutParams::default()).unwrap();
        assert_eq!(r.swaps, 0);
    }

    #[test]
    fn zero_pair_distance_is_infeasible() {
        let cm = CouplingMap::heavy_hex(2).unwrap();
        let err = layout_search(
            &ring_program(4),
            &cm,
            &LayoutParams {
                max_pair_distance: 0,
                trials: 10,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Infeasible(ref m) if m.contains("max_pair_distance")));
    }

    #[test]
    fn search_is_deterministic() {
        let cm = CouplingMap::heavy_hex(3).unwrap();
        let params = LayoutParams {
            trials: 20,
            rng_seed: 5,
            ..Default::default()
        };
        let a = layout_search(&ring_program(12), &cm, &params).unwrap();
        let b = layout_search(&ring_program(12), &cm, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn readout_filter_is_hard() {
        let mut cal = CalibrationData::default();
        for q in 0..9 {
            cal.readout.insert(q, if q % 2 == 0 { 0.5 } else { 0.01 });
        }
        let cm = CouplingMap::heavy_hex(1).unwrap().with_calibration(cal);
        let params = LayoutParams {
            readout_threshold: Some(0.1),
            trials: 10,
            ..Default::default()
        };
        let r = layout_search(&ring_program(3), &cm, &params).unwrap();
        assert!(r.layout.physical.iter().all(|&q| q % 2 == 1));
        let too_many = layout_search(&ring_program(6), &cm, &params).unwrap_err();
        assert!(matches!(too_many, Error::Infeasible(ref m) if m.contains("readout_threshold")));
    }
}
