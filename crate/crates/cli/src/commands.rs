use std::collections::BTreeMap;
use std::path::PathBuf;

use qwalk::encoding::{compile_walk, QubitAssignment};
use qwalk::graph::{load_edge_list, load_labels, sample_subgraph, write_edge_list, DirectedEdgeIndex, Graph, SampleParams};
use qwalk::metrics::{boxplot_csv, exponential_fit, metrics_csv, step_metrics, StepMetrics};
use qwalk::pipeline::{
    compile_and_route, noisy_distributions, noisy_walk, prioritize_from_distributions, simulate_walk_ideal, Backend,
    CompiledWalk, NoisyConfig, NoisyWalkReport,
};
use qwalk::prioritize::{qii, rank, rank_report, score, QiiSeries, RankReport, ScoreTable};
use qwalk::qasm::to_qasm;
use qwalk::sim::noise::ReadoutError;
use qwalk::sim::{NoiseModel, ShotTable};
use qwalk::transpile::{layout_search, CouplingMap};
use qwalk::walk::{parse_trajectory_csv, stationary_distribution, trajectory_csv, trajectory_json, walk_distributions, NodeDistribution};
use qwalk::{Error, Result};
use serde_json::json;

use crate::config::RunConfig;
use crate::output::Output;

fn load_graph(cfg: &RunConfig) -> Result<Graph> {
    let path = cfg
        .graph
        .as_ref()
        .ok_or_else(|| Error::Validation("no graph given (--graph or `graph` in the config)".into()))?;
    let mut g = load_edge_list(&std::fs::read_to_string(path)?)?;
    if let Some(l) = &cfg.labels {
        g.set_labels(&load_labels(&std::fs::read_to_string(l)?)?);
    }
    Ok(g)
}

/// Node index by id, falling back to label.
fn resolve_node(g: &Graph, name: &str) -> Result<usize> {
    g.index_of(name).or_else(|e| (0..g.num_nodes()).find(|&i| g.label(i) == name).ok_or(e))
}

fn seed_node(cfg: &RunConfig, g: &Graph) -> Result<usize> {
    let name = cfg
        .seed_node
        .as_deref()
        .ok_or_else(|| Error::Validation("no seed node given (--seed-node or `seed_node` in the config)".into()))?;
    resolve_node(g, name)
}

fn output(cfg: &RunConfig) -> Result<Output> {
    Output::new(&cfg.out, cfg.hash())
}

fn node_labels(g: &Graph) -> Vec<String> {
    (0..g.num_nodes()).map(|i| g.label(i).to_string()).collect()
}

fn finish(out: &Output) {
    for p in out.written() {
        println!("wrote {}", p.display());
    }
}

pub fn sample(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(cfg)?;
    let s = &cfg.sample;
    let candidates: Vec<String> = if s.candidates.is_empty() {
        g.nodes().iter().map(|n| n.id.clone()).collect()
    } else {
        s.candidates
            .iter()
            .map(|c| resolve_node(&g, c).map(|i| g.id(i).to_string()))
            .collect::<Result<_>>()?
    };
    let params = SampleParams {
        max_degree: s.max_degree,
        max_edges: s.max_edges,
        target_nodes: s.target_nodes,
        trials: s.trials,
    };
    let sub = sample_subgraph(&g, &candidates, &params, cfg.rng_seed)?;
    let sg = &sub.graph;
    let mut out = output(cfg)?;
    out.table("subgraph.tsv", &format!("# seed {}\n{}", sub.seed, write_edge_list(sg)))?;
    let labels: String = (0..sg.num_nodes())
        .filter(|&i| sg.label(i) != sg.id(i))
        .map(|i| format!("{}\t{}\n", sg.id(i), sg.label(i)))
        .collect();
    if !labels.is_empty() {
        out.table("subgraph.labels.tsv", &labels)?;
    }
    out.json(
        "subgraph.json",
        json!({
            "seed": sub.seed,
            "rng_seed": sub.rng_seed,
            "trial": sub.trial,
            "nodes": sg.num_nodes(),
            "edges": sg.num_edges(),
            "max_degree": sg.max_degree(),
            "qubits": 2 * sg.num_edges(),
        }),
    )?;
    println!(
        "sampled {} nodes, {} edges (max degree {}), seed {} after {} trial(s)",
        sg.num_nodes(),
        sg.num_edges(),
        sg.max_degree(),
        sub.seed,
        sub.trial + 1
    );
    finish(&out);
    Ok(())
}

fn compile_ctx(cfg: &RunConfig, g: &Graph, seed: usize) -> Result<(CompiledWalk, CouplingMap)> {
    let cm = cfg.coupling_map(2 * g.num_edges())?;
    let c = compile_and_route(g, seed, cfg.alpha, cfg.steps, &cm, &cfg.layout_params())?;
    Ok((c, cm))
}

/// Noise model with calibrated readout errors mapped onto the compacted qubits.
fn noise_for(cfg: &RunConfig, c: &CompiledWalk, cm: &CouplingMap) -> Result<NoiseModel> {
    let mut m = cfg.noise_model()?;
    if c.native_physical.iter().any(|&p| cm.readout_error(p).is_some()) {
        m.per_qubit_readout = c
            .native_physical
            .iter()
            .map(|&p| match cm.readout_error(p) {
                Some(e) => ReadoutError { p01: e, p10: e },
                None => ReadoutError {
                    p01: m.readout_p01,
                    p10: m.readout_p10,
                },
            })
            .collect();
    }
    Ok(m)
}

fn run_noisy(cfg: &RunConfig, g: &Graph, seed: usize, c: &CompiledWalk, cm: &CouplingMap) -> Result<NoisyWalkReport> {
    let nc = NoisyConfig {
        noise: noise_for(cfg, c, cm)?,
        trajectories: cfg.noise.trajectories,
        shot_base: cfg.shots.base,
        shot_growth: cfg.shots.growth,
        rng_seed: cfg.rng_seed,
    };
    noisy_walk(g, seed, cfg.alpha, c, &nc)
}

fn backend(cfg: &RunConfig) -> Result<Backend> {
    cfg.backend.parse()
}

fn as_distributions(pq: &[Vec<f64>]) -> Vec<NodeDistribution> {
    pq.iter()
        .enumerate()
        .map(|(step, p)| NodeDistribution {
            probabilities: p.clone(),
            step,
        })
        .collect()
}

fn write_metrics(out: &mut Output, g: &Graph, rows: &[StepMetrics]) -> Result<()> {
    let ids: Vec<&str> = g.nodes().iter().map(|n| n.id.as_str()).collect();
    let ts: Vec<f64> = rows.iter().map(|r| r.step as f64).collect();
    let rs: Vec<f64> = rows.iter().map(|r| r.retention).collect();
    out.table("metrics.csv", &metrics_csv(rows))?;
    out.table("boxplot.csv", &boxplot_csv(rows, &ids))?;
    out.json(
        "metrics.json",
        json!({ "nodes": ids, "steps": rows, "retention_fit": exponential_fit(&ts, &rs) }),
    )
}

fn write_shots(out: &mut Output, report: &NoisyWalkReport) -> Result<()> {
    for (t, st) in report.shot_tables.iter().enumerate() {
        out.json(&format!("shots/step_{}.json", t + 1), st.to_json())?;
    }
    Ok(())
}

/// Quantum node distributions for `t = 0..=T`; the noisy backend reports
/// postselected estimates and also writes its metrics.
fn walk_into(
    cfg: &RunConfig,
    g: &Graph,
    seed: usize,
    compiled: Option<&(CompiledWalk, CouplingMap)>,
    out: &mut Output,
) -> Result<Vec<Vec<f64>>> {
    let pq = match backend(cfg)? {
        Backend::Noisy => {
            let owned;
            let (c, cm) = match compiled {
                Some(x) => x,
                None => {
                    owned = compile_ctx(cfg, g, seed)?;
                    &owned
                }
            };
            let report = run_noisy(cfg, g, seed, c, cm)?;
            let mut raw = vec![vec![0.0; g.num_nodes()]];
            raw[0][seed] = 1.0;
            raw.extend(report.steps.iter().map(|m| m.raw.clone()));
            out.table("trajectory_raw.csv", &trajectory_csv(g, &as_distributions(&raw)))?;
            write_metrics(out, g, &report.steps)?;
            write_shots(out, &report)?;
            for m in &report.steps {
                println!(
                    "t={} F_H raw {:.4} postselected {:.4} retention {:.4}",
                    m.step, m.f_h_raw, m.f_h_ps, m.retention
                );
            }
            noisy_distributions(g, seed, &report)
        }
        b => simulate_walk_ideal(g, seed, cfg.alpha, cfg.steps, b)?
            .into_iter()
            .map(|d| d.probabilities)
            .collect(),
    };
    let d = as_distributions(&pq);
    out.table("trajectory.csv", &trajectory_csv(g, &d))?;
    let mut doc = trajectory_json(g, &d);
    doc["backend"] = json!(cfg.backend);
    doc["seed_node"] = json!(g.id(seed));
    out.json("trajectory.json", doc)?;
    Ok(pq)
}

pub fn walk(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(cfg)?;
    let seed = seed_node(cfg, &g)?;
    let mut out = output(cfg)?;
    walk_into(cfg, &g, seed, None, &mut out)?;
    finish(&out);
    Ok(())
}

fn compile_into(cfg: &RunConfig, g: &Graph, seed: usize, out: &mut Output) -> Result<(CompiledWalk, CouplingMap)> {
    let (c, cm) = compile_ctx(cfg, g, seed)?;
    let s = c.summary(&cm);
    println!(
        "{} logical qubits on {} ({} used), {} swaps",
        s.logical_qubits,
        s.coupling_map,
        s.physical_qubits_used,
        s.swaps
    );
    println!(
        "entangling layers: logical {}, routed {}, native {} ({} CX)",
        s.logical_entangling_layers, s.routed_entangling_layers, s.native_entangling_layers, s.native_cnots
    );
    out.json(
        "compile.json",
        json!({
            "summary": s,
            "layout_search": c.layout,
            "logical_hash": c.logical.hash(),
            "routed_hash": c.routed.program.hash(),
            "native_hash": c.native.hash(),
            "native_physical": c.native_physical,
        }),
    )?;
    out.qasm("logical.qasm", &to_qasm(&c.logical)?)?;
    out.qasm("routed.qasm", &to_qasm(&c.routed.program)?)?;
    Ok((c, cm))
}

pub fn compile(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(cfg)?;
    let seed = seed_node(cfg, &g)?;
    let mut out = output(cfg)?;
    compile_into(cfg, &g, seed, &mut out)?;
    finish(&out);
    Ok(())
}

pub fn layout(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(cfg)?;
    let seed = seed_node(cfg, &g)?;
    let idx = DirectedEdgeIndex::new(&g);
    let p = compile_walk(&g, &idx, &QubitAssignment::identity(&idx), seed, cfg.alpha, cfg.steps)?;
    let cm = cfg.coupling_map(p.qubit_count)?;
    let r = layout_search(&p, &cm, &cfg.layout_params())?;
    println!(
        "layout from trial {} of {} feasible: {} swaps, max pair distance {}",
        r.trial, r.feasible_trials, r.swaps, r.max_pair_distance_used
    );
    let mut out = output(cfg)?;
    out.json("layout.json", json!({ "coupling_map": cm.name(), "report": r }))?;
    finish(&out);
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(cfg)?;
    let seed = seed_node(cfg, &g)?;
    let (c, cm) = compile_ctx(cfg, &g, seed)?;
    let report = run_noisy(cfg, &g, seed, &c, &cm)?;
    let mut out = output(cfg)?;
    write_shots(&mut out, &report)?;
    finish(&out);
    Ok(())
}

pub fn metrics(cfg: &RunConfig, shots: &[PathBuf]) -> Result<()> {
    let g = load_graph(cfg)?;
    let seed = seed_node(cfg, &g)?;
    let idx = DirectedEdgeIndex::new(&g);
    let mut tables = BTreeMap::new();
    for p in shots {
        let st = ShotTable::from_json(&std::fs::read_to_string(p)?)?;
        let t = st.metadata.step.ok_or_else(|| {
            Error::Validation(format!("{}: shot table carries no step in its metadata", p.display()))
        })?;
        if st.width() != idx.len() {
            return Err(Error::Validation(format!(
                "{}: {} bits, graph has {} directed edges",
                p.display(),
                st.width(),
                idx.len()
            )));
        }
        if tables.insert(t, st).is_some() {
            return Err(Error::Validation(format!("two shot tables for step {t}")));
        }
    }
    let last = *tables.keys().next_back().expect("at least one table");
    let ideal = walk_distributions(&g, seed, cfg.alpha, last)?;
    let baseline = stationary_distribution(&g).probabilities;
    let rows: Vec<StepMetrics> = tables
        .iter()
        .map(|(&t, st)| step_metrics(t, st, &idx, &ideal[t].probabilities, &baseline))
        .collect::<Result<_>>()?;
    let mut out = output(cfg)?;
    write_metrics(&mut out, &g, &rows)?;
    finish(&out);
    Ok(())
}

/// `node<TAB>score` rows with an optional header; nodes by id or label,
/// unlisted nodes score zero.
fn read_scores(g: &Graph, text: &str) -> Result<Vec<f64>> {
    let mut scores = vec![0.0; g.num_nodes()];
    let mut first_data = true;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(['\t', ',']).map(str::trim).collect();
        let parse_err = |message: String| Error::Parse { line: n + 1, message };
        if cols.len() < 2 {
            return Err(parse_err(format!("expected `node<TAB>score`, got `{line}`")));
        }
        let first = std::mem::replace(&mut first_data, false);
        let Ok(s) = cols[1].parse::<f64>() else {
            if first {
                continue;
            }
            return Err(parse_err(format!("bad score `{}`", cols[1])));
        };
        scores[resolve_node(g, cols[0])?] = s;
    }
    Ok(scores)
}

struct Ranked {
    qii: Option<QiiSeries>,
    report: RankReport,
}

fn prioritize_into(
    cfg: &RunConfig,
    g: &Graph,
    seed: usize,
    pq: Option<Vec<Vec<f64>>>,
    out: &mut Output,
) -> Result<Ranked> {
    let p = &cfg.prioritize;
    let ids: Vec<String> = g.nodes().iter().map(|n| n.id.clone()).collect();
    let labels = node_labels(g);
    let ranked = if let Some(path) = &p.replay_scores {
        let scores = read_scores(g, &std::fs::read_to_string(path)?)?;
        let table = ScoreTable {
            ranking: rank(&scores),
            scores,
            t_min: p.t_min,
            t_max: p.t_max.unwrap_or(cfg.steps),
        };
        Ranked {
            qii: None,
            report: rank_report(&table, &ids, &labels, Some(seed), p.exclude_seed),
        }
    } else {
        let read = |path: &PathBuf| -> Result<Vec<Vec<f64>>> {
            Ok(parse_trajectory_csv(g, &std::fs::read_to_string(path)?)?
                .into_iter()
                .map(|d| d.probabilities)
                .collect())
        };
        let pq = match (&p.replay, pq) {
            (Some(path), _) => read(path)?,
            (None, Some(pq)) => pq,
            (None, None) => walk_into(cfg, g, seed, None, out)?,
        };
        if let Some(path) = &p.replay_classical {
            let pcl = read(path)?;
            let q = qii(&pq, &pcl)?;
            let table = score(&q, p.t_min, p.t_max.unwrap_or(pq.len() - 1))?;
            Ranked {
                report: rank_report(&table, &ids, &labels, Some(seed), p.exclude_seed),
                qii: Some(q),
            }
        } else {
            let r = prioritize_from_distributions(g, seed, cfg.alpha, &pq, p.t_min, p.t_max, p.exclude_seed)?;
            Ranked {
                qii: Some(r.qii),
                report: r.report,
            }
        }
    };
    if let Some(q) = &ranked.qii {
        out.table("qii.csv", &q.heatmap_csv(&labels))?;
    }
    out.table("scores.csv", &ranked.report.to_csv())?;
    out.json("ranking.json", json!({ "seed_node": g.id(seed), "rows": ranked.report.rows }))?;
    for r in ranked.report.rows.iter().take(5) {
        println!("{:>3}  {:<12} {:.4}{}", r.rank, r.label, r.score, if r.is_seed { "  (seed)" } else { "" });
    }
    Ok(ranked)
}

pub fn prioritize(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(cfg)?;
    let seed = seed_node(cfg, &g)?;
    let mut out = output(cfg)?;
    prioritize_into(cfg, &g, seed, None, &mut out)?;
    finish(&out);
    Ok(())
}

pub fn report(cfg: &RunConfig) -> Result<()> {
    let g = load_graph(cfg)?;
    let seed = seed_node(cfg, &g)?;
    let mut out = output(cfg)?;
    let compiled = compile_into(cfg, &g, seed, &mut out)?;
    let summary = compiled.0.summary(&compiled.1);
    let replaying = cfg.prioritize.replay.is_some() || cfg.prioritize.replay_scores.is_some();
    let pq = if replaying {
        None
    } else {
        Some(walk_into(cfg, &g, seed, Some(&compiled), &mut out)?)
    };
    let ranked = prioritize_into(cfg, &g, seed, pq, &mut out)?;

    let mut md = String::new();
    md.push_str(&format!(
        "# qwalk report\n\nconfig `{}`, qwalk-core {}\n\n",
        cfg.hash(),
        qwalk::VERSION
    ));
    md.push_str(&format!(
        "- graph: {} nodes, {} edges; seed `{}` ({})\n- alpha {}, T = {}, backend `{}`\n",
        g.num_nodes(),
        g.num_edges(),
        g.id(seed),
        g.label(seed),
        cfg.alpha,
        cfg.steps,
        cfg.backend
    ));
    md.push_str(&format!(
        "- circuit: {} qubits on `{}`, {} swaps, entangling layers logical {} / routed {} / native {}, {} CX\n\n",
        summary.logical_qubits,
        summary.coupling_map,
        summary.swaps,
        summary.logical_entangling_layers,
        summary.routed_entangling_layers,
        summary.native_entangling_layers,
        summary.native_cnots
    ));
    md.push_str("| rank | node | label | score |\n|---:|---|---|---:|\n");
    for r in &ranked.report.rows {
        let seed_mark = if r.is_seed { " (seed)" } else { "" };
        md.push_str(&format!("| {} | {} | {}{} | {:.4} |\n", r.rank, r.node, r.label, seed_mark, r.score));
    }
    md.push_str("\nData files: `compile.json`, `trajectory.csv`, `qii.csv`, `scores.csv`");
    if backend(cfg)? == Backend::Noisy && !replaying {
        md.push_str(", `metrics.csv`, `boxplot.csv`, `shots/`");
    }
    md.push_str(".\n");
    out.markdown("report.md", &md)?;
    finish(&out);
    Ok(())
}
