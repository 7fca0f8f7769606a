use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = qwalk(args);
    assert!(
        o.status.success(),
        "qwalk {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// `trajectory.json` step arrays.
fn steps(p: &Path) -> Vec<Vec<f64>> {
    read_json(p)["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            s["probabilities"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_f64().unwrap())
                .collect()
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn oracle_walk_emits_normalized_distributions() {
    let dir = tempfile::tempdir().unwrap();
    let g = data("bio11.tsv");
    ok(&["walk", "--graph", s(&g), "--seed-node", "7", "--steps", "7", "--out", s(dir.path())]);
    let d = steps(&dir.path().join("trajectory.json"));
    assert_eq!(d.len(), 8);
    for p in &d {
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 8 * 11);
}

#[test]
fn zero_steps_is_a_point_mass() {
    let dir = tempfile::tempdir().unwrap();
    let g = data("bio11.tsv");
    let l = data("bio11.labels.tsv");
    ok(&[
        "walk", "--graph", s(&g), "--labels", s(&l), "--seed-node", "HLA-DQA1", "--steps", "0", "--out",
        s(dir.path()),
    ]);
    let d = steps(&dir.path().join("trajectory.json"));
    let nodes = read_json(&dir.path().join("trajectory.json"))["nodes"].clone();
    let seed = nodes.as_array().unwrap().iter().position(|n| n == "7").unwrap();
    assert_eq!(d.len(), 1);
    for (i, p) in d[0].iter().enumerate() {
        assert_eq!(*p, if i == seed { 1.0 } else { 0.0 });
    }
}

#[test]
fn circuit_backends_match_the_oracle() {
    let g = data("bio11.tsv");
    let run = |backend: &str| {
        let dir = tempfile::tempdir().unwrap();
        ok(&[
            "walk", "--graph", s(&g), "--seed-node", "7", "--steps", "3", "--backend", backend, "--out",
            s(dir.path()),
        ]);
        steps(&dir.path().join("trajectory.json"))
    };
    let oracle = run("oracle");
    for b in ["dense", "bounded"] {
        for (a, c) in oracle.iter().zip(run(b)) {
            for (x, y) in a.iter().zip(c) {
                assert!((x - y).abs() < 1e-9, "{b}");
            }
        }
    }
}

#[test]
fn compile_reports_qubits_and_is_repeatable() {
    for (file, seed, qubits) in [("bio11.tsv", "7", 24), ("bio17.tsv", "1", 40)] {
        let g = data(file);
        let summaries: Vec<Value> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                ok(&[
                    "compile", "--graph", s(&g), "--seed-node", seed, "--steps", "2", "--seed", "5", "--out",
                    s(dir.path()),
                ]);
                let qasm = std::fs::read_to_string(dir.path().join("routed.qasm")).unwrap();
                assert!(qasm.starts_with("OPENQASM 3.0;\n// qwalk-cli"));
                assert!(qasm.contains("c = measure q;"));
                read_json(&dir.path().join("compile.json"))["summary"].clone()
            })
            .collect();
        assert_eq!(summaries[0]["logical_qubits"], qubits);
        assert_eq!(summaries[0], summaries[1]);
        assert_eq!(summaries[0]["routed_step_increments"].as_array().unwrap().len(), 2);
    }
}

#[test]
fn sampling_is_byte_identical_for_fixed_seeds() {
    let g = data("bio17.tsv");
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        ok(&["sample", "--graph", s(&g), "--max-degree", "3", "--max-edges", "8", "--seed", "11", "--out", s(dir.path())]);
        let tsv = std::fs::read(dir.path().join("subgraph.tsv")).unwrap();
        let json = std::fs::read(dir.path().join("subgraph.json")).unwrap();
        (tsv, json)
    };
    let a = run();
    assert_eq!(a, run());
    let text = String::from_utf8(a.0).unwrap();
    let edges = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("source")).count();
    assert!((1..=8).contains(&edges));
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let g = data("bio15.tsv");
    let out = s(dir.path());
    let code = |args: &[&str]| qwalk(args).status.code().unwrap();
    // dense cap
    assert_eq!(code(&["walk", "--graph", s(&g), "--seed-node", "1", "--backend", "dense", "--out", out]), 4);
    // layout does not fit
    assert_eq!(code(&["layout", "--graph", s(&g), "--seed-node", "1", "--coupling", "line:4", "--out", out]), 3);
    // validation
    assert_eq!(code(&["walk", "--graph", "/nonexistent.tsv", "--seed-node", "1", "--out", out]), 2);
    assert_eq!(code(&["walk", "--graph", s(&g), "--seed-node", "nope", "--out", out]), 2);
    assert_eq!(code(&["walk", "--graph", s(&g), "--seed-node", "1", "--alpha", "1.5", "--out", out]), 2);
    assert_eq!(code(&["walk", "--graph", s(&g), "--seed-node", "1", "--backend", "gpu", "--out", out]), 2);
}

#[test]
fn flags_override_config_and_outputs_carry_its_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "graph = \"{}\"\nseed_node = \"7\"\nsteps = 4\nout = \"{}\"\n",
            data("bio11.tsv").display(),
            dir.path().join("a").display()
        ),
    )
    .unwrap();
    ok(&["walk", "--config", s(&cfg)]);
    assert_eq!(steps(&dir.path().join("a/trajectory.json")).len(), 5);
    ok(&["walk", "--config", s(&cfg), "--steps", "2", "--out", s(&dir.path().join("b"))]);
    assert_eq!(steps(&dir.path().join("b/trajectory.json")).len(), 3);

    let prov = |sub: &str| read_json(&dir.path().join(sub).join("trajectory.json"))["provenance"].clone();
    let (pa, pb) = (prov("a"), prov("b"));
    assert_ne!(pa["config_hash"], pb["config_hash"]);
    assert_eq!(pa["qwalk_core"], env!("CARGO_PKG_VERSION"));
    let csv = std::fs::read_to_string(dir.path().join("a/trajectory.csv")).unwrap();
    assert!(csv.starts_with(&format!("# qwalk-cli {} qwalk-core", env!("CARGO_PKG_VERSION"))));
    assert!(csv.lines().next().unwrap().ends_with(pa["config_hash"].as_str().unwrap()));

    let json_cfg = dir.path().join("run.json");
    std::fs::write(
        &json_cfg,
        serde_json::json!({ "graph": data("bio11.tsv"), "seed_node": "7", "steps": 4 }).to_string(),
    )
    .unwrap();
    ok(&["walk", "--config", s(&json_cfg), "--out", s(&dir.path().join("c"))]);
    assert_eq!(steps(&dir.path().join("c/trajectory.json")), steps(&dir.path().join("a/trajectory.json")));
}

#[test]
fn identical_replay_scores_zero() {
    let dir = tempfile::tempdir().unwrap();
    let g = data("bio11.tsv");
    ok(&["walk", "--graph", s(&g), "--seed-node", "7", "--steps", "9", "--out", s(dir.path())]);
    let traj = dir.path().join("trajectory.csv");
    ok(&[
        "prioritize", "--graph", s(&g), "--seed-node", "7", "--replay", s(&traj), "--replay-classical", s(&traj),
        "--out", s(&dir.path().join("r")),
    ]);
    let ranking = read_json(&dir.path().join("r/ranking.json"));
    let rows = ranking["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r["score"] == 0.0));
}

#[test]
fn score_replay_keeps_the_given_order() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.tsv");
    std::fs::write(&scores, "gene\tscore\nHLA-C\t0.85\nPON2\t0.78\nHLA-G\t0.62\nFLVCR1\t0.38\nHLA-DQA1\t0.99\n").unwrap();
    ok(&[
        "prioritize", "--graph", s(&data("bio11.tsv")), "--labels", s(&data("bio11.labels.tsv")), "--seed-node", "7",
        "--replay-scores", s(&scores), "--exclude-seed", "--out", s(dir.path()),
    ]);
    let ranking = read_json(&dir.path().join("ranking.json"));
    let top: Vec<&str> = ranking["rows"].as_array().unwrap()[..4]
        .iter()
        .map(|r| r["label"].as_str().unwrap())
        .collect();
    assert_eq!(top, ["HLA-C", "PON2", "HLA-G", "FLVCR1"]);
}

#[test]
fn oracle_prioritization_scores_every_node() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "prioritize", "--graph", s(&data("bio11.tsv")), "--seed-node", "7", "--steps", "9", "--out", s(dir.path()),
    ]);
    let ranking = read_json(&dir.path().join("ranking.json"));
    let rows = ranking["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows.iter().filter(|r| r["is_seed"] == true).count(), 1);
    let heat = std::fs::read_to_string(dir.path().join("qii.csv")).unwrap();
    assert!(heat.lines().nth(1).unwrap().starts_with("node,t0,"));
}

#[test]
fn noisy_walk_and_metrics_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = data("four.tsv");
    let base = [
        "--graph", s(&g), "--seed-node", "1", "--steps", "3", "--trajectories", "16", "--shot-base", "4000", "--seed",
        "9",
    ];
    let mut args = vec!["walk", "--backend", "noisy", "--out", s(dir.path())];
    args.extend(base);
    ok(&args);
    let m = read_json(&dir.path().join("metrics.json"));
    let rows = m["steps"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        for key in ["f_h_raw", "f_h_ps", "f_hbc_raw", "f_hbc_ps", "retention"] {
            assert!(r[key].is_f64(), "{key}");
        }
        assert!(r["f_h_ps"].as_f64().unwrap() >= r["f_h_raw"].as_f64().unwrap() - 0.02);
    }
    let shots = dir.path().join("shots/step_2.json");
    let table = read_json(&shots);
    assert_eq!(table["metadata"]["step"], 2);
    assert_eq!(table["total"], 4840);

    let mdir = dir.path().join("m");
    let mut args = vec!["metrics", "--shots", s(&shots), "--out", s(&mdir)];
    args.extend(base);
    ok(&args);
    let again = read_json(&mdir.join("metrics.json"));
    assert_eq!(again["steps"][0], rows[1]);
}

#[test]
fn report_collects_everything() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "report", "--graph", s(&data("four.tsv")), "--seed-node", "1", "--steps", "3", "--coupling", "all-to-all",
        "--out", s(dir.path()),
    ]);
    for f in ["compile.json", "logical.qasm", "routed.qasm", "trajectory.csv", "qii.csv", "scores.csv", "report.md"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.starts_with("<!-- qwalk-cli"));
    assert!(md.contains("| rank | node | label | score |"));
}
