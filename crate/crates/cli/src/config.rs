//! Run configuration: TOML or JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use qwalk::sim::NoiseModel;
use qwalk::transpile::{CalibrationData, CouplingMap, LayoutParams};
use qwalk::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    /// `id<TAB>label` sidecar.
    pub labels: Option<PathBuf>,
    /// Node id or label of the walk's start node.
    pub seed_node: Option<String>,
    pub alpha: f64,
    pub steps: usize,
    pub backend: String,
    /// `heavy-hex:<d>`, `all-to-all[:<n>]` or `line:<n>`.
    pub coupling: String,
    pub rng_seed: u64,
    pub out: PathBuf,
    pub noise: NoiseConfig,
    pub layout: LayoutConfig,
    pub shots: ShotConfig,
    pub sample: SampleConfig,
    pub prioritize: PrioritizeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            graph: None,
            labels: None,
            seed_node: None,
            alpha: 0.5,
            steps: 7,
            backend: "oracle".into(),
            coupling: "heavy-hex:7".into(),
            rng_seed: 0,
            out: PathBuf::from("out"),
            noise: NoiseConfig::default(),
            layout: LayoutConfig::default(),
            shots: ShotConfig::default(),
            sample: SampleConfig::default(),
            prioritize: PrioritizeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// `kingston`, `pittsburgh` or `noiseless`; explicit rates override it.
    pub preset: String,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub gamma: Option<f64>,
    pub readout: Option<f64>,
    /// Device calibration JSON (per-qubit readout, per-edge two-qubit error).
    pub calibration: Option<PathBuf>,
    pub trajectories: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            preset: "kingston".into(),
            p1: None,
            p2: None,
            gamma: None,
            readout: None,
            calibration: None,
            trajectories: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub trials: usize,
    pub max_pair_distance: usize,
    pub readout_threshold: Option<f64>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        let d = LayoutParams::default();
        Self {
            trials: d.trials,
            max_pair_distance: d.max_pair_distance,
            readout_threshold: d.readout_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShotConfig {
    pub base: f64,
    pub growth: f64,
}

impl Default for ShotConfig {
    fn default() -> Self {
        Self { base: 5.3e5, growth: 1.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    /// Candidate seed node ids; empty means every node.
    pub candidates: Vec<String>,
    pub max_degree: usize,
    pub max_edges: usize,
    pub target_nodes: Option<usize>,
    pub trials: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        let d = qwalk::graph::SampleParams::default();
        Self {
            candidates: Vec::new(),
            max_degree: d.max_degree,
            max_edges: d.max_edges,
            target_nodes: d.target_nodes,
            trials: d.trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrioritizeConfig {
    pub t_min: usize,
    pub t_max: Option<usize>,
    pub exclude_seed: bool,
    /// Quantum trajectory CSV used instead of running a backend.
    pub replay: Option<PathBuf>,
    /// Classical trajectory CSV paired with `replay`.
    pub replay_classical: Option<PathBuf>,
    /// `node<TAB>score` table ranked as is.
    pub replay_scores: Option<PathBuf>,
}

impl Default for PrioritizeConfig {
    fn default() -> Self {
        Self {
            t_min: qwalk::prioritize::DEFAULT_T_MIN,
            t_max: None,
            exclude_seed: false,
            replay: None,
            replay_classical: None,
            replay_scores: None,
        }
    }
}

impl RunConfig {
    /// Parses `path` as JSON when it ends in `.json`, TOML otherwise.
    /// Relative paths inside the file are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)
                .map_err(|e| Error::Validation(format!("config {}: {}", path.display(), e.message())))?
        };
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.graph,
            &mut cfg.labels,
            &mut cfg.noise.calibration,
            &mut cfg.prioritize.replay,
            &mut cfg.prioritize.replay_classical,
            &mut cfg.prioritize.replay_scores,
        ] {
            if let Some(x) = p.as_mut().filter(|x| x.is_relative()) {
                *x = base.join(&*x);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha = {} outside [0, 1]", self.alpha)));
        }
        if self.shots.base < 0.0 || self.shots.growth <= 0.0 {
            return Err(Error::InvalidParameter("shot base must be >= 0 and growth > 0".into()));
        }
        if self.noise.trajectories == 0 {
            return Err(Error::InvalidParameter("trajectories must be at least 1".into()));
        }
        for p in [
            &self.graph,
            &self.labels,
            &self.noise.calibration,
            &self.prioritize.replay,
            &self.prioritize.replay_classical,
            &self.prioritize.replay_scores,
        ]
        .into_iter()
        .flatten()
        {
            if !p.is_file() {
                return Err(Error::Validation(format!("file not found: {}", p.display())));
            }
        }
        self.noise_model()?.validate()
    }

    /// SHA-256 of the canonical JSON form of the effective configuration,
    /// output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let n = &self.noise;
        let mut m = NoiseModel::preset(&n.preset).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown noise preset `{}` (expected kingston, pittsburgh or noiseless)",
                n.preset
            ))
        })?;
        if let Some(p) = n.p1 {
            m.p1 = p;
        }
        if let Some(p) = n.p2 {
            m.p2 = p;
        }
        if let Some(g) = n.gamma {
            m.gamma = g;
        }
        if let Some(r) = n.readout {
            m.readout_p01 = r;
            m.readout_p10 = r;
        }
        Ok(m)
    }

    pub fn calibration(&self) -> Result<Option<CalibrationData>> {
        self.noise
            .calibration
            .as_ref()
            .map(|p| CalibrationData::from_json(&std::fs::read_to_string(p)?))
            .transpose()
    }

    pub fn layout_params(&self) -> LayoutParams {
        LayoutParams {
            trials: self.layout.trials,
            max_pair_distance: self.layout.max_pair_distance,
            readout_threshold: self.layout.readout_threshold,
            rng_seed: self.rng_seed,
        }
    }

    /// Coupling map for a program of `qubits` logical qubits.
    pub fn coupling_map(&self, qubits: usize) -> Result<CouplingMap> {
        let bad = || {
            Error::InvalidParameter(format!(
                "coupling `{}` not understood (expected heavy-hex:<d>, all-to-all[:<n>] or line:<n>)",
                self.coupling
            ))
        };
        let (kind, arg) = match self.coupling.split_once(':') {
            Some((k, a)) => (k, Some(a.trim().parse::<usize>().map_err(|_| bad())?)),
            None => (self.coupling.as_str(), None),
        };
        let cm = match (kind, arg) {
            ("heavy-hex", Some(d)) => CouplingMap::heavy_hex(d)?,
            ("all-to-all", n) => CouplingMap::all_to_all(n.unwrap_or(qubits)),
            ("line", n) => CouplingMap::line(n.unwrap_or(qubits)),
            _ => return Err(bad()),
        };
        Ok(match self.calibration()? {
            Some(c) => cm.with_calibration(c),
            None => cm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let toml_text = "alpha = 0.25\nsteps = 3\n[noise]\npreset = \"noiseless\"\n";
        let json_text = r#"{"alpha": 0.25, "steps": 3, "noise": {"preset": "noiseless"}}"#;
        let a: RunConfig = toml::from_str(toml_text).unwrap();
        let b: RunConfig = serde_json::from_str(json_text).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.noise_model().unwrap(), NoiseModel::noiseless());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("alhpa = 0.5\n").is_err());
    }

    #[test]
    fn coupling_specs() {
        let mut c = RunConfig::default();
        assert_eq!(c.coupling_map(24).unwrap().qubit_count(), 156);
        c.coupling = "all-to-all".into();
        assert_eq!(c.coupling_map(24).unwrap().qubit_count(), 24);
        c.coupling = "ring:4".into();
        assert!(c.coupling_map(24).is_err());
    }
}
