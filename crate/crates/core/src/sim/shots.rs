use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{NoiseModel, TrajectoryRun};
use crate::error::{Error, Result};

/// Provenance attached to sampled shots.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShotMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program_hash: Option<String>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
}

/// Measured bitstrings with multiplicities. Bit `q` of a key is qubit `q`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ShotTable {
    width: usize,
    counts: BTreeMap<u128, u64>,
    pub metadata: ShotMetadata,
}

#[derive(Serialize, Deserialize)]
struct ShotTableJson {
    width: usize,
    total: u64,
    /// Bitstrings written with qubit 0 as the rightmost character.
    counts: BTreeMap<String, u64>,
    #[serde(default)]
    metadata: ShotMetadata,
}

impl ShotTable {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            ..Default::default()
        }
    }

    pub fn from_counts(width: usize, counts: impl IntoIterator<Item = (u128, u64)>) -> Self {
        let mut t = Self::new(width);
        for (b, n) in counts {
            t.add(b, n);
        }
        t
    }

    /// Builds a table from bitstrings written with qubit 0 rightmost.
    pub fn from_strings<S: AsRef<str>>(counts: &[(S, u64)]) -> Result<Self> {
        let width = counts.first().map_or(0, |(s, _)| s.as_ref().len());
        let mut t = Self::new(width);
        for (s, n) in counts {
            t.add(parse_bitstring(s.as_ref(), width)?, *n);
        }
        Ok(t)
    }

    pub fn add(&mut self, bits: u128, n: u64) {
        if n > 0 {
            *self.counts.entry(bits).or_insert(0) += n;
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, bits: u128) -> u64 {
        self.counts.get(&bits).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u128, u64)> + '_ {
        self.counts.iter().map(|(&b, &n)| (b, n))
    }

    /// Adds the counts of `other`; tables must have equal width.
    pub fn merge(&mut self, other: &ShotTable) -> Result<()> {
        if other.width != self.width && !other.is_empty() && !self.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "cannot merge shot tables of width {} and {}",
                self.width, other.width
            )));
        }
        if self.is_empty() {
            self.width = other.width;
        }
        for (b, n) in other.iter() {
            self.add(b, n);
        }
        Ok(())
    }

    pub fn bitstring(&self, bits: u128) -> String {
        (0..self.width)
            .rev()
            .map(|q| if bits >> q & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = ShotTableJson {
            width: self.width,
            total: self.total(),
            counts: self.iter().map(|(b, n)| (self.bitstring(b), n)).collect(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_value(doc).expect("shot table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ShotTableJson = serde_json::from_str(text)?;
        let mut t = Self::new(doc.width);
        for (s, n) in &doc.counts {
            t.add(parse_bitstring(s, doc.width)?, *n);
        }
        if t.total() != doc.total {
            return Err(Error::Validation(format!(
                "shot table total {} does not match counts sum {}",
                doc.total,
                t.total()
            )));
        }
        t.metadata = doc.metadata;
        Ok(t)
    }

    /// `bitstring,count` rows, qubit 0 rightmost.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bitstring,count\n");
        for (b, n) in self.iter() {
            s.push_str(&format!("{},{n}\n", self.bitstring(b)));
        }
        s
    }
}

fn parse_bitstring(s: &str, width: usize) -> Result<u128> {
    if s.len() != width || width > 128 {
        return Err(Error::InvalidParameter(format!(
            "bitstring `{s}` does not have width {width}"
        )));
    }
    s.chars().try_fold(0u128, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        _ => Err(Error::InvalidParameter(format!("bad character in bitstring `{s}`"))),
    })
}

/// Shots at step `t`: `round(base · growth^t)`.
pub fn shot_schedule(base: f64, growth: f64, t: usize) -> u64 {
    (base * growth.powi(t as i32)).round() as u64
}

pub(crate) fn draw(cdf: &[f64], r: f64) -> usize {
    cdf.partition_point(|&c| c <= r).min(cdf.len() - 1)
}

/// Samples `shots` outcomes from snapshot `snapshot` of a trajectory run.
///
/// Shots are spread evenly over trajectories (the first `shots % n` get one
/// extra). Each outcome has its bits flipped with the readout probabilities
/// of the state qubit they were read from. Output bit `i` is state bit
/// `measure[i]`.
///
/// For runs from [`simulate_noisy_sampled`](super::simulate_noisy_sampled)
/// the stored outcomes are used as drawn, so `shots` must equal the draw
/// count of the snapshot.
pub fn sample_shots(
    run: &TrajectoryRun,
    snapshot: usize,
    shots: u64,
    noise: &NoiseModel,
    measure: &[usize],
    rng_seed: u64,
) -> Result<ShotTable> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shot count must be at least 1".into()));
    }
    if snapshot >= run.snapshot_count() {
        return Err(Error::InvalidParameter(format!(
            "snapshot {snapshot} out of range (run has {})",
            run.snapshot_count()
        )));
    }
    let sampled = run.trajectories.is_empty();
    if sampled {
        let drawn: u64 = run.samples.iter().flat_map(|t| &t[snapshot]).map(|e| e.1).sum();
        if drawn != shots {
            return Err(Error::InvalidParameter(format!(
                "run holds {drawn} outcomes at snapshot {snapshot}, {shots} shots requested"
            )));
        }
    }
    let n = run.trajectories.len().max(run.samples.len()) as u64;
    let flips: Vec<(f64, f64)> = (0..run.qubit_count)
        .map(|q| {
            let r = noise.readout(q);
            (r.p01, r.p10)
        })
        .collect();
    let tables: Vec<ShotTable> = (0..n as usize)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(k as u64);
            let mut table = ShotTable::new(measure.len());
            let mut read = |mut bits: u128, rng: &mut ChaCha8Rng| {
                for (q, &(p01, p10)) in flips.iter().enumerate() {
                    let set = bits >> q & 1 == 1;
                    let p = if set { p10 } else { p01 };
                    if p > 0.0 && rng.random::<f64>() < p {
                        bits ^= 1 << q;
                    }
                }
                let out = measure
                    .iter()
                    .enumerate()
                    .fold(0u128, |o, (i, &q)| o | (bits >> q & 1) << i);
                table.add(out, 1);
            };
            if sampled {
                for &(bits, c) in &run.samples[k][snapshot] {
                    for _ in 0..c {
                        read(bits, &mut rng);
                    }
                }
            } else {
                let quota = shots / n + u64::from((k as u64) < shots % n);
                let dist = &run.trajectories[k][snapshot];
                let mut cdf = Vec::with_capacity(dist.len());
                let mut acc = 0.0;
                for &(_, p) in dist {
                    acc += p;
                    cdf.push(acc);
                }
                for _ in 0..quota {
                    let bits = dist[draw(&cdf, rng.random::<f64>() * acc)].0;
                    read(bits, &mut rng);
                }
            }
            table
        })
        .collect();
    let mut out = ShotTable::new(measure.len());
    for t in &tables {
        out.merge(t)?;
    }
    out.metadata = ShotMetadata {
        program_hash: None,
        seeds: vec![run.rng_seed, rng_seed],
        noise: Some(noise.clone()),
        step: None,
    };
    Ok(out)
}
