//! Sweep configuration: a JSON file overlaid by command-line flags.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::ValueEnum;
use clustersim::ChannelKind;
use serde::{Deserialize, Serialize};

use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Negativity,
    Witness,
    #[value(name = "cluster_fidelity")]
    ClusterFidelity,
    #[value(name = "gate_fidelity")]
    GateFidelity,
    #[value(name = "kraus_amplitudes")]
    KrausAmplitudes,
    F1,
    C1,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Negativity => "negativity",
            Metric::Witness => "witness",
            Metric::ClusterFidelity => "cluster_fidelity",
            Metric::GateFidelity => "gate_fidelity",
            Metric::KrausAmplitudes => "kraus_amplitudes",
            Metric::F1 => "f1",
            Metric::C1 => "c1",
        }
    }

    /// Metrics of the logical channel rather than of the four-qubit state.
    pub fn is_logical(self) -> bool {
        matches!(self, Metric::GateFidelity | Metric::KrausAmplitudes | Metric::F1 | Metric::C1)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Qubits on one side of a bipartition, written `1,2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subset(pub Vec<usize>);

impl FromStr for Subset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
        let qubits = inner
            .split(',')
            .map(|q| q.trim().parse::<usize>().with_context(|| format!("invalid qubit `{q}` in subset `{s}`")))
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(Subset(qubits))
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<usize>),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::List(v) => Ok(Subset(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

pub fn parse_channel(s: &str) -> anyhow::Result<ChannelKind> {
    Ok(s.parse::<ChannelKind>()?)
}

/// Every field optional, as read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub channel: Option<String>,
    pub metric: Option<Metric>,
    pub subset: Option<Subset>,
    pub alpha: Option<Grid>,
    pub beta: Option<Grid>,
    pub p: Option<Grid>,
    pub theta1: Option<Grid>,
    pub theta2: Option<Grid>,
    pub theta3: Option<Grid>,
    pub haar: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: ConfigFile) -> ConfigFile {
        ConfigFile {
            channel: over.channel.or(self.channel),
            metric: over.metric.or(self.metric),
            subset: over.subset.or(self.subset),
            alpha: over.alpha.or(self.alpha),
            beta: over.beta.or(self.beta),
            p: over.p.or(self.p),
            theta1: over.theta1.or(self.theta1),
            theta2: over.theta2.or(self.theta2),
            theta3: over.theta3.or(self.theta3),
            haar: over.haar.or(self.haar),
            seed: over.seed.or(self.seed),
            jobs: over.jobs.or(self.jobs),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub channel: ChannelKind,
    pub metric: Metric,
    pub subset: Vec<usize>,
    pub alpha: Grid,
    pub beta: Grid,
    pub p: Grid,
    pub theta1: Grid,
    pub theta2: Grid,
    pub theta3: Grid,
    /// Replace the θ grids by this many Haar-random rotations.
    pub haar: Option<usize>,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl SweepConfig {
    /// Fills defaults and checks ranges.
    pub fn resolve(raw: ConfigFile) -> anyhow::Result<Self> {
        let Some(channel) = raw.channel.as_deref() else {
            bail!("--channel is required (dephasing, amp or depol)");
        };
        let channel = parse_channel(channel)?;
        let metric = raw.metric.unwrap_or(Metric::Negativity);
        let logical = metric.is_logical();
        let state_default = |g: Option<Grid>, d: Grid| g.unwrap_or(if logical { Grid::single(0.0) } else { d });
        let gate_default = |g: Option<Grid>, d: Grid| g.unwrap_or(if logical { d } else { Grid::single(0.0) });
        let cfg = SweepConfig {
            channel,
            metric,
            subset: raw.subset.map(|s| s.0).unwrap_or_else(|| vec![1]),
            alpha: state_default(raw.alpha, Grid::linspace(0.0, PI, 41)),
            beta: raw.beta.unwrap_or(Grid::single(0.0)),
            p: raw.p.unwrap_or(Grid::linspace(0.0, 1.0, 101)),
            theta1: raw.theta1.unwrap_or(Grid::single(0.0)),
            theta2: gate_default(raw.theta2, Grid::linspace(0.0, TAU, 41)),
            theta3: raw.theta3.unwrap_or(Grid::single(0.0)),
            haar: raw.haar,
            seed: raw.seed.unwrap_or(0),
            jobs: raw.jobs,
            out: raw.out,
            format: raw.format.unwrap_or_default(),
        };
        for (name, g) in [
            ("alpha", cfg.alpha),
            ("beta", cfg.beta),
            ("p", cfg.p),
            ("theta1", cfg.theta1),
            ("theta2", cfg.theta2),
            ("theta3", cfg.theta3),
        ] {
            g.validate(name)?;
        }
        if cfg.p.values().iter().any(|p| !(0.0..=1.0).contains(p)) {
            bail!("p grid {} leaves [0, 1]", cfg.p);
        }
        if cfg.jobs == Some(0) {
            bail!("--jobs must be at least 1");
        }
        if cfg.haar == Some(0) {
            bail!("--haar must be at least 1");
        }
        Ok(cfg)
    }
}
