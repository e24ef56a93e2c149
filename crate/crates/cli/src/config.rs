//! Run configuration: JSON file defaults overridden by command-line flags.

use anyhow::{bail, Context, Result};
use excesslab::sampling::EstimatorMethod;
use excesslab::{Alpha, ProcessKind};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunConfig {
    pub process: ProcessKind,
    pub alpha: f64,
    pub block_lengths: Vec<usize>,
    pub level_cutoff: u64,
    pub prune_eps: f64,
    pub seeds: Vec<u64>,
    pub estimator: EstimatorMethod,
    pub output_dir: PathBuf,
    /// Independent runs per pooled estimate (non-ergodic kinds).
    pub trajectories: usize,
    /// Trajectory length for sliding-window estimates (ergodic kind).
    pub sample_length: usize,
    pub resamples: usize,
    /// Windows drawn per block length by the decoder-agreement check.
    pub decoder_windows: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            process: ProcessKind::Hpm1,
            alpha: 1.5,
            block_lengths: vec![2, 4, 6, 8],
            level_cutoff: 1 << 10,
            prune_eps: 0.0,
            seeds: vec![1],
            estimator: EstimatorMethod::MillerMadow,
            output_dir: PathBuf::from("excesslab-out"),
            trajectories: 10_000,
            sample_length: 1_000_000,
            resamples: 200,
            decoder_windows: 20_000,
        }
    }
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub process: Option<ProcessKind>,
    pub alpha: Option<f64>,
    pub block_lengths: Option<Vec<usize>>,
    pub level_cutoff: Option<u64>,
    pub prune_eps: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, flags: Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = flags.process {
            cfg.process = v;
        }
        if let Some(v) = flags.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = flags.block_lengths {
            cfg.block_lengths = v;
        }
        if let Some(v) = flags.level_cutoff {
            cfg.level_cutoff = v;
        }
        if let Some(v) = flags.prune_eps {
            cfg.prune_eps = v;
        }
        if let Some(v) = flags.seeds {
            cfg.seeds = v;
        }
        if let Some(v) = flags.output_dir {
            cfg.output_dir = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        Alpha::new(self.alpha)?;
        if self.block_lengths.is_empty() {
            bail!("block lengths must not be empty");
        }
        if self.block_lengths.windows(2).any(|w| w[1] <= w[0]) {
            bail!("block lengths must be strictly increasing");
        }
        if self.block_lengths[0] == 0 || *self.block_lengths.last().unwrap() > 64 {
            bail!("block lengths must lie in 1..=64");
        }
        if !(0.0..1.0).contains(&self.prune_eps) {
            bail!("prune-eps must lie in [0, 1)");
        }
        if self.level_cutoff < 2 {
            bail!("level cutoff must be at least 2");
        }
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        Ok(())
    }

    pub fn alpha(&self) -> Alpha {
        Alpha::new(self.alpha).expect("validated")
    }
}

/// Parses `1,2,5-8` into `[1, 2, 5, 6, 7, 8]`.
pub fn parse_list(s: &str) -> std::result::Result<Vec<u64>, String> {
    let num = |x: &str| x.trim().parse::<u64>().map_err(|_| format!("'{x}' is not a number"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if b < a {
                    return Err(format!("empty range '{part}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    Ok(out)
}
