//! Plug-in and Miller–Madow estimates of block mutual information with
//! bootstrap standard errors.

use super::level::derive_seed;
use super::trajectory::{sample_pooled_windows, Trajectory};
use crate::block::{self, BlockPair};
use crate::error::{Error, Result};
use crate::model::ProcessModel;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::hash::Hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EstimatorMethod {
    Plugin,
    MillerMadow,
}

/// How the windows were collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SamplingRegime {
    /// Overlapping windows of one trajectory; bootstrap over moving blocks.
    SlidingWindows,
    /// One window per independently seeded trajectory; iid bootstrap.
    PooledTrajectories,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimatorReport {
    pub point_estimate: f64,
    pub std_error: f64,
    pub sample_count: usize,
    pub method: EstimatorMethod,
    pub regime: SamplingRegime,
    pub resamples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorOptions {
    pub method: EstimatorMethod,
    /// Bootstrap resamples; zero skips the standard error.
    pub resamples: usize,
    /// Moving-block length for sliding windows; defaults to
    /// `max(2n, S^{1/3})`.
    pub block_len: Option<usize>,
    /// Fewest windows accepted.
    pub min_windows: usize,
    pub seed: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            method: EstimatorMethod::MillerMadow,
            resamples: 200,
            block_len: None,
            min_windows: 100,
            seed: 0,
        }
    }
}

/// Windows re-labelled by dense ids of their past, future and joint parts.
struct Interned {
    past: Vec<u32>,
    future: Vec<u32>,
    joint: Vec<u32>,
    sizes: [usize; 3],
}

fn intern<K: Hash + Eq + Copy>(keys: impl Iterator<Item = K>, out: &mut Vec<u32>) -> usize {
    let mut ids: HashMap<K, u32> = HashMap::new();
    for k in keys {
        let next = ids.len() as u32;
        out.push(*ids.entry(k).or_insert(next));
    }
    ids.len()
}

impl Interned {
    fn new(windows: &[BlockPair]) -> Self {
        let mut past = Vec::with_capacity(windows.len());
        let mut future = Vec::with_capacity(windows.len());
        let mut joint = Vec::with_capacity(windows.len());
        let kp = intern(windows.iter().map(|w| w.past), &mut past);
        let kf = intern(windows.iter().map(|w| w.future), &mut future);
        let kj = intern(windows.iter().copied(), &mut joint);
        Interned {
            past,
            future,
            joint,
            sizes: [kp, kf, kj],
        }
    }

    fn estimate(&self, idx: impl Iterator<Item = usize> + Clone, method: EstimatorMethod) -> f64 {
        let hp = counted_entropy(idx.clone().map(|i| self.past[i]), self.sizes[0]);
        let hf = counted_entropy(idx.clone().map(|i| self.future[i]), self.sizes[1]);
        let hj = counted_entropy(idx.map(|i| self.joint[i]), self.sizes[2]);
        let plugin = hp.0 + hf.0 - hj.0;
        match method {
            EstimatorMethod::Plugin => plugin,
            EstimatorMethod::MillerMadow => {
                // Each entropy gains (K - 1)/(2 S ln 2).
                let s = hj.2 as f64;
                plugin + (hp.1 as f64 + hf.1 as f64 - hj.1 as f64 - 1.0) / (2.0 * s * LN_2)
            }
        }
    }
}

/// Plug-in entropy in bits, observed support size and sample count.
fn counted_entropy(ids: impl Iterator<Item = u32>, size: usize) -> (f64, usize, usize) {
    let mut counts = vec![0u32; size];
    let mut total = 0usize;
    for i in ids {
        counts[i as usize] += 1;
        total += 1;
    }
    let s = total as f64;
    let mut acc = 0.0;
    let mut support = 0;
    for &c in &counts {
        if c > 0 {
            support += 1;
            let c = c as f64;
            acc += c * c.log2();
        }
    }
    (s.log2() - acc / s, support, total)
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64;
    var.sqrt()
}

/// Estimate from an explicit list of windows.
pub fn estimate_windows(windows: &[BlockPair], regime: SamplingRegime, n: usize, opts: &EstimatorOptions) -> Result<EstimatorReport> {
    if windows.len() < opts.min_windows.max(1) {
        return Err(Error::InsufficientData {
            required: opts.min_windows.max(1),
            available: windows.len(),
        });
    }
    let data = Interned::new(windows);
    let s = windows.len();
    let point = data.estimate(0..s, opts.method);
    let block_len = match regime {
        SamplingRegime::PooledTrajectories => 1,
        SamplingRegime::SlidingWindows => opts
            .block_len
            .unwrap_or_else(|| (2 * n).max((s as f64).cbrt().ceil() as usize))
            .clamp(1, s),
    };
    let reps: Vec<f64> = (0..opts.resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, b));
            let mut idx = Vec::with_capacity(s);
            while idx.len() < s {
                let start = rng.gen_range(0..=s - block_len);
                let take = block_len.min(s - idx.len());
                idx.extend(start..start + take);
            }
            data.estimate(idx.iter().copied(), opts.method)
        })
        .collect();
    Ok(EstimatorReport {
        point_estimate: point,
        std_error: std_dev(&reps),
        sample_count: s,
        method: opts.method,
        regime,
        resamples: opts.resamples,
    })
}

/// Sliding-window estimate on one trajectory.
///
/// For the nonergodic kinds this estimates the information within the
/// trajectory's own cycle, not `E(n)`; use [`estimate_pooled`] for those.
pub fn estimate_block_mi(traj: &Trajectory, n: usize, opts: &EstimatorOptions) -> Result<EstimatorReport> {
    block::check_len(n)?;
    let required = 2 * n + opts.min_windows.max(1) - 1;
    if traj.len() < required {
        return Err(Error::InsufficientData {
            required,
            available: traj.len(),
        });
    }
    let windows: Vec<BlockPair> = traj
        .symbols
        .windows(2 * n)
        .map(|w| BlockPair::from_symbols(&w[..n], &w[n..]))
        .collect();
    estimate_windows(&windows, SamplingRegime::SlidingWindows, n, opts)
}

/// Estimate over one window from each of `trajectories` seeded runs.
pub fn estimate_pooled(model: &ProcessModel, n: usize, trajectories: usize, opts: &EstimatorOptions) -> Result<EstimatorReport> {
    let windows = sample_pooled_windows(model, n, trajectories, opts.seed)?;
    estimate_windows(&windows, SamplingRegime::PooledTrajectories, n, opts)
}
