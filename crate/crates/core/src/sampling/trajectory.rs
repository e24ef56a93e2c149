//! Stationary trajectories of the three processes.

use super::level::{derive_seed, LevelSampler, SampledLevel};
use crate::block::{self, BlockPair};
use crate::error::{Error, Result};
use crate::model::{ProcessKind, ProcessModel, StateId};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Observable symbols of one run, with the hidden states when requested.
///
/// Hidden entries are `None` while the chain sits on a level too large to
/// name as a [`StateId`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: ProcessKind,
    pub alpha: f64,
    pub seed: u64,
    pub symbols: Vec<u8>,
    pub hidden: Option<Vec<Option<StateId>>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn meta(&self) -> TrajectoryMeta {
        TrajectoryMeta {
            kind: self.kind,
            alpha: self.alpha,
            seed: self.seed,
            length: self.symbols.len(),
        }
    }

    /// Writes one byte per symbol to `path` and the metadata to
    /// `<path>.json`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.symbols)?;
        let meta = serde_json::to_vec_pretty(&self.meta()).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(sidecar_path(path), meta)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let symbols = fs::read(path)?;
        let meta: TrajectoryMeta =
            serde_json::from_slice(&fs::read(sidecar_path(path))?).map_err(|e| Error::Io(e.to_string()))?;
        if meta.length != symbols.len() {
            return Err(Error::Io(format!(
                "sidecar length {} does not match {} symbols",
                meta.length,
                symbols.len()
            )));
        }
        let alphabet = meta.kind.alphabet_size();
        if let Some(&symbol) = symbols.iter().find(|&&s| s >= alphabet) {
            return Err(Error::InvalidSymbol { symbol, alphabet });
        }
        Ok(Trajectory {
            kind: meta.kind,
            alpha: meta.alpha,
            seed: meta.seed,
            symbols,
            hidden: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub kind: ProcessKind,
    pub alpha: f64,
    pub seed: u64,
    pub length: usize,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Position of the hidden chain.
struct Walker<'a> {
    kind: ProcessKind,
    sampler: &'a LevelSampler,
    level: SampledLevel,
    period: u128,
    phase: u128,
}

fn period(kind: ProcessKind, level: SampledLevel) -> u128 {
    match (kind, level) {
        (ProcessKind::Hpm1, SampledLevel::Exact(m)) => m as u128,
        (ProcessKind::Hpm1, SampledLevel::Huge(h)) => {
            if h.digits <= 127 {
                (h.top as u128) << (h.digits - 64)
            } else {
                u128::MAX
            }
        }
        (ProcessKind::Hpm2, l) => l.digits(),
        (ProcessKind::Hmc, l) => l.digits().saturating_mul(3),
    }
}

fn digit(level: SampledLevel, k: u128) -> u8 {
    match level {
        SampledLevel::Exact(m) => {
            let s = 64 - m.leading_zeros() as u128;
            ((m >> (s - k)) & 1) as u8
        }
        SampledLevel::Huge(h) => h.digit(k),
    }
}

impl<'a> Walker<'a> {
    fn stationary<R: Rng>(kind: ProcessKind, sampler: &'a LevelSampler, rng: &mut R) -> Self {
        let level = sampler.sample(rng);
        let period = period(kind, level);
        let phase = rng.gen_range(1..=period);
        Walker {
            kind,
            sampler,
            level,
            period,
            phase,
        }
    }

    fn emit(&self) -> u8 {
        let p = self.phase;
        match self.kind {
            ProcessKind::Hpm1 => (p == self.period) as u8,
            ProcessKind::Hpm2 => {
                if p == 1 {
                    2
                } else {
                    digit(self.level, p)
                }
            }
            ProcessKind::Hmc => {
                let s = self.level.digits();
                if p == 1 {
                    2
                } else if p <= s {
                    digit(self.level, p)
                } else if p <= 2 * s + 1 {
                    3
                } else {
                    digit(self.level, p - 2 * s)
                }
            }
        }
    }

    fn state(&self) -> Option<StateId> {
        self.level.exact().map(|m| StateId::new(m, self.phase as u64))
    }

    fn step<R: Rng>(&mut self, rng: &mut R) {
        if self.phase < self.period {
            self.phase += 1;
            return;
        }
        self.phase = 1;
        if self.kind == ProcessKind::Hmc {
            // Branch law ∝ f(m)/s(m): thin level draws by 2/s(m).
            loop {
                let l = self.sampler.sample(rng);
                let s = l.digits();
                if rng.gen::<f64>() * (s as f64) < 2.0 {
                    self.level = l;
                    break;
                }
            }
            self.period = period(self.kind, self.level);
        }
    }
}

fn run(model: &ProcessModel, sampler: &LevelSampler, length: usize, seed: u64, keep_hidden: bool) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Walker::stationary(model.kind, sampler, &mut rng);
    let mut symbols = Vec::with_capacity(length);
    let mut hidden = keep_hidden.then(|| Vec::with_capacity(length));
    for i in 0..length {
        symbols.push(w.emit());
        if let Some(h) = hidden.as_mut() {
            h.push(w.state());
        }
        if i + 1 < length {
            w.step(&mut rng);
        }
    }
    Trajectory {
        kind: model.kind,
        alpha: model.alpha_value(),
        seed,
        symbols,
        hidden,
    }
}

fn check_length(length: usize) -> Result<()> {
    if length == 0 {
        return Err(Error::InvalidParameter("trajectory length must be positive".into()));
    }
    Ok(())
}

/// A trajectory started from the stationary law.
pub fn sample_trajectory(model: &ProcessModel, length: usize, seed: u64) -> Result<Trajectory> {
    check_length(length)?;
    Ok(run(model, &LevelSampler::new(model), length, seed, false))
}

/// As [`sample_trajectory`], also recording the hidden states.
pub fn sample_trajectory_with_hidden(model: &ProcessModel, length: usize, seed: u64) -> Result<Trajectory> {
    check_length(length)?;
    Ok(run(model, &LevelSampler::new(model), length, seed, true))
}

/// One `(past, future)` window from each of `count` independently seeded
/// trajectories of length `2n`. Stream `i` uses `derive_seed(seed, i)`.
pub fn sample_pooled_windows(model: &ProcessModel, n: usize, count: usize, seed: u64) -> Result<Vec<BlockPair>> {
    block::check_len(n)?;
    let sampler = LevelSampler::new(model);
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let t = run(model, &sampler, 2 * n, derive_seed(seed, i), false);
            BlockPair::from_symbols(&t.symbols[..n], &t.symbols[n..])
        })
        .collect())
}

/// Pooled windows with the hidden state at time 0 of each, for decoder
/// checks.
pub fn sample_pooled_windows_with_state(
    model: &ProcessModel,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<(BlockPair, Option<StateId>)>> {
    block::check_len(n)?;
    let sampler = LevelSampler::new(model);
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let t = run(model, &sampler, 2 * n, derive_seed(seed, i), true);
            let state = t.hidden.as_ref().unwrap()[n - 1];
            (BlockPair::from_symbols(&t.symbols[..n], &t.symbols[n..]), state)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bit_len, Alpha};

    fn model(kind: ProcessKind) -> ProcessModel {
        ProcessModel::new(kind, Alpha::new(1.5).unwrap())
    }

    #[test]
    fn hidden_states_emit_the_symbols() {
        for kind in ProcessKind::ALL {
            let m = model(kind);
            for seed in 0..50 {
                let t = sample_trajectory_with_hidden(&m, 300, seed).unwrap();
                for (x, s) in t.symbols.iter().zip(t.hidden.as_ref().unwrap()) {
                    if let Some(s) = s {
                        assert_eq!(*x, m.emission(*s).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn hpm1_ones_are_one_level_apart() {
        let m = model(ProcessKind::Hpm1);
        for seed in 0..200 {
            let t = sample_trajectory_with_hidden(&m, 400, seed).unwrap();
            let Some(state) = t.hidden.as_ref().unwrap()[0] else { continue };
            let ones: Vec<usize> = (0..t.len()).filter(|&i| t.symbols[i] == 1).collect();
            for w in ones.windows(2) {
                assert_eq!((w[1] - w[0]) as u64, state.level);
            }
            assert!(t.hidden.unwrap().iter().all(|s| s.unwrap().level == state.level));
        }
    }

    #[test]
    fn hmc_three_runs_match_word_level() {
        let m = model(ProcessKind::Hmc);
        for seed in 0..100 {
            let t = sample_trajectory_with_hidden(&m, 2000, seed).unwrap();
            let hidden = t.hidden.as_ref().unwrap();
            let mut i = 0;
            while i < t.len() {
                if t.symbols[i] != 3 {
                    i += 1;
                    continue;
                }
                let start = i;
                while i < t.len() && t.symbols[i] == 3 {
                    i += 1;
                }
                if start == 0 || i == t.len() {
                    continue;
                }
                if let Some(s) = hidden[start] {
                    assert_eq!((i - start) as u64, bit_len(s.level) + 1);
                }
            }
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        for kind in ProcessKind::ALL {
            let m = model(kind);
            assert_eq!(
                sample_trajectory(&m, 500, 9).unwrap(),
                sample_trajectory(&m, 500, 9).unwrap()
            );
        }
        assert!(sample_trajectory(&model(ProcessKind::Hpm1), 0, 1).is_err());
    }

    #[test]
    fn export_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.bin");
        let t = sample_trajectory(&model(ProcessKind::Hmc), 1000, 4).unwrap();
        t.save(&path).unwrap();
        assert_eq!(fs::read(&path).unwrap().len(), 1000);
        let meta: TrajectoryMeta = serde_json::from_slice(&fs::read(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(meta, t.meta());
        assert_eq!(Trajectory::load(&path).unwrap(), t);
    }
}
