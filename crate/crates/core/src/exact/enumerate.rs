//! Enumeration of the joint block law.
//!
//! The cyclic kinds (HPM1, HPM2) are mixtures of deterministic cycles: every
//! (level, phase) seed emits one window. HPM1 levels `m ≥ 2n` are handled in
//! aggregate because their windows hold at most one `1`: each of the `2n`
//! single-`1` windows gets `P(N=m)/m` and the all-zero window the rest.
//! With tail aggregation the same reasoning covers every level beyond the
//! cutoff, leaving no missing mass at all.
//!
//! HMC paths are deterministic inside a word and branch only at word ends,
//! where the next word is independent of the history. The law of the next
//! `k` symbols after a branch point is therefore shared by all paths, and is
//! built once per `k` by dynamic programming over word lengths.

use super::table::JointBlockTable;
use crate::block::{self, BlockPair, Code};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::model::{level_word, LevelLaw, ProcessKind, ProcessModel};
use crate::series::{self, level_term, KahanSum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    /// Largest level enumerated explicitly.
    pub level_cutoff: u64,
    /// Paths lighter than this are dropped into the pruned mass.
    pub prune_eps: f64,
    /// Maximum number of table entries.
    pub entry_budget: usize,
    /// Maximum number of HMC path extensions.
    pub path_budget: u64,
    /// HPM1 only: account for every level beyond the cutoff analytically.
    pub tail_aggregation: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            level_cutoff: 1 << 10,
            prune_eps: 0.0,
            entry_budget: 20_000_000,
            path_budget: 100_000_000,
            tail_aggregation: false,
        }
    }
}

impl EnumerationOptions {
    pub fn with_cutoff(level_cutoff: u64) -> Self {
        EnumerationOptions {
            level_cutoff,
            ..Default::default()
        }
    }
}

/// Explicit terms summed for the HPM1 single-`1` tail before the remainder
/// is enclosed analytically.
const TAIL_EXPLICIT_TERMS: u64 = 2_000_000;

/// Relative error allowance for sums of positive f64 terms.
const SUM_REL: f64 = 64.0 * f64::EPSILON;

/// Builds the joint law of `(X_{-n+1}^0, X_1^n)` over levels up to the cutoff.
pub fn enumerate_joint(model: &ProcessModel, n: usize, opts: &EnumerationOptions) -> Result<JointBlockTable> {
    block::check_len(n)?;
    if opts.level_cutoff < 2 {
        return Err(Error::InvalidParameter(format!(
            "level cutoff {} must be at least 2",
            opts.level_cutoff
        )));
    }
    if !(0.0..1.0).contains(&opts.prune_eps) {
        return Err(Error::InvalidParameter(format!(
            "prune epsilon {} must lie in [0, 1)",
            opts.prune_eps
        )));
    }
    let mut table = match model.kind {
        ProcessKind::Hpm1 | ProcessKind::Hpm2 => cyclic(model, n, opts)?,
        ProcessKind::Hmc => hmc(model, n, opts)?,
    };
    table.fold_negligible();
    Ok(table)
}

fn levels_with_mass(model: &ProcessModel, lo: u64, hi: u64) -> Vec<u64> {
    match model.law {
        LevelLaw::Point(m) => (lo <= m && m <= hi).then_some(m).into_iter().collect(),
        LevelLaw::HeavyTailed => (lo..=hi).collect(),
        LevelLaw::Truncated(m) => (lo..=hi.min(m)).collect(),
    }
}

/// Past and future codes of the window of a cyclic word whose first symbol
/// is at word index `start`.
#[inline]
fn cyclic_window(word: &[u8], start: usize, n: usize) -> BlockPair {
    let r = word.len();
    let mut past: Code = 0;
    let mut future: Code = 0;
    let mut idx = start % r;
    for j in 0..n {
        past |= (word[idx] as Code) << (2 * j);
        idx += 1;
        if idx == r {
            idx = 0;
        }
    }
    for j in 0..n {
        future |= (word[idx] as Code) << (2 * j);
        idx += 1;
        if idx == r {
            idx = 0;
        }
    }
    BlockPair { past, future }
}

type WeightMap = HashMap<BlockPair, f64>;

fn merge(mut a: WeightMap, b: WeightMap) -> WeightMap {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_insert(0.0) += v;
    }
    a
}

/// C-free weights of the explicitly enumerated cyclic levels.
fn explicit_cyclic_weights(
    model: &ProcessModel,
    n: usize,
    levels: &[u64],
    budget: usize,
) -> Result<WeightMap> {
    let chunk = (levels.len() / 64).max(256);
    levels
        .par_chunks(chunk)
        .map(|chunk| -> Result<WeightMap> {
            let mut local = WeightMap::new();
            for &m in chunk {
                let w = model.level_weight(m);
                if w == 0.0 {
                    continue;
                }
                let word = level_word(model.kind, m);
                let per_phase = w / word.len() as f64;
                for start in 0..word.len() {
                    *local.entry(cyclic_window(&word, start, n)).or_insert(0.0) += per_phase;
                }
                if local.len() > budget {
                    return Err(Error::EntryBudgetExceeded { budget });
                }
            }
            Ok(local)
        })
        .try_reduce(WeightMap::new, |a, b| {
            let m = merge(a, b);
            if m.len() > budget {
                Err(Error::EntryBudgetExceeded { budget })
            } else {
                Ok(m)
            }
        })
}

/// Enclosure of `Σ_{m > last} 1/(m^2 log^α m)`.
fn single_one_tail(alpha: f64, last: u64) -> Interval {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Interval>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (alpha.to_bits(), last);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return *v;
    }
    let first = last + 1;
    let end = first + TAIL_EXPLICIT_TERMS - 1;
    let head: KahanSum = (first.max(2)..=end)
        .map(|m| {
            let mf = m as f64;
            level_term(alpha, mf) / mf
        })
        .collect();
    let head = series::enclose_sum(head.value(), TAIL_EXPLICIT_TERMS);
    let big_m = (end + 1) as f64;
    let u = big_m.ln();
    let lead = 1.0 / (big_m * big_m.log2().powf(alpha));
    let rem = Interval::new(lead * (1.0 - alpha / u), lead + lead / big_m).outward();
    let v = head + rem;
    cache.lock().unwrap().insert(key, v);
    v
}

fn cyclic(model: &ProcessModel, n: usize, opts: &EnumerationOptions) -> Result<JointBlockTable> {
    let kind = model.kind;
    let alpha = model.alpha_value();
    let window = 2 * n as u64;
    let heavy = matches!(model.law, LevelLaw::HeavyTailed);
    let tail_agg = opts.tail_aggregation && kind == ProcessKind::Hpm1 && heavy;
    let cutoff = if tail_agg {
        opts.level_cutoff.max(window - 1)
    } else {
        opts.level_cutoff
    };
    // HPM1 levels at least as long as the window contribute single-'1' or
    // all-zero windows only.
    let explicit_hi = if kind == ProcessKind::Hpm1 {
        cutoff.min(window - 1)
    } else {
        cutoff
    };

    let explicit = levels_with_mass(model, 2, explicit_hi);
    let weights = explicit_cyclic_weights(model, n, &explicit, opts.entry_budget)?;

    let c = model.norm_c;
    let c_mid = c.mid();
    let base_rel = c.rel_radius() + SUM_REL;
    let mut table = JointBlockTable::new(n, model.alphabet_size());
    table.rel_err = base_rel;
    for (k, w) in weights {
        table.add(k, c_mid * w);
    }

    if kind == ProcessKind::Hpm1 && cutoff >= window {
        let mut single = KahanSum::new();
        let mut zero = KahanSum::new();
        for m in levels_with_mass(model, window, cutoff) {
            let w = model.level_weight(m);
            let mf = m as f64;
            single.add(w / mf);
            zero.add(w * ((mf - window as f64) / mf));
        }
        let mut single = Interval::around(single.value(), SUM_REL);
        let mut single_rel = base_rel;
        if tail_agg {
            single = single + single_one_tail(alpha, cutoff);
            single_rel += single.rel_radius();
        }
        let single_mass = c_mid * single.mid();
        if single_mass > 0.0 {
            for j in 0..window as usize {
                let pair = if j < n {
                    BlockPair::new(1 << (2 * j), 0)
                } else {
                    BlockPair::new(0, 1 << (2 * (j - n)))
                };
                table.add(pair, single_mass);
            }
        }
        table.rel_err = table.rel_err.max(single_rel);
        if tail_agg {
            // Nothing is missing, so the all-zero window holds the balance.
            let others = table.total_mass();
            let z = 1.0 - others;
            if z > 0.0 {
                let rel = table.rel_err * others / z + SUM_REL;
                table.add(BlockPair::new(0, 0), z);
                table.rel_err = table.rel_err.max(rel);
            }
        } else if zero.value() > 0.0 {
            table.add(BlockPair::new(0, 0), c_mid * zero.value());
        }
    }

    if !tail_agg {
        let tail = model.level_tail_probability(cutoff);
        table.pruned_mass = tail.hi;
        table.pruned_width = tail.width();
    }
    if table.len() > opts.entry_budget {
        return Err(Error::EntryBudgetExceeded {
            budget: opts.entry_budget,
        });
    }
    Ok(table)
}

/// Law of the next `len` symbols after a branch point.
#[derive(Debug, Default)]
struct Continuation {
    entries: Vec<(Code, f64)>,
    pruned: f64,
    max_branches: u32,
}

struct Word {
    symbols: Vec<u8>,
    code: Code,
    start_weight: f64,
    branch: f64,
}

fn pack_prefix(symbols: &[u8], len: usize) -> Code {
    block::pack(&symbols[..len.min(symbols.len())])
}

fn hmc(model: &ProcessModel, n: usize, opts: &EnumerationOptions) -> Result<JointBlockTable> {
    if 2 * n > block::MAX_BLOCK_LEN {
        return Err(Error::InvalidParameter(format!(
            "HMC enumeration supports n <= {}, got {n}",
            block::MAX_BLOCK_LEN / 2
        )));
    }
    let len = 2 * n;
    let eps = opts.prune_eps;
    let c = model.norm_c;
    let d = model
        .norm_d
        .ok_or_else(|| Error::InvalidParameter("HMC model without branch constant".into()))?;
    let (c_mid, d_mid) = (c.mid(), d.mid());

    let words: Vec<Word> = levels_with_mass(model, 2, opts.level_cutoff)
        .into_iter()
        .filter(|&m| model.level_weight(m) > 0.0)
        .map(|m| {
            let symbols = level_word(ProcessKind::Hmc, m);
            let code = if symbols.len() <= block::MAX_BLOCK_LEN {
                block::pack(&symbols)
            } else {
                0
            };
            Word {
                code,
                start_weight: c_mid * model.level_weight(m) / symbols.len() as f64,
                branch: d_mid * model.branch_weight(m),
                symbols,
            }
        })
        .collect();

    // Branch mass leaving the enumerated levels, per branch event.
    let listed: KahanSum = words.iter().map(|w| w.branch / d_mid).collect();
    let listed = d.interval() * series::enclose_sum(listed.value(), words.len() as u64 + 1);
    let branch_tail = (1.0 - listed.lo).max(0.0);

    let mut extensions: u64 = 0;
    let budget = opts.path_budget;
    let mut bump = |k: u64| -> Result<()> {
        extensions += k;
        if extensions > budget {
            Err(Error::PathBudgetExceeded { budget })
        } else {
            Ok(())
        }
    };

    let mut conts: Vec<Continuation> = Vec::with_capacity(len);
    conts.push(Continuation::default()); // length 0: the empty string
    conts[0].entries.push((0, 1.0));
    for rem in 1..len {
        let mut acc: HashMap<Code, f64> = HashMap::new();
        let mut pruned = KahanSum::new();
        pruned.add(branch_tail);
        let mut max_branches = 1;
        for w in &words {
            let wl = w.symbols.len();
            if wl >= rem {
                bump(1)?;
                *acc.entry(pack_prefix(&w.symbols, rem)).or_insert(0.0) += w.branch;
                continue;
            }
            let sub = &conts[rem - wl];
            bump(sub.entries.len() as u64)?;
            pruned.add(w.branch * sub.pruned);
            max_branches = max_branches.max(sub.max_branches + 1);
            for &(tail, q) in &sub.entries {
                let mass = w.branch * q;
                if mass < eps {
                    pruned.add(mass);
                } else {
                    *acc.entry(w.code | (tail << (2 * wl))).or_insert(0.0) += mass;
                }
            }
            if acc.len() > opts.entry_budget {
                return Err(Error::EntryBudgetExceeded {
                    budget: opts.entry_budget,
                });
            }
        }
        conts.push(Continuation {
            entries: acc.into_iter().collect(),
            pruned: pruned.value(),
            max_branches,
        });
    }

    let mut table = JointBlockTable::new(n, model.alphabet_size());
    let mut windows: HashMap<Code, f64> = HashMap::new();
    let mut pruned = KahanSum::new();
    let mut max_branches = 0;
    for w in &words {
        let r = w.symbols.len();
        for start in 0..r {
            let prefix = &w.symbols[start..];
            if prefix.len() >= len {
                bump(1)?;
                *windows.entry(block::pack(&prefix[..len])).or_insert(0.0) += w.start_weight;
                continue;
            }
            let pl = prefix.len();
            let pcode = block::pack(prefix);
            let sub = &conts[len - pl];
            bump(sub.entries.len() as u64)?;
            pruned.add(w.start_weight * sub.pruned);
            max_branches = max_branches.max(sub.max_branches);
            for &(tail, q) in &sub.entries {
                let mass = w.start_weight * q;
                if mass < eps {
                    pruned.add(mass);
                } else {
                    *windows.entry(pcode | (tail << (2 * pl))).or_insert(0.0) += mass;
                }
            }
            if windows.len() > opts.entry_budget {
                return Err(Error::EntryBudgetExceeded {
                    budget: opts.entry_budget,
                });
            }
        }
    }
    for (code, p) in windows {
        table.add(block::split_window(code, n), p);
    }
    // Relative error grows by one D factor per branch on a path.
    let fp = SUM_REL * (1.0 + max_branches as f64);
    table.rel_err = c.rel_radius() + max_branches as f64 * d.rel_radius() * 1.01 + fp;
    let level_tail = model.level_tail_probability(opts.level_cutoff);
    let pruned = pruned.value();
    table.pruned_mass = pruned * (1.0 + table.rel_err) + level_tail.hi;
    // The branch tail is an upper bound loose by the width of the listed
    // branch mass, once per branch.
    table.pruned_width = level_tail.width()
        + 2.0 * pruned * table.rel_err
        + max_branches as f64 * listed.width();
    Ok(table)
}
