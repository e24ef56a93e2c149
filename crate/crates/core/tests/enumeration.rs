//! Enumerated block laws checked against a walk over the hidden chain.

use excesslab::block::BlockPair;
use excesslab::exact::{enumerate_joint, EnumerationOptions, JointBlockTable};
use excesslab::{Alpha, ProcessKind, ProcessModel, StateId};
use std::collections::HashMap;

/// Depth-first walk from every stationary state using only the public
/// transition and emission API.
fn walk_oracle(model: &ProcessModel, n: usize, cutoff: u64) -> HashMap<BlockPair, f64> {
    let mut out = HashMap::new();
    for level in 2..=cutoff {
        for phase in 1..=model.kind.phase_count(level) {
            let s = StateId::new(level, phase);
            let p = model.stationary_probability(s).unwrap().mid();
            let mut symbols = Vec::with_capacity(2 * n);
            dfs(model, n, cutoff, s, p, &mut symbols, &mut out);
        }
    }
    out
}

fn dfs(
    model: &ProcessModel,
    n: usize,
    cutoff: u64,
    state: StateId,
    mass: f64,
    symbols: &mut Vec<u8>,
    out: &mut HashMap<BlockPair, f64>,
) {
    symbols.push(model.emission(state).unwrap());
    if symbols.len() == 2 * n {
        let pair = BlockPair::from_symbols(&symbols[..n], &symbols[n..]);
        *out.entry(pair).or_insert(0.0) += mass;
    } else {
        let t = model.transition_distribution(state, cutoff).unwrap();
        for (next, p) in t.targets {
            dfs(model, n, cutoff, next, mass * p.mid(), symbols, out);
        }
    }
    symbols.pop();
}

fn assert_close(table: &JointBlockTable, oracle: &HashMap<BlockPair, f64>, rel: f64) {
    assert_eq!(table.len(), oracle.len());
    for (k, v) in oracle {
        let got = table.entries[k];
        assert!((got - v).abs() <= rel * v, "{k:?}: {got} vs {v}");
    }
}

#[test]
fn enumeration_matches_chain_walk() {
    let cutoff = 12;
    for kind in ProcessKind::ALL {
        for alpha in [1.5, 2.0] {
            let model = ProcessModel::new(kind, Alpha::new(alpha).unwrap());
            for n in 1..=3 {
                let t = enumerate_joint(&model, n, &EnumerationOptions::with_cutoff(cutoff)).unwrap();
                assert_close(&t, &walk_oracle(&model, n, cutoff), 1e-12);
            }
        }
    }
}

#[test]
fn every_table_conserves_mass() {
    for kind in ProcessKind::ALL {
        let model = ProcessModel::new(kind, Alpha::new(1.5).unwrap());
        for (n, cutoff, eps) in [(1, 100, 0.0), (3, 64, 0.0), (4, 64, 1e-9), (5, 256, 1e-7)] {
            let opts = EnumerationOptions {
                prune_eps: eps,
                ..EnumerationOptions::with_cutoff(cutoff)
            };
            let t = enumerate_joint(&model, n, &opts).unwrap();
            let gap = (t.total_mass() + t.pruned_mass - 1.0).abs();
            assert!(
                gap <= t.conservation_width(),
                "{kind} n={n}: gap {gap} width {}",
                t.conservation_width()
            );
        }
    }
}

#[test]
fn pruning_only_moves_mass_into_the_pruned_bucket() {
    let model = ProcessModel::new(ProcessKind::Hmc, Alpha::new(2.0).unwrap());
    let full = enumerate_joint(&model, 4, &EnumerationOptions::with_cutoff(40)).unwrap();
    let opts = EnumerationOptions {
        prune_eps: 1e-6,
        ..EnumerationOptions::with_cutoff(40)
    };
    let pruned = enumerate_joint(&model, 4, &opts).unwrap();
    assert!(pruned.len() < full.len());
    for (k, v) in &pruned.entries {
        assert!(*v <= full.entries[k] * (1.0 + 1e-12));
    }
    let lost = full.total_mass() - pruned.total_mass();
    assert!(lost > 0.0);
    assert!(pruned.pruned_mass - full.pruned_mass >= lost * (1.0 - 1e-9));
}
