//! Entropies and mutual informations of joint block tables.
//!
//! Let `t` be the exact masses of the listed keys (`Σ t = 1 - δ`) and `R`
//! the unknown law of the missing mass `δ` over at most `K` keys. Writing
//! the true law as the mixture `(1-δ) Q + δ R` gives
//!
//! ```text
//! H_c(t) + (1-δ) log(1-δ)  ≤  H  ≤  H_c(t) - δ log δ + δ log K
//! ```
//!
//! with `H_c(t) = -Σ t log t`. The table only knows `t` up to the relative
//! error `ρ`, which perturbs `H_c` by at most `ρ H_c + Σt (1+ρ) ρ/((1-ρ) ln 2)`.

use super::table::JointBlockTable;
use crate::block::{self, BlockPair, Code};
use crate::error::{Error, Result};
use crate::series::KahanSum;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::hash::Hash;

/// A value in bits with a certified enclosure `[value - err_low, value + err_high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MIResult {
    pub value: f64,
    pub err_low: f64,
    pub err_high: f64,
}

impl MIResult {
    pub fn exact(value: f64) -> Self {
        MIResult {
            value,
            err_low: 0.0,
            err_high: 0.0,
        }
    }

    pub fn from_bounds(value: f64, lower: f64, upper: f64) -> Self {
        MIResult {
            value,
            err_low: (value - lower).max(0.0),
            err_high: (upper - value).max(0.0),
        }
    }

    pub fn lower(&self) -> f64 {
        self.value - self.err_low
    }

    pub fn upper(&self) -> f64 {
        self.value + self.err_high
    }

    pub fn width(&self) -> f64 {
        self.err_low + self.err_high
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    /// Clamps the lower end at zero, for quantities known to be nonnegative.
    pub fn nonnegative(self) -> Self {
        let lower = self.lower().max(0.0);
        MIResult::from_bounds(self.value.max(0.0), lower, self.upper().max(0.0))
    }
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    value: f64,
    lower: f64,
    upper: f64,
}

impl Bounds {
    fn result(self) -> MIResult {
        MIResult::from_bounds(self.value, self.lower, self.upper)
    }
}

fn neg_xlogx(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Certified entropy of a sub-probability vector with relative entry error
/// `rho`, missing mass at most `delta` and support bound `2^log2_support`.
fn entropy_bounds<I: Iterator<Item = f64>>(masses: I, rho: f64, delta: f64, log2_support: f64) -> Bounds {
    let mut h = KahanSum::new();
    let mut total = KahanSum::new();
    let mut count = 0usize;
    for p in masses {
        h.add(neg_xlogx(p));
        total.add(p);
        count += 1;
    }
    let h = h.value().max(0.0);
    let total = total.value();
    let fp = (8.0 + count as f64 * f64::EPSILON) * f64::EPSILON * (h + total);
    let rho_term = if rho > 0.0 {
        rho * h + total * (1.0 + rho) * rho / ((1.0 - rho) * LN_2)
    } else {
        0.0
    };
    let pert = rho_term + fp;
    let d = delta.clamp(0.0, 1.0);
    let low_shift = if d < 1.0 { (1.0 - d) * (1.0 - d).log2() } else { 0.0 };
    let high_shift = neg_xlogx(d) + d * log2_support;
    Bounds {
        value: h,
        lower: (h - pert + low_shift).max(0.0),
        upper: h + pert + high_shift,
    }
}

fn marginal<K: Eq + Hash + Copy>(table: &JointBlockTable, key: impl Fn(&BlockPair) -> K) -> HashMap<K, f64> {
    let mut m: HashMap<K, f64> = HashMap::new();
    for (k, p) in &table.entries {
        *m.entry(key(k)).or_insert(0.0) += p;
    }
    m
}

fn block_log2_support(table: &JointBlockTable, len: usize) -> f64 {
    len as f64 * (table.alphabet as f64).log2()
}

fn joint_bounds(table: &JointBlockTable) -> Bounds {
    entropy_bounds(
        table.entries.values().copied(),
        table.rel_err,
        table.missing_mass(),
        block_log2_support(table, 2 * table.n),
    )
}

fn past_bounds(table: &JointBlockTable) -> Bounds {
    entropy_bounds(
        table.past_marginal().into_values(),
        table.rel_err,
        table.missing_mass(),
        block_log2_support(table, table.n),
    )
}

fn future_bounds(table: &JointBlockTable) -> Bounds {
    entropy_bounds(
        table.future_marginal().into_values(),
        table.rel_err,
        table.missing_mass(),
        block_log2_support(table, table.n),
    )
}

/// Joint entropy `H(X_{-n+1}^0, X_1^n)`.
pub fn entropy(table: &JointBlockTable) -> MIResult {
    joint_bounds(table).result()
}

pub fn entropy_past(table: &JointBlockTable) -> MIResult {
    past_bounds(table).result()
}

pub fn entropy_future(table: &JointBlockTable) -> MIResult {
    future_bounds(table).result()
}

fn combine_mi(a: Bounds, b: Bounds, joint: Bounds) -> Bounds {
    Bounds {
        value: a.value + b.value - joint.value,
        lower: a.lower + b.lower - joint.upper,
        upper: a.upper + b.upper - joint.lower,
    }
}

fn binary_entropy(p: f64) -> f64 {
    neg_xlogx(p) + neg_xlogx(1.0 - p)
}

/// Enclosure of `I(past; future)` from the mixture of the listed law `Q`
/// (weight `1 - δ`) and an unknown law `R` (weight `δ`). With `Z` the
/// component indicator, `|I - I(P;F|Z)| ≤ H(Z)` and
/// `I(P;F|Z) = (1-δ) I_Q + δ I_R` with `0 ≤ I_R ≤ n log|X|`.
fn mixture_mi_bounds(table: &JointBlockTable) -> Option<(f64, f64)> {
    let total = table.total_mass();
    if total <= 0.0 {
        return None;
    }
    let rho = table.rel_err;
    if rho >= 0.5 {
        return None;
    }
    let slack = (table.len() as f64 + 4.0) * f64::EPSILON;
    let d_hi = table.missing_mass();
    let d_lo = (1.0 - total * (1.0 + rho))
        .max(table.pruned_mass - table.pruned_width)
        .max(0.0)
        - slack;
    let d_lo = d_lo.clamp(0.0, d_hi);
    let h_max = if d_hi <= 0.5 {
        binary_entropy(d_hi)
    } else if d_lo >= 0.5 {
        binary_entropy(d_lo)
    } else {
        1.0
    };
    let q_rho = 2.0 * rho / (1.0 - rho);
    let norm = |v: HashMap<Code, f64>| v.into_values().map(|p| p / total).collect::<Vec<_>>();
    let hp = entropy_bounds(norm(table.past_marginal()).into_iter(), q_rho, 0.0, 0.0);
    let hf = entropy_bounds(norm(table.future_marginal()).into_iter(), q_rho, 0.0, 0.0);
    let hj = entropy_bounds(table.entries.values().map(|p| p / total), q_rho, 0.0, 0.0);
    let cap = block_log2_support(table, table.n);
    let iq_lo = (hp.lower + hf.lower - hj.upper).max(0.0);
    let iq_hi = (hp.upper + hf.upper - hj.lower).min(cap);
    let lower = (1.0 - d_hi) * iq_lo - h_max;
    let upper = (1.0 - d_lo) * iq_hi + d_hi * cap + h_max;
    Some((lower, upper))
}

/// Block mutual information `E(n) = H(past) + H(future) - H(joint)`.
///
/// The value is the plain formula on the listed entries. The enclosure is
/// the tighter of the additive three-entropy bound and the mixture bound.
pub fn block_mi(table: &JointBlockTable) -> MIResult {
    let mut b = combine_mi(past_bounds(table), future_bounds(table), joint_bounds(table));
    if let Some((lo, hi)) = mixture_mi_bounds(table) {
        b.lower = b.lower.max(lo);
        b.upper = b.upper.min(hi);
    }
    b.lower = b.lower.min(b.value);
    b.upper = b.upper.max(b.value);
    b.result()
        .nonnegative()
}

/// A block label readable from the past block alone and from the future
/// block alone.
pub trait BlockLabel {
    fn of_past(&self, past: &[u8]) -> u64;
    fn of_future(&self, future: &[u8]) -> u64;
}

/// Labels every table entry through both routes; disagreement is an error.
fn split_labels(table: &JointBlockTable, label: &(impl BlockLabel + ?Sized)) -> Result<HashMap<BlockPair, u64>> {
    let n = table.n;
    let mut past_cache: HashMap<Code, u64> = HashMap::new();
    let mut future_cache: HashMap<Code, u64> = HashMap::new();
    let mut buf = Vec::with_capacity(n);
    let mut out = HashMap::with_capacity(table.entries.len());
    for k in table.entries.keys() {
        let lp = *past_cache.entry(k.past).or_insert_with(|| {
            block::unpack_into(k.past, n, &mut buf);
            label.of_past(&buf)
        });
        let lf = *future_cache.entry(k.future).or_insert_with(|| {
            block::unpack_into(k.future, n, &mut buf);
            label.of_future(&buf)
        });
        if lp != lf {
            return Err(Error::LabelDisagreement {
                past: lp,
                future: lf,
            });
        }
        out.insert(*k, lp);
    }
    Ok(out)
}

/// `Σ_z P(z) I(past; future | Z = z)` on renormalized sub-tables.
fn weighted_conditional_mi(table: &JointBlockTable, labels: &HashMap<BlockPair, u64>) -> f64 {
    let mut groups: HashMap<u64, Vec<(BlockPair, f64)>> = HashMap::new();
    for (k, p) in &table.entries {
        groups.entry(labels[k]).or_default().push((*k, *p));
    }
    let mut acc = KahanSum::new();
    for members in groups.values() {
        let w: f64 = members.iter().map(|(_, p)| p).copied().collect::<KahanSum>().value();
        if w <= 0.0 {
            continue;
        }
        let mut past: HashMap<Code, f64> = HashMap::new();
        let mut future: HashMap<Code, f64> = HashMap::new();
        let mut hj = KahanSum::new();
        for (k, p) in members {
            *past.entry(k.past).or_insert(0.0) += p / w;
            *future.entry(k.future).or_insert(0.0) += p / w;
            hj.add(neg_xlogx(p / w));
        }
        let hp: KahanSum = past.values().map(|&p| neg_xlogx(p)).collect();
        let hf: KahanSum = future.values().map(|&p| neg_xlogx(p)).collect();
        acc.add(w * (hp.value() + hf.value() - hj.value()));
    }
    acc.value()
}

fn labelled_bounds(table: &JointBlockTable, labels: &HashMap<BlockPair, u64>, split: bool) -> MIResult {
    let value = weighted_conditional_mi(table, labels);
    let rho = table.rel_err;
    let delta = table.missing_mass();
    let joint_support = block_log2_support(table, 2 * table.n);
    let hz = entropy_bounds(marginal(table, |k| labels[k]).into_values(), rho, delta, joint_support);
    let hj = joint_bounds(table);
    let (hpz, hfz) = if split {
        // The label is a function of each block, so (past, Z) ~ past.
        (past_bounds(table), future_bounds(table))
    } else {
        (
            entropy_bounds(marginal(table, |k| (k.past, labels[k])).into_values(), rho, delta, joint_support),
            entropy_bounds(marginal(table, |k| (k.future, labels[k])).into_values(), rho, delta, joint_support),
        )
    };
    // I(P;F|Z) = H(P,Z) + H(F,Z) - H(P,F) - H(Z) for Z a function of the pair.
    let lower = hpz.lower + hfz.lower - hj.upper - hz.upper;
    let upper = hpz.upper + hfz.upper - hj.lower - hz.lower;
    MIResult::from_bounds(value, lower.max(0.0), upper.max(value))
}

/// Conditional block mutual information given a label computed from the
/// past and from the future. Fails if the two routes ever disagree.
pub fn conditional_mi_given(table: &JointBlockTable, label: &(impl BlockLabel + ?Sized)) -> Result<MIResult> {
    let labels = split_labels(table, label)?;
    Ok(labelled_bounds(table, &labels, true))
}

/// Conditional block mutual information given an arbitrary function of the
/// block pair.
pub fn conditional_mi_given_pairs(table: &JointBlockTable, label: impl Fn(&BlockPair) -> u64) -> MIResult {
    let labels: HashMap<BlockPair, u64> = table.entries.keys().map(|k| (*k, label(k))).collect();
    labelled_bounds(table, &labels, false)
}

/// Certified entropy of a split label on the table.
pub fn label_entropy(table: &JointBlockTable, label: &(impl BlockLabel + ?Sized)) -> Result<MIResult> {
    let labels = split_labels(table, label)?;
    Ok(entropy_bounds(
        marginal(table, |k| labels[k]).into_values(),
        table.rel_err,
        table.missing_mass(),
        block_log2_support(table, table.n),
    )
    .result())
}

/// `I(X;Y;I_B) = I(X;Y) - P(B) I(X;Y|B) - P(B^c) I(X;Y|B^c)` for an event on
/// the observed blocks, evaluated on the listed entries renormalized to a
/// probability law (plain entropy formulas on a sub-probability table pick up
/// a spurious `-T log T`).
pub fn triple_information(table: &JointBlockTable, event: impl Fn(&BlockPair) -> bool) -> f64 {
    let total = table.total_mass();
    if total <= 0.0 {
        return 0.0;
    }
    let labels: HashMap<BlockPair, u64> = table.entries.keys().map(|k| (*k, event(k) as u64)).collect();
    let plain = past_bounds(table).value + future_bounds(table).value - joint_bounds(table).value;
    (plain + total * total.log2() - weighted_conditional_mi(table, &labels)) / total
}

/// Entropy of the event indicator, `H(I_B)`, over the renormalized listed
/// entries.
pub fn event_entropy(table: &JointBlockTable, event: impl Fn(&BlockPair) -> bool) -> f64 {
    let (mut pb, mut pc) = (KahanSum::new(), KahanSum::new());
    for (k, p) in &table.entries {
        if event(k) {
            pb.add(*p)
        } else {
            pc.add(*p)
        }
    }
    let total = pb.value() + pc.value();
    if total <= 0.0 {
        return 0.0;
    }
    neg_xlogx(pb.value() / total) + neg_xlogx(pc.value() / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize, alphabet: u8, rows: &[(&[u8], &[u8], f64)]) -> JointBlockTable {
        let mut t = JointBlockTable::new(n, alphabet);
        for (p, f, m) in rows {
            t.add(BlockPair::from_symbols(p, f), *m);
        }
        t
    }

    struct Const;
    impl BlockLabel for Const {
        fn of_past(&self, _: &[u8]) -> u64 {
            0
        }
        fn of_future(&self, _: &[u8]) -> u64 {
            0
        }
    }

    struct FirstSymbol;
    impl BlockLabel for FirstSymbol {
        fn of_past(&self, p: &[u8]) -> u64 {
            p[0] as u64
        }
        fn of_future(&self, f: &[u8]) -> u64 {
            f[0] as u64
        }
    }

    #[test]
    fn point_mass_has_zero_entropy() {
        let t = table(1, 2, &[(&[0], &[1], 1.0)]);
        let h = entropy(&t);
        assert!(h.value.abs() < 1e-15 && h.width() < 1e-12);
    }

    #[test]
    fn fair_pair_has_one_bit() {
        let t = table(2, 2, &[(&[0, 1], &[0, 1], 0.5), (&[1, 0], &[1, 0], 0.5)]);
        assert!((entropy(&t).value - 1.0).abs() < 1e-14);
        let e = block_mi(&t);
        assert!((e.value - 1.0).abs() < 1e-14);
        assert!(e.contains(1.0));
    }

    #[test]
    fn product_table_has_zero_mi() {
        let mut rows = Vec::new();
        let pp = [0.3, 0.7];
        let pf = [0.6, 0.4];
        let syms: [&[u8]; 2] = [&[0], &[1]];
        for i in 0..2 {
            for j in 0..2 {
                rows.push((syms[i], syms[j], pp[i] * pf[j]));
            }
        }
        let t = table(1, 2, &rows);
        assert!(block_mi(&t).value.abs() < 1e-14);
        // independence also kills the triple information of a past event
        let ti = triple_information(&t, |k| k.past == 1);
        assert!(ti.abs() < 1e-14);
    }

    #[test]
    fn constant_label_reproduces_block_mi() {
        let t = table(1, 2, &[(&[0], &[0], 0.4), (&[0], &[1], 0.1), (&[1], &[1], 0.5)]);
        let c = conditional_mi_given(&t, &Const).unwrap();
        assert!((c.value - block_mi(&t).value).abs() < 1e-14);
        let id = conditional_mi_given_pairs(&t, |k| (k.past as u64) << 8 | k.future as u64);
        assert!(id.value.abs() < 1e-14);
    }

    #[test]
    fn label_disagreement_is_an_error() {
        let t = table(1, 2, &[(&[0], &[1], 1.0)]);
        assert!(matches!(
            conditional_mi_given(&t, &FirstSymbol),
            Err(Error::LabelDisagreement { .. })
        ));
    }

    #[test]
    fn always_true_event_has_no_triple_information() {
        let t = table(1, 2, &[(&[0], &[0], 0.4), (&[0], &[1], 0.1), (&[1], &[1], 0.5)]);
        assert!(triple_information(&t, |_| true).abs() < 1e-14);
        assert_eq!(event_entropy(&t, |_| true), 0.0);
    }

    #[test]
    fn missing_mass_widens_interval_validly() {
        // True law: (0,0) and (1,1) each 1/2 -> E = 1 bit; list only one.
        let mut t = table(1, 2, &[(&[0], &[0], 0.5)]);
        t.pruned_mass = 0.5;
        let e = block_mi(&t);
        assert!(e.contains(1.0), "{e:?}");
        let h = entropy(&t);
        assert!(h.contains(1.0), "{h:?}");
    }

    #[test]
    fn relative_error_is_propagated() {
        let mut t = table(1, 2, &[(&[0], &[0], 0.5 * (1.0 + 1e-6)), (&[1], &[1], 0.5 * (1.0 - 1e-6))]);
        t.rel_err = 2e-6;
        let e = block_mi(&t);
        assert!(e.contains(1.0));
        assert!(e.width() < 1e-4);
    }

    proptest::proptest! {
        #[test]
        fn triple_information_is_bounded_by_event_entropy(
            masses in proptest::collection::vec(0.0f64..1.0, 16),
            keep in 0.3f64..1.0,
            pick in 0u16..u16::MAX,
        ) {
            // random law on pairs of 2-symbol binary blocks, scaled down to
            // a sub-probability table
            let total: f64 = masses.iter().sum::<f64>().max(1e-9);
            let mut t = JointBlockTable::new(2, 2);
            for (i, m) in masses.iter().enumerate() {
                if *m > 0.0 {
                    let p = [(i >> 3 & 1) as u8, (i >> 2 & 1) as u8];
                    let f = [(i >> 1 & 1) as u8, (i & 1) as u8];
                    t.add(BlockPair::from_symbols(&p, &f), keep * m / total);
                }
            }
            let event = |k: &BlockPair| pick >> ((k.past * 4 + k.future) as u16 % 16) & 1 == 1;
            let tri = triple_information(&t, event);
            proptest::prop_assert!(tri.abs() <= event_entropy(&t, event) + 1e-12);
        }
    }
}
