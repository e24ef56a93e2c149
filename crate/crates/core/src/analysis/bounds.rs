//! Upper bounds on `E(n)` through the hidden state at time 0.
//!
//! Both bounds split on an event `B = (N_0 ≤ M)` and use
//!
//! ```text
//! P(B) H(Y_0|B) = Σ_{m ≤ M} p_m log(r(m)/p_m) + P(B) log P(B),   p_m = C f(m)
//! ```
//!
//! which expands into the group sums of `f`, `f log m`, `f log log m` and
//! `f log r(m)`.

use crate::interval::Interval;
use crate::model::{bit_len, normalization_constant, Alpha, ProcessKind};
use crate::series::{enclose_sum, group_sums, level_term, tail_enclosure, GroupSums, KahanSum};

/// Sums over a set of levels of `f`, `f log r`, `f log m`, `f log log m`.
#[derive(Debug, Clone, Copy)]
struct StateSums {
    plain: Interval,
    log_r: Interval,
    log: Interval,
    loglog: Interval,
}

fn log_r(kind: ProcessKind, m: f64, s: f64) -> f64 {
    match kind {
        ProcessKind::Hpm1 => m.log2(),
        ProcessKind::Hpm2 => s.log2(),
        ProcessKind::Hmc => (3.0 * s).log2(),
    }
}

fn group_log_r(kind: ProcessKind, g: &GroupSums, s: u32) -> Interval {
    match kind {
        ProcessKind::Hpm1 => g.log,
        ProcessKind::Hpm2 => g.plain * (s as f64).log2(),
        ProcessKind::Hmc => g.plain * (3.0 * s as f64).log2(),
    }
}

/// Sums over the whole groups `2..=full` plus the explicitly listed levels,
/// all of which must have digit length `full + 1`.
fn state_sums(kind: ProcessKind, alpha: f64, full: u32, extra: impl Iterator<Item = f64>) -> StateSums {
    let zero = Interval::point(0.0);
    let mut out = StateSums {
        plain: zero,
        log_r: zero,
        log: zero,
        loglog: zero,
    };
    for s in 2..=full {
        let g = group_sums(alpha, s);
        out.plain = out.plain + g.plain;
        out.log = out.log + g.log;
        out.loglog = out.loglog + g.loglog;
        out.log_r = out.log_r + group_log_r(kind, &g, s);
    }
    let s = (full + 1) as f64;
    let (mut p, mut r, mut l, mut ll) = (KahanSum::new(), KahanSum::new(), KahanSum::new(), KahanSum::new());
    let mut terms = 0u64;
    for m in extra {
        let f = level_term(alpha, m);
        let t = m.log2();
        p.add(f);
        r.add(f * log_r(kind, m, s));
        l.add(f * t);
        ll.add(f * t.log2());
        terms += 1;
    }
    if terms > 0 {
        out.plain = out.plain + enclose_sum(p.value(), terms);
        out.log_r = out.log_r + enclose_sum(r.value(), terms);
        out.log = out.log + enclose_sum(l.value(), terms);
        out.loglog = out.loglog + enclose_sum(ll.value(), terms);
    }
    out
}

/// `P(B) H(Y_0|B)` given the sums over the levels of `B`.
fn restricted_entropy_from_sums(alpha: Alpha, sums: &StateSums) -> Interval {
    let c = normalization_constant(alpha).interval();
    let p_b = c * sums.plain;
    // Σ C f (log r + log m + α log log m) - C log C Σ f + P(B) log P(B)
    let body = c * (sums.log_r + sums.log + sums.loglog * alpha.value()) + c.neg_xlog2x() * sums.plain;
    (body - p_b.neg_xlog2x()).max0()
}

/// Enclosure of `P(B) H(Y_0|B)` for `B = (N_0 ≤ max)`.
fn restricted_state_entropy(kind: ProcessKind, alpha: Alpha, max: u64) -> Interval {
    let full = bit_len(max + 1) as u32 - 1;
    let start = 1u64 << full;
    let sums = state_sums(kind, alpha.value(), full, (start..=max).map(|m| m as f64));
    restricted_entropy_from_sums(alpha, &sums)
}

/// Enclosure of `P(B) H(Y_0|B) + n P(B^c) log|X| + 1` with `B = (N_0 ≤ 2^n)`,
/// using the level count `r(m)` of `kind`.
pub fn theorem1_bound(kind: ProcessKind, alpha: Alpha, n: usize) -> Interval {
    assert!(n >= 1);
    let a = alpha.value();
    let c = normalization_constant(alpha).interval();
    let log_x = (kind.alphabet_size() as f64).log2();
    // groups 2..=n cover every m < 2^n, and 2^n is the only level left
    let top = 2f64.powi(n as i32);
    let sums = state_sums(kind, a, n as u32, std::iter::once(top));
    let hb = restricted_entropy_from_sums(alpha, &sums);
    let tail = c * tail_enclosure(a, top + 1.0);
    hb + tail * (n as f64 * log_x) + Interval::point(1.0)
}

/// Enclosure of `P(B) H(Y_0|B) + n P(B^c) log|X| + h(P(B^c))` with
/// `B = (N_0 ≤ level_cutoff)`.
///
/// `E(n) ≤ I(Y_0; Y_1) ≤ H(Y_0)`, and splitting on `B` costs at most
/// `H(I_B)`.
pub fn data_processing_bound(kind: ProcessKind, alpha: Alpha, n: usize, level_cutoff: u64) -> Interval {
    let a = alpha.value();
    let c = normalization_constant(alpha).interval();
    let log_x = (kind.alphabet_size() as f64).log2();
    let hb = restricted_state_entropy(kind, alpha, level_cutoff.max(2));
    let tail = (c * tail_enclosure(a, (level_cutoff.max(2) + 1) as f64)).max0();
    let t = Interval::new(tail.lo, tail.hi.min(1.0));
    let h_tail = t.neg_xlog2x() + (Interval::point(1.0) - t).max0().neg_xlog2x();
    hb + tail * (n as f64 * log_x) + h_tail
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `Σ p log(r/p) + P log P` summed level by level.
    fn direct(kind: ProcessKind, alpha: f64, max: u64) -> f64 {
        let c = normalization_constant(Alpha::new(alpha).unwrap()).mid();
        let mut acc = KahanSum::new();
        let mut pb = KahanSum::new();
        for m in 2..=max {
            let p = c * level_term(alpha, m as f64);
            let r = kind.phase_count(m) as f64;
            acc.add(p * (r / p).log2());
            pb.add(p);
        }
        acc.value() + pb.value() * pb.value().log2()
    }

    #[test]
    fn grouped_sums_match_direct_sums() {
        for kind in ProcessKind::ALL {
            for max in [2u64, 3, 17, 1000, 1 << 12] {
                let hb = restricted_state_entropy(kind, Alpha::new(1.5).unwrap(), max);
                let d = direct(kind, 1.5, max);
                assert!(hb.widen(1e-9).contains(d), "{kind} {max}: {hb:?} vs {d}");
                assert!(hb.width() < 1e-4);
            }
        }
    }

    #[test]
    fn theorem1_matches_level_sum_for_small_n() {
        let a = Alpha::new(1.5).unwrap();
        let c = normalization_constant(a).mid();
        for kind in ProcessKind::ALL {
            let n = 10;
            let tail = c * tail_enclosure(1.5, 1025.0).mid();
            let expect = direct(kind, 1.5, 1 << n) + tail * n as f64 * (kind.alphabet_size() as f64).log2() + 1.0;
            let got = theorem1_bound(kind, a, n);
            assert!(got.widen(1e-3).contains(expect), "{kind}: {got:?} vs {expect}");
        }
    }

    #[test]
    fn bound_exceeds_one() {
        for kind in ProcessKind::ALL {
            for n in [1usize, 4, 16, 100] {
                assert!(theorem1_bound(kind, Alpha::new(1.5).unwrap(), n).lo > 1.0);
            }
        }
    }
}
