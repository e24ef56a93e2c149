//! Certified sums of the level series `Σ 1/(m log^α m)` and its
//! logarithmically weighted relatives.
//!
//! Levels are processed by binary digit length: group `s` holds the levels
//! `m` with `s(m) = s`, i.e. `2^{s-1} ≤ m < 2^s` (group 1 is empty because
//! levels start at 2). Small groups are summed term by term with compensated
//! summation; large groups are enclosed by integrals over `t = log2 m`,
//! which have closed forms.

use crate::interval::Interval;
use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::{Arc, Mutex, OnceLock};

/// Groups up to this digit length are summed explicitly.
pub const EXPLICIT_GROUPS: u32 = 20;

/// Relative error allowance for an explicitly summed, compensated series of
/// positive terms each evaluated with a handful of correctly rounded ops.
const TERM_REL: f64 = 16.0 * f64::EPSILON;

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::new();
        for x in iter {
            k.add(x);
        }
        k
    }
}

/// `1 / (m log2^α m)`.
#[inline]
pub fn level_term(alpha: f64, m: f64) -> f64 {
    1.0 / (m * m.log2().powf(alpha))
}

/// Enclosure of `Σ_{m=a}^{b} level_term(m)` by direct compensated summation.
pub fn explicit_level_sum(alpha: f64, a: u64, b: u64) -> Interval {
    if b < a {
        return Interval::point(0.0);
    }
    let s: KahanSum = (a.max(2)..=b).map(|m| level_term(alpha, m as f64)).collect();
    enclose_sum(s.value(), b - a + 1)
}

pub(crate) fn enclose_sum(value: f64, terms: u64) -> Interval {
    let rel = TERM_REL + (terms as f64) * f64::EPSILON * f64::EPSILON;
    Interval::around(value, rel)
}

/// Closed-form value of `∫_n^∞ dm/(m log^α m) = (ln 2/(α-1)) log^{1-α} n`.
pub fn tail_integral(alpha: f64, n: f64) -> f64 {
    LN_2 / (alpha - 1.0) * n.log2().powf(1.0 - alpha)
}

/// Enclosure of `Σ_{m=n}^∞ 1/(m log^α m)` from the integral test.
pub fn tail_enclosure(alpha: f64, n: f64) -> Interval {
    let t = tail_integral(alpha, n);
    let width = level_term(alpha, n);
    Interval::new(t, t + width).widen(4.0 * f64::EPSILON * (t + width))
}

/// Sums over one digit-length group of the three summands
/// `f(m)`, `f(m) log2 m`, `f(m) log2 log2 m` with `f(m) = 1/(m log^α m)`.
#[derive(Debug, Clone, Copy)]
pub struct GroupSums {
    pub plain: Interval,
    pub log: Interval,
    pub loglog: Interval,
}

impl GroupSums {
    pub fn zero() -> Self {
        let z = Interval::point(0.0);
        GroupSums {
            plain: z,
            log: z,
            loglog: z,
        }
    }

    pub fn add(&self, other: &GroupSums) -> GroupSums {
        GroupSums {
            plain: self.plain + other.plain,
            log: self.log + other.log,
            loglog: self.loglog + other.loglog,
        }
    }
}

/// `x^{e}(1 - (1 - 1/x)^{e})`-style differences: returns `b^p - a^p` for
/// `0 < a < b` without catastrophic cancellation.
fn pow_diff(a: f64, b: f64, p: f64) -> f64 {
    a.powf(p) * (p * (b / a).ln()).exp_m1()
}

fn integral_plain(alpha: f64, t0: f64, t1: f64) -> f64 {
    // ∫ ln2 t^{-α} dt = ln2 t^{1-α}/(1-α)
    LN_2 * pow_diff(t0, t1, 1.0 - alpha) / (1.0 - alpha)
}

fn integral_log(alpha: f64, t0: f64, t1: f64) -> f64 {
    // ∫ ln2 t^{1-α} dt
    if (alpha - 2.0).abs() < 1e-15 {
        LN_2 * (t1 / t0).ln()
    } else {
        LN_2 * pow_diff(t0, t1, 2.0 - alpha) / (2.0 - alpha)
    }
}

fn integral_loglog(alpha: f64, t0: f64, t1: f64) -> f64 {
    // ∫ t^{-α} ln t dt = t^{1-α} ln t/(1-α) - t^{1-α}/(1-α)^2, times ln2/ln2.
    let q = 1.0 - alpha;
    let anti = |t: f64| t.powf(q) * t.ln() / q - t.powf(q) / (q * q);
    anti(t1) - anti(t0)
}

/// Integral enclosure of a group `s > EXPLICIT_GROUPS` whose summands are
/// decreasing on `[2^{s-1}, 2^s]`.
fn integral_group(alpha: f64, s: u32) -> GroupSums {
    let t0 = (s - 1) as f64;
    let t1 = s as f64;
    let a = 2f64.powi(s as i32 - 1);
    let f_a = level_term(alpha, a);
    let pad = |x: f64| 64.0 * f64::EPSILON * t1 * x.abs();
    let bracket = |j: f64, first: f64| Interval::new(j - pad(j), j + first + pad(j + first));
    GroupSums {
        plain: bracket(integral_plain(alpha, t0, t1), f_a),
        log: bracket(integral_log(alpha, t0, t1), f_a * t0),
        loglog: bracket(integral_loglog(alpha, t0, t1), f_a * t0.log2()),
    }
}

fn explicit_group(alpha: f64, s: u32) -> GroupSums {
    let lo = (1u64 << (s - 1)).max(2);
    let hi = (1u64 << s) - 1;
    let mut p = KahanSum::new();
    let mut l = KahanSum::new();
    let mut ll = KahanSum::new();
    for m in lo..=hi {
        let mf = m as f64;
        let t = mf.log2();
        let f = 1.0 / (mf * t.powf(alpha));
        p.add(f);
        l.add(f * t);
        ll.add(f * t.log2());
    }
    let n = hi - lo + 1;
    let ll_v = ll.value();
    GroupSums {
        plain: enclose_sum(p.value(), n),
        log: enclose_sum(l.value(), n),
        // log log 2 = 0 makes the first term vanish; pad absolutely.
        loglog: enclose_sum(ll_v, n).widen(TERM_REL * p.value()),
    }
}

type Cache = Mutex<HashMap<u64, Arc<Vec<GroupSums>>>>;

fn explicit_cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn explicit_groups(alpha: f64) -> Arc<Vec<GroupSums>> {
    let key = alpha.to_bits();
    if let Some(v) = explicit_cache().lock().unwrap().get(&key) {
        return v.clone();
    }
    let mut v = vec![GroupSums::zero()];
    for s in 2..=EXPLICIT_GROUPS {
        v.push(explicit_group(alpha, s));
    }
    let v = Arc::new(v);
    explicit_cache().lock().unwrap().insert(key, v.clone());
    v
}

/// Enclosure of the sums over digit-length group `s` (`s ≥ 1`).
pub fn group_sums(alpha: f64, s: u32) -> GroupSums {
    assert!(s >= 1);
    if s <= EXPLICIT_GROUPS {
        explicit_groups(alpha)[(s - 1) as usize]
    } else {
        integral_group(alpha, s)
    }
}

/// Sums over all levels with digit length in `s_lo..=s_hi`.
pub fn group_range_sums(alpha: f64, s_lo: u32, s_hi: u32) -> GroupSums {
    (s_lo.max(1)..=s_hi).fold(GroupSums::zero(), |acc, s| acc.add(&group_sums(alpha, s)))
}

/// Enclosure of `Σ_{m ≥ 2^S} 1/(s(m) m log^α m)`, the remainder of the
/// digit-weighted series beyond group `S`.
///
/// Uses `log m < s(m) ≤ log m + 1`, which reduces both sides to the closed
/// form `∫ ln2 t^{-α-1} dt`.
pub fn digit_weighted_remainder(alpha: f64, big_s: u32) -> Interval {
    let s = big_s as f64;
    let upper_int = LN_2 * s.powf(-alpha) / alpha;
    let first = level_term(alpha, 2f64.powf(s)) / s;
    let lower = upper_int * s / (s + 1.0);
    Interval::new(lower, upper_int + first).widen(8.0 * f64::EPSILON * upper_int)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..1000 {
            k.add(1e-17);
        }
        assert!((k.value() - (1.0 + 1e-14)).abs() < 1e-18);
    }

    #[test]
    fn pow_diff_matches_naive() {
        let d = pow_diff(3.0, 5.0, -0.5);
        assert!((d - (5f64.powf(-0.5) - 3f64.powf(-0.5))).abs() < 1e-15);
    }

    #[test]
    fn integral_groups_bracket_direct_sums() {
        // Groups just above the explicit range can still be summed directly
        // and must sit inside the integral brackets.
        for &alpha in &[1.2, 1.5, 2.0] {
            for s in [21u32, 22] {
                let direct = explicit_group(alpha, s);
                let brk = integral_group(alpha, s);
                assert!(brk.plain.overlaps(&direct.plain), "plain s={s} a={alpha}");
                assert!(brk.log.overlaps(&direct.log), "log s={s} a={alpha}");
                assert!(brk.loglog.overlaps(&direct.loglog), "loglog s={s} a={alpha}");
                assert!(brk.plain.lo <= direct.plain.lo && direct.plain.hi <= brk.plain.hi);
            }
        }
    }

    #[test]
    fn digit_weighted_remainder_brackets_partial_sums() {
        let alpha = 1.5;
        // Σ_{s>10} (group plain sum)/s, groups 11..=20 explicit plus remainder beyond 20,
        // compared against the remainder formula started at 10.
        let mut acc = Interval::point(0.0);
        for s in 11..=20 {
            acc = acc + group_sums(alpha, s).plain * (1.0 / s as f64);
        }
        let total = acc + digit_weighted_remainder(alpha, 20);
        let from10 = digit_weighted_remainder(alpha, 10);
        assert!(total.overlaps(&from10), "{total} vs {from10}");
    }
}
