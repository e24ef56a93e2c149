//! The three hidden Markov processes over levels of equiprobable states.
//!
//! Hidden states `σ_{nk}` are grouped into levels `n ≥ 2` of `r(n)` phases.
//! Levels are drawn with `P(N = n) = C/(n log^α n)` and the phase is uniform
//! within the level. The kinds differ in `r(n)`, in how the chain moves
//! between phases and levels, and in the emitted symbol:
//!
//! | kind  | r(n)     | dynamics                                   | alphabet |
//! |-------|----------|--------------------------------------------|----------|
//! | HPM1  | n        | fixed cycle per level                      | {0,1}    |
//! | HPM2  | s(n)     | fixed cycle per level                      | {0,1,2}  |
//! | HMC   | 3 s(n)   | cycle, then branch to `σ_{m1}` w.p. `p(m)` | {0,1,2,3}|
//!
//! `s(n)` is the binary length of `n`. All logarithms are base 2.

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::series::{self, level_term, KahanSum};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// Default explicit summation cutoff for the normalization constant.
pub const DEFAULT_SERIES_CUTOFF: u64 = 10_000_000;

/// Digit groups summed (explicitly or by integral brackets) for `D` before
/// the closed-form remainder takes over.
const HMC_CONSTANT_GROUPS: u32 = 10_000;

/// Tail exponent of the level distribution, restricted to `(1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 1.0 && value <= 2.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidAlpha(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_two(self) -> bool {
        self.0 == 2.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

/// `s(n) = ⌊log2 n⌋ + 1`.
pub fn binary_length(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::ZeroBinaryLength);
    }
    Ok(64 - n.leading_zeros() as u64)
}

#[inline]
pub(crate) fn bit_len(n: u64) -> u64 {
    64 - n.leading_zeros() as u64
}

/// The `k`-th binary digit of `n`, most significant first (`b(n,1) = 1`).
pub fn binary_digit(n: u64, k: u64) -> Result<u8> {
    let len = binary_length(n)?;
    if k == 0 || k > len {
        return Err(Error::DigitOutOfRange { n, k, len });
    }
    Ok(((n >> (len - k)) & 1) as u8)
}

/// Enclosure of a positive series constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedConstant {
    pub lower: f64,
    pub upper: f64,
}

impl CertifiedConstant {
    pub fn from_interval(i: Interval) -> Self {
        CertifiedConstant {
            lower: i.lo,
            upper: i.hi,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lower, self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Relative radius, used to propagate the constant's uncertainty into
    /// products of probabilities.
    pub fn rel_radius(&self) -> f64 {
        self.interval().rel_radius()
    }
}

fn constant_cache() -> &'static Mutex<HashMap<(u64, u64), CertifiedConstant>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), CertifiedConstant>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Enclosure of `C = (Σ_{n≥2} 1/(n log^α n))^{-1}` using the default cutoff.
pub fn normalization_constant(alpha: Alpha) -> CertifiedConstant {
    normalization_constant_with_cutoff(alpha, DEFAULT_SERIES_CUTOFF)
}

/// Sums the series explicitly below `cutoff` and encloses the remainder by
/// the integral test. Results are memoized per `(α, cutoff)`.
pub fn normalization_constant_with_cutoff(alpha: Alpha, cutoff: u64) -> CertifiedConstant {
    let cutoff = cutoff.max(3);
    let key = (alpha.value().to_bits(), cutoff);
    if let Some(c) = constant_cache().lock().unwrap().get(&key) {
        return *c;
    }
    let a = alpha.value();
    let head = series::explicit_level_sum(a, 2, cutoff - 1);
    let tail = series::tail_enclosure(a, cutoff as f64);
    let c = CertifiedConstant::from_interval((head + tail).recip());
    constant_cache().lock().unwrap().insert(key, c);
    c
}

/// Enclosure of `D = (Σ_{n≥2} 1/(3 s(n) n log^α n))^{-1}`.
pub fn branch_constant(alpha: Alpha) -> CertifiedConstant {
    let key = (alpha.value().to_bits(), 0);
    if let Some(c) = constant_cache().lock().unwrap().get(&key) {
        return *c;
    }
    let a = alpha.value();
    let mut lo = KahanSum::new();
    let mut hi = KahanSum::new();
    for s in 2..=HMC_CONSTANT_GROUPS {
        let g = series::group_sums(a, s).plain;
        let w = 1.0 / s as f64;
        lo.add(g.lo * w);
        hi.add(g.hi * w);
    }
    let rem = series::digit_weighted_remainder(a, HMC_CONSTANT_GROUPS);
    let sum = Interval::new(lo.value(), hi.value()).widen(8.0 * f64::EPSILON * hi.value()) + rem;
    let c = CertifiedConstant::from_interval((sum * (1.0 / 3.0)).recip());
    constant_cache().lock().unwrap().insert(key, c);
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Hpm1,
    Hpm2,
    Hmc,
}

impl ProcessKind {
    pub const ALL: [ProcessKind; 3] = [ProcessKind::Hpm1, ProcessKind::Hpm2, ProcessKind::Hmc];

    pub fn name(self) -> &'static str {
        match self {
            ProcessKind::Hpm1 => "hpm1",
            ProcessKind::Hpm2 => "hpm2",
            ProcessKind::Hmc => "hmc",
        }
    }

    pub fn alphabet_size(self) -> u8 {
        match self {
            ProcessKind::Hpm1 => 2,
            ProcessKind::Hpm2 => 3,
            ProcessKind::Hmc => 4,
        }
    }

    /// Number of phases `r(n)` of level `n`.
    pub fn phase_count(self, level: u64) -> u64 {
        match self {
            ProcessKind::Hpm1 => level,
            ProcessKind::Hpm2 => bit_len(level),
            ProcessKind::Hmc => 3 * bit_len(level),
        }
    }

    pub fn is_ergodic(self) -> bool {
        matches!(self, ProcessKind::Hmc)
    }
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProcessKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hpm1" => Ok(ProcessKind::Hpm1),
            "hpm2" => Ok(ProcessKind::Hpm2),
            "hmc" => Ok(ProcessKind::Hmc),
            other => Err(Error::InvalidParameter(format!("unknown process '{other}'"))),
        }
    }
}

/// Hidden state `σ_{level, phase}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateId {
    pub level: u64,
    pub phase: u64,
}

impl StateId {
    pub fn new(level: u64, phase: u64) -> Self {
        StateId { level, phase }
    }
}

/// Distribution of the level indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LevelLaw {
    /// `P(N = n) = C/(n log^α n)`.
    HeavyTailed,
    /// All mass on one level; HMC branches always return to it.
    Point(u64),
    /// The heavy-tailed law conditioned on `N ≤ max`.
    Truncated(u64),
}

/// Largest level a truncated law may keep.
pub const MAX_TRUNCATED_LEVEL: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessModel {
    pub kind: ProcessKind,
    pub alpha: Alpha,
    pub law: LevelLaw,
    pub norm_c: CertifiedConstant,
    pub norm_d: Option<CertifiedConstant>,
}

/// Successors of a state. `tail` is the branch mass to levels beyond the
/// requested cutoff (always zero for the cyclic kinds).
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions {
    pub targets: Vec<(StateId, Interval)>,
    pub tail: Interval,
}

impl ProcessModel {
    pub fn new(kind: ProcessKind, alpha: Alpha) -> Self {
        Self::with_series_cutoff(kind, alpha, DEFAULT_SERIES_CUTOFF)
    }

    pub fn from_alpha(kind: ProcessKind, alpha: f64) -> Result<Self> {
        Ok(Self::new(kind, Alpha::new(alpha)?))
    }

    pub fn with_series_cutoff(kind: ProcessKind, alpha: Alpha, cutoff: u64) -> Self {
        let norm_d = (kind == ProcessKind::Hmc).then(|| branch_constant(alpha));
        ProcessModel {
            kind,
            alpha,
            law: LevelLaw::HeavyTailed,
            norm_c: normalization_constant_with_cutoff(alpha, cutoff),
            norm_d,
        }
    }

    /// A model whose hidden level is fixed at `level`.
    pub fn single_level(kind: ProcessKind, level: u64) -> Result<Self> {
        if level < 2 {
            return Err(Error::InvalidLevel(level));
        }
        let one = CertifiedConstant {
            lower: 1.0,
            upper: 1.0,
        };
        Ok(ProcessModel {
            kind,
            alpha: Alpha(2.0),
            law: LevelLaw::Point(level),
            norm_c: one,
            norm_d: (kind == ProcessKind::Hmc).then_some(one),
        })
    }

    /// The heavy-tailed law restricted to levels `2..=max_level` and
    /// renormalized; HMC branches are renormalized the same way.
    pub fn truncated(kind: ProcessKind, alpha: Alpha, max_level: u64) -> Result<Self> {
        if !(2..=MAX_TRUNCATED_LEVEL).contains(&max_level) {
            return Err(Error::InvalidParameter(format!(
                "truncation level {max_level} outside 2..={MAX_TRUNCATED_LEVEL}"
            )));
        }
        let a = alpha.value();
        let recip_sum = |weight: &dyn Fn(u64) -> f64| {
            let sum: KahanSum = (2..=max_level).map(weight).collect();
            CertifiedConstant::from_interval(series::enclose_sum(sum.value(), max_level).recip().outward())
        };
        let norm_c = recip_sum(&|m| level_term(a, m as f64));
        let norm_d = (kind == ProcessKind::Hmc)
            .then(|| recip_sum(&|m| level_term(a, m as f64) / kind.phase_count(m) as f64));
        Ok(ProcessModel {
            kind,
            alpha,
            law: LevelLaw::Truncated(max_level),
            norm_c,
            norm_d,
        })
    }

    /// Largest level with positive mass, if any.
    pub fn max_level(&self) -> Option<u64> {
        match self.law {
            LevelLaw::HeavyTailed => None,
            LevelLaw::Point(m) | LevelLaw::Truncated(m) => Some(m),
        }
    }

    pub fn alphabet_size(&self) -> u8 {
        self.kind.alphabet_size()
    }

    pub fn alpha_value(&self) -> f64 {
        self.alpha.value()
    }

    pub fn check_state(&self, state: StateId) -> Result<()> {
        let ok = state.level >= 2
            && state.phase >= 1
            && state.phase <= self.kind.phase_count(state.level)
            && match self.law {
                LevelLaw::Point(m) => state.level == m,
                LevelLaw::Truncated(m) => state.level <= m,
                LevelLaw::HeavyTailed => true,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidState {
                kind: self.kind.name(),
                level: state.level,
                phase: state.phase,
            })
        }
    }

    /// C-free level weight `1/(n log^α n)` (or the indicator for point laws).
    pub fn level_weight(&self, level: u64) -> f64 {
        match self.law {
            LevelLaw::HeavyTailed => level_term(self.alpha.value(), level as f64),
            LevelLaw::Truncated(m) if level <= m => level_term(self.alpha.value(), level as f64),
            LevelLaw::Truncated(_) => 0.0,
            LevelLaw::Point(m) => (level == m) as u8 as f64,
        }
    }

    /// Enclosure of `P(N = n)`.
    pub fn level_probability(&self, level: u64) -> Result<Interval> {
        if level < 2 {
            return Err(Error::InvalidLevel(level));
        }
        Ok(self.norm_c.interval() * Interval::around(self.level_weight(level), 4.0 * f64::EPSILON))
    }

    /// Enclosure of `P(N > cutoff)`.
    pub fn level_tail_probability(&self, cutoff: u64) -> Interval {
        match self.law {
            LevelLaw::Point(m) => Interval::point(if m > cutoff { 1.0 } else { 0.0 }),
            LevelLaw::Truncated(m) if cutoff >= m => Interval::point(0.0),
            LevelLaw::Truncated(m) => {
                let a = self.alpha.value();
                self.norm_c.interval() * series::explicit_level_sum(a, cutoff.max(1) + 1, m)
            }
            LevelLaw::HeavyTailed => {
                let a = self.alpha.value();
                let start = cutoff.max(1) + 1;
                self.norm_c.interval() * series::tail_enclosure(a, start as f64)
            }
        }
    }

    /// Enclosure of the stationary mass `P(Y = σ_{nk}) = P(N = n)/r(n)`.
    pub fn stationary_probability(&self, state: StateId) -> Result<Interval> {
        self.check_state(state)?;
        let r = self.kind.phase_count(state.level) as f64;
        Ok(self.level_probability(state.level)? * (1.0 / r))
    }

    /// HMC branch probability `p(n) = D/(r(n) n log^α n)` into `σ_{n1}`.
    pub fn branch_probability(&self, level: u64) -> Result<Interval> {
        let d = self.norm_d.ok_or_else(|| {
            Error::InvalidParameter(format!("{} has no branch transitions", self.kind))
        })?;
        if level < 2 {
            return Err(Error::InvalidLevel(level));
        }
        Ok(d.interval() * Interval::around(self.branch_weight(level), 6.0 * f64::EPSILON))
    }

    /// D-free branch weight: `1/(r(n) n log^α n)`, or the indicator of the
    /// fixed level for point laws.
    pub fn branch_weight(&self, level: u64) -> f64 {
        match self.law {
            LevelLaw::HeavyTailed | LevelLaw::Truncated(_) => {
                self.level_weight(level) / self.kind.phase_count(level) as f64
            }
            LevelLaw::Point(m) => (level == m) as u8 as f64,
        }
    }

    /// Successor distribution; HMC branches are listed for levels up to
    /// `level_cutoff` and the rest is reported as `tail`.
    pub fn transition_distribution(&self, state: StateId, level_cutoff: u64) -> Result<Transitions> {
        self.check_state(state)?;
        let r = self.kind.phase_count(state.level);
        let zero = Interval::point(0.0);
        if state.phase < r || self.kind != ProcessKind::Hmc {
            let next = if state.phase < r { state.phase + 1 } else { 1 };
            return Ok(Transitions {
                targets: vec![(StateId::new(state.level, next), Interval::point(1.0))],
                tail: zero,
            });
        }
        let levels: Vec<u64> = match self.law {
            LevelLaw::Point(m) => vec![m],
            LevelLaw::HeavyTailed => (2..=level_cutoff).collect(),
            LevelLaw::Truncated(m) => (2..=level_cutoff.min(m)).collect(),
        };
        let mut targets = Vec::with_capacity(levels.len());
        let mut listed_weight = KahanSum::new();
        for &n in &levels {
            if n > level_cutoff {
                continue;
            }
            let p = self.branch_probability(n)?;
            listed_weight.add(self.branch_weight(n));
            targets.push((StateId::new(n, 1), p));
        }
        let listed = self.norm_d.unwrap().interval()
            * series::enclose_sum(listed_weight.value(), levels.len() as u64);
        let tail = (Interval::point(1.0) - listed).max0();
        Ok(Transitions { targets, tail })
    }

    /// The observable symbol `f(σ_{nk})`.
    pub fn emission(&self, state: StateId) -> Result<u8> {
        self.check_state(state)?;
        Ok(emit(self.kind, state.level, state.phase))
    }
}

/// Emission without validation; `phase` must be in `1..=r(level)`.
#[inline]
pub(crate) fn emit(kind: ProcessKind, level: u64, phase: u64) -> u8 {
    match kind {
        ProcessKind::Hpm1 => (phase == level) as u8,
        ProcessKind::Hpm2 => {
            if phase == 1 {
                2
            } else {
                digit_unchecked(level, phase)
            }
        }
        ProcessKind::Hmc => {
            let s = bit_len(level);
            if phase == 1 {
                2
            } else if phase <= s {
                digit_unchecked(level, phase)
            } else if phase <= 2 * s + 1 {
                3
            } else {
                digit_unchecked(level, phase - 2 * s)
            }
        }
    }
}

#[inline]
fn digit_unchecked(n: u64, k: u64) -> u8 {
    ((n >> (bit_len(n) - k)) & 1) as u8
}

/// The full emitted cycle word of a level (`r(level)` symbols).
pub fn level_word(kind: ProcessKind, level: u64) -> Vec<u8> {
    (1..=kind.phase_count(level)).map(|k| emit(kind, level, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(x: f64) -> Alpha {
        Alpha::new(x).unwrap()
    }

    #[test]
    fn alpha_range() {
        assert!(Alpha::new(1.0).is_err());
        assert!(Alpha::new(2.0001).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert!(Alpha::new(1.0001).is_ok());
        assert!(Alpha::new(2.0).is_ok());
    }

    #[test]
    fn binary_length_examples() {
        assert_eq!(binary_length(2).unwrap(), 2);
        assert_eq!(binary_length(7).unwrap(), 3);
        assert_eq!(binary_length(8).unwrap(), 4);
        assert_eq!(binary_length(0), Err(Error::ZeroBinaryLength));
    }

    #[test]
    fn binary_digit_examples() {
        assert_eq!(binary_digit(6, 1).unwrap(), 1);
        assert_eq!(binary_digit(6, 3).unwrap(), 0);
        assert_eq!(binary_digit(5, 2).unwrap(), 0);
        assert!(binary_digit(5, 4).is_err());
        assert!(binary_digit(5, 0).is_err());
    }

    #[test]
    fn level_ratio_is_constant_free() {
        let m = ProcessModel::new(ProcessKind::Hpm1, a(2.0));
        let r = m.level_weight(2) / m.level_weight(4);
        assert!((r - 8.0).abs() < 1e-12);
        for &al in &[1.3, 1.5, 1.9] {
            let m = ProcessModel::new(ProcessKind::Hpm2, a(al));
            let r = m.level_weight(2) / m.level_weight(4);
            assert!((r - 2f64.powf(al + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn level_probability_of_two_is_half_c() {
        let m = ProcessModel::new(ProcessKind::Hpm1, a(2.0));
        let p = m.level_probability(2).unwrap();
        assert!(p.overlaps(&(m.norm_c.interval() * 0.5)));
        assert!(m.level_probability(1).is_err());
    }

    #[test]
    fn levels_sum_to_one() {
        let m = ProcessModel::new(ProcessKind::Hpm1, a(1.5));
        let head = m.norm_c.interval() * series::explicit_level_sum(1.5, 2, 1000);
        let total = head + m.level_tail_probability(1000);
        assert!(total.contains(1.0), "{total}");
        assert!(total.width() < 1e-4);
    }

    #[test]
    fn stationary_uniform_within_levels() {
        let m = ProcessModel::new(ProcessKind::Hpm1, a(1.5));
        let p1 = m.stationary_probability(StateId::new(3, 1)).unwrap();
        let p3 = m.stationary_probability(StateId::new(3, 3)).unwrap();
        assert_eq!(p1, p3);

        let hmc = ProcessModel::new(ProcessKind::Hmc, a(1.5));
        let s5 = hmc.stationary_probability(StateId::new(5, 4)).unwrap();
        assert!(s5.overlaps(&(hmc.level_probability(5).unwrap() * (1.0 / 9.0))));

        let h2 = ProcessModel::new(ProcessKind::Hpm2, a(1.5));
        let total = (1..=3).fold(Interval::point(0.0), |acc, k| {
            acc + h2.stationary_probability(StateId::new(5, k)).unwrap()
        });
        assert!(total.overlaps(&h2.level_probability(5).unwrap()));
        assert!(h2.stationary_probability(StateId::new(5, 4)).is_err());
    }

    #[test]
    fn cyclic_transitions() {
        let m = ProcessModel::new(ProcessKind::Hpm1, a(1.5));
        let t = m.transition_distribution(StateId::new(3, 2), 10).unwrap();
        assert_eq!(t.targets, vec![(StateId::new(3, 3), Interval::point(1.0))]);
        let t = m.transition_distribution(StateId::new(3, 3), 10).unwrap();
        assert_eq!(t.targets, vec![(StateId::new(3, 1), Interval::point(1.0))]);
        assert!(m.transition_distribution(StateId::new(3, 4), 10).is_err());
    }

    #[test]
    fn hmc_branch_ratio() {
        let m = ProcessModel::new(ProcessKind::Hmc, a(2.0));
        let r = (m.level_weight(2) / 6.0) / (m.level_weight(4) / 9.0);
        assert!((r - 12.0).abs() < 1e-12);
        let t = m.transition_distribution(StateId::new(5, 9), 64).unwrap();
        assert_eq!(t.targets.len(), 63);
        let p2 = t.targets[0].1;
        let p4 = t.targets[2].1;
        assert!((p2.mid() / p4.mid() - 12.0).abs() < 1e-9);
        let total = t.targets.iter().fold(t.tail, |acc, (_, p)| acc + *p);
        assert!(total.contains(1.0) || (total.mid() - 1.0).abs() < 1e-9, "{total}");
    }

    #[test]
    fn emissions() {
        let m1 = ProcessModel::new(ProcessKind::Hpm1, a(1.5));
        assert_eq!(m1.emission(StateId::new(3, 1)).unwrap(), 0);
        assert_eq!(m1.emission(StateId::new(3, 3)).unwrap(), 1);
        assert_eq!(level_word(ProcessKind::Hpm2, 5), vec![2, 0, 1]);
        assert_eq!(level_word(ProcessKind::Hmc, 5), vec![2, 0, 1, 3, 3, 3, 3, 0, 1]);
    }

    #[test]
    fn hmc_words_have_grammar() {
        for level in 2..2000u64 {
            let w = level_word(ProcessKind::Hmc, level);
            let s = bit_len(level) as usize;
            assert_eq!(w.len(), 3 * s);
            assert_eq!(w[0], 2);
            assert_eq!(w.iter().filter(|&&x| x == 3).count(), s + 1);
            assert!(w[1..].iter().all(|&x| x != 2));
        }
    }

    #[test]
    fn c_enclosure_widths() {
        let c2 = normalization_constant(a(2.0));
        assert!(c2.width() <= 1e-6 && c2.width() > 0.0);
        let c15 = normalization_constant(a(1.5));
        assert!(c15.width() <= 1e-4);
        let d = branch_constant(a(1.5));
        assert!(d.rel_radius() < 1e-8, "{d:?}");
    }

    #[test]
    fn truncated_law_is_normalized() {
        for kind in ProcessKind::ALL {
            let m = ProcessModel::truncated(kind, a(1.5), 300).unwrap();
            let total: KahanSum = (2..=300).map(|l| m.level_probability(l).unwrap().mid()).collect();
            assert!((total.value() - 1.0).abs() < 1e-12);
            assert_eq!(m.level_weight(301), 0.0);
            assert_eq!(m.level_tail_probability(300).hi, 0.0);
            assert!(m.check_state(StateId::new(301, 1)).is_err());
            if kind == ProcessKind::Hmc {
                let t = m.transition_distribution(StateId::new(2, 6), 1000).unwrap();
                let s: f64 = t.targets.iter().map(|(_, p)| p.mid()).sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert_eq!(t.targets.len(), 299);
            }
        }
        assert!(ProcessModel::truncated(ProcessKind::Hpm1, a(2.0), 1).is_err());
    }
}
