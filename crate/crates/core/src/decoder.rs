//! Level decoders that read the same value off the past block and off the
//! future block.
//!
//! Each decoder returns a level `m ≥ 2` when its block shows a whole word
//! of level `m` short enough that the other side must show it too, and `0`
//! otherwise. Blocks the process cannot emit also decode to `0`.

use crate::block::BlockPair;
use crate::error::{Error, Result};
use crate::exact::{block_mi, conditional_mi_given, label_entropy, BlockLabel, JointBlockTable, MIResult};
use crate::interval::Interval;
use crate::model::{bit_len, normalization_constant, Alpha, ProcessKind, StateId};
use crate::series::{group_range_sums, KahanSum};
use serde::{Deserialize, Serialize};

/// Decoded level; `0` stands for "not determined".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DnValue(u64);

impl DnValue {
    pub const UNDETERMINED: DnValue = DnValue(0);

    pub fn new(value: u64) -> Result<Self> {
        if value == 1 {
            return Err(Error::InvalidLevel(1));
        }
        Ok(DnValue(value))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_determined(self) -> bool {
        self.0 != 0
    }
}

fn check_symbols(block: &[u8], alphabet: u8) -> Result<()> {
    match block.iter().find(|&&s| s >= alphabet) {
        Some(&symbol) => Err(Error::InvalidSymbol { symbol, alphabet }),
        None => Ok(()),
    }
}

/// Level whose binary expansion is `1` followed by `digits`.
fn level_from_digits<'a>(digits: impl Iterator<Item = &'a u8>) -> Option<u64> {
    let mut m: u64 = 1;
    for &d in digits {
        if d > 1 || m.leading_zeros() == 0 {
            return None;
        }
        m = (m << 1) | d as u64;
    }
    Some(m)
}

fn accept(m: u64, word_span: u64, n: usize) -> DnValue {
    if m >= 2 && 2 * word_span <= n as u64 {
        DnValue(m)
    } else {
        DnValue::UNDETERMINED
    }
}

/// Positions of the last two occurrences of `symbol`.
fn last_two(block: &[u8], symbol: u8) -> Option<(usize, usize)> {
    let mut it = block.iter().enumerate().rev().filter(|(_, &s)| s == symbol);
    let (b, _) = it.next()?;
    let (a, _) = it.next()?;
    Some((a, b))
}

fn first_two(block: &[u8], symbol: u8) -> Option<(usize, usize)> {
    let mut it = block.iter().enumerate().filter(|(_, &s)| s == symbol);
    let (a, _) = it.next()?;
    let (b, _) = it.next()?;
    Some((a, b))
}

fn hpm1_period(pair: Option<(usize, usize)>, n: usize) -> DnValue {
    match pair {
        Some((a, b)) => accept((b - a) as u64, (b - a) as u64, n),
        None => DnValue::UNDETERMINED,
    }
}

/// Period between the last two `1`s of an HPM1 past block.
pub fn decode_past_hpm1(past: &[u8]) -> Result<DnValue> {
    check_symbols(past, 2)?;
    Ok(hpm1_period(last_two(past, 1), past.len()))
}

/// Period between the first two `1`s of an HPM1 future block.
pub fn decode_future_hpm1(future: &[u8]) -> Result<DnValue> {
    check_symbols(future, 2)?;
    Ok(hpm1_period(first_two(future, 1), future.len()))
}

fn hpm2_word(block: &[u8], pair: Option<(usize, usize)>) -> DnValue {
    let Some((a, b)) = pair else {
        return DnValue::UNDETERMINED;
    };
    match level_from_digits(block[a + 1..b].iter()) {
        Some(m) => accept(m, (b - a) as u64, block.len()),
        None => DnValue::UNDETERMINED,
    }
}

/// Level spelled between the last two `2`s of an HPM2 past block.
pub fn decode_past_hpm2(past: &[u8]) -> Result<DnValue> {
    check_symbols(past, 3)?;
    Ok(hpm2_word(past, last_two(past, 2)))
}

/// Level spelled between the first two `2`s of an HPM2 future block.
pub fn decode_future_hpm2(future: &[u8]) -> Result<DnValue> {
    check_symbols(future, 3)?;
    Ok(hpm2_word(future, first_two(future, 2)))
}

/// Shared HMC rule: `run` threes adjacent to `digits`, closed by a `2`.
fn hmc_word<'a>(run: usize, digits: impl Iterator<Item = &'a u8>, closed: bool, n: usize) -> DnValue {
    if run == 0 || !closed {
        return DnValue::UNDETERMINED;
    }
    let Some(m) = level_from_digits(digits) else {
        return DnValue::UNDETERMINED;
    };
    let s = bit_len(m);
    if run as u64 > s {
        return DnValue::UNDETERMINED;
    }
    accept(m, s, n)
}

/// HMC past rule: the block ends with `2, digits, 3^l` and `1 ≤ l ≤ s(m)`.
pub fn decode_past_hmc(past: &[u8]) -> Result<DnValue> {
    check_symbols(past, 4)?;
    let n = past.len();
    let run = past.iter().rev().take_while(|&&s| s == 3).count();
    let body = &past[..n - run];
    let digits = body.iter().rev().take_while(|&&s| s <= 1).count();
    let closed = digits < body.len() && body[body.len() - digits - 1] == 2;
    let start = body.len() - digits;
    Ok(hmc_word(run, body[start..].iter(), closed, n))
}

/// HMC future rule: the block starts with `3^l, digits, 2` and `1 ≤ l ≤ s(m)`.
pub fn decode_future_hmc(future: &[u8]) -> Result<DnValue> {
    check_symbols(future, 4)?;
    let n = future.len();
    let run = future.iter().take_while(|&&s| s == 3).count();
    let body = &future[run..];
    let digits = body.iter().take_while(|&&s| s <= 1).count();
    let closed = digits < body.len() && body[digits] == 2;
    Ok(hmc_word(run, body[..digits].iter(), closed, n))
}

pub fn decode_past(kind: ProcessKind, past: &[u8]) -> Result<DnValue> {
    match kind {
        ProcessKind::Hpm1 => decode_past_hpm1(past),
        ProcessKind::Hpm2 => decode_past_hpm2(past),
        ProcessKind::Hmc => decode_past_hmc(past),
    }
}

pub fn decode_future(kind: ProcessKind, future: &[u8]) -> Result<DnValue> {
    match kind {
        ProcessKind::Hpm1 => decode_future_hpm1(future),
        ProcessKind::Hpm2 => decode_future_hpm2(future),
        ProcessKind::Hmc => decode_future_hmc(future),
    }
}

/// The value the decoders must return when the hidden state at time 0 is
/// `state` and blocks have length `n`, or `None` if the state lies outside
/// the defining condition.
pub fn hidden_truth(kind: ProcessKind, state: StateId, n: usize) -> Option<DnValue> {
    let n = n as u64;
    let m = state.level;
    let s = bit_len(m);
    let ok = match kind {
        ProcessKind::Hpm1 => 2 * m <= n,
        ProcessKind::Hpm2 => 2 * s <= n,
        ProcessKind::Hmc => 2 * s <= n && s < state.phase && state.phase <= 2 * s,
    };
    ok.then_some(DnValue(m))
}

/// Deliberate decoder corruption, used to check that verification notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DecoderFault {
    #[default]
    None,
    /// Determined future decodes are shifted by one.
    FutureOffByOne,
}

/// The decoder of one process kind as a [`BlockLabel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dn {
    pub kind: ProcessKind,
    pub fault: DecoderFault,
}

impl Dn {
    pub fn new(kind: ProcessKind) -> Self {
        Dn {
            kind,
            fault: DecoderFault::None,
        }
    }

    pub fn with_fault(kind: ProcessKind, fault: DecoderFault) -> Self {
        Dn { kind, fault }
    }
}

impl BlockLabel for Dn {
    fn of_past(&self, past: &[u8]) -> u64 {
        decode_past(self.kind, past).map_or(0, DnValue::value)
    }

    fn of_future(&self, future: &[u8]) -> u64 {
        let v = decode_future(self.kind, future).map_or(0, DnValue::value);
        match self.fault {
            DecoderFault::FutureOffByOne if v != 0 => v + 1,
            _ => v,
        }
    }
}

/// Decodes both halves of a block pair and checks they agree.
pub fn decode_pair(kind: ProcessKind, pair: &BlockPair, n: usize) -> Result<DnValue> {
    let p = decode_past(kind, &pair.past_symbols(n))?;
    let f = decode_future(kind, &pair.future_symbols(n))?;
    if p != f {
        return Err(Error::LabelDisagreement {
            past: p.value(),
            future: f.value(),
        });
    }
    Ok(p)
}

/// Largest level the decoder can return at block length `n`.
pub fn max_decodable_level(kind: ProcessKind, n: usize) -> u64 {
    let half = (n / 2) as u32;
    match kind {
        ProcessKind::Hpm1 => half as u64,
        ProcessKind::Hpm2 | ProcessKind::Hmc => {
            if half >= 64 {
                u64::MAX
            } else {
                (1u64 << half) - 1
            }
        }
    }
}

/// Certified `H(D_n)` from the decoder law `P(D_n = m) = c/(m log^α m)` on
/// its support, with `c = C` for the cyclic kinds and `C/3` for HMC; the
/// remaining mass sits on `0`.
pub fn dn_entropy_closed_form(kind: ProcessKind, alpha: Alpha, n: usize) -> MIResult {
    let a = alpha.value();
    let top = max_decodable_level(kind, n);
    if top < 2 {
        return MIResult::exact(0.0);
    }
    // T = Σ f, A = Σ -f log2 f = Σ f (log2 m + α log2 log2 m)
    let (t, big_a) = match kind {
        ProcessKind::Hpm1 => {
            let mut t = KahanSum::new();
            let mut l = KahanSum::new();
            let mut ll = KahanSum::new();
            for m in 2..=top {
                let mf = m as f64;
                let lm = mf.log2();
                let f = 1.0 / (mf * lm.powf(a));
                t.add(f);
                l.add(f * lm);
                ll.add(f * lm.log2());
            }
            let rel = 32.0 * f64::EPSILON;
            let t = Interval::around(t.value(), rel);
            let big_a = Interval::around(l.value() + a * ll.value(), rel).widen(rel * t.hi);
            (t, big_a)
        }
        ProcessKind::Hpm2 | ProcessKind::Hmc => {
            let g = group_range_sums(a, 2, (n / 2) as u32);
            (g.plain, g.log + g.loglog * a)
        }
    };
    let mut c = normalization_constant(alpha).interval();
    if kind == ProcessKind::Hmc {
        c = c * (1.0 / 3.0);
    }
    let h = |c: Interval, t: Interval, big_a: Interval| {
        c * big_a + t * c.neg_xlog2x() + (Interval::point(1.0) - c * t).neg_xlog2x()
    };
    let pt = |x: Interval| Interval::point(x.mid());
    let value = h(pt(c), pt(t), pt(big_a)).mid();
    let enclosure = h(c, t, big_a);
    MIResult::from_bounds(value, enclosure.lo.max(0.0), enclosure.hi).nonnegative()
}

/// Terms of the identity `E(n) = H(D_n) + I(past; future | D_n)` on one table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnDnCheck {
    pub e: MIResult,
    pub h_dn: MIResult,
    pub conditional: MIResult,
    /// `E(n) - H(D_n) - I(past; future | D_n)` on point values.
    pub residual: f64,
    /// Combined certified width of the three terms.
    pub tolerance: f64,
}

impl EnDnCheck {
    pub fn holds(&self) -> bool {
        self.residual.abs() <= self.tolerance
    }
}

/// Evaluates the identity on a table using the decoder of `kind`.
pub fn en_dn_identity_check(table: &JointBlockTable, kind: ProcessKind) -> Result<EnDnCheck> {
    en_dn_identity_check_with(table, &Dn::new(kind))
}

/// As [`en_dn_identity_check`] with an explicit (possibly faulty) decoder.
pub fn en_dn_identity_check_with(table: &JointBlockTable, dn: &Dn) -> Result<EnDnCheck> {
    let h_dn = label_entropy(table, dn)?;
    let conditional = conditional_mi_given(table, dn)?;
    let e = block_mi(table);
    let residual = e.value - h_dn.value - conditional.value;
    let fp = 64.0 * f64::EPSILON * (e.value.abs() + h_dn.value + conditional.value + 1.0);
    Ok(EnDnCheck {
        e,
        h_dn,
        conditional,
        residual,
        tolerance: e.width() + h_dn.width() + conditional.width() + fp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    fn rev(s: &str) -> Vec<u8> {
        let mut v = syms(s);
        v.reverse();
        v
    }

    #[test]
    fn hpm1_examples() {
        for (s, m) in [("0010010", 3), ("0000000", 0), ("0101", 2)] {
            assert_eq!(decode_past_hpm1(&syms(s)).unwrap().value(), m, "{s}");
            assert_eq!(decode_future_hpm1(&rev(s)).unwrap().value(), m, "{s}");
        }
        assert!(matches!(decode_past_hpm1(&[0, 2]), Err(Error::InvalidSymbol { symbol: 2, .. })));
        // period 3 but the block is too short to guarantee it on the other side
        assert_eq!(decode_past_hpm1(&syms("01001")).unwrap().value(), 0);
    }

    #[test]
    fn hpm2_examples() {
        for (s, m) in [("201201", 5), ("2020", 2), ("0110", 0)] {
            // digits read forward on both sides
            assert_eq!(decode_past_hpm2(&syms(s)).unwrap().value(), m, "{s}");
            assert_eq!(decode_future_hpm2(&syms(s)).unwrap().value(), m, "{s}");
        }
        assert!(decode_future_hpm2(&[3]).is_err());
    }

    #[test]
    fn hmc_examples() {
        assert_eq!(decode_past_hmc(&syms("0201330")[..6]).unwrap().value(), 5);
        assert_eq!(decode_past_hmc(&syms("1120133")).unwrap().value(), 5);
        assert_eq!(decode_past_hmc(&syms("3013012")).unwrap().value(), 0);
        assert_eq!(decode_past_hmc(&syms("20133330")[..7]).unwrap().value(), 0);
        assert_eq!(decode_past_hmc(&syms("0120133330")[..9]).unwrap().value(), 0);
        assert_eq!(decode_future_hmc(&syms("301200")).unwrap().value(), 5);
        assert_eq!(decode_future_hmc(&syms("012000")).unwrap().value(), 0);
        assert_eq!(decode_future_hmc(&syms("33330120")).unwrap().value(), 0);
        assert!(decode_past_hmc(&[4]).is_err());
    }

    #[test]
    fn dn_value_rejects_level_one() {
        assert!(DnValue::new(1).is_err());
        assert_eq!(DnValue::new(0).unwrap(), DnValue::UNDETERMINED);
    }

    #[test]
    fn closed_form_degenerate_and_two_point() {
        let a = Alpha::new(1.5).unwrap();
        assert_eq!(dn_entropy_closed_form(ProcessKind::Hpm1, a, 3).value, 0.0);
        let h = dn_entropy_closed_form(ProcessKind::Hpm1, a, 4);
        let c = normalization_constant(a).mid();
        let p = c / 2.0;
        let expect = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert!(h.contains(expect), "{h:?} vs {expect}");
        assert!(h.width() < 1e-5);
    }

    #[test]
    fn closed_form_is_monotone() {
        for kind in ProcessKind::ALL {
            let a = Alpha::new(2.0).unwrap();
            let mut prev = 0.0;
            for n in 2..60 {
                let h = dn_entropy_closed_form(kind, a, n);
                assert!(h.value >= prev - 1e-12, "{kind} n={n}");
                prev = h.value;
            }
        }
    }

    #[test]
    fn fault_breaks_agreement() {
        let dn = Dn::with_fault(ProcessKind::Hpm1, DecoderFault::FutureOffByOne);
        assert_eq!(dn.of_past(&syms("0101")), 2);
        assert_eq!(dn.of_future(&syms("1010")), 3);
    }
}
