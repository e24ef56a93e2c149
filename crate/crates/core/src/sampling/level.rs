//! Draws of the level indicator.
//!
//! Levels up to [`TABLE_LEVELS`] come from an inverse-CDF table. Beyond it
//! `t = log2 N` is drawn from the density `∝ t^{-α}` by inversion, rounded
//! up to an integer level and accepted with probability
//! `f(m) / ∫_{m-1}^m f`, which is at most one because `f` decreases. The
//! accepted draws follow `f(m)` exactly; the only approximation is the
//! split between table and tail, which uses the midpoint of the tail
//! enclosure.
//!
//! Levels past `2^63` cannot be held in a machine word. They are kept as a
//! digit count plus the top 64 binary digits; lower digits come from a hash
//! of a per-draw salt, standing in for digits that are close to uniform
//! under the level law.

use crate::model::{LevelLaw, ProcessModel};
use crate::series::{level_term, tail_enclosure, KahanSum};
use rand::Rng;
use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::{Arc, Mutex, OnceLock};

/// Levels covered by the inverse-CDF table.
pub const TABLE_LEVELS: u64 = 1 << 20;

/// Smallest digit count stored as a [`HugeLevel`].
const HUGE_DIGITS: f64 = 63.0;

/// A level too large for `u64`: `digits` binary digits, of which the top 64
/// are `top` (most significant first, so `top >> 63 == 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HugeLevel {
    pub digits: u128,
    pub top: u64,
    pub salt: u64,
}

impl HugeLevel {
    /// The `k`-th binary digit, `1 ≤ k ≤ digits`.
    pub fn digit(&self, k: u128) -> u8 {
        debug_assert!(k >= 1 && k <= self.digits);
        if k <= 64 {
            ((self.top >> (64 - k)) & 1) as u8
        } else {
            (splitmix64(self.salt ^ splitmix64(k as u64 ^ ((k >> 64) as u64).rotate_left(17))) & 1) as u8
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampledLevel {
    Exact(u64),
    Huge(HugeLevel),
}

impl SampledLevel {
    pub fn exact(self) -> Option<u64> {
        match self {
            SampledLevel::Exact(m) => Some(m),
            SampledLevel::Huge(_) => None,
        }
    }

    /// Binary length `s(N)`.
    pub fn digits(self) -> u128 {
        match self {
            SampledLevel::Exact(m) => (64 - m.leading_zeros()) as u128,
            SampledLevel::Huge(h) => h.digits,
        }
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th stream derived from `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

#[derive(Debug)]
struct Table {
    /// Cumulative weights of levels `2..=last`, normalized to the table mass.
    cdf: Vec<f64>,
    /// Probability of drawing beyond the table.
    tail: f64,
}

fn build_table(alpha: f64, last: u64, with_tail: bool) -> Table {
    let mut cdf = Vec::with_capacity((last - 1) as usize);
    let mut acc = KahanSum::new();
    for m in 2..=last {
        acc.add(level_term(alpha, m as f64));
        cdf.push(acc.value());
    }
    let head = acc.value();
    let tail = if with_tail {
        tail_enclosure(alpha, (last + 1) as f64).mid()
    } else {
        0.0
    };
    for c in &mut cdf {
        *c /= head;
    }
    Table {
        cdf,
        tail: tail / (head + tail),
    }
}

fn cached_table(alpha: f64, last: u64, with_tail: bool) -> Arc<Table> {
    type Cache = Mutex<HashMap<(u64, u64, bool), Arc<Table>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let key = (alpha.to_bits(), last, with_tail);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let t = Arc::new(build_table(alpha, last, with_tail));
    cache.lock().unwrap().insert(key, t.clone());
    t
}

/// `∫_{a}^{b} dx/(x log2^α x)` for `2 ≤ a < b`, in the log domain.
fn cell_integral(alpha: f64, a: f64, b: f64) -> f64 {
    let ta = a.log2();
    let dt = ((b - a) / a).ln_1p() / LN_2;
    // ln2 (ta^{1-α} - tb^{1-α})/(α-1), with the difference taken stably
    let q = 1.0 - alpha;
    let diff = -ta.powf(q) * (q * (dt / ta).ln_1p()).exp_m1();
    LN_2 * diff / (alpha - 1.0)
}

#[derive(Debug, Clone)]
pub struct LevelSampler {
    alpha: f64,
    law: LevelLaw,
    table: Option<Arc<Table>>,
    last: u64,
}

impl LevelSampler {
    pub fn new(model: &ProcessModel) -> Self {
        let alpha = model.alpha_value();
        let (table, last) = match model.law {
            LevelLaw::HeavyTailed => (Some(cached_table(alpha, TABLE_LEVELS, true)), TABLE_LEVELS),
            LevelLaw::Truncated(m) => (Some(cached_table(alpha, m, false)), m),
            LevelLaw::Point(m) => (None, m),
        };
        LevelSampler {
            alpha,
            law: model.law,
            table,
            last,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Probability that a draw lands beyond the inverse-CDF table.
    pub fn tail_probability(&self) -> f64 {
        self.table.as_ref().map_or(0.0, |t| t.tail)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledLevel {
        let Some(table) = &self.table else {
            return SampledLevel::Exact(self.last);
        };
        let u: f64 = rng.gen();
        if u < table.tail {
            return self.sample_tail(rng);
        }
        let v: f64 = rng.gen();
        let idx = table.cdf.partition_point(|&c| c < v);
        SampledLevel::Exact(2 + idx.min(table.cdf.len() - 1) as u64)
    }

    fn sample_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledLevel {
        debug_assert!(matches!(self.law, LevelLaw::HeavyTailed));
        let a = self.alpha;
        let t0 = (self.last as f64).log2();
        loop {
            // P(T > t) = (t/t0)^{1-α} for the continuous proposal.
            let v: f64 = 1.0 - rng.gen::<f64>();
            let t = t0 * v.powf(-1.0 / (a - 1.0));
            if t < HUGE_DIGITS {
                let m = t.exp2().ceil() as u64;
                if m <= self.last {
                    continue;
                }
                let mf = m as f64;
                let accept = level_term(a, mf) / cell_integral(a, mf - 1.0, mf);
                if rng.gen::<f64>() < accept {
                    return SampledLevel::Exact(m);
                }
            } else {
                // The acceptance ratio is within 2^{-62} of one here.
                let whole = t.floor();
                let frac = t - whole;
                let top = (frac.exp2() * (1u64 << 63) as f64) as u64 | (1 << 63);
                return SampledLevel::Huge(HugeLevel {
                    digits: whole as u128 + 1,
                    top,
                    salt: rng.gen(),
                });
            }
        }
    }
}

/// One draw of the heavy-tailed level law.
pub fn sample_level<R: Rng + ?Sized>(alpha: crate::model::Alpha, rng: &mut R) -> SampledLevel {
    let model = ProcessModel {
        kind: crate::model::ProcessKind::Hpm1,
        alpha,
        law: LevelLaw::HeavyTailed,
        norm_c: crate::model::CertifiedConstant { lower: 1.0, upper: 1.0 },
        norm_d: None,
    };
    LevelSampler::new(&model).sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{normalization_constant, Alpha, ProcessKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frequency_of_level_two() {
        let a = Alpha::new(1.5).unwrap();
        let s = LevelSampler::new(&ProcessModel::new(ProcessKind::Hpm1, a));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 1_000_000;
        let (mut two, mut four) = (0u32, 0u32);
        for _ in 0..draws {
            match s.sample(&mut rng) {
                SampledLevel::Exact(2) => two += 1,
                SampledLevel::Exact(4) => four += 1,
                _ => {}
            }
        }
        let p = normalization_constant(a).mid() / 2.0;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        let freq = two as f64 / draws as f64;
        assert!((freq - p).abs() < 4.0 * se, "{freq} vs {p}");
        // P(2)/P(4) = 4 · 2^α / 2 = 2^{α+1}
        let ratio = two as f64 / four as f64;
        let expect = 2f64.powf(2.5);
        let rel_se = (1.0 / two as f64 + 1.0 / four as f64).sqrt();
        assert!((ratio / expect - 1.0).abs() < 4.0 * rel_se, "{ratio} vs {expect}");
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = Alpha::new(1.2).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..1000).map(|_| sample_level(a, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn tail_frequency_matches_law() {
        // P(N > 2^30) relative to P(N > 2^20), both from the tail integral.
        let a = Alpha::new(1.5).unwrap();
        let s = LevelSampler::new(&ProcessModel::new(ProcessKind::Hpm2, a));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut beyond_table, mut beyond_30, mut huge) = (0u32, 0u32, 0u32);
        for _ in 0..400_000 {
            let l = s.sample(&mut rng);
            if l.digits() > 21 {
                beyond_table += 1;
            }
            if l.digits() > 31 {
                beyond_30 += 1;
            }
            if matches!(l, SampledLevel::Huge(h) if h.top >> 63 == 1) {
                huge += 1;
            }
        }
        let expect = (31.0f64 / 21.0).powf(-0.5);
        let got = beyond_30 as f64 / beyond_table as f64;
        assert!((got - expect).abs() < 0.02, "{got} vs {expect}");
        assert!(huge > 0);
    }

    #[test]
    fn cell_integral_brackets_term() {
        for m in [3.0, 100.0, 1e6, 1e15] {
            let i = cell_integral(1.5, m - 1.0, m);
            assert!(level_term(1.5, m) <= i && i <= level_term(1.5, m - 1.0));
        }
    }

    #[test]
    fn huge_digits_are_stable() {
        let h = HugeLevel {
            digits: 200,
            top: 0xA000_0000_0000_0000,
            salt: 5,
        };
        assert_eq!(h.digit(1), 1);
        assert_eq!(h.digit(2), 0);
        assert_eq!(h.digit(3), 1);
        assert_eq!(h.digit(150), h.digit(150));
    }
}
