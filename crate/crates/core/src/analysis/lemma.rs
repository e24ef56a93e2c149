//! Integral brackets for the two series behind the level law.

use crate::model::Alpha;
use crate::series::{level_term, tail_integral};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// `[lower, upper]` with `delta = upper - lower`, the largest slack the
/// bracket allows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaBracket {
    pub lower: f64,
    pub upper: f64,
    pub delta: f64,
}

impl LemmaBracket {
    fn new(lower: f64, delta: f64) -> Self {
        LemmaBracket {
            lower,
            upper: lower + delta,
            delta,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Containment allowing `tol` of floating-point slack.
    pub fn contains_within(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }
}

/// Bracket for `Σ_{m=2}^{n} 1/(m log^{α-1} m)`: the integral over `[2, n]`
/// plus at most the first term, `1/2`.
pub fn lemma1_partial(alpha: Alpha, n: u64) -> LemmaBracket {
    assert!(n >= 2, "partial sums start at 2");
    let a = alpha.value();
    let ln = (n as f64).log2();
    let integral = if alpha.is_two() {
        LN_2 * LN_2 * ln.log2()
    } else {
        LN_2 / (2.0 - a) * (ln.powf(2.0 - a) - 1.0)
    };
    LemmaBracket::new(integral, 0.5)
}

/// Bracket for `Σ_{m=n}^{∞} 1/(m log^α m)`: the tail integral plus at most
/// the first term.
pub fn lemma1_tail(alpha: Alpha, n: u64) -> LemmaBracket {
    assert!(n >= 2, "tail sums start at 2");
    let a = alpha.value();
    let nf = n as f64;
    LemmaBracket::new(tail_integral(a, nf), level_term(a, nf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::KahanSum;

    fn partial_sum(a: f64, n: u64) -> f64 {
        (2..=n)
            .map(|m| {
                let mf = m as f64;
                1.0 / (mf * mf.log2().powf(a - 1.0))
            })
            .collect::<KahanSum>()
            .value()
    }

    #[test]
    fn partial_at_two() {
        let b = lemma1_partial(Alpha::new(2.0).unwrap(), 2);
        assert_eq!(b.lower, 0.0);
        assert_eq!(b.upper, 0.5);
        assert!(b.contains(partial_sum(2.0, 2)));
    }

    #[test]
    fn partial_contains_direct_sum() {
        let a = Alpha::new(1.5).unwrap();
        let n = 1 << 16;
        let b = lemma1_partial(a, n);
        assert!(b.contains(partial_sum(1.5, n)), "{b:?}");
        assert_eq!(b.delta, 0.5);
    }

    #[test]
    fn tail_widths_and_telescoping() {
        let a = Alpha::new(2.0).unwrap();
        let b = lemma1_tail(a, 2);
        assert!((b.lower - LN_2).abs() < 1e-15);
        assert!((b.delta - 0.5).abs() < 1e-15);
        let a = Alpha::new(1.5).unwrap();
        for n in [2u64, 10, 1000] {
            let hi = lemma1_tail(a, n);
            let lo = lemma1_tail(a, 2 * n);
            let finite: KahanSum = (n..2 * n).map(|m| level_term(1.5, m as f64)).collect();
            // difference of two brackets encloses the finite sum
            assert!(hi.lower - lo.upper <= finite.value() && finite.value() <= hi.upper - lo.lower);
        }
    }
}
