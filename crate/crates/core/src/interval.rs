//! Closed real intervals with outward-rounded arithmetic.
//!
//! Every operation widens its result by one ulp on each side, so an
//! interval computed from enclosures of exact inputs still encloses the
//! exact result despite round-to-nearest. Only the operations needed for
//! series enclosures and entropy bounds are provided.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Enclosure of a value computed by a short chain of correctly rounded
    /// operations, padded by the relative error `rel`.
    pub fn around(x: f64, rel: f64) -> Self {
        let pad = x.abs() * rel;
        Interval::new(x - pad, x + pad).outward()
    }

    pub fn hull(a: f64, b: f64) -> Self {
        Interval::new(a.min(b), a.max(b))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Relative half-width with respect to the midpoint.
    pub fn rel_radius(&self) -> f64 {
        let m = self.mid().abs();
        if m == 0.0 {
            if self.width() == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            0.5 * self.width() / m
        }
    }

    pub fn outward(self) -> Self {
        Interval {
            lo: self.lo.next_down(),
            hi: self.hi.next_up(),
        }
    }

    pub fn widen(self, slack: f64) -> Self {
        Interval::new(self.lo - slack, self.hi + slack).outward()
    }

    pub fn max0(self) -> Self {
        Interval {
            lo: self.lo.max(0.0),
            hi: self.hi.max(0.0),
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.lo > 0.0 || self.hi < 0.0, "reciprocal of interval containing 0");
        Interval::new(1.0 / self.hi, 1.0 / self.lo).outward()
    }

    pub fn div(self, rhs: Interval) -> Self {
        self * rhs.recip()
    }

    /// Base-2 logarithm of a strictly positive interval.
    pub fn log2(self) -> Self {
        assert!(self.lo > 0.0, "log2 of non-positive interval");
        Interval::new(self.lo.log2(), self.hi.log2())
            .widen(f64::EPSILON * 2.0 * self.hi.log2().abs().max(self.lo.log2().abs()))
    }

    /// Enclosure of `-x log2 x` over the interval, which must lie in [0, 1].
    pub fn neg_xlog2x(self) -> Self {
        let f = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
        let lo = self.lo.max(0.0);
        let hi = self.hi.min(1.0);
        // -x log x is increasing on [0, 1/e] and decreasing on [1/e, 1].
        let peak = std::f64::consts::E.recip();
        let (a, b) = (f(lo), f(hi));
        let top = if lo <= peak && peak <= hi { f(peak) } else { a.max(b) };
        let bottom = a.min(b);
        Interval::new(bottom, top).widen(4.0 * f64::EPSILON * top.max(1e-300))
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::new(self.lo + rhs.lo, self.hi + rhs.hi).outward()
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        Interval::new(self.lo - rhs.hi, self.hi - rhs.lo).outward()
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi).outward()
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, rhs: f64) -> Interval {
        self + Interval::point(rhs)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, rhs: f64) -> Interval {
        self - Interval::point(rhs)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, rhs: f64) -> Interval {
        self * Interval::point(rhs)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo, self.hi)
    }
}
