//! Least-squares growth-rate fits.

use crate::error::{Error, Result};
use crate::model::{Alpha, ProcessKind};
use serde::{Deserialize, Serialize};

/// The function `g(n)` a series is regressed against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "type", content = "beta")]
pub enum Regressor {
    /// `value = a·log^β n + b`.
    LogPow(f64),
    /// `value = a·log n + b`.
    Log,
    /// `value = a·log log n + b`.
    LogLog,
    /// `log value = a·log n + b`; the slope is the fitted exponent.
    PowerLaw,
    /// `value = a·n^β + b`.
    Power(f64),
}

impl Regressor {
    pub fn describe(&self) -> String {
        match self {
            Regressor::LogPow(b) => format!("log^{b} n"),
            Regressor::Log => "log n".into(),
            Regressor::LogLog => "log log n".into(),
            Regressor::PowerLaw => "log-log power law".into(),
            Regressor::Power(b) => format!("n^{b}"),
        }
    }

    /// Transformed `(x, y)` for one point.
    fn transform(&self, n: f64, v: f64) -> Result<(f64, f64)> {
        let bad = |what: &str| Err(Error::DegenerateRegressor(format!("{what} at n = {n}")));
        match self {
            Regressor::LogPow(b) if n > 1.0 => Ok((n.log2().powf(*b), v)),
            Regressor::Log if n > 1.0 => Ok((n.log2(), v)),
            Regressor::LogLog if n > 2.0 => Ok((n.log2().log2(), v)),
            Regressor::PowerLaw if n > 0.0 && v > 0.0 => Ok((n.ln(), v.ln())),
            Regressor::Power(b) if n > 0.0 => Ok((n.powf(*b), v)),
            Regressor::LogLog => bad("log log n is not positive"),
            Regressor::PowerLaw => bad("log-log fit needs positive values"),
            _ => bad("regressor undefined"),
        }
    }
}

/// Growth class predicted for a process family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "class", content = "exponent")]
pub enum RateClass {
    /// `Θ(n^{2-α})`.
    Poly(f64),
    /// `Θ(log n)`.
    Log,
    /// `Θ(log^{2-α} n)`.
    LogPow(f64),
    /// `Θ(log log n)`.
    LogLog,
}

/// Predicted class of `E(n)` for `kind` at tail exponent `alpha`.
pub fn predicted_class(kind: ProcessKind, alpha: Alpha) -> RateClass {
    let e = 2.0 - alpha.value();
    match (kind, alpha.is_two()) {
        (ProcessKind::Hpm1, true) => RateClass::LogLog,
        (ProcessKind::Hpm1, false) => RateClass::LogPow(e),
        (_, true) => RateClass::Log,
        (_, false) => RateClass::Poly(e),
    }
}

/// Regressor that tests the predicted class directly.
pub fn default_regressor(class: RateClass) -> Regressor {
    match class {
        RateClass::Poly(_) => Regressor::PowerLaw,
        RateClass::Log => Regressor::Log,
        RateClass::LogPow(b) => Regressor::LogPow(b),
        RateClass::LogLog => Regressor::LogLog,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RateFitReport {
    pub kind: Option<ProcessKind>,
    pub alpha: Option<f64>,
    pub fitted_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub predicted_class: Option<RateClass>,
    pub regressor: String,
    pub n_min: f64,
    pub n_max: f64,
    pub points: usize,
}

impl RateFitReport {
    /// Attach the process whose series was fitted.
    pub fn for_process(mut self, kind: ProcessKind, alpha: Alpha) -> Self {
        self.kind = Some(kind);
        self.alpha = Some(alpha.value());
        self.predicted_class = Some(predicted_class(kind, alpha));
        self
    }
}

/// Ordinary least squares of the transformed series.
pub fn fit_rate(points: &[(f64, f64)], regressor: Regressor) -> Result<RateFitReport> {
    if points.len() < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 points, got {}", points.len())));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidParameter("n must be strictly increasing".into()));
    }
    let xy = points
        .iter()
        .map(|&(n, v)| regressor.transform(n, v))
        .collect::<Result<Vec<_>>>()?;
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateRegressor("regressor is constant over the points".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        let sse: f64 = xy.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFitReport {
        kind: None,
        alpha: None,
        fitted_slope: slope,
        intercept,
        r_squared,
        predicted_class: None,
        regressor: regressor.describe(),
        n_min: points[0].0,
        n_max: points[points.len() - 1].0,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Vec<f64> {
        (8..=64).step_by(4).map(|n| n as f64).collect()
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = grid().into_iter().map(|n| (n, 3.0 * n.sqrt())).collect();
        let r = fit_rate(&pts, Regressor::PowerLaw).unwrap();
        assert!((r.fitted_slope - 0.5).abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_log() {
        let pts: Vec<_> = grid().into_iter().map(|n| (n, 7.0 * n.log2() + 1.0)).collect();
        let r = fit_rate(&pts, Regressor::Log).unwrap();
        assert!((r.fitted_slope - 7.0).abs() < 1e-10);
        assert!((r.intercept - 1.0).abs() < 1e-9);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_input() {
        let pts = [(2.0, 1.0), (3.0, 2.0), (4.0, 3.0), (5.0, 4.0)];
        assert!(matches!(fit_rate(&pts, Regressor::LogLog), Err(Error::DegenerateRegressor(_))));
        assert!(fit_rate(&pts[..3], Regressor::Log).is_err());
        let unsorted = [(3.0, 1.0), (2.0, 2.0), (4.0, 3.0), (5.0, 4.0)];
        assert!(fit_rate(&unsorted, Regressor::Log).is_err());
        let neg = [(3.0, -1.0), (4.0, 2.0), (5.0, 3.0), (6.0, 4.0)];
        assert!(fit_rate(&neg, Regressor::PowerLaw).is_err());
    }

    #[test]
    fn class_table() {
        let a15 = Alpha::new(1.5).unwrap();
        let a2 = Alpha::new(2.0).unwrap();
        assert_eq!(predicted_class(ProcessKind::Hpm1, a15), RateClass::LogPow(0.5));
        assert_eq!(predicted_class(ProcessKind::Hpm2, a15), RateClass::Poly(0.5));
        assert_eq!(predicted_class(ProcessKind::Hmc, a2), RateClass::Log);
        assert_eq!(predicted_class(ProcessKind::Hpm1, a2), RateClass::LogLog);
    }

    #[test]
    fn report_serializes() {
        let pts: Vec<_> = grid().into_iter().map(|n| (n, n.log2())).collect();
        let r = fit_rate(&pts, Regressor::Log)
            .unwrap()
            .for_process(ProcessKind::Hmc, Alpha::new(2.0).unwrap());
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"rSquared\""));
        let back: RateFitReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #[test]
        fn r_squared_is_a_fraction(vals in proptest::collection::vec(0.01f64..100.0, 4..20)) {
            let pts: Vec<_> = vals.iter().enumerate().map(|(i, &v)| ((i + 3) as f64, v)).collect();
            for reg in [Regressor::Log, Regressor::LogLog, Regressor::PowerLaw, Regressor::LogPow(0.5)] {
                let r = fit_rate(&pts, reg).unwrap();
                prop_assert!((0.0..=1.0).contains(&r.r_squared));
            }
        }
    }
}
