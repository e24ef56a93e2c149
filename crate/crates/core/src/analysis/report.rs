//! Report rows shared by every sweep.

use crate::error::Result;
use crate::model::ProcessKind;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// How a reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Exact,
    ClosedForm,
    Sampled,
    Bound,
}

/// One reported value with its asymmetric error bar: the value is believed
/// to lie in `[value - err_low, value + err_high]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub kind: ProcessKind,
    pub alpha: f64,
    pub n: usize,
    pub value: f64,
    pub err_low: f64,
    pub err_high: f64,
    pub source: Source,
}

/// Writes `rows` as CSV with a header line.
pub fn write_report<W: Write>(out: W, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| crate::error::Error::Io(e.to_string());
    w.write_record(["kind", "alpha", "n", "value", "err_low", "err_high", "source"])
        .map_err(io)?;
    for r in rows {
        let source = match r.source {
            Source::Exact => "exact",
            Source::ClosedForm => "closed_form",
            Source::Sampled => "sampled",
            Source::Bound => "bound",
        };
        w.write_record([
            r.kind.name().to_string(),
            format!("{}", r.alpha),
            r.n.to_string(),
            format!("{:.16e}", r.value),
            format!("{:.16e}", r.err_low),
            format!("{:.16e}", r.err_high),
            source.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
