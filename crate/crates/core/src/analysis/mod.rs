//! Analytic comparisons: lemma brackets, upper bounds, rate fits and report
//! rows.

mod bounds;
mod fit;
mod lemma;
mod report;

pub use bounds::{data_processing_bound, theorem1_bound};
pub use fit::{default_regressor, fit_rate, predicted_class, RateClass, RateFitReport, Regressor};
pub use lemma::{lemma1_partial, lemma1_tail, LemmaBracket};
pub use report::{write_report, ReportRow, Source};
