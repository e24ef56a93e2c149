//! Block mutual information of countable-state hidden Markov processes.
//!
//! The crate builds three stationary hidden Markov processes whose hidden
//! levels follow the heavy-tailed law `P(N = n) = C/(n log^α n)`, and
//! computes the block mutual information
//! `E(n) = I(X_{-n+1}^0; X_1^n)` between adjacent blocks of the observable
//! process:
//!
//! * [`model`]: states, kernels, emissions and certified normalization
//!   constants.
//! * [`exact`]: exact joint block tables with tracked missing mass, and
//!   entropies / mutual informations with certified error intervals.
//! * [`sampling`]: seeded trajectories and plug-in / Miller–Madow
//!   estimators.
//! * [`decoder`]: level decoders that read the same value off the past and
//!   the future block, and the closed-form entropy of that value.
//! * [`analysis`]: integral brackets for the level series, the upper-bound
//!   curve for `E(n)`, growth-rate fits and report rows.

pub mod analysis;
pub mod block;
pub mod decoder;
pub mod error;
pub mod exact;
pub mod interval;
pub mod model;
pub mod sampling;
pub mod series;

pub use error::{Error, Result};
pub use interval::Interval;
pub use model::{Alpha, ProcessKind, ProcessModel, StateId};

/// Library version recorded in every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
