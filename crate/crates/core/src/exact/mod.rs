//! Exact joint law of adjacent blocks and the information quantities built
//! on it.
//!
//! [`enumerate_joint`] materializes `P(X_{-n+1}^0, X_1^n)` as a
//! [`JointBlockTable`]: a finite table of block pairs plus an upper bound on
//! the probability mass that was not materialized (level tail, pruned
//! paths). Every information quantity computed from a table comes with an
//! error interval that is valid whatever the missing mass looks like.

mod enumerate;
mod info;
mod table;

pub use enumerate::{enumerate_joint, EnumerationOptions};
pub use info::{
    block_mi, conditional_mi_given, conditional_mi_given_pairs, entropy, event_entropy, entropy_future,
    entropy_past, label_entropy, triple_information, BlockLabel, MIResult,
};
pub use table::JointBlockTable;
