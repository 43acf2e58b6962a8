//! Simultaneous 50%-confidence envelopes for the false discovery proportion.
//!
//! Starting from nothing but a vector of p-values, this crate builds an
//! integer-valued upper bound `B(t)` on the number of false positives that
//! holds simultaneously for every rejection threshold `t` in a pre-chosen
//! window, with probability at least one half. From that envelope it derives
//! post hoc rejection thresholds, median-FDP adjusted p-values, and the
//! closed-testing bounds the envelope is equivalent to.
//!
//! The crate is `no_std` and only needs `alloc`. IO, the command line front
//! end and the parallel Monte Carlo driver live in the `mfdp` crate.

#![cfg_attr(not(test), no_std)]
#![warn(missing_docs)]
// `!(x >= 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod closed;
pub mod control;
pub mod envelope;
mod error;
pub mod estimate;
pub mod exact;
pub mod normal;
pub mod oracle;
pub mod pvalue;
pub mod simulation;

pub use closed::{
    brute_force_closed_bound, generalized_n_bound, generalized_v_bound, local_test,
    LocalTestStats, PsiWeight,
};
pub use control::{adjusted_pvalues, reject_at, t_max, AdjustedPValue, MfdpReport};
pub use envelope::{
    build_envelope, candidate_bound, kappa_max, CandidateFamilyConfig, Envelope, EnvelopeCurve,
    Kappa,
};
pub use error::Error;
pub use estimate::{
    fixed_threshold_report, median_unbiased_pi0, storey_pi0, FixedThresholdReport, Pi0Estimate,
    Pi0Method,
};
pub use pvalue::{PValueSet, ThresholdWindow};

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;
