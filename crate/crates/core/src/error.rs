use alloc::string::String;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// No p-values were supplied.
    #[error("no p-values supplied")]
    Empty,
    /// A p-value is outside `(0, 1]` or not finite. `index` is 1-based.
    #[error("p-value at index {index} outside (0,1]: {value}")]
    InvalidPValue {
        /// 1-based position in the input.
        index: usize,
        /// The offending value.
        value: f64,
    },
    /// Values handed to a sorted constructor were not ascending.
    #[error("p-values are not sorted at position {index}")]
    NotSorted {
        /// 1-based position of the first descent.
        index: usize,
    },
    /// `0 <= s1 < s2 <= 1` does not hold.
    #[error("invalid threshold window [{s1}, {s2}]")]
    InvalidWindow {
        /// Lower end.
        s1: f64,
        /// Upper end.
        s2: f64,
    },
    /// A threshold was queried outside the envelope's window.
    #[error("threshold {t} outside window [{s1}, {s2}]")]
    OutOfWindow {
        /// Query point.
        t: f64,
        /// Window lower end.
        s1: f64,
        /// Window upper end.
        s2: f64,
    },
    /// A scalar parameter is out of its domain.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter {
        /// Parameter name.
        name: &'static str,
        /// What is wrong with it.
        reason: String,
    },
    /// The envelope was already improved.
    #[error("envelope is already improved")]
    AlreadyImproved,
    /// Exhaustive subset enumeration refused.
    #[error("index set of size {size} exceeds the enumeration limit {limit}; use the improved envelope instead")]
    Capacity {
        /// Requested set size.
        size: usize,
        /// Largest accepted size.
        limit: usize,
    },
    /// A dependence structure implies a covariance matrix that is not PSD.
    #[error("correlation structure is not positive semi-definite (smallest eigenvalue {min_eigenvalue})")]
    NotPositiveSemidefinite {
        /// Smallest eigenvalue of the implied correlation matrix.
        min_eigenvalue: f64,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
