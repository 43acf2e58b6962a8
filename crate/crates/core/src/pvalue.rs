//! Validated p-value containers, threshold windows and the two counting
//! primitives everything else is built on.

use alloc::vec::Vec;

use crate::{Error, Result};

/// `p` lies in the upper tail of threshold `t`, i.e. `p >= 1 - t`.
///
/// Evaluated as `1 - p <= t` so that the jump point `t = 1 - p` computed in
/// floating point always counts `p` itself.
#[inline]
pub(crate) fn in_upper_tail(p: f64, t: f64) -> bool {
    1.0 - p <= t
}

/// An immutable, ascending-sorted set of p-values with the map back to the
/// caller's order.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueSet {
    values: Vec<f64>,
    perm: Vec<usize>,
}

impl PValueSet {
    /// Validates and sorts `raw`. Sorting is stable, so ties keep their
    /// input order.
    pub fn new(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Empty);
        }
        validate(raw)?;
        let mut perm: Vec<usize> = (0..raw.len()).collect();
        perm.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
        let values = perm.iter().map(|&i| raw[i]).collect();
        Ok(PValueSet { values, perm })
    }

    /// Builds a set from values that are already ascending; the identity
    /// permutation is used.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        validate(&values)?;
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::NotSorted { index: i + 2 });
        }
        let perm = (0..values.len()).collect();
        Ok(PValueSet { values, perm })
    }

    /// Number of hypotheses.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a set holds at least one p-value.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sorted p-values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `perm()[k]` is the 0-based input position of `values()[k]`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// P-values in their original input order.
    pub fn original_order(&self) -> Vec<f64> {
        self.scatter(&self.values)
    }

    /// Reorders a per-sorted-position vector into input order.
    pub fn scatter<T: Clone>(&self, sorted: &[T]) -> Vec<T> {
        assert_eq!(sorted.len(), self.len());
        let mut out: Vec<Option<T>> = (0..self.len()).map(|_| None).collect();
        for (k, &orig) in self.perm.iter().enumerate() {
            out[orig] = Some(sorted[k].clone());
        }
        out.into_iter().map(|v| v.expect("perm is a permutation")).collect()
    }

    /// `R(t)`: how many p-values are `<= t`.
    #[inline]
    pub fn count_rejections(&self, t: f64) -> usize {
        self.values.partition_point(|&v| v <= t)
    }

    /// How many p-values are strictly above `t`.
    #[inline]
    pub fn count_above(&self, t: f64) -> usize {
        self.len() - self.count_rejections(t)
    }

    /// `V̄'(t)`: how many p-values satisfy `p >= 1 - t`.
    #[inline]
    pub fn count_upper_tail(&self, t: f64) -> usize {
        self.len() - self.values.partition_point(|&v| !in_upper_tail(v, t))
    }
}

fn validate(raw: &[f64]) -> Result<()> {
    match raw.iter().position(|&v| !(v > 0.0 && v <= 1.0)) {
        Some(i) => Err(Error::InvalidPValue {
            index: i + 1,
            value: raw[i],
        }),
        None => Ok(()),
    }
}

/// The interval `[s1, s2]` of rejection thresholds over which the envelope
/// holds simultaneously.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdWindow {
    s1: f64,
    s2: f64,
}

impl ThresholdWindow {
    /// Requires `0 <= s1 < s2 <= 1`.
    pub fn new(s1: f64, s2: f64) -> Result<Self> {
        if !(s1 >= 0.0 && s1 < s2 && s2 <= 1.0) {
            return Err(Error::InvalidWindow { s1, s2 });
        }
        Ok(ThresholdWindow { s1, s2 })
    }

    /// Lower end.
    pub fn s1(&self) -> f64 {
        self.s1
    }

    /// Upper end.
    pub fn s2(&self) -> f64 {
        self.s2
    }

    /// Whether `t` lies in the closed interval.
    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        t >= self.s1 && t <= self.s2
    }

    /// Closed-testing statements need the window inside `[0, 1/2)`.
    pub fn supports_closed_testing(&self) -> bool {
        self.s2 < 0.5
    }
}

impl Default for ThresholdWindow {
    fn default() -> Self {
        ThresholdWindow { s1: 0.0, s2: 0.1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[f64]) -> PValueSet {
        PValueSet::new(v).unwrap()
    }

    #[test]
    fn ingest_sorts_and_keeps_index_map() {
        let p = set(&[0.9, 0.1]);
        assert_eq!(p.values(), &[0.1, 0.9]);
        assert_eq!(p.perm(), &[1, 0]);
        assert_eq!(p.original_order(), vec![0.9, 0.1]);

        let single = set(&[0.5]);
        assert_eq!(single.len(), 1);
        assert_eq!(single.values(), &[0.5]);
    }

    #[test]
    fn ingest_rejects_out_of_domain_values() {
        let err = PValueSet::new(&[0.0, 0.2]).unwrap_err();
        assert_eq!(err, Error::InvalidPValue { index: 1, value: 0.0 });
        assert_eq!(
            alloc::format!("{err}"),
            "p-value at index 1 outside (0,1]: 0"
        );
        assert!(PValueSet::new(&[0.2, 1.5]).is_err());
        assert!(PValueSet::new(&[0.2, f64::NAN]).is_err());
        assert!(PValueSet::new(&[f64::INFINITY]).is_err());
        assert_eq!(PValueSet::new(&[]).unwrap_err(), Error::Empty);
        assert!(PValueSet::new(&[1.0]).is_ok());
    }

    #[test]
    fn ties_keep_input_order() {
        let p = set(&[0.3, 0.2, 0.3, 0.2]);
        assert_eq!(p.perm(), &[1, 3, 0, 2]);
    }

    #[test]
    fn from_sorted_checks_order() {
        assert!(PValueSet::from_sorted(alloc::vec![0.1, 0.2, 0.2]).is_ok());
        assert_eq!(
            PValueSet::from_sorted(alloc::vec![0.1, 0.3, 0.2]).unwrap_err(),
            Error::NotSorted { index: 3 }
        );
    }

    #[test]
    fn rejection_counts() {
        assert_eq!(set(&[0.1, 0.3, 0.85, 0.95]).count_rejections(0.2), 1);
        assert_eq!(set(&[0.1, 0.3, 0.85, 0.95]).count_rejections(1.0), 4);
        assert_eq!(set(&[0.2, 0.2, 0.9]).count_rejections(0.2), 2);
    }

    #[test]
    fn upper_tail_counts() {
        assert_eq!(set(&[0.1, 0.85, 0.95]).count_upper_tail(0.2), 2);
        assert_eq!(set(&[0.1, 0.85, 1.0, 1.0]).count_upper_tail(0.0), 2);
        assert_eq!(set(&[0.3, 0.7]).count_upper_tail(0.0), 0);
        assert_eq!(set(&[0.5]).count_upper_tail(0.5), 1);
        // 1 - 0.3 rounds so that 1 - (1 - 0.3) != 0.3; the jump still counts 0.3.
        assert_eq!(set(&[0.3]).count_upper_tail(1.0 - 0.3), 1);
    }

    #[test]
    fn window_validation() {
        assert!(ThresholdWindow::new(0.0, 0.1).is_ok());
        assert!(ThresholdWindow::new(0.1, 0.1).is_err());
        assert!(ThresholdWindow::new(-0.1, 0.1).is_err());
        assert!(ThresholdWindow::new(0.0, 1.1).is_err());
        assert!(ThresholdWindow::new(0.0, 0.45).unwrap().supports_closed_testing());
        assert!(!ThresholdWindow::new(0.0, 0.5).unwrap().supports_closed_testing());
    }
}
