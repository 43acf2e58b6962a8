//! Closed-testing counterparts of the envelope.
//!
//! Two families live here. The `ψ`-weighted local tests generalise the
//! counting estimators `V̄'` and `m·π̄0`; with `ψ ≡ 1` they reduce to them
//! exactly. [`brute_force_closed_bound`] enumerates subsets to compute the
//! simultaneous closed-testing bound `B̄(I)`, which for `I = R(t)` must equal
//! the improved envelope `B̃'(t)`. It is exponential and meant as an oracle.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::envelope::Envelope;
use crate::pvalue::in_upper_tail;
use crate::{Error, PValueSet, Result, ThresholdWindow};

/// Largest index set [`brute_force_closed_bound`] will enumerate.
pub const MAX_ENUMERATION: usize = 22;

/// A non-decreasing weight `ψ: [0, 1/2] → ℝ` applied to `|1/2 - p|`.
pub enum PsiWeight {
    /// `ψ ≡ 1`; recovers the plain counting statistics.
    ConstantOne,
    /// `ψ(x) = x`; the local test compares the mean p-value with 1/2.
    Linear,
    /// `ψ(x) = x²`.
    Quadratic,
    /// Caller-supplied weight, checked for monotonicity when built.
    Custom(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for PsiWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PsiWeight {
    /// Wraps a custom weight after checking it is non-decreasing on a grid of
    /// 1025 points in `[0, 1/2]`.
    pub fn custom<F>(f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        const STEPS: usize = 1024;
        let mut prev = f(0.0);
        for k in 1..=STEPS {
            let x = 0.5 * k as f64 / STEPS as f64;
            let y = f(x);
            if !(y >= prev) {
                return Err(Error::param("psi", "must be non-decreasing on [0, 1/2]"));
            }
            prev = y;
        }
        Ok(PsiWeight::Custom(Box::new(f)))
    }

    /// Preset by name: `one`, `linear` or `quadratic`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "one" | "constant" | "constant_one" => Some(PsiWeight::ConstantOne),
            "linear" | "x" => Some(PsiWeight::Linear),
            "quadratic" | "x2" => Some(PsiWeight::Quadratic),
            _ => None,
        }
    }

    /// Short name.
    pub fn name(&self) -> &'static str {
        match self {
            PsiWeight::ConstantOne => "constant_one",
            PsiWeight::Linear => "linear",
            PsiWeight::Quadratic => "quadratic",
            PsiWeight::Custom(_) => "custom",
        }
    }

    /// `ψ(x)`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PsiWeight::ConstantOne => 1.0,
            PsiWeight::Linear => x,
            PsiWeight::Quadratic => x * x,
            PsiWeight::Custom(f) => f(x),
        }
    }

    #[inline]
    fn weight(&self, p: f64) -> f64 {
        self.eval(libm::fabs(0.5 - p))
    }
}

/// Statistics of the local test `δ(I) = 1(W⁻ > W⁺)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTestStats {
    /// `Σ ψ(|1/2 - p_i|)` over `i ∈ I` with `p_i <= t`.
    pub w_minus: f64,
    /// `Σ ψ(|p_i - 1/2|)` over `i ∈ I` with `p_i >= 1 - t`.
    pub w_plus: f64,
    /// `w_minus > w_plus`.
    pub reject: bool,
}

fn check_t(t: f64, upper: f64, inclusive: bool) -> Result<()> {
    let ok = t > 0.0 && if inclusive { t <= upper } else { t < upper };
    if ok {
        Ok(())
    } else {
        Err(Error::param("t", "outside the admissible range"))
    }
}

/// Local test of the intersection hypothesis over `indices` (0-based input
/// positions).
pub fn local_test(p: &PValueSet, indices: &[usize], t: f64, psi: &PsiWeight) -> Result<LocalTestStats> {
    check_t(t, 1.0, false)?;
    let original = p.original_order();
    let (mut w_minus, mut w_plus) = (0.0, 0.0);
    for &i in indices {
        let v = *original
            .get(i)
            .ok_or_else(|| Error::param("indices", "index out of range"))?;
        if v <= t {
            w_minus += psi.weight(v);
        }
        if in_upper_tail(v, t) {
            w_plus += psi.weight(v);
        }
    }
    Ok(LocalTestStats {
        w_minus,
        w_plus,
        reject: w_minus > w_plus,
    })
}

/// Sorted positions from largest to smallest p-value, ties by input index.
fn descending_order(p: &PValueSet) -> Vec<usize> {
    let values = p.values();
    let perm = p.perm();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(perm[a].cmp(&perm[b])));
    order
}

/// `ψ`-weighted median-unbiased bound on the number of true hypotheses:
/// `max{1 <= a <= m : W⁻(Q_a) <= W⁺(all)}`, with `Q_a` the `a` largest
/// p-values. Zero when no `a` qualifies.
pub fn generalized_n_bound(p: &PValueSet, t: f64, psi: &PsiWeight) -> Result<usize> {
    check_t(t, 1.0, false)?;
    let values = p.values();
    let w_plus_all: f64 = values
        .iter()
        .filter(|&&v| in_upper_tail(v, t))
        .map(|&v| psi.weight(v))
        .sum();
    let mut best = 0;
    let mut w_minus = 0.0;
    for (a, k) in descending_order(p).into_iter().enumerate() {
        let v = values[k];
        if v <= t {
            w_minus += psi.weight(v);
        }
        if w_minus <= w_plus_all {
            best = a + 1;
        }
    }
    Ok(best)
}

/// `ψ`-weighted median-unbiased bound on the false positives at `t`:
/// `max{1 <= a <= R(t) : W⁻(Q_a^t) <= W⁺({p_i >= 1 - t})}`, where `Q_a^t`
/// holds the `a` largest p-values among those `<= t`.
pub fn generalized_v_bound(p: &PValueSet, t: f64, psi: &PsiWeight) -> Result<usize> {
    check_t(t, 0.5, true)?;
    let values = p.values();
    let w_plus: f64 = values
        .iter()
        .filter(|&&v| in_upper_tail(v, t))
        .map(|&v| psi.weight(v))
        .sum();
    let r = p.count_rejections(t);
    let mut best = 0;
    let mut w_minus = 0.0;
    let rejected: Vec<usize> = descending_order(p)
        .into_iter()
        .filter(|&k| values[k] <= t)
        .collect();
    debug_assert_eq!(rejected.len(), r);
    for (a, k) in rejected.into_iter().enumerate() {
        w_minus += psi.weight(values[k]);
        if w_minus <= w_plus {
            best = a + 1;
        }
    }
    Ok(best)
}

/// Exhaustive `B̄(I) = max{|A| : ∅ ≠ A ⊆ I, R_A(t) <= B̃'(t) ∀ t ∈ T}`.
///
/// `env_prime` is the improved envelope. Both `R_A` and `B̃'` are
/// right-continuous steps that only move at p-values, so the condition is
/// checked at `s1` and at every p-value in the window. Subsets are visited
/// in Gray-code order, so each step toggles one element and updates the
/// per-checkpoint counts incrementally.
pub fn brute_force_closed_bound<E: Envelope>(
    p: &PValueSet,
    indices: &[usize],
    env_prime: &E,
    window: ThresholdWindow,
) -> Result<usize> {
    if indices.len() > MAX_ENUMERATION {
        return Err(Error::Capacity {
            size: indices.len(),
            limit: MAX_ENUMERATION,
        });
    }
    if !window.supports_closed_testing() {
        return Err(Error::param("window", "closed-testing bounds need s2 < 1/2"));
    }
    if window != env_prime.window() {
        return Err(Error::param("window", "does not match the envelope window"));
    }
    let n = indices.len();
    if n == 0 {
        return Ok(0);
    }
    let original = p.original_order();
    let members: Vec<f64> = indices
        .iter()
        .map(|&i| original.get(i).copied().ok_or_else(|| Error::param("indices", "index out of range")))
        .collect::<Result<_>>()?;

    let mut checkpoints: Vec<f64> = Vec::new();
    checkpoints.push(window.s1());
    checkpoints.extend(p.values().iter().copied().filter(|&v| window.contains(v)));
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.dedup();
    let limits: Vec<u64> = checkpoints.iter().map(|&t| env_prime.bound_at(t)).collect();
    // first checkpoint each member counts towards; members above s2 never count
    let first_cp: Vec<usize> = members
        .iter()
        .map(|&v| checkpoints.partition_point(|&t| t < v))
        .collect();

    let mut counts = alloc::vec![0u64; checkpoints.len()];
    let mut violations = 0usize;
    let mut in_set = alloc::vec![false; n];
    let mut size = 0usize;
    let mut best = 0usize;

    let total: u64 = 1u64 << n;
    for step in 1..total {
        let bit = step.trailing_zeros() as usize;
        let adding = !in_set[bit];
        in_set[bit] = adding;
        for cp in first_cp[bit]..checkpoints.len() {
            let before = counts[cp] > limits[cp];
            if adding {
                counts[cp] += 1;
            } else {
                counts[cp] -= 1;
            }
            let after = counts[cp] > limits[cp];
            match (before, after) {
                (false, true) => violations += 1,
                (true, false) => violations -= 1,
                _ => {}
            }
        }
        if adding {
            size += 1;
        } else {
            size -= 1;
        }
        if violations == 0 && size > best {
            best = size;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::{build_envelope, improve_envelope, CandidateFamilyConfig, EnvelopeCurve, Kappa};

    fn set(v: &[f64]) -> PValueSet {
        PValueSet::new(v).unwrap()
    }

    #[test]
    fn local_test_examples() {
        let p = set(&[0.1, 0.9]);
        let s = local_test(&p, &[0, 1], 0.2, &PsiWeight::ConstantOne).unwrap();
        assert_eq!((s.w_minus, s.w_plus, s.reject), (1.0, 1.0, false));

        let s = local_test(&p, &[0, 1], 0.2, &PsiWeight::Linear).unwrap();
        assert!((s.w_minus - 0.4).abs() < 1e-15 && (s.w_plus - 0.4).abs() < 1e-15);
        assert!(!s.reject);

        let s = local_test(&p, &[], 0.2, &PsiWeight::Quadratic).unwrap();
        assert_eq!((s.w_minus, s.w_plus, s.reject), (0.0, 0.0, false));

        assert!(local_test(&p, &[5], 0.2, &PsiWeight::Linear).is_err());
    }

    #[test]
    fn n_bound_examples() {
        let p = set(&[0.1, 0.3, 0.85, 0.95]);
        assert_eq!(generalized_n_bound(&p, 0.2, &PsiWeight::ConstantOne).unwrap(), 4);

        let p = set(&[0.01, 0.05, 0.1]);
        assert_eq!(generalized_n_bound(&p, 0.2, &PsiWeight::ConstantOne).unwrap(), 0);

        let p = set(&[0.1, 0.9]);
        assert_eq!(generalized_n_bound(&p, 0.2, &PsiWeight::Quadratic).unwrap(), 2);
    }

    #[test]
    fn v_bound_examples() {
        let p = set(&[0.1, 0.4, 0.95]);
        assert_eq!(generalized_v_bound(&p, 0.2, &PsiWeight::Linear).unwrap(), 1);

        let p = set(&[0.01, 0.1, 0.4]);
        assert_eq!(generalized_v_bound(&p, 0.2, &PsiWeight::Linear).unwrap(), 0);
        assert!(generalized_v_bound(&p, 0.6, &PsiWeight::Linear).is_err());
    }

    #[test]
    fn custom_psi_is_checked() {
        assert!(PsiWeight::custom(|x| x * x * x).is_ok());
        assert!(PsiWeight::custom(|x| -x).is_err());
        let psi = PsiWeight::custom(|x| 2.0 * x).unwrap();
        assert_eq!(psi.eval(0.25), 0.5);
        assert_eq!(psi.name(), "custom");
        assert!(PsiWeight::preset("linear").is_some());
        assert!(PsiWeight::preset("cubic").is_none());
    }

    #[test]
    fn closed_bound_edge_cases() {
        let p = set(&[0.01, 0.2, 0.3, 0.7]);
        let window = ThresholdWindow::new(0.0, 0.45).unwrap();
        let zero = EnvelopeCurve::from_candidate(Kappa::Infinite, 0.0, window);
        assert_eq!(brute_force_closed_bound(&p, &[], &zero, window).unwrap(), 0);
        // With a zero envelope only members above s2 fit.
        assert_eq!(brute_force_closed_bound(&p, &[0, 1, 3], &zero, window).unwrap(), 1);
        assert_eq!(brute_force_closed_bound(&p, &[0, 1], &zero, window).unwrap(), 0);

        let big: Vec<usize> = (0..23).collect();
        let p23 = PValueSet::new(&(1..=23).map(|i| i as f64 / 24.0).collect::<Vec<_>>()).unwrap();
        assert!(matches!(
            brute_force_closed_bound(&p23, &big, &zero, window),
            Err(Error::Capacity { size: 23, .. })
        ));
        let wide = ThresholdWindow::new(0.0, 0.5).unwrap();
        let zero_wide = EnvelopeCurve::from_candidate(Kappa::Infinite, 0.0, wide);
        assert!(brute_force_closed_bound(&p, &[0], &zero_wide, wide).is_err());
    }

    #[test]
    fn closed_bound_matches_improved_envelope_on_small_example() {
        let p = set(&[0.01, 0.03, 0.2, 0.3, 0.6, 0.75, 0.9]);
        let window = ThresholdWindow::new(0.0, 0.45).unwrap();
        let cfg = CandidateFamilyConfig::new(0.0, window).unwrap();
        let prime = improve_envelope(&p, &build_envelope(&p, &cfg)).unwrap();
        for &t in &[0.0, 0.01, 0.03, 0.2, 0.3] {
            let r_set: Vec<usize> = (0..p.len()).filter(|&i| p.original_order()[i] <= t).collect();
            assert_eq!(
                brute_force_closed_bound(&p, &r_set, &prime, window).unwrap() as u64,
                prime.bound_at(t)
            );
        }
    }
}
