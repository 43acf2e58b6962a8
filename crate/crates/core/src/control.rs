//! Post hoc median-FDP control: the threshold `t_max(γ)`, rejection sets and
//! mFDP-adjusted p-values.
//!
//! The envelope is built once; `γ` is only a query parameter, so any number
//! of `γ` values can be tried against the same curve after looking at the
//! data. All comparisons `B(t)/R(t) <= γ` are made exactly as
//! `min(B(t), R(t)) <= γ·R(t)`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::num::NonZeroU64;

use crate::envelope::{fdp_ratio, Envelope};
use crate::exact::{cmp_ratios, ratio_at_most};
use crate::{Error, PValueSet, Result};

/// An mFDP-adjusted p-value: the exact ratio `min(B, R) / R` or unbounded.
#[derive(Debug, Clone, Copy)]
pub enum AdjustedPValue {
    /// `bound / rejections`, with `bound <= rejections` and `rejections >= 1`.
    Ratio {
        /// Clamped envelope value.
        bound: u64,
        /// Rejection count at the minimising threshold.
        rejections: NonZeroU64,
    },
    /// The p-value lies above the window; no `γ` rejects it.
    Unbounded,
}

impl AdjustedPValue {
    #[inline]
    fn ratio(bound: u64, rejections: u64) -> Self {
        debug_assert!(rejections > 0);
        AdjustedPValue::Ratio {
            bound: bound.min(rejections),
            rejections: NonZeroU64::new(rejections).unwrap_or(NonZeroU64::MIN),
        }
    }

    /// `min(bound, rejections) / rejections`; `None` when `rejections = 0`.
    pub fn from_counts(bound: u64, rejections: u64) -> Option<Self> {
        (rejections > 0).then(|| Self::ratio(bound, rejections))
    }

    /// Value as a double (`f64::INFINITY` when unbounded).
    pub fn value(&self) -> f64 {
        match *self {
            AdjustedPValue::Ratio { bound, rejections } => bound as f64 / rejections.get() as f64,
            AdjustedPValue::Unbounded => f64::INFINITY,
        }
    }

    /// Exact `self <= gamma`.
    pub fn is_at_most(&self, gamma: f64) -> bool {
        match *self {
            AdjustedPValue::Ratio { bound, rejections } => {
                ratio_at_most(bound, rejections.get(), gamma)
            }
            AdjustedPValue::Unbounded => false,
        }
    }

    /// Whether this is the unbounded value.
    pub fn is_unbounded(&self) -> bool {
        matches!(self, AdjustedPValue::Unbounded)
    }
}

impl Ord for AdjustedPValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use AdjustedPValue::*;
        match (*self, *other) {
            (Unbounded, Unbounded) => Ordering::Equal,
            (Unbounded, _) => Ordering::Greater,
            (_, Unbounded) => Ordering::Less,
            (
                Ratio {
                    bound: a,
                    rejections: b,
                },
                Ratio {
                    bound: c,
                    rejections: d,
                },
            ) => cmp_ratios(a, b.get(), c, d.get()),
        }
    }
}

impl PartialOrd for AdjustedPValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for AdjustedPValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AdjustedPValue {}

fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::param("gamma", "must lie in [0,1]"))
    }
}

#[inline]
fn admissible(bound: u64, r: u64, gamma: f64) -> bool {
    ratio_at_most(bound.min(r), r, gamma)
}

/// The largest qualifying threshold point and its rejection count.
fn largest_admissible_point<E: Envelope>(p: &PValueSet, env: &E, gamma: f64) -> Option<usize> {
    let window = env.window();
    let (s1, s2) = (window.s1(), window.s2());
    let values = p.values();
    let r_max = p.count_rejections(s2);
    // Between threshold points R is constant and B non-decreasing, so only
    // s1 and the p-values in the window need checking. Scan from the top.
    let mut k = r_max;
    while k > 0 {
        let t = values[k - 1];
        if t < s1 {
            break;
        }
        if admissible(env.bound_at_rank(t, k), k as u64, gamma) {
            return Some(k);
        }
        // skip the rest of a tie run; they share R(t)
        k -= 1;
        while k > 0 && values[k - 1] == t {
            k -= 1;
        }
    }
    let r_s1 = p.count_rejections(s1) as u64;
    if r_s1 > 0 && admissible(env.bound_at(s1), r_s1, gamma) {
        return Some(r_s1 as usize);
    }
    None
}

/// `t_max(γ)`: the largest p-value `p_i` for which some `t` in the window
/// with `t >= p_i` has `B(t)/R(t) <= γ`; `0` when there is none.
pub fn t_max<E: Envelope>(p: &PValueSet, env: &E, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(match largest_admissible_point(p, env, gamma) {
        Some(r) => p.values()[r - 1],
        None => 0.0,
    })
}

/// mFDP-adjusted p-values in sorted order (aligned with `p.values()`),
/// by a single backward sweep.
pub fn adjusted_pvalues_sorted<E: Envelope>(p: &PValueSet, env: &E) -> Vec<AdjustedPValue> {
    let mut ad = Vec::new();
    adjusted_pvalues_sorted_into(p, env, &mut ad);
    ad
}

/// [`adjusted_pvalues_sorted`] writing into a caller-owned buffer, which is
/// cleared first. Saves the allocation in repeated calls.
pub fn adjusted_pvalues_sorted_into<E: Envelope>(p: &PValueSet, env: &E, ad: &mut Vec<AdjustedPValue>) {
    let window = env.window();
    let (s1, s2) = (window.s1(), window.s2());
    let values = p.values();
    let m = values.len();
    ad.clear();
    ad.resize(m, AdjustedPValue::Unbounded);

    let r = p.count_rejections(s2);
    if r == 0 {
        return;
    }
    let at_s1 = || {
        let r1 = p.count_rejections(s1) as u64;
        AdjustedPValue::ratio(env.bound_at(s1), r1)
    };
    // R(p_(k)) for sorted position k: one past the end of k's tie run.
    let mut r_at = r;
    let mut run_end = |k: usize| {
        if k + 1 < r_at && values[k + 1] == values[k] {
            r_at
        } else {
            r_at = k + 1;
            r_at
        }
    };

    let top = r - 1;
    if s1 <= values[top] {
        let rk = run_end(top) as u64;
        ad[top] = AdjustedPValue::ratio(env.bound_at_rank(values[top], rk as usize), rk);
    } else {
        ad[top] = at_s1();
    }

    let mut l = top;
    let mut walking = l > 0 && s1 <= values[l - 1];
    while walking {
        let k = l - 1;
        let rk = run_end(k) as u64;
        ad[k] = ad[k + 1].min(AdjustedPValue::ratio(env.bound_at_rank(values[k], rk as usize), rk));
        l = k;
        walking = l > 0 && values[l - 1] >= s1;
    }
    if l > 0 {
        let shared = ad[l].min(at_s1());
        for slot in &mut ad[..l] {
            *slot = shared;
        }
    }
}

/// mFDP-adjusted p-values in the caller's original order.
pub fn adjusted_pvalues<E: Envelope>(p: &PValueSet, env: &E) -> Vec<AdjustedPValue> {
    p.scatter(&adjusted_pvalues_sorted(p, env))
}

/// Outcome of rejecting at one `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MfdpReport {
    /// Target median FDP.
    pub gamma: f64,
    /// Rejection threshold; 0 when nothing can be rejected.
    pub t_max: f64,
    /// 0-based input indices with `p <= t_max`, ascending.
    pub rejected: Vec<usize>,
    /// Simultaneous FDP bound valid for the rejected set.
    pub fdp_bound_at_tmax: f64,
    /// Adjusted p-values in input order.
    pub adjusted: Vec<AdjustedPValue>,
}

/// Rejects `{i : p_i <= t_max(γ)}` and assembles the report.
///
/// The FDP bound reported is the envelope ratio at `max(s1, t_max)`, the
/// smallest over thresholds whose rejection set equals the reported one.
pub fn reject_at<E: Envelope>(p: &PValueSet, env: &E, gamma: f64) -> Result<MfdpReport> {
    let sorted = adjusted_pvalues_sorted(p, env);
    reject_with(p, env, gamma, &sorted)
}

/// Like [`reject_at`], reusing adjusted p-values already computed by
/// [`adjusted_pvalues_sorted`].
pub fn reject_with<E: Envelope>(
    p: &PValueSet,
    env: &E,
    gamma: f64,
    adjusted_sorted: &[AdjustedPValue],
) -> Result<MfdpReport> {
    check_gamma(gamma)?;
    let t = t_max(p, env, gamma)?;
    let r = p.count_rejections(t);
    let mut rejected: Vec<usize> = p.perm()[..r].to_vec();
    rejected.sort_unstable();
    let fdp_bound_at_tmax = if r == 0 {
        0.0
    } else {
        let at = t.max(env.window().s1());
        fdp_ratio(env.bound_at(at), p.count_rejections(at) as u64)
    };
    Ok(MfdpReport {
        gamma,
        t_max: t,
        rejected,
        fdp_bound_at_tmax,
        adjusted: p.scatter(adjusted_sorted),
    })
}
