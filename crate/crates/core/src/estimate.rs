//! Fixed-threshold estimators: the Schweder-Spjøtvoll-Storey `π̂0`, its
//! median-unbiased counterpart `π̄0`, and the FDP/TDP bounds at one `t`.
//!
//! The Storey estimator is parametrised by `lambda`, the median-unbiased one
//! by the threshold `t`; the two conventions are related by `t = 1 - lambda`.

use crate::{Error, PValueSet, Result};

/// Which `π0` estimator produced a [`Pi0Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pi0Method {
    /// `|{p > λ}| / (m (1 - λ))`.
    Storey,
    /// `(|{p > t}| + |{p >= 1 - t}|) / m`.
    MedianUnbiased,
}

impl Pi0Method {
    /// Short lowercase name used in reports.
    pub fn name(&self) -> &'static str {
        match self {
            Pi0Method::Storey => "storey",
            Pi0Method::MedianUnbiased => "median_unbiased",
        }
    }
}

/// A `π0` estimate before and after clamping to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pi0Estimate {
    /// Unclamped value, may exceed 1.
    pub raw: f64,
    /// `min(raw, 1)`.
    pub clamped: f64,
    /// Estimator used.
    pub method: Pi0Method,
    /// `λ` for Storey, `t` for the median-unbiased estimator.
    pub tuning: f64,
}

impl Pi0Estimate {
    fn new(raw: f64, method: Pi0Method, tuning: f64) -> Self {
        Pi0Estimate {
            raw,
            clamped: raw.min(1.0),
            method,
            tuning,
        }
    }
}

fn open_unit(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, "must lie in (0,1)"))
    }
}

/// Storey's estimator with tuning parameter `lambda`.
pub fn storey_pi0(p: &PValueSet, lambda: f64) -> Result<Pi0Estimate> {
    open_unit("lambda", lambda)?;
    let above = p.count_above(lambda) as f64;
    let raw = above / (p.len() as f64 * (1.0 - lambda));
    Ok(Pi0Estimate::new(raw, Pi0Method::Storey, lambda))
}

/// The median-unbiased estimator of `π0` at threshold `t`.
pub fn median_unbiased_pi0(p: &PValueSet, t: f64) -> Result<Pi0Estimate> {
    open_unit("t", t)?;
    let count = p.count_above(t) + p.count_upper_tail(t);
    let raw = count as f64 / p.len() as f64;
    Ok(Pi0Estimate::new(raw, Pi0Method::MedianUnbiased, t))
}

/// Pointwise 50%-confidence statements at a single threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedThresholdReport {
    /// Threshold.
    pub t: f64,
    /// Rejections `R(t)`.
    pub rejections: usize,
    /// Upper bound `V̄(t)` on false positives.
    pub v_bar: usize,
    /// `min(V̄/R, 1)`, zero when nothing is rejected.
    pub fdp_bound: f64,
    /// `S̲ / R`, zero when nothing is rejected.
    pub tdp_lower: f64,
    /// Lower bound `R - min(V̄, R)` on true discoveries.
    pub s_lower: usize,
}

/// Median-unbiased FDP, TDP and true-discovery bounds at threshold `t`.
pub fn fixed_threshold_report(p: &PValueSet, t: f64) -> Result<FixedThresholdReport> {
    open_unit("t", t)?;
    let r = p.count_rejections(t);
    let v_bar = p.count_upper_tail(t);
    let s_lower = r - v_bar.min(r);
    let (fdp_bound, tdp_lower) = if r == 0 {
        (0.0, 0.0)
    } else {
        let fdp = (v_bar as f64 / r as f64).min(1.0);
        (fdp, s_lower as f64 / r as f64)
    };
    Ok(FixedThresholdReport {
        t,
        rejections: r,
        v_bar,
        fdp_bound,
        tdp_lower,
        s_lower,
    })
}
