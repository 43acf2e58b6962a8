//! Slow reference implementations used to cross-check the linear-time
//! routines, plus random instance generators for those checks.

use alloc::vec::Vec;

use rand::Rng;

use crate::control::AdjustedPValue;
use crate::envelope::{CandidateFamilyConfig, Envelope, Kappa};
use crate::{PValueSet, ThresholdWindow};

/// `#{p_i <= t}` by a linear scan over the input order.
pub fn scan_rejections(p: &PValueSet, t: f64) -> usize {
    p.original_order().iter().filter(|&&v| v <= t).count()
}

/// `#{p_i >= 1 - t}` by a linear scan, in the same floating-point form as
/// the envelope (`1 - p_i <= t`).
pub fn scan_upper_tail(p: &PValueSet, t: f64) -> usize {
    p.original_order().iter().filter(|&&v| 1.0 - v <= t).count()
}

/// Adjusted p-values straight from the definition, in sorted order:
/// `min{env(t)/R(t) : t ∈ {s1, p_1, …, p_m}, max(s1, p_i) <= t <= s2}`.
pub fn naive_adjusted_pvalues<E: Envelope>(p: &PValueSet, env: &E) -> Vec<AdjustedPValue> {
    let window = env.window();
    let mut points: Vec<f64> = p.original_order();
    points.push(window.s1());
    p.values()
        .iter()
        .map(|&pi| {
            let lo = pi.max(window.s1());
            points
                .iter()
                .filter(|&&t| t >= lo && t <= window.s2())
                .map(|&t| {
                    let r = scan_rejections(p, t) as u64;
                    AdjustedPValue::from_counts(env.bound_at(t), r).expect("t >= p_i, so R(t) >= 1")
                })
                .min()
                .unwrap_or(AdjustedPValue::Unbounded)
        })
        .collect()
}

/// Whether no positive `κ` satisfies the constraint: `c = 0`, `s1 = 0` and
/// some `p_i = 1`, so `V̄'(t) >= 1` while `(t + c)/κ → 0` as `t → 0`.
pub fn is_degenerate(p: &PValueSet, cfg: &CandidateFamilyConfig) -> bool {
    cfg.c() == 0.0 && cfg.window().s1() == 0.0 && scan_upper_tail(p, 0.0) > 0
}

/// Checkpoints for the envelope constraint: `s1`, every `1 - p_i` in the
/// window and `grid + 1` equally spaced points. In the degenerate case only
/// the jump points of `V̄'` with `t + c > 0` are kept, matching the
/// fallback of skipping the unsatisfiable constraint.
fn constraint_points(p: &PValueSet, cfg: &CandidateFamilyConfig, grid: usize) -> Vec<f64> {
    let w = cfg.window();
    let mut ts: Vec<f64> = alloc::vec![w.s1()];
    ts.extend(p.values().iter().map(|&v| 1.0 - v).filter(|&t| w.contains(t)));
    if !is_degenerate(p, cfg) {
        ts.extend((0..=grid).map(|g| w.s1() + (w.s2() - w.s1()) * g as f64 / grid as f64));
    }
    ts.retain(|&t| w.contains(t) && t + cfg.c() > 0.0);
    ts
}

/// Whether `B^κ(t) >= V̄'(t)` at every checkpoint.
pub fn kappa_feasible(p: &PValueSet, cfg: &CandidateFamilyConfig, kappa: Kappa) -> bool {
    constraint_points(p, cfg, 256)
        .into_iter()
        .all(|t| kappa.bound(cfg.c(), t) >= scan_upper_tail(p, t) as u64)
}

/// Largest feasible `κ` among the closed-form candidates
/// `(s1 + c)/V̄'(s1)` and `(1 - p_i + c)/V̄'(1 - p_i)` for every `i`, `∞`,
/// and a geometric grid of 400 values spanning the candidates.
pub fn brute_force_kappa_max(p: &PValueSet, cfg: &CandidateFamilyConfig) -> Kappa {
    let c = cfg.c();
    let s1 = cfg.window().s1();
    let mut candidates: Vec<Kappa> = alloc::vec![Kappa::Infinite];
    let mut push = |num: f64, den: usize| {
        if den > 0 && num > 0.0 {
            candidates.push(Kappa::Finite { num, den: den as u64 });
        }
    };
    push(s1 + c, scan_upper_tail(p, s1));
    for &v in p.values() {
        let t = 1.0 - v;
        push(t + c, scan_upper_tail(p, t));
    }
    let finite: Vec<f64> = candidates.iter().filter(|k| k.is_finite()).map(|k| k.value()).collect();
    if let (Some(lo), Some(hi)) = (
        finite.iter().copied().reduce(f64::min),
        finite.iter().copied().reduce(f64::max),
    ) {
        let (lo, hi) = (lo * 0.5, hi * 2.0);
        for g in 0..400 {
            let x = lo * libm::pow(hi / lo, g as f64 / 399.0);
            candidates.push(Kappa::Finite { num: x, den: 1 });
        }
    }
    candidates
        .into_iter()
        .filter(|&k| kappa_feasible(p, cfg, k))
        .max_by(|a, b| a.cmp_exact(b))
        .expect("small enough slopes are always feasible")
}

/// `m` p-values mixing uniform nulls, small signal values, ties from
/// rounding to two decimals, and the occasional exact 1.
pub fn random_pvalues<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let signal: f64 = rng.random_range(0.0..0.9);
    let round = rng.random_bool(0.25);
    (0..m)
        .map(|_| {
            if rng.random_bool(0.02) {
                return 1.0;
            }
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            let v = if rng.random_bool(signal) { u * u * u * 0.2 } else { u };
            if round {
                (libm::ceil(v * 100.0) / 100.0).min(1.0)
            } else {
                v
            }
        })
        .collect()
}

/// A random window: `s1` is 0 half the time, `s2` anywhere above it.
pub fn random_window<R: Rng + ?Sized>(rng: &mut R, closed_testing: bool) -> ThresholdWindow {
    let top = if closed_testing { 0.49 } else { 1.0 };
    let s1 = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..top * 0.6) };
    let s2 = rng.random_range(s1..top);
    ThresholdWindow::new(s1, s2.max(s1 + 1e-3).min(top)).expect("valid window")
}

/// `c` from `{0, 1/(2m), 0.01}` or uniform on `[0, 0.05]`.
pub fn random_c<R: Rng + ?Sized>(rng: &mut R, m: usize) -> f64 {
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => 0.5 / m as f64,
        2 => 0.01,
        _ => rng.random_range(0.0..0.05),
    }
}
