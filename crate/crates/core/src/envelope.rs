//! The simultaneous envelope `B̃ = B^κmax` over the default candidate family
//! `B^κ(t) = ⌊(t + c) / κ⌋`, and its running-surplus improvement `B̃'`.
//!
//! `κ` is kept as an exact ratio `num / den` with a double numerator and an
//! integer denominator. That is precisely the form of every candidate that
//! can become `κmax`, and it lets the envelope be evaluated exactly at its
//! own binding points.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::exact::{cmp_products, floor_ratio};
use crate::pvalue::in_upper_tail;
use crate::{Error, PValueSet, Result, ThresholdWindow};

/// Slope parameter of a candidate envelope, `κ ∈ (0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa {
    /// `κ = num / den`.
    Finite {
        /// Positive numerator.
        num: f64,
        /// Positive denominator.
        den: u64,
    },
    /// `κ = ∞`; the candidate is identically zero.
    Infinite,
}

impl Kappa {
    /// A finite `κ` given as a plain number.
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Kappa::Finite { num: value, den: 1 })
        } else if value == f64::INFINITY {
            Ok(Kappa::Infinite)
        } else {
            Err(Error::param("kappa", "must be positive"))
        }
    }

    /// `κ` as a double (`f64::INFINITY` for the infinite candidate).
    pub fn value(&self) -> f64 {
        match *self {
            Kappa::Finite { num, den } => num / den as f64,
            Kappa::Infinite => f64::INFINITY,
        }
    }

    /// Whether `κ` is finite.
    pub fn is_finite(&self) -> bool {
        matches!(self, Kappa::Finite { .. })
    }

    /// `κ * factor`, for perturbation checks.
    pub fn scaled(&self, factor: f64) -> Kappa {
        match *self {
            Kappa::Finite { num, den } => Kappa::Finite {
                num: num * factor,
                den,
            },
            Kappa::Infinite => Kappa::Infinite,
        }
    }

    /// `B^κ(t) = ⌊(t + c) / κ⌋`, exactly.
    #[inline]
    pub fn bound(&self, c: f64, t: f64) -> u64 {
        match *self {
            Kappa::Finite { num, den } => floor_ratio(t + c, den, num),
            Kappa::Infinite => 0,
        }
    }

    /// Exact ordering of two slopes.
    pub fn cmp_exact(&self, other: &Kappa) -> Ordering {
        match (*self, *other) {
            (Kappa::Infinite, Kappa::Infinite) => Ordering::Equal,
            (Kappa::Infinite, _) => Ordering::Greater,
            (_, Kappa::Infinite) => Ordering::Less,
            (Kappa::Finite { num: a, den: b }, Kappa::Finite { num: c, den: d }) => {
                cmp_products(a, d, c, b)
            }
        }
    }
}

/// `B^κ(t)`; errors when `κ <= 0`.
pub fn candidate_bound(kappa: f64, c: f64, t: f64) -> Result<u64> {
    if !(c >= 0.0) {
        return Err(Error::param("c", "must be non-negative"));
    }
    if !(t >= 0.0) {
        return Err(Error::param("t", "must be non-negative"));
    }
    Ok(Kappa::new(kappa)?.bound(c, t))
}

/// Configuration of the default candidate family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFamilyConfig {
    c: f64,
    window: ThresholdWindow,
}

impl CandidateFamilyConfig {
    /// `c` is the intercept constant, `c >= 0`.
    pub fn new(c: f64, window: ThresholdWindow) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param("c", "must be finite and non-negative"));
        }
        Ok(CandidateFamilyConfig { c, window })
    }

    /// The recommended intercept `c = 1 / (2m)`.
    pub fn with_default_c(m: usize, window: ThresholdWindow) -> Self {
        CandidateFamilyConfig {
            c: 1.0 / (2.0 * m as f64),
            window,
        }
    }

    /// Intercept constant.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Threshold window.
    pub fn window(&self) -> ThresholdWindow {
        self.window
    }
}

/// Anything that supplies an integer upper bound on false positives over a
/// threshold window.
pub trait Envelope {
    /// Window over which the bound is simultaneous.
    fn window(&self) -> ThresholdWindow;

    /// Bound at `t`. Callers guarantee `t` is inside [`Envelope::window`].
    fn bound_at(&self, t: f64) -> u64;

    /// Bound at `t` when the caller already knows `r = R(t)`.
    fn bound_at_rank(&self, t: f64, r: usize) -> u64 {
        let _ = r;
        self.bound_at(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Improvement {
    // p-values <= s2, ascending
    values: Vec<f64>,
    // running max of the surplus [R(l) - B̃(l)]+ over l in {s1} ∪ {p_j >= s1, j <= k}
    running: Vec<u64>,
}

impl Improvement {
    fn bound_at(&self, t: f64) -> u64 {
        self.at_rank(self.values.partition_point(|&v| v <= t))
    }

    #[inline]
    fn at_rank(&self, r: usize) -> u64 {
        if r == 0 {
            return 0;
        }
        (r as u64) - self.running[r - 1]
    }
}

/// A right-continuous integer step function on the window: either `B̃`
/// itself or its improvement `B̃'`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCurve {
    kappa: Kappa,
    c: f64,
    window: ThresholdWindow,
    degenerate: bool,
    improvement: Option<Improvement>,
}

impl EnvelopeCurve {
    /// The raw candidate `B^κ` on `window`, without reference to data.
    pub fn from_candidate(kappa: Kappa, c: f64, window: ThresholdWindow) -> Self {
        EnvelopeCurve {
            kappa,
            c,
            window,
            degenerate: false,
            improvement: None,
        }
    }

    /// Slope of the underlying candidate.
    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    /// Intercept constant of the underlying candidate.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Whether this is the improved envelope `B̃'`.
    pub fn improved(&self) -> bool {
        self.improvement.is_some()
    }

    /// Set when some constraint had a zero numerator (a p-value equal to 1
    /// with `c = 0` and `s1 = 0`), which no `κ > 0` can satisfy. Such
    /// constraints are skipped when computing `κmax`.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    /// The unimproved value `B̃(t) = B^κ(t)`.
    #[inline]
    pub fn base_at(&self, t: f64) -> u64 {
        self.kappa.bound(self.c, t)
    }

    /// Envelope value at `t`; errors outside the window.
    pub fn value_at(&self, t: f64) -> Result<u64> {
        if !self.window.contains(t) {
            return Err(Error::OutOfWindow {
                t,
                s1: self.window.s1(),
                s2: self.window.s2(),
            });
        }
        Ok(self.bound_at(t))
    }

    /// Jump points of the step function inside the window together with
    /// the value attained from that point on. The first entry is `s1`.
    ///
    /// For the unimproved curve the jumps are those of `⌊(t + c)/κ⌋`; the
    /// list stops once the value exceeds `max_value`. The improved curve
    /// can only change at p-values, so `p` supplies its candidates.
    pub fn jumps(&self, p: &PValueSet, max_value: u64) -> Vec<(f64, u64)> {
        let (s1, s2) = (self.window.s1(), self.window.s2());
        let mut out = Vec::new();
        out.push((s1, self.bound_at(s1)));
        match &self.improvement {
            Some(_) => {
                for &v in p.values() {
                    if v > s1 && v <= s2 {
                        let value = self.bound_at(v);
                        if value != out.last().unwrap().1 {
                            out.push((v, value));
                        }
                    }
                }
            }
            None => {
                let Kappa::Finite { num, den } = self.kappa else {
                    return out;
                };
                let mut k = out[0].1 + 1;
                while k <= max_value {
                    let t = first_reaching(num, den, self.c, k);
                    if t > s2 {
                        break;
                    }
                    let value = self.bound_at(t);
                    out.push((t, value));
                    k = value + 1;
                }
            }
        }
        out
    }
}

impl Envelope for EnvelopeCurve {
    fn window(&self) -> ThresholdWindow {
        self.window
    }

    #[inline]
    fn bound_at(&self, t: f64) -> u64 {
        match &self.improvement {
            Some(imp) => imp.bound_at(t),
            None => self.base_at(t),
        }
    }

    #[inline]
    fn bound_at_rank(&self, t: f64, r: usize) -> u64 {
        match &self.improvement {
            Some(imp) => imp.at_rank(r),
            None => self.base_at(t),
        }
    }
}

/// Smallest double `t >= 0` with `⌊(t + c) κ⁻¹⌋ >= k`.
fn first_reaching(num: f64, den: u64, c: f64, k: u64) -> f64 {
    let kappa = Kappa::Finite { num, den };
    if kappa.bound(c, 0.0) >= k {
        return 0.0;
    }
    let mut hi = (k as f64 * num / den as f64 - c).max(0.0) * (1.0 + 1e-9) + f64::MIN_POSITIVE;
    while kappa.bound(c, hi) < k {
        hi *= 2.0;
    }
    // Non-negative doubles are ordered like their bit patterns.
    let (mut lo_bits, mut hi_bits) = (0u64, hi.to_bits());
    while hi_bits - lo_bits > 1 {
        let mid = lo_bits + (hi_bits - lo_bits) / 2;
        if kappa.bound(c, f64::from_bits(mid)) >= k {
            hi_bits = mid;
        } else {
            lo_bits = mid;
        }
    }
    f64::from_bits(hi_bits)
}

/// Result of the `κmax` sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
struct KappaSweep {
    kappa: Kappa,
    degenerate: bool,
}

fn sweep_kappa(p: &PValueSet, cfg: &CandidateFamilyConfig) -> KappaSweep {
    let window = cfg.window();
    let c = cfg.c();
    let values = p.values();
    let m = values.len();
    let mut best = Kappa::Infinite;
    let mut degenerate = false;
    let mut consider = |num: f64, den: u64, best: &mut Kappa| {
        if den == 0 {
            return;
        }
        if num <= 0.0 {
            degenerate = true;
            return;
        }
        let cand = Kappa::Finite { num, den };
        if cand.cmp_exact(best) == Ordering::Less {
            *best = cand;
        }
    };

    // κ0 at the left end of the window.
    let s1 = window.s1();
    consider(s1 + c, p.count_upper_tail(s1) as u64, &mut best);

    // κi at every jump 1 - p_i of V̄' inside the window. Jump points are
    // non-increasing along the sorted values, so the ones inside the window
    // form one block, and V̄'(1 - p_i) is m minus the start of the run of
    // equal jump points containing i.
    let lo = values.partition_point(|&v| 1.0 - v > window.s2());
    let hi = values.partition_point(|&v| 1.0 - v >= window.s1());
    let mut run_start = lo;
    for k in lo..hi {
        let jump = 1.0 - values[k];
        if jump != 1.0 - values[run_start] {
            run_start = k;
        }
        debug_assert!(window.contains(jump) && in_upper_tail(values[k], jump));
        consider(jump + c, (m - run_start) as u64, &mut best);
    }
    KappaSweep {
        kappa: best,
        degenerate,
    }
}

/// `κmax`: the largest `κ` whose candidate dominates `V̄'` on the window.
///
/// One pass over the sorted p-values after sorting. Constraints with a zero
/// numerator cannot be met by any `κ > 0` and are skipped; see
/// [`EnvelopeCurve::degenerate`].
pub fn kappa_max(p: &PValueSet, cfg: &CandidateFamilyConfig) -> Kappa {
    sweep_kappa(p, cfg).kappa
}

/// `B̃ = B^κmax` on the configured window.
pub fn build_envelope(p: &PValueSet, cfg: &CandidateFamilyConfig) -> EnvelopeCurve {
    let sweep = sweep_kappa(p, cfg);
    EnvelopeCurve {
        kappa: sweep.kappa,
        c: cfg.c(),
        window: cfg.window(),
        degenerate: sweep.degenerate,
        improvement: None,
    }
}

/// `B̃'(t) = R(t) - max{[R(l) - B̃(l)]+ : l ∈ T, l <= t}`.
///
/// The surplus `R - B̃` only rises at p-values (it falls at jumps of `B̃`),
/// so the running maximum is taken over `s1` and the p-values in the window
/// in one forward sweep.
pub fn improve_envelope(p: &PValueSet, env: &EnvelopeCurve) -> Result<EnvelopeCurve> {
    if env.improved() {
        return Err(Error::AlreadyImproved);
    }
    let window = env.window;
    let (s1, s2) = (window.s1(), window.s2());
    let all = p.values();
    let r_window = p.count_rejections(s2);
    let values: Vec<f64> = all[..r_window].to_vec();

    let surplus_s1 = (p.count_rejections(s1) as u64).saturating_sub(env.base_at(s1));
    let mut running = Vec::with_capacity(values.len());
    let mut current = surplus_s1;
    let mut k = 0;
    while k < values.len() {
        let v = values[k];
        let mut end = k + 1;
        while end < values.len() && values[end] == v {
            end += 1;
        }
        if v >= s1 {
            let surplus = (end as u64).saturating_sub(env.base_at(v));
            current = current.max(surplus);
        }
        running.extend(core::iter::repeat_n(current, end - k));
        k = end;
    }

    Ok(EnvelopeCurve {
        improvement: Some(Improvement {
            values,
            running,
        }),
        ..env.clone()
    })
}

/// Simultaneous FDP bound `min(env(t) / R(t), 1)`; `0` when `R(t) = 0` and
/// the envelope is `0`, and `1` when nothing is rejected but the envelope
/// is positive.
pub fn fdp_envelope_at<E: Envelope>(p: &PValueSet, env: &E, t: f64) -> Result<f64> {
    let window = env.window();
    if !window.contains(t) {
        return Err(Error::OutOfWindow {
            t,
            s1: window.s1(),
            s2: window.s2(),
        });
    }
    let r = p.count_rejections(t) as u64;
    Ok(fdp_ratio(env.bound_at(t), r))
}

pub(crate) fn fdp_ratio(bound: u64, r: u64) -> f64 {
    match (bound, r) {
        (0, _) => 0.0,
        (_, 0) => 1.0,
        (b, r) => (b.min(r) as f64) / r as f64,
    }
}

/// One row of the plotting table for an analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRow {
    /// Threshold.
    pub t: f64,
    /// `R(t)`.
    pub rejections: u64,
    /// `B̃(t)`.
    pub b_tilde: u64,
    /// `B̃'(t)`.
    pub b_tilde_prime: u64,
    /// `min(B̃'(t) / R(t), 1)`.
    pub fdp_bound: f64,
}

/// Tabulates `R`, `B̃`, `B̃'` and the FDP bound at every jump point of any
/// of them inside the window: `s1`, the p-values in the window, and the
/// jumps of `B̃` up to the value `m` (beyond `m` the FDP bound is 1).
pub fn envelope_table(p: &PValueSet, base: &EnvelopeCurve, improved: &EnvelopeCurve) -> Vec<EnvelopeRow> {
    let window = base.window;
    let mut ts: Vec<f64> = Vec::new();
    ts.push(window.s1());
    ts.extend(p.values().iter().copied().filter(|&v| window.contains(v)));
    ts.extend(
        base.jumps(p, p.len() as u64)
            .into_iter()
            .map(|(t, _)| t),
    );
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.into_iter()
        .map(|t| {
            let r = p.count_rejections(t) as u64;
            let b_prime = improved.bound_at(t);
            EnvelopeRow {
                t,
                rejections: r,
                b_tilde: base.bound_at(t),
                b_tilde_prime: b_prime,
                fdp_bound: fdp_ratio(b_prime, r),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[f64]) -> PValueSet {
        PValueSet::new(v).unwrap()
    }

    fn cfg(c: f64, s1: f64, s2: f64) -> CandidateFamilyConfig {
        CandidateFamilyConfig::new(c, ThresholdWindow::new(s1, s2).unwrap()).unwrap()
    }

    #[test]
    fn candidate_bound_examples() {
        assert_eq!(candidate_bound(0.1, 0.0, 0.35).unwrap(), 3);
        assert_eq!(candidate_bound(f64::INFINITY, 0.3, 0.9).unwrap(), 0);
        assert_eq!(candidate_bound(0.1, 0.05, 0.34).unwrap(), 3);
        assert!(candidate_bound(0.0, 0.0, 0.1).is_err());
        assert!(candidate_bound(-1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn kappa_max_examples() {
        let k = kappa_max(&set(&[0.3, 0.9]), &cfg(0.0, 0.0, 0.5));
        assert!((k.value() - 0.1).abs() < 1e-15);
        assert_eq!(k, Kappa::Finite { num: 1.0 - 0.9, den: 1 });

        let k = kappa_max(&set(&[0.1, 0.2]), &cfg(0.0, 0.0, 0.5));
        assert_eq!(k, Kappa::Infinite);

        let k = kappa_max(&set(&[0.6]), &cfg(0.05, 0.0, 0.5));
        assert!((k.value() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn build_envelope_examples() {
        let p = set(&[0.3, 0.9]);
        let env = build_envelope(&p, &cfg(0.0, 0.0, 0.5));
        assert_eq!(env.value_at(0.05).unwrap(), 0);
        assert_eq!(env.value_at(0.1).unwrap(), 1);
        assert_eq!(env.value_at(0.49).unwrap(), 4);
        assert!(env.value_at(0.6).is_err());
        assert!(!env.improved());

        let zero = build_envelope(&set(&[0.1, 0.2]), &cfg(0.0, 0.0, 0.5));
        for t in [0.0, 0.1, 0.5] {
            assert_eq!(zero.value_at(t).unwrap(), 0);
        }
    }

    #[test]
    fn degenerate_when_p_equals_one_without_intercept() {
        let p = set(&[0.2, 0.7, 1.0]);
        let env = build_envelope(&p, &cfg(0.0, 0.0, 0.5));
        assert!(env.degenerate());
        // Falls back to the positive constraint from p = 0.7.
        assert!((env.kappa().value() - 0.3 / 2.0).abs() < 1e-12);
        let ok = build_envelope(&p, &cfg(0.01, 0.0, 0.5));
        assert!(!ok.degenerate());
    }

    #[test]
    fn improvement_running_max_example() {
        // R(0.1) = 5 with B̃(0.1) = 1, then R stays 5 while B̃ rises to 3.
        let p = set(&[0.02, 0.04, 0.06, 0.08, 0.1, 0.9, 0.95]);
        let base = EnvelopeCurve::from_candidate(Kappa::new(0.0625).unwrap(), 0.0, ThresholdWindow::new(0.0, 0.5).unwrap());
        assert_eq!(base.bound_at(0.1), 1);
        assert_eq!(base.bound_at(0.2), 3);
        let imp = improve_envelope(&p, &base).unwrap();
        assert_eq!(imp.bound_at(0.2), 1);
        assert!(imp.improved());
        assert_eq!(improve_envelope(&p, &imp).unwrap_err(), Error::AlreadyImproved);
    }

    #[test]
    fn improvement_without_surplus_is_min_of_r_and_envelope() {
        let p = set(&[0.05, 0.3, 0.4]);
        let window = ThresholdWindow::new(0.0, 0.45).unwrap();
        let base = EnvelopeCurve::from_candidate(Kappa::new(0.01).unwrap(), 0.0, window);
        let imp = improve_envelope(&p, &base).unwrap();
        for t in [0.0, 0.01, 0.05, 0.2, 0.3, 0.45] {
            let r = p.count_rejections(t) as u64;
            assert!(r <= base.bound_at(t));
            assert_eq!(imp.bound_at(t), r.min(base.bound_at(t)));
        }
    }

    #[test]
    fn zero_envelope_stays_zero() {
        let p = set(&[0.01, 0.02, 0.3]);
        let base = build_envelope(&p, &cfg(0.0, 0.0, 0.5));
        assert_eq!(base.kappa(), Kappa::Infinite);
        let imp = improve_envelope(&p, &base).unwrap();
        for t in [0.0, 0.01, 0.015, 0.02, 0.3, 0.5] {
            assert_eq!(imp.value_at(t).unwrap(), 0);
        }
    }

    #[test]
    fn fdp_envelope_examples() {
        let p = set(&[0.01, 0.02, 0.03, 0.9]);
        let zero = EnvelopeCurve::from_candidate(Kappa::Infinite, 0.0, ThresholdWindow::new(0.0, 0.5).unwrap());
        assert_eq!(fdp_envelope_at(&p, &zero, 0.05).unwrap(), 0.0);
        assert_eq!(fdp_ratio(2, 1), 1.0);
        assert_eq!(fdp_ratio(1, 4), 0.25);
        assert_eq!(fdp_ratio(0, 0), 0.0);
        assert!(fdp_envelope_at(&p, &zero, 0.6).is_err());
    }

    #[test]
    fn jumps_of_unimproved_curve_hit_each_integer() {
        let p = set(&[0.3, 0.9]);
        let env = build_envelope(&p, &cfg(0.0, 0.0, 0.5));
        let jumps = env.jumps(&p, 100);
        let values: Vec<u64> = jumps.iter().map(|j| j.1).collect();
        assert_eq!(values, vec![0, 1, 2, 3, 4, 5]);
        for &(t, v) in &jumps[1..] {
            assert_eq!(env.bound_at(t), v);
            assert_eq!(env.bound_at(t.next_down()), v - 1);
        }
    }

    #[test]
    fn envelope_table_covers_pvalues_and_jumps() {
        let p = set(&[0.001, 0.002, 0.003, 0.9]);
        let base = build_envelope(&p, &cfg(0.0, 0.0, 0.5));
        let imp = improve_envelope(&p, &base).unwrap();
        let rows = envelope_table(&p, &base, &imp);
        assert_eq!(rows[0].t, 0.0);
        assert!(rows.iter().any(|r| r.t == 0.003 && r.rejections == 3 && r.b_tilde == 0));
        assert!(rows.windows(2).all(|w| w[0].t < w[1].t));
        assert!(rows.iter().all(|r| r.b_tilde_prime <= r.b_tilde));
    }
}
