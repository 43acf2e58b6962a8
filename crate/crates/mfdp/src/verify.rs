//! Randomised check that the improved envelope equals the brute-force
//! closed-testing bound on the rejection sets it is evaluated on.

use mfdp_core::closed::brute_force_closed_bound;
use mfdp_core::envelope::improve_envelope;
use mfdp_core::{build_envelope, CandidateFamilyConfig, Envelope, PValueSet, Result, ThresholdWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One disagreement.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    /// P-values in input order.
    pub p: Vec<f64>,
    /// Envelope intercept.
    pub c: f64,
    /// Threshold.
    pub t: f64,
    /// `B̃'(t)`.
    pub envelope: u64,
    /// `B̄(R(t))`.
    pub closed: usize,
}

/// Outcome of [`check_equivalence`].
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// Instances drawn.
    pub instances: usize,
    /// Threshold points compared.
    pub checks: usize,
    /// Disagreements found.
    pub mismatches: Vec<Mismatch>,
}

/// A random instance: `m ∈ 5..=10`, a mix of uniform and small p-values,
/// some rounded to two decimals so that ties occur.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = rng.random_range(5..=10);
    let signal: f64 = rng.random_range(0.0..0.8);
    let round = rng.random_bool(0.3);
    (0..m)
        .map(|_| {
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            let v = if rng.random_bool(signal) { u.powi(3) * 0.5 } else { u };
            if round {
                ((v * 100.0).ceil() / 100.0).min(1.0)
            } else {
                v
            }
        })
        .collect()
}

/// Compares `B̃'(t)` with `B̄(R(t))` at `s1` and at every p-value in
/// `[0, 0.45]`, for `c` cycling through `0`, `1/(2m)` and `0.01`.
pub fn check_equivalence(instances: usize, seed: u64) -> Result<EquivalenceReport> {
    let window = ThresholdWindow::new(0.0, 0.45)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0;
    let mut mismatches = Vec::new();
    for k in 0..instances {
        let values = random_instance(&mut rng);
        let p = PValueSet::new(&values)?;
        let m = p.len();
        let c = [0.0, 0.5 / m as f64, 0.01][k % 3];
        let family = CandidateFamilyConfig::new(c, window)?;
        let improved = improve_envelope(&p, &build_envelope(&p, &family))?;
        let mut points = vec![window.s1()];
        points.extend(p.values().iter().copied().filter(|&v| window.contains(v)));
        points.dedup();
        for t in points {
            let r = p.count_rejections(t);
            let set: Vec<usize> = p.perm()[..r].to_vec();
            let closed = brute_force_closed_bound(&p, &set, &improved, window)?;
            let envelope = improved.bound_at(t);
            checks += 1;
            if envelope != closed as u64 {
                mismatches.push(Mismatch {
                    p: values.clone(),
                    c,
                    t,
                    envelope,
                    closed,
                });
            }
        }
    }
    Ok(EquivalenceReport {
        instances,
        checks,
        mismatches,
    })
}
