//! Parallel Monte Carlo estimates over a [`Scenario`], and the scenario
//! lists behind the two simulation tables.
//!
//! Replicate `r` always uses stream `r` of the scenario seed and totals are
//! integer sums, so the output is identical regardless of thread count.

use mfdp_core::simulation::{Dependence, McResult, Scenario, ScenarioConfig};
use mfdp_core::{Error, Result};
use rayon::prelude::*;

/// Smallest replicate count accepted by the estimators.
pub const MIN_REPS: u64 = 100;

fn check_reps(scn: &Scenario) -> Result<u64> {
    let reps = scn.config().reps;
    if reps < MIN_REPS {
        return Err(Error::InvalidParameter {
            name: "reps",
            reason: format!("at least {MIN_REPS} replicates required"),
        });
    }
    Ok(reps)
}

/// Fraction of replicates in which the envelope is exceeded somewhere in the
/// window.
pub fn estimate_error_rate(scn: &Scenario) -> Result<McResult> {
    let reps = check_reps(scn)?;
    let events = (0..reps).into_par_iter().filter(|&r| scn.error_event(r)).count() as u64;
    Ok(McResult::from_error_count(events, reps))
}

/// Average fraction of false hypotheses rejected, for every `γ` and BH
/// level in the configuration.
pub fn estimate_power(scn: &Scenario) -> Result<McResult> {
    let reps = check_reps(scn)?;
    if scn.n_false() == 0 {
        return Err(Error::InvalidParameter {
            name: "pi0",
            reason: "power needs at least one false hypothesis".into(),
        });
    }
    let cfg = scn.config();
    let (ng, nb) = (cfg.gamma_grid.len(), cfg.bh_alpha.len());
    let totals = (0..reps)
        .into_par_iter()
        .map(|r| {
            let s = scn.power_sample(r);
            let mut v = s.rejected_false_by_gamma;
            v.extend(s.rejected_false_bh);
            v
        })
        .reduce(
            || vec![0u64; ng + nb],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut out = McResult::from_error_count(0, reps);
    out.error_rate = None;
    Ok(out.with_power(scn, &totals[..ng], &totals[ng..], reps))
}

/// The dependence settings of the error-rate table, in row order.
pub fn table1_settings() -> Vec<Dependence> {
    vec![
        Dependence::Independent,
        Dependence::Homogeneous { rho: 0.2 },
        Dependence::Homogeneous { rho: 0.5 },
        Dependence::Homogeneous { rho: 0.9 },
        Dependence::five_blocks(0.5),
        Dependence::five_blocks(0.9),
        Dependence::negative_blocks(),
    ]
}

/// Error-rate table rows: every setting at `π0 = 1` and at `π0 = 0.95`
/// with `Δ = 3`.
pub fn table1_scenarios() -> Vec<ScenarioConfig> {
    [(1.0, 0.0), (0.95, 3.0)]
        .into_iter()
        .flat_map(|(pi0, delta)| {
            table1_settings()
                .into_iter()
                .map(move |d| ScenarioConfig::new(d, pi0, delta))
        })
        .collect()
}

/// Power table rows: IN, HO(0.5), BL(0.8) and NE, each with `Δ ∈ {2, 3, 4}`
/// at `π0 = 0.9`.
pub fn table2_scenarios() -> Vec<ScenarioConfig> {
    let settings = [
        Dependence::Independent,
        Dependence::Homogeneous { rho: 0.5 },
        Dependence::five_blocks(0.8),
        Dependence::negative_blocks(),
    ];
    settings
        .into_iter()
        .flat_map(|d| [2.0, 3.0, 4.0].map(|delta| ScenarioConfig::new(d, 0.9, delta)))
        .collect()
}
