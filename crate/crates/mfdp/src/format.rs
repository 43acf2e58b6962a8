//! Deterministic text output: `%.17g`-style numbers and the CSV documents
//! written by each subcommand.

use std::fmt::Write;

use mfdp_core::envelope::EnvelopeRow;
use mfdp_core::simulation::{McResult, Scenario};
use mfdp_core::{AdjustedPValue, FixedThresholdReport, MfdpReport, Pi0Estimate};

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros removed,
/// exponent notation outside `1e-4 <= |x| < 1e17`. Infinity prints as `Inf`.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (16 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Adjusted p-value as printed: the clamped ratio, or `Inf`.
pub fn adjusted(a: &AdjustedPValue) -> String {
    real(a.value())
}

/// `index,p_value,adjusted` in input order (1-based index).
pub fn adjusted_csv(original: &[f64], adjusted: &[AdjustedPValue]) -> String {
    let mut s = String::from("index,p_value,adjusted\n");
    for (i, (p, a)) in original.iter().zip(adjusted).enumerate() {
        let _ = writeln!(s, "{},{},{}", i + 1, real(*p), self::adjusted(a));
    }
    s
}

/// `gamma,t_max,rejections,fdp_bound`, one row per `γ`.
pub fn summary_csv(reports: &[MfdpReport]) -> String {
    let mut s = String::from("gamma,t_max,rejections,fdp_bound\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            real(r.gamma),
            real(r.t_max),
            r.rejected.len(),
            real(r.fdp_bound_at_tmax)
        );
    }
    s
}

/// `t,R,B_tilde,B_tilde_prime,fdp_bound` at every jump point.
pub fn envelope_csv(rows: &[EnvelopeRow]) -> String {
    let mut s = String::from("t,R,B_tilde,B_tilde_prime,fdp_bound\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            real(r.t),
            r.rejections,
            r.b_tilde,
            r.b_tilde_prime,
            real(r.fdp_bound)
        );
    }
    s
}

/// One estimate as printed.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    /// Method label.
    pub method: String,
    /// `λ` or `t`.
    pub tuning: f64,
    /// Unclamped estimate.
    pub raw: f64,
    /// `min(raw, 1)`.
    pub clamped: f64,
}

impl From<&Pi0Estimate> for EstimateRow {
    fn from(e: &Pi0Estimate) -> Self {
        EstimateRow {
            method: e.method.name().to_string(),
            tuning: e.tuning,
            raw: e.raw,
            clamped: e.clamped,
        }
    }
}

/// `method,tuning,raw,clamped`.
pub fn estimate_csv(estimates: &[EstimateRow]) -> String {
    let mut s = String::from("method,tuning,raw,clamped\n");
    for e in estimates {
        let _ = writeln!(s, "{},{},{},{}", e.method, real(e.tuning), real(e.raw), real(e.clamped));
    }
    s
}

/// `t,R,V_bar,fdp_bound,tdp_lower,S_lower`.
pub fn fixed_threshold_csv(r: &FixedThresholdReport) -> String {
    format!(
        "t,R,V_bar,fdp_bound,tdp_lower,S_lower\n{},{},{},{},{},{}\n",
        real(r.t),
        r.rejections,
        r.v_bar,
        real(r.fdp_bound),
        real(r.tdp_lower),
        r.s_lower
    )
}

/// One simulated scenario and what was estimated for it.
#[derive(Debug, Clone)]
pub struct SimulationRow {
    /// The scenario.
    pub scenario: Scenario,
    /// Estimates; fields that were not requested are empty.
    pub result: McResult,
}

/// One row per scenario. Power columns follow the configured `γ` grid and
/// BH levels of the first row; missing estimates print as empty fields.
pub fn simulation_csv(rows: &[SimulationRow]) -> String {
    let Some(first) = rows.first() else {
        return String::new();
    };
    let cfg = first.scenario.config();
    let mut s = String::from("pi0,setting,rho,delta,m,reps,error_rate,error_se");
    for g in &cfg.gamma_grid {
        let _ = write!(s, ",power_{g},se_{g}");
    }
    for a in &cfg.bh_alpha {
        let _ = write!(s, ",bh_{a},se_bh_{a}");
    }
    s.push('\n');
    for row in rows {
        let c = row.scenario.config();
        let _ = write!(
            s,
            "{},{},{},{},{},{}",
            real(c.pi0),
            c.dependence.code(),
            real(c.dependence.rho()),
            real(c.delta),
            c.m,
            row.result.reps_used
        );
        match row.result.error_rate {
            Some(r) => {
                let _ = write!(s, ",{},{}", real(r.estimate), real(r.se));
            }
            None => s.push_str(",,"),
        }
        for i in 0..cfg.gamma_grid.len() {
            match row.result.power_by_gamma.get(i) {
                Some((_, r)) => {
                    let _ = write!(s, ",{},{}", real(r.estimate), real(r.se));
                }
                None => s.push_str(",,"),
            }
        }
        for i in 0..cfg.bh_alpha.len() {
            match row.result.bh_power.get(i) {
                Some((_, r)) => {
                    let _ = write!(s, ",{},{}", real(r.estimate), real(r.se));
                }
                None => s.push_str(",,"),
            }
        }
        s.push('\n');
    }
    s
}
