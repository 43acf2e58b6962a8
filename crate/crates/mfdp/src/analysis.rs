//! The `analyze` pipeline as a library call.

use mfdp_core::control::{adjusted_pvalues_sorted, reject_with};
use mfdp_core::envelope::{envelope_table, improve_envelope, EnvelopeRow};
use mfdp_core::{
    build_envelope, AdjustedPValue, CandidateFamilyConfig, EnvelopeCurve, MfdpReport, PValueSet,
    ThresholdWindow,
};
use serde_json::{json, Value};

use crate::{format, CliError};

/// Settings for one analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// Threshold window.
    pub window: ThresholdWindow,
    /// Envelope intercept; `None` means `1/(2m)`.
    pub c: Option<f64>,
    /// Target median FDP values.
    pub gammas: Vec<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            window: ThresholdWindow::default(),
            c: None,
            gammas: vec![0.05],
        }
    }
}

/// Envelope, improvement, adjusted p-values and per-`γ` rejections.
#[derive(Debug, Clone)]
pub struct Analysis {
    /// Sorted p-values.
    pub p: PValueSet,
    /// `B̃`.
    pub base: EnvelopeCurve,
    /// `B̃'`.
    pub improved: EnvelopeCurve,
    /// Adjusted p-values in input order.
    pub adjusted: Vec<AdjustedPValue>,
    /// One report per requested `γ`.
    pub reports: Vec<MfdpReport>,
}

/// Runs the full pipeline on p-values in input order.
pub fn analyze(values: &[f64], opts: &AnalysisOptions) -> Result<Analysis, CliError> {
    let p = PValueSet::new(values)?;
    let family = match opts.c {
        Some(c) => CandidateFamilyConfig::new(c, opts.window)?,
        None => CandidateFamilyConfig::with_default_c(p.len(), opts.window),
    };
    let base = build_envelope(&p, &family);
    let improved = improve_envelope(&p, &base)?;
    let sorted = adjusted_pvalues_sorted(&p, &improved);
    let reports = opts
        .gammas
        .iter()
        .map(|&g| reject_with(&p, &improved, g, &sorted))
        .collect::<Result<Vec<_>, _>>()?;
    let adjusted = p.scatter(&sorted);
    Ok(Analysis {
        p,
        base,
        improved,
        adjusted,
        reports,
    })
}

impl Analysis {
    /// Plot table of the envelope.
    pub fn envelope_rows(&self) -> Vec<EnvelopeRow> {
        envelope_table(&self.p, &self.base, &self.improved)
    }

    /// `adjusted.csv`.
    pub fn adjusted_csv(&self) -> String {
        format::adjusted_csv(&self.p.original_order(), &self.adjusted)
    }

    /// `summary.csv`.
    pub fn summary_csv(&self) -> String {
        format::summary_csv(&self.reports)
    }

    /// `envelope.csv`.
    pub fn envelope_csv(&self) -> String {
        format::envelope_csv(&self.envelope_rows())
    }

    /// Everything above as one JSON document.
    pub fn to_json(&self) -> Value {
        let original = self.p.original_order();
        json!({
            "m": self.p.len(),
            "window": [self.base.window().s1(), self.base.window().s2()],
            "c": self.base.c(),
            "kappa_max": kappa_json(&self.base),
            "adjusted": original.iter().zip(&self.adjusted).enumerate().map(|(i, (p, a))| json!({
                "index": i + 1,
                "p_value": p,
                "adjusted": adjusted_json(a),
            })).collect::<Vec<_>>(),
            "summary": self.reports.iter().map(|r| json!({
                "gamma": r.gamma,
                "t_max": r.t_max,
                "rejections": r.rejected.len(),
                "rejected": r.rejected.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "fdp_bound": r.fdp_bound_at_tmax,
            })).collect::<Vec<_>>(),
            "envelope": envelope_json(&self.envelope_rows()),
        })
    }
}

use mfdp_core::Envelope as _;

pub(crate) fn kappa_json(env: &EnvelopeCurve) -> Value {
    let k = env.kappa();
    if k.is_finite() {
        json!(k.value())
    } else {
        json!("Inf")
    }
}

pub(crate) fn adjusted_json(a: &AdjustedPValue) -> Value {
    if a.is_unbounded() {
        json!("Inf")
    } else {
        json!(a.value())
    }
}

pub(crate) fn envelope_json(rows: &[EnvelopeRow]) -> Value {
    rows.iter()
        .map(|r| {
            json!({
                "t": r.t,
                "R": r.rejections,
                "B_tilde": r.b_tilde,
                "B_tilde_prime": r.b_tilde_prime,
                "fdp_bound": r.fdp_bound,
            })
        })
        .collect()
}
