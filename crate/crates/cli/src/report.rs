//! Report shapes and their JSON and CSV renderings.

use std::io::Write;

use coherent_teleport::linalg::CMatrix;
use coherent_teleport::teleport::LocalityReport;
use serde::Serialize;

use crate::config::Resolved;
use crate::CliError;

pub const CSV_HEADER: [&str; 10] =
    ["N", "d", "n", "m", "probability", "total_probability", "closed_form_total", "fidelity", "e1_residual", "e2_residual"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, d: Option<f64>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), d, residual, tolerance, pass: residual.is_finite() && residual <= tolerance }
    }
}

/// One `(d, n, m)` outcome.
#[derive(Clone, Debug, Serialize)]
pub struct OutcomeRecord {
    pub d: f64,
    pub n: usize,
    pub m: usize,
    pub probability: f64,
    /// Fidelity of the key-corrected recovered state with the input.
    pub fidelity: f64,
    /// Trace distance of Bob's conditional state from the key-conjugated
    /// input.
    pub e1_residual: f64,
    /// Bob's recovered qudit density matrix, rows of `[re, im]`.
    pub recovered: Vec<Vec<[f64; 2]>>,
}

/// Aggregates over all outcomes at one `d`.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub d: f64,
    pub total_probability: f64,
    pub closed_form_total: f64,
    pub min_fidelity: f64,
    pub e1_residual: f64,
    /// `|total_probability - 1|`.
    pub e2_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    pub seed: u64,
    /// False when Bob's vacuum test discarded the run.
    pub accepted: bool,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: Resolved,
    pub checks: Vec<Check>,
    pub outcomes: Vec<OutcomeRecord>,
    pub summaries: Vec<Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<SampleRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locality: Option<LocalityReport>,
}

impl Report {
    pub fn new(config: Resolved) -> Self {
        Report { config, checks: Vec::new(), outcomes: Vec::new(), summaries: Vec::new(), sample: None, locality: None }
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Outcome rows followed by one `n = m = all` row per `d`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(CSV_HEADER)?;
        let n = self.config.n.to_string();
        for s in &self.summaries {
            for o in self.outcomes.iter().filter(|o| o.d == s.d) {
                w.write_record([
                    n.clone(),
                    float(s.d),
                    o.n.to_string(),
                    o.m.to_string(),
                    float(o.probability),
                    float(s.total_probability),
                    float(s.closed_form_total),
                    float(o.fidelity),
                    float(o.e1_residual),
                    float(s.e2_residual),
                ])?;
            }
            w.write_record([
                n.clone(),
                float(s.d),
                "all".into(),
                "all".into(),
                float(s.total_probability),
                float(s.total_probability),
                float(s.closed_form_total),
                float(s.min_fidelity),
                float(s.e1_residual),
                float(s.e2_residual),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}
