//! JSON report written next to every sparsifier or verification run.

use serde::Serialize;

use crate::certify::{CertReport, Check, QualityStats};
use crate::sampler::SamplingPlan;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sizes {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub kept: usize,
    pub expected_kept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub overall: bool,
    pub checks: Vec<Check>,
    pub quality: Option<QualityStats>,
    pub plan: Option<SamplingPlan>,
    pub sizes: Option<Sizes>,
}

impl Report {
    pub fn new(cert: CertReport) -> Self {
        Self { overall: cert.overall, checks: cert.checks, quality: None, plan: None, sizes: None }
    }

    /// Pretty-printed JSON with a trailing newline. Field order is fixed, so
    /// equal reports serialize to equal bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }
}
