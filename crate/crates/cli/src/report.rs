//! Report document produced by a run, and its text rendering.

use std::fmt::Write as _;

use calagg::axioms::AxiomReport;
use calagg::scores::{BrierDecomposition, Fingerprint};
use calagg::synthetic::{ConsistencyLadder, VarianceResult};
use calagg::ScoreReport;
use serde::Serialize;

use crate::config::{ExperimentRequest, RunConfig, ScoreRequest};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub seed: Option<u64>,
    pub dataset: Option<DatasetSummary>,
    pub scores: Vec<ScoreEntry>,
    pub experiments: Vec<ExperimentEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub path: String,
    pub fingerprint: Fingerprint,
    pub features: Vec<String>,
    pub label_mean: f64,
    pub prediction_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreEntry {
    /// 1-based position in the config.
    pub index: usize,
    pub request: ScoreRequest,
    pub result: ScoreResult,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ScoreResult {
    Report(ScoreReport<f64>),
    Value { value: f64 },
    Decomposition(BrierDecomposition<f64>),
    Local { local_errors: Vec<LocalError> },
}

impl ScoreResult {
    /// The headline number of the result, when there is one.
    pub fn value(&self) -> Option<f64> {
        match self {
            ScoreResult::Report(r) => Some(r.value),
            ScoreResult::Value { value } => Some(*value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalError {
    pub anchor: usize,
    pub signed: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentEntry {
    pub index: usize,
    /// Seed derived from the master seed for this experiment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub request: ExperimentRequest,
    pub result: ExperimentResult,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum ExperimentResult {
    Axioms(AxiomReport<f64>),
    Variance(VarianceResult),
    Resolution(ResolutionSummary),
    Overlap(OverlapSummary),
    Ladder(LadderSummary),
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolutionSummary {
    pub equal_means: bool,
    pub predictions: Vec<f64>,
    pub union_error: f64,
    pub first_error: f64,
    pub second_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapSummary {
    pub features: Vec<Vec<f64>>,
    pub membership_counts: Vec<usize>,
    pub max: usize,
    pub min: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderSummary {
    pub ladder: ConsistencyLadder,
    /// Each rung within 20% above the previous one.
    pub decreasing: bool,
    pub final_below_half_of_first: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        if let Some(ds) = &self.dataset {
            let _ = writeln!(
                out,
                "dataset: {} (N = {}, d = {}, sha256 {})",
                ds.path, ds.fingerprint.n, ds.fingerprint.d, ds.fingerprint.sha256
            );
            let _ = writeln!(out, "  label mean {:.6}, prediction mean {:.6}", ds.label_mean, ds.prediction_mean);
        }
        for s in &self.scores {
            let _ = write!(out, "score #{} {}: ", s.index, s.request.kind());
            match &s.result {
                ScoreResult::Report(r) => {
                    let _ = writeln!(out, "{:.6} ({}, {} errors, {} groups)", r.value, r.agglomerator, r.signedness, r.groups.len());
                    let _ = writeln!(out, "  grouping: {}", describe_provenance(&r.provenance));
                    for note in &r.provenance.notes {
                        let _ = writeln!(out, "  note: {note}");
                    }
                }
                ScoreResult::Value { value } => {
                    let _ = writeln!(out, "{value:.6}");
                }
                ScoreResult::Decomposition(d) => {
                    let _ = writeln!(out, "calibration {:.6}, refinement {:.6}", d.calibration, d.refinement);
                }
                ScoreResult::Local { local_errors } => {
                    let max = local_errors.iter().map(|e| e.signed).fold(f64::NEG_INFINITY, f64::max);
                    let min = local_errors.iter().map(|e| e.signed).fold(f64::INFINITY, f64::min);
                    let _ = writeln!(out, "{} anchors, signed range [{min:.6}, {max:.6}]", local_errors.len());
                }
            }
        }
        for e in &self.experiments {
            let _ = write!(out, "experiment #{} {}: ", e.index, e.request.kind());
            match &e.result {
                ExperimentResult::Axioms(r) => {
                    let _ = writeln!(out, "{} ({} trials + {} fixtures)", r.agglomerator, r.trials, r.fixtures);
                    for v in &r.verdicts {
                        let status = if v.passed { "pass" } else { "FAIL" };
                        let _ = write!(out, "  {}: {status}", v.axiom);
                        if let Some(w) = &v.witness {
                            let _ = write!(out, " ({}; observed {}, bound {}, trial seed {})", w.detail, w.observed, w.bound, w.trial_seed);
                        }
                        out.push('\n');
                    }
                }
                ExperimentResult::Variance(v) => {
                    let _ = writeln!(
                        out,
                        "K = {}, {} resamples: empirical {:.6}, theoretical {:.6}",
                        v.group_size, v.resamples, v.empirical, v.theoretical
                    );
                }
                ExperimentResult::Resolution(r) => {
                    let _ = writeln!(
                        out,
                        "c(I1 u I2) = {:.3e}, c(I1) = {:.6}, c(I2) = {:.6}",
                        r.union_error, r.first_error, r.second_error
                    );
                }
                ExperimentResult::Overlap(o) => {
                    let _ = writeln!(out, "membership max {}, min {}", o.max, o.min);
                }
                ExperimentResult::Ladder(l) => {
                    let _ = writeln!(out, "{}", l.ladder.schedule);
                    for r in &l.ladder.rungs {
                        let _ = writeln!(out, "  N = {:>6}  parameter {:>10.4}  deviation {:.6}", r.n, r.parameter, r.deviation);
                    }
                    let _ = writeln!(out, "  decreasing: {}, final below half of first: {}", l.decreasing, l.final_below_half_of_first);
                }
            }
        }
        out
    }
}

fn describe_provenance(p: &calagg::Provenance) -> String {
    let params: Vec<String> = p.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}({})", p.constructor, params.join(", "))
}
