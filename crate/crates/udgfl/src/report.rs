//! Run reports: JSON with per-stage diagnostics, audits and timings, plus a
//! CSV table of cost ratios.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use udgfl_core::pipeline::{run_pipeline, AuditOutcome, PipelineOutcome};
use udgfl_core::FLInstance;

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub vertices: usize,
    pub edges: usize,
    pub components: usize,
    pub clients: usize,
    pub facilities: usize,
}

impl InstanceSummary {
    pub fn of(inst: &FLInstance) -> Self {
        let g = inst.graph();
        InstanceSummary {
            vertices: g.n(),
            edges: g.edge_count(),
            components: g.component_count(),
            clients: inst.clients().len(),
            facilities: inst.facilities().len(),
        }
    }
}

/// Wall-clock milliseconds; excluded from determinism comparisons.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub solve_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub passed: usize,
    /// Names of failed audits with their witnesses.
    pub failed: Vec<String>,
}

impl AuditSummary {
    pub fn of(audits: &[AuditOutcome]) -> Self {
        AuditSummary {
            passed: audits.iter().filter(|a| a.passed).count(),
            failed: audits
                .iter()
                .filter(|a| !a.passed)
                .map(|a| match &a.witness {
                    Some(w) => format!("{}: {}", a.name, w),
                    None => a.name.clone(),
                })
                .collect(),
        }
    }

    pub fn ok(&self) -> bool {
        self.failed.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub config: RunConfig,
    pub instance: InstanceSummary,
    pub outcome: PipelineOutcome,
    pub audit: AuditSummary,
    pub timings: Timings,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with timings zeroed, for comparing runs.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.timings = Timings::default();
        r.to_json()
    }
}

/// Solves `inst` under `cfg` and assembles the report.
pub fn run(inst: &FLInstance, cfg: &RunConfig, label: &str) -> anyhow::Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let outcome = run_pipeline(inst, &cfg.solve)?;
    let solve_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(RunReport {
        label: label.to_string(),
        config: cfg.clone(),
        instance: InstanceSummary::of(inst),
        audit: AuditSummary::of(&outcome.audits),
        outcome,
        timings: Timings { solve_ms },
    })
}

/// Reads the audit outcomes back from a report file. Only the audit list is
/// parsed, so diagnostics with non-finite values (written as `null`) do not
/// interfere.
pub fn audits_from_json(text: &str) -> anyhow::Result<Vec<AuditOutcome>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let audits = value
        .pointer("/outcome/audits")
        .ok_or_else(|| anyhow::anyhow!("report has no outcome.audits section"))?;
    Ok(serde_json::from_value(audits.clone())?)
}

#[derive(Debug, Serialize)]
struct RatioRow<'a> {
    label: &'a str,
    solver: &'a str,
    eps: f64,
    seed: u64,
    clients: usize,
    facilities: usize,
    cost: f64,
    oracle_cost: Option<f64>,
    ratio: Option<f64>,
    audits_passed: bool,
    solve_ms: f64,
}

/// One CSV row per report.
pub fn ratio_csv(reports: &[RunReport]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(RatioRow {
            label: &r.label,
            solver: r.outcome.solver.name(),
            eps: r.config.solve.eps,
            seed: r.config.solve.seed,
            clients: r.instance.clients,
            facilities: r.instance.facilities,
            cost: r.outcome.solution.total_cost,
            oracle_cost: r.outcome.diagnostics.oracle_cost,
            ratio: r.outcome.diagnostics.ratio,
            audits_passed: r.audit.ok(),
            solve_ms: r.timings.solve_ms,
        })?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
