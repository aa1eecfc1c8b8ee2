//! Risk-ordered experiment campaign planning and execution.
//!
//! A campaign runs every safe case before any critical case, orders the
//! critical cases by ascending risk, never schedules failure cases, and
//! stops at the first observed task failure so that higher-risk cases are
//! not attempted afterwards.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::VehicleParams;
use crate::safety::{self, ActuationLimits, Assessment, RiskConvention};

/// One planned operation case together with its safety assessment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCase {
    pub beta0_deg: f64,
    pub phi0_deg: f64,
    pub assessment: Assessment,
}

/// An ordered campaign: safe cases first, then critical cases by ascending
/// risk. Failure cases (and infeasible operation points) are excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignPlan {
    pub cases: Vec<ExperimentCase>,
    pub excluded: Vec<ExperimentCase>,
}

/// Outcome of one planned case during execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseOutcome {
    ExecutedSuccess,
    ExecutedFailure,
    Skipped,
}

/// Result reported by the task evaluator for one executed case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskOutcome {
    Success,
    Failure,
}

/// Per-case outcomes in plan order, plus the index of the failing case if
/// the campaign stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub outcomes: Vec<CaseOutcome>,
    pub stop_index: Option<usize>,
    /// Set when the evaluator itself failed; the report then covers only
    /// the cases executed before the abort.
    pub aborted: Option<String>,
}

fn lambda_of(a: &Assessment) -> f64 {
    match a {
        Assessment::Critical { lambda } => *lambda,
        _ => 0.0,
    }
}

/// Classifies the candidate cases and orders them into a campaign plan.
///
/// Ordering is deterministic: safe cases sort by `(beta0, phi0)`, critical
/// cases by ascending risk with `(beta0, phi0)` as tie-breaker. Invalid or
/// degenerate operation points cannot be flown and are excluded together
/// with the failure cases.
pub fn build_plan(
    cases: &[(f64, f64)],
    params: &VehicleParams,
    limits: &ActuationLimits,
) -> Result<CampaignPlan> {
    build_plan_with(cases, params, limits, RiskConvention::Continuous)
}

pub fn build_plan_with(
    cases: &[(f64, f64)],
    params: &VehicleParams,
    limits: &ActuationLimits,
    convention: RiskConvention,
) -> Result<CampaignPlan> {
    let mut safe = Vec::new();
    let mut critical = Vec::new();
    let mut excluded = Vec::new();
    for &(beta0_deg, phi0_deg) in cases {
        let assessment =
            match safety::classify_with(beta0_deg, phi0_deg, params, limits, convention) {
                Ok(a) => a,
                // Not a flyable operation point; treat like a failure case.
                Err(crate::error::Error::InvalidOperationPoint(_))
                | Err(crate::error::Error::DegenerateGeometry { .. }) => Assessment::Failure,
                Err(e) => return Err(e),
            };
        let case = ExperimentCase {
            beta0_deg,
            phi0_deg,
            assessment,
        };
        match assessment {
            Assessment::Safe => safe.push(case),
            Assessment::Critical { .. } => critical.push(case),
            Assessment::Failure => excluded.push(case),
        }
    }
    let by_angles = |a: &ExperimentCase, b: &ExperimentCase| {
        a.beta0_deg
            .total_cmp(&b.beta0_deg)
            .then(a.phi0_deg.total_cmp(&b.phi0_deg))
    };
    safe.sort_by(by_angles);
    critical.sort_by(|a, b| {
        lambda_of(&a.assessment)
            .total_cmp(&lambda_of(&b.assessment))
            .then(by_angles(a, b))
    });
    let mut ordered = safe;
    ordered.append(&mut critical);
    Ok(CampaignPlan {
        cases: ordered,
        excluded,
    })
}

/// Executes a plan in order, invoking the evaluator per case and stopping
/// at the first reported failure; every later case is marked skipped.
///
/// An evaluator error aborts the campaign and yields a partial report with
/// the abort reason recorded.
pub fn execute_plan<F>(plan: &CampaignPlan, mut evaluator: F) -> CampaignReport
where
    F: FnMut(&ExperimentCase) -> Result<TaskOutcome>,
{
    let mut outcomes = Vec::with_capacity(plan.cases.len());
    let mut stop_index = None;
    let mut aborted = None;
    for (i, case) in plan.cases.iter().enumerate() {
        if stop_index.is_some() || aborted.is_some() {
            outcomes.push(CaseOutcome::Skipped);
            continue;
        }
        match evaluator(case) {
            Ok(TaskOutcome::Success) => outcomes.push(CaseOutcome::ExecutedSuccess),
            Ok(TaskOutcome::Failure) => {
                outcomes.push(CaseOutcome::ExecutedFailure);
                stop_index = Some(i);
            }
            Err(e) => {
                outcomes.push(CaseOutcome::Skipped);
                aborted = Some(format!("evaluator failed at case {i}: {e}"));
            }
        }
    }
    CampaignReport {
        outcomes,
        stop_index,
        aborted,
    }
}
