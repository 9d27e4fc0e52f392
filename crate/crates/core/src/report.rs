//! Pass/fail records shared by the check suites and the experiment runner.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    /// A precondition of the property was not met, so nothing was tested.
    PreconditionUnmet,
}

/// One numerical check of a mathematical property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    /// Statement of the property being checked.
    pub property: String,
    pub estimate: f64,
    pub target: f64,
    pub tolerance: f64,
    pub verdict: CheckVerdict,
}

impl CheckReport {
    /// Passes when `|estimate − target| ≤ tolerance`.
    pub fn near(check_id: impl Into<String>, property: impl Into<String>, estimate: f64, target: f64, tolerance: f64) -> Self {
        let ok = (estimate - target).abs() <= tolerance;
        Self::with(check_id, property, estimate, target, tolerance, ok)
    }

    /// Passes when `estimate ≤ target + tolerance`.
    pub fn at_most(check_id: impl Into<String>, property: impl Into<String>, estimate: f64, target: f64, tolerance: f64) -> Self {
        let ok = estimate <= target + tolerance;
        Self::with(check_id, property, estimate, target, tolerance, ok)
    }

    fn with(check_id: impl Into<String>, property: impl Into<String>, estimate: f64, target: f64, tolerance: f64, ok: bool) -> Self {
        Self {
            check_id: check_id.into(),
            property: property.into(),
            estimate,
            target,
            tolerance,
            verdict: if ok && estimate.is_finite() { CheckVerdict::Pass } else { CheckVerdict::Fail },
        }
    }

    pub fn precondition_unmet(mut self) -> Self {
        self.verdict = CheckVerdict::PreconditionUnmet;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == CheckVerdict::Pass
    }

    /// Room left before failing; negative once failed.
    pub fn margin(&self) -> f64 {
        self.tolerance - (self.estimate - self.target).abs()
    }
}
