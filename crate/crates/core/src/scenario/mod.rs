//! Monte Carlo scenarios: adapted volatility controls, path sampling, Itô
//! calculus on sampled paths, scenario-supremum estimates and bound audits.

pub mod audit;
pub mod calculus;
pub mod control;
pub mod estimate;
pub mod sampler;

pub use audit::{bound_audit, complex_bound_audit, real_bound_audit, AuditReport, AuditRow, Verdict};
pub use calculus::{
    ito_formula_residual_real, ito_integral, ito_integral_between, ito_integral_complex, l2_norm,
    l2_norm_complex, mutual_variation, path_quadratic_variation, quadratic_variation,
    quadratic_variation_by_identity, ComplexStepProcess, ItoProcess, QuadraticVariation,
    SmoothFunction, StepProcess,
};
pub use control::{
    control_catalog, BangBang, Constant, ControlFamily, ControlRule, PathPrefix, Schedule,
    SignFeedback,
};
pub use estimate::{
    normal_quantile, scenario_inf_expect, scenario_sup_expect, scenario_sup_many, ScenarioEstimate,
    ScenarioTable, CONFIDENCE,
};
pub use sampler::{Path, PathEnsemble, Sampler, ScenarioGrid, VolatilityModel};
