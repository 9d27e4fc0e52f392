//! Complex expectations over real pairs, Wirtinger calculus, the complex Itô
//! residual and conformal invariance checks.

pub mod analytic;
pub mod axioms;
pub mod conformal;
pub mod ito;
pub mod rv;

pub use analytic::{second_wirtinger, wirtinger, wirtinger_numeric, AnalyticFunction, Partials, WirtingerPair, CATALOG};
pub use axioms::{complex_axiom_report, ComplexPayoff};
pub use conformal::{
    conformal_invariance_check, gc_coefficient, make_conformal_set, maximal_zero_check, rotation_closure_check,
    ConformalSettings,
};
pub use ito::{complex_ito_residual, complex_ito_residual_path, ComplexItoProcess, ComplexItoResidual};
pub use rv::{
    c_linearity_check, complex_expect, independence_reduction_check, ComplexEstimate, ComplexRV, Engine,
    IndependenceCheck, RealQuantity,
};
