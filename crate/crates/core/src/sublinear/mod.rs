//! Uncertainty sets, generator functionals, maximal distributions and an
//! axiom harness for sublinear expectations.

pub mod axioms;
pub mod generator;
pub mod maximal;
pub mod payoff;

pub use axioms::{axiom_report, Axiom, AxiomCheck, AxiomReport, ProbeSet};
pub use generator::{
    g_matrix, g_scalar, CovarianceBounds, CovarianceSet, Mat2, SigmaSpec, Sym2, Uncertainty,
    VolatilityInterval,
};
pub use maximal::{maximal_expectation, MaximalSupport};
pub use payoff::{Growth, Payoff};
