//! Numerics for sublinear expectations under volatility uncertainty.

pub mod complex;
pub mod error;
pub mod gheat;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod sublinear;

pub use error::{Error, Result};
pub use gheat::{SolutionField, SolverConfig};
pub use report::{CheckReport, CheckVerdict};
pub use scalar::Real;
pub use sublinear::{CovarianceSet, Payoff, VolatilityInterval};

pub type VolatilityInterval64 = VolatilityInterval<f64>;
pub type CovarianceSet64 = CovarianceSet<f64>;
pub type Payoff64 = Payoff<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolutionField64 = SolutionField<f64>;
pub type ScenarioGrid64 = scenario::ScenarioGrid<f64>;
pub type Sampler64 = scenario::Sampler<f64>;
pub type PathEnsemble64 = scenario::PathEnsemble<f64>;
pub type AnalyticFunction64 = complex::AnalyticFunction<f64>;
pub type ComplexRV64 = complex::ComplexRV<f64>;
