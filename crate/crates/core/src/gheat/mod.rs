//! Monotone explicit finite differences for the G-heat equation and the
//! iterated expectations built on top of it.

pub mod config;
pub mod field;
pub mod iterated;
pub mod scheme;

pub use config::{BoundaryRule, Discretization, SolverConfig, CFL_LIMIT};
pub use field::{GridTable, SolutionField};
pub use iterated::{
    iterated_expectation, nested_expect, sequential_expect, IteratedExpectation, NestedExpectation,
    Stage,
};
pub use scheme::{gnormal_expectation, solve_gheat, solve_gheat_1d, solve_gheat_2d};
