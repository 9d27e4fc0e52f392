use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sublinear::Uncertainty;

/// Largest admissible value of the explicit-scheme CFL ratio.
pub const CFL_LIMIT: f64 = 0.5;

/// Number of standard deviations the default domain extends in each direction.
pub const TRUNCATION_SIGMAS: f64 = 4.0;

/// What happens at the edge of the truncated grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BoundaryRule {
    /// Boundary nodes keep the initial payoff value for all time; interpolation
    /// outside the grid returns the nearest edge value.
    #[default]
    #[serde(rename = "clamp")]
    ClampPayoff,
    /// Boundary nodes are extrapolated linearly from the two nearest interior
    /// nodes after every step; interpolation outside the grid continues the
    /// edge cell linearly.
    #[serde(rename = "extrapolate")]
    LinearExtrapolate,
}

/// Grid and time stepping for one explicit solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct SolverConfig<T> {
    #[serde(rename = "L")]
    pub domain_half_width: T,
    #[serde(rename = "dx")]
    pub space_step: T,
    #[serde(rename = "dt")]
    pub time_step: T,
    #[serde(rename = "t")]
    pub horizon: T,
    #[serde(default)]
    pub boundary: BoundaryRule,
}

/// Grid actually used by a solve after rounding to whole steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization<T> {
    /// Nodes on each side of the origin; the axis has `2 * half_nodes + 1` nodes.
    pub half_nodes: usize,
    pub dx: T,
    pub n_steps: usize,
    /// `horizon / n_steps`, never larger than the requested step.
    pub dt: T,
    pub cfl_ratio: T,
}

impl<T: Real> Discretization<T> {
    pub fn axis(&self) -> Vec<T> {
        let n = self.half_nodes as isize;
        (-n..=n)
            .map(|k| T::from_isize(k).expect("grid index fits scalar") * self.dx)
            .collect()
    }

    pub fn nodes(&self) -> usize {
        2 * self.half_nodes + 1
    }
}

impl<T: Real> SolverConfig<T> {
    /// Default truncation `L = 4·σ̄·√t` with `Δx = rel_step·L` and the largest
    /// stable time step scaled by `cfl_fraction ∈ (0, 1]`.
    pub fn auto(uncertainty: &Uncertainty<T>, horizon: T, rel_step: T, cfl_fraction: T) -> Self {
        let half_width = Self::required_half_width(uncertainty, horizon).max(T::lit(1e-3));
        let dx = rel_step * half_width;
        let weight = uncertainty.cfl_weight();
        let dt = if weight > T::zero() {
            cfl_fraction * T::lit(CFL_LIMIT) * dx * dx / weight
        } else {
            horizon
        };
        Self {
            domain_half_width: half_width,
            space_step: dx,
            time_step: dt.min(horizon),
            horizon,
            boundary: BoundaryRule::ClampPayoff,
        }
    }

    pub fn required_half_width(uncertainty: &Uncertainty<T>, horizon: T) -> T {
        T::lit(TRUNCATION_SIGMAS) * (uncertainty.max_variance() * horizon).sqrt()
    }

    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryRule) -> Self {
        self.boundary = boundary;
        self
    }

    /// Same grid and domain with the space step halved and the time step
    /// quartered, which keeps the CFL ratio fixed.
    pub fn refined(mut self) -> Self {
        self.space_step *= T::half();
        self.time_step *= T::lit(0.25);
        self
    }

    /// Checks the configuration against an uncertainty set and rounds it to a
    /// grid whose origin is a node.
    pub fn discretize(&self, uncertainty: &Uncertainty<T>) -> Result<Discretization<T>> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(self.domain_half_width) || !positive(self.space_step) {
            return Err(Error::InvalidConfig("L and dx must be positive and finite".into()));
        }
        if !positive(self.time_step) || !positive(self.horizon) {
            return Err(Error::InvalidConfig("dt and t must be positive and finite".into()));
        }
        let required = Self::required_half_width(uncertainty, self.horizon);
        if self.domain_half_width < required * (T::one() - T::lit(1e-12)) {
            return Err(Error::DomainTooNarrow {
                half_width: self.domain_half_width.as_f64(),
                required: required.as_f64(),
            });
        }
        let ratio = self.time_step * uncertainty.cfl_weight() / (self.space_step * self.space_step);
        if ratio > T::lit(CFL_LIMIT) * (T::one() + T::lit(1e-12)) {
            return Err(Error::CflViolation {
                ratio: ratio.as_f64(),
                limit: CFL_LIMIT,
            });
        }
        let half_nodes = (self.domain_half_width / self.space_step - T::lit(1e-9))
            .ceil()
            .to_usize()
            .ok_or_else(|| Error::InvalidConfig("grid too large".into()))?
            .max(2);
        let n_steps = (self.horizon / self.time_step - T::lit(1e-9))
            .ceil()
            .to_usize()
            .ok_or_else(|| Error::InvalidConfig("too many time steps".into()))?
            .max(1);
        let dt = self.horizon / T::from_usize_lossy(n_steps);
        Ok(Discretization {
            half_nodes,
            dx: self.space_step,
            n_steps,
            dt,
            cfl_ratio: dt * uncertainty.cfl_weight() / (self.space_step * self.space_step),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sublinear::{CovarianceSet, Sym2, VolatilityInterval};

    fn iv() -> Uncertainty<f64> {
        VolatilityInterval::new(0.25, 1.0).unwrap().into()
    }

    #[test]
    fn auto_config_is_valid_and_centred() {
        let cfg = SolverConfig::auto(&iv(), 1.0, 0.02, 1.0);
        assert_eq!(cfg.domain_half_width, 4.0);
        let d = cfg.discretize(&iv()).unwrap();
        assert_eq!(d.half_nodes, 50);
        assert_eq!(d.axis()[50], 0.0);
        assert!(d.cfl_ratio <= 0.5 + 1e-12);
        assert!((d.dt * d.n_steps as f64 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unstable_or_narrow_grids() {
        let mut cfg = SolverConfig::auto(&iv(), 1.0, 0.02, 1.0);
        cfg.time_step *= 1.1;
        assert!(matches!(cfg.discretize(&iv()), Err(Error::CflViolation { .. })));
        let mut cfg = SolverConfig::auto(&iv(), 1.0, 0.02, 1.0);
        cfg.domain_half_width = 3.0;
        assert!(matches!(cfg.discretize(&iv()), Err(Error::DomainTooNarrow { .. })));
        let set: Uncertainty<f64> = CovarianceSet::from_vertices(vec![Sym2::new(1.0, 0.5, 1.0)])
            .unwrap()
            .into();
        // 2D weight 1 + 1 + 2·0.5 = 3
        let cfg = SolverConfig::auto(&set, 1.0, 0.05, 1.0);
        let d = cfg.discretize(&set).unwrap();
        assert!((d.cfl_ratio - 0.5).abs() < 1e-9);
    }

    #[test]
    fn json_form() {
        let cfg: SolverConfig<f64> =
            serde_json::from_str(r#"{"L":4,"dx":0.08,"dt":0.001,"t":1,"boundary":"extrapolate"}"#).unwrap();
        assert_eq!(cfg.boundary, BoundaryRule::LinearExtrapolate);
        let back: SolverConfig<f64> = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<SolverConfig<f64>>(r#"{"L":4,"dx":0.1,"dt":0.001,"t":1,"x":2}"#).is_err());
    }
}
