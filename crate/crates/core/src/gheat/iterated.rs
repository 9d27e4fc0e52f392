use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gheat::config::{BoundaryRule, Discretization, SolverConfig};
use crate::gheat::field::GridTable;
use crate::gheat::scheme::{evolve_1d, evolve_2d};
use crate::scalar::Real;
use crate::sublinear::{Payoff, Uncertainty, VolatilityInterval};

/// One G-normal variable integrated out by a single solve; `config.horizon`
/// is the variance scale of that variable.
#[derive(Debug, Clone)]
pub struct Stage<T> {
    pub uncertainty: Uncertainty<T>,
    pub config: SolverConfig<T>,
}

#[derive(Debug, Clone)]
struct PreparedStage<T> {
    uncertainty: Uncertainty<T>,
    disc: Discretization<T>,
    dims: usize,
    boundary: BoundaryRule,
}

impl<T: Real> PreparedStage<T> {
    fn grid_size(&self) -> usize {
        self.disc.nodes().pow(self.dims as u32)
    }

    fn origin_index(&self) -> usize {
        let h = self.disc.half_nodes;
        if self.dims == 1 {
            h
        } else {
            h * self.disc.nodes() + h
        }
    }

    /// `Ê[f(√h·X)]` for nodal values `f` on this stage's grid.
    fn expect(&self, mut u: Vec<T>) -> Result<T> {
        match &self.uncertainty {
            Uncertainty::Interval(iv) => evolve_1d(&mut u, iv, &self.disc, self.boundary)?,
            Uncertainty::Set(set) => evolve_2d(&mut u, set, &self.disc, self.boundary)?,
        }
        Ok(u[self.origin_index()])
    }

    /// Node coordinates in row-major order, each `dims` long.
    fn nodes(&self) -> Vec<Vec<T>> {
        let axis = self.disc.axis();
        if self.dims == 1 {
            axis.into_iter().map(|x| vec![x]).collect()
        } else {
            axis.iter()
                .flat_map(|&x| axis.iter().map(move |&y| vec![x, y]))
                .collect()
        }
    }
}

/// Result of integrating out independent G-normal variables last to first.
///
/// `conditional(k, prefix)` is the expectation of the payoff given the first
/// `k` variables, tabulated on the solver grids of those variables.
#[derive(Debug, Clone)]
pub struct IteratedExpectation<T> {
    value: T,
    /// `tables[k - 1]` conditions on the first `k` variables.
    tables: Vec<GridTable<T>>,
    stage_dims: Vec<usize>,
    boundary: BoundaryRule,
}

impl<T: Real> IteratedExpectation<T> {
    pub fn value(&self) -> T {
        self.value
    }

    pub fn stages(&self) -> usize {
        self.stage_dims.len()
    }

    /// Conditional expectation given the values of the first `k` variables
    /// (`k = 0` is the unconditional value). Off-grid inputs follow the
    /// boundary rule of the first stage.
    pub fn conditional(&self, prefix: &[T]) -> Result<T> {
        if prefix.is_empty() {
            return Ok(self.value);
        }
        let mut coords = 0;
        for (k, d) in self.stage_dims.iter().enumerate() {
            coords += d;
            if coords == prefix.len() {
                return self
                    .tables
                    .get(k)
                    .map(|t| t.interpolate(prefix, self.boundary))
                    .ok_or_else(|| Error::InvalidConfig("cannot condition on every variable".into()));
            }
        }
        Err(Error::DimensionMismatch {
            expected: coords,
            got: prefix.len(),
        })
    }

    pub fn table(&self, k: usize) -> Option<&GridTable<T>> {
        k.checked_sub(1).and_then(|i| self.tables.get(i))
    }
}

/// Iterated G-expectation `Ê[ψ(X₁, …, Xₙ)]` with `Xₖ` independent of its
/// predecessors, evaluated by one solve per grid anchor of the preceding
/// variables.
///
/// Anchor grids coincide with solver grids, so stage tables are read at nodes
/// only and interpolation is needed just for off-grid conditional queries.
/// Anchors are processed in parallel; collection order is fixed, so results do
/// not depend on the thread schedule.
pub fn iterated_expectation<T: Real>(
    psi: &Payoff<T>,
    stages: &[Stage<T>],
) -> Result<IteratedExpectation<T>> {
    if stages.is_empty() {
        return Err(Error::Empty("stage"));
    }
    let prepared = stages
        .iter()
        .map(|s| {
            if let Uncertainty::Set(set) = &s.uncertainty {
                set.check_diagonal_dominance()?;
            }
            Ok(PreparedStage {
                disc: s.config.discretize(&s.uncertainty)?,
                dims: s.uncertainty.dim(),
                uncertainty: s.uncertainty.clone(),
                boundary: s.config.boundary,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total: usize = prepared.iter().map(|p| p.dims).sum();
    if psi.dim() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            got: psi.dim(),
        });
    }

    let n = prepared.len();
    let last = &prepared[n - 1];
    let last_nodes = last.nodes();
    let prefix_anchors = anchors(&prepared[..n - 1]);
    let mut current: Vec<T> = prefix_anchors
        .par_iter()
        .map(|prefix| {
            let mut point = prefix.clone();
            point.resize(total, T::zero());
            let offset = prefix.len();
            let initial = last_nodes
                .iter()
                .map(|y| {
                    point[offset..].copy_from_slice(y);
                    let v = psi.eval(&point);
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::NonFinite { step: 0, node: 0 })
                    }
                })
                .collect::<Result<Vec<T>>>()?;
            last.expect(initial)
        })
        .collect::<Result<Vec<T>>>()?;

    let mut tables = Vec::with_capacity(n - 1);
    for k in (0..n - 1).rev() {
        tables.push(table_over(&prepared[..=k], current.clone())?);
        let stage = &prepared[k];
        let size = stage.grid_size();
        current = current
            .par_chunks(size)
            .map(|slice| stage.expect(slice.to_vec()))
            .collect::<Result<Vec<T>>>()?;
    }
    tables.reverse();
    debug_assert_eq!(current.len(), 1);
    Ok(IteratedExpectation {
        value: current[0],
        tables,
        stage_dims: prepared.iter().map(|p| p.dims).collect(),
        boundary: prepared[0].boundary,
    })
}

fn anchors<T: Real>(stages: &[PreparedStage<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for stage in stages {
        let nodes = stage.nodes();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                nodes.iter().map(move |node| {
                    let mut p = prefix.clone();
                    p.extend_from_slice(node);
                    p
                })
            })
            .collect();
    }
    out
}

fn table_over<T: Real>(stages: &[PreparedStage<T>], values: Vec<T>) -> Result<GridTable<T>> {
    let mut half = Vec::new();
    let mut steps = Vec::new();
    for s in stages {
        for _ in 0..s.dims {
            half.push(s.disc.half_nodes);
            steps.push(s.disc.dx);
        }
    }
    GridTable::new(half, steps, values)
}

/// `Ê[φ(B_{t₁}, …, B_{tₙ})]` for a G-Brownian motion in one or two
/// dimensions, with `φ` written in path values.
#[derive(Debug, Clone)]
pub struct NestedExpectation<T> {
    inner: IteratedExpectation<T>,
    times: Vec<T>,
    dim: usize,
}

impl<T: Real> NestedExpectation<T> {
    pub fn value(&self) -> T {
        self.inner.value()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// `Ê[φ(B_{t₁}, …, B_{tₙ}) | B_{t₁} = x₁, …, B_{tᵢ} = xᵢ]`, with the path
    /// values concatenated in `path_prefix`.
    pub fn conditional(&self, path_prefix: &[T]) -> Result<T> {
        self.inner.conditional(&increments_from_path(path_prefix, self.dim))
    }

    pub fn increments(&self) -> &IteratedExpectation<T> {
        &self.inner
    }
}

fn increments_from_path<T: Real>(path: &[T], dim: usize) -> Vec<T> {
    let mut out = path.to_vec();
    for i in (dim..out.len()).rev() {
        out[i] -= path[i - dim];
    }
    out
}

fn path_from_increments<T: Real>(inc: &[T], dim: usize) -> Vec<T> {
    let mut out = inc.to_vec();
    for i in dim..out.len() {
        let prev = out[i - dim];
        out[i] += prev;
    }
    out
}

/// Backward recursion over observation times; `config` supplies the grid and
/// its horizon is replaced by each inter-observation gap.
pub fn nested_expect<T: Real>(
    phi: &Payoff<T>,
    times: &[T],
    sigma: &Uncertainty<T>,
    config: &SolverConfig<T>,
) -> Result<NestedExpectation<T>> {
    if times.is_empty() {
        return Err(Error::Empty("observation time"));
    }
    let mut prev = T::zero();
    let mut stages = Vec::with_capacity(times.len());
    for &t in times {
        if !(t > prev) || !t.is_finite() {
            return Err(Error::NonIncreasingTimes);
        }
        stages.push(Stage {
            uncertainty: sigma.clone(),
            config: config.with_horizon(t - prev),
        });
        prev = t;
    }
    let dim = sigma.dim();
    let phi_path = phi.clone();
    let psi = Payoff::new(phi.dim(), move |inc: &[T]| {
        phi_path.eval(&path_from_increments(inc, dim))
    });
    Ok(NestedExpectation {
        inner: iterated_expectation(&psi, &stages)?,
        times: times.to_vec(),
        dim,
    })
}

/// `Ê[φ(X₁, …, Xₖ)]` where each `Xᵢ` is a unit-horizon one-dimensional
/// G-normal for its own interval and is independent of `X₁, …, Xᵢ₋₁`.
/// The horizon of `config` is ignored.
pub fn sequential_expect<T: Real>(
    phi: &Payoff<T>,
    variable_specs: &[VolatilityInterval<T>],
    config: &SolverConfig<T>,
) -> Result<T> {
    if variable_specs.is_empty() {
        return Err(Error::Empty("variable spec"));
    }
    let stages: Vec<Stage<T>> = variable_specs
        .iter()
        .map(|iv| Stage {
            uncertainty: Uncertainty::Interval(*iv),
            config: config.with_horizon(T::one()),
        })
        .collect();
    Ok(iterated_expectation(phi, &stages)?.value())
}
