use crate::error::{Error, Result};
use crate::gheat::config::{BoundaryRule, Discretization, SolverConfig};
use crate::gheat::field::{GridTable, SolutionField};
use crate::scalar::Real;
use crate::sublinear::{CovarianceSet, Payoff, Uncertainty, VolatilityInterval};

/// Per-vertex stencil weights, already multiplied by `Δt / (2Δx²)`.
#[derive(Debug, Clone, Copy)]
struct VertexStencil<T> {
    xx: T,
    yy: T,
    cross: T,
    /// Cross derivative sampled along the (+,+)/(−,−) diagonal when true,
    /// along (+,−)/(−,+) otherwise.
    main_diagonal: bool,
}

fn vertex_stencils<T: Real>(set: &CovarianceSet<T>, disc: &Discretization<T>) -> Vec<VertexStencil<T>> {
    let k = disc.dt / (T::two() * disc.dx * disc.dx);
    set.vertices()
        .iter()
        .map(|v| VertexStencil {
            xx: k * v.a11,
            yy: k * v.a22,
            cross: k * v.a12.abs(),
            main_diagonal: v.a12 >= T::zero(),
        })
        .collect()
}

fn first_non_finite<T: Real>(u: &[T]) -> Option<usize> {
    u.iter().position(|v| !v.is_finite())
}

/// Advances nodal values on a 1D grid through `disc.n_steps` explicit steps.
pub(crate) fn evolve_1d<T: Real>(
    u: &mut Vec<T>,
    iv: &VolatilityInterval<T>,
    disc: &Discretization<T>,
    boundary: BoundaryRule,
) -> Result<()> {
    let n = u.len();
    debug_assert_eq!(n, disc.nodes());
    let k = disc.dt / (T::two() * disc.dx * disc.dx);
    let (up, down) = (k * iv.hi(), k * iv.lo());
    let mut next = u.clone();
    for step in 0..disc.n_steps {
        for j in 1..n - 1 {
            let d2 = u[j + 1] - T::two() * u[j] + u[j - 1];
            next[j] = u[j] + if d2 >= T::zero() { up * d2 } else { down * d2 };
        }
        if boundary == BoundaryRule::LinearExtrapolate {
            next[0] = T::two() * next[1] - next[2];
            next[n - 1] = T::two() * next[n - 2] - next[n - 3];
        }
        std::mem::swap(u, &mut next);
        if let Some(node) = first_non_finite(u) {
            return Err(Error::NonFinite { step: step + 1, node });
        }
    }
    Ok(())
}

/// Advances nodal values on a square 2D grid (row-major, `x` slowest).
pub(crate) fn evolve_2d<T: Real>(
    u: &mut Vec<T>,
    set: &CovarianceSet<T>,
    disc: &Discretization<T>,
    boundary: BoundaryRule,
) -> Result<()> {
    let m = disc.nodes();
    debug_assert_eq!(u.len(), m * m);
    let stencils = vertex_stencils(set, disc);
    let two = T::two();
    let mut next = u.clone();
    for step in 0..disc.n_steps {
        for i in 1..m - 1 {
            for j in 1..m - 1 {
                let c = i * m + j;
                let u0 = u[c];
                let (e, w, n, s) = (u[c + m], u[c - m], u[c + 1], u[c - 1]);
                let dxx = e - two * u0 + w;
                let dyy = n - two * u0 + s;
                let axis_sum = e + w + n + s;
                let main = two * u0 + u[c + m + 1] + u[c - m - 1] - axis_sum;
                let anti = two * u0 + u[c + m - 1] + u[c - m + 1] - axis_sum;
                let mut best = T::neg_infinity();
                for st in &stencils {
                    let cross = if st.main_diagonal { main } else { anti };
                    best = best.max(st.xx * dxx + st.yy * dyy + st.cross * cross);
                }
                next[c] = u0 + best;
            }
        }
        if boundary == BoundaryRule::LinearExtrapolate {
            for i in 1..m - 1 {
                let r = i * m;
                next[r] = two * next[r + 1] - next[r + 2];
                next[r + m - 1] = two * next[r + m - 2] - next[r + m - 3];
            }
            for j in 0..m {
                next[j] = two * next[m + j] - next[2 * m + j];
                let last = (m - 1) * m + j;
                next[last] = two * next[last - m] - next[last - 2 * m];
            }
        }
        std::mem::swap(u, &mut next);
        if let Some(node) = first_non_finite(u) {
            return Err(Error::NonFinite { step: step + 1, node });
        }
    }
    Ok(())
}

fn field<T: Real>(
    values: Vec<T>,
    dims: usize,
    disc: &Discretization<T>,
    config: &SolverConfig<T>,
) -> Result<SolutionField<T>> {
    Ok(SolutionField {
        table: GridTable::new(vec![disc.half_nodes; dims], vec![disc.dx; dims], values)?,
        horizon: config.horizon,
        dt: disc.dt,
        n_steps: disc.n_steps,
        cfl_ratio: disc.cfl_ratio,
        boundary: config.boundary,
    })
}

/// Explicit monotone solve of `∂ₜu = G(∂ₓₓu)`, `u(0,·) = φ`, for a scalar
/// volatility interval.
pub fn solve_gheat_1d<T: Real>(
    phi: &Payoff<T>,
    iv: &VolatilityInterval<T>,
    config: &SolverConfig<T>,
) -> Result<SolutionField<T>> {
    if phi.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: phi.dim(),
        });
    }
    let disc = config.discretize(&Uncertainty::Interval(*iv))?;
    let mut u: Vec<T> = disc.axis().into_iter().map(|x| phi.eval(&[x])).collect();
    if let Some(node) = first_non_finite(&u) {
        return Err(Error::NonFinite { step: 0, node });
    }
    evolve_1d(&mut u, iv, &disc, config.boundary)?;
    field(u, 1, &disc, config)
}

/// Explicit monotone solve of `∂ₜu = G(D²u)` on the plane. Every vertex of
/// `sigma` must be diagonally dominant.
pub fn solve_gheat_2d<T: Real>(
    phi: &Payoff<T>,
    sigma: &CovarianceSet<T>,
    config: &SolverConfig<T>,
) -> Result<SolutionField<T>> {
    if phi.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: phi.dim(),
        });
    }
    sigma.check_diagonal_dominance()?;
    let disc = config.discretize(&Uncertainty::Set(sigma.clone()))?;
    let axis = disc.axis();
    let mut u: Vec<T> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
        .map(|(x, y)| phi.eval(&[x, y]))
        .collect();
    if let Some(node) = first_non_finite(&u) {
        return Err(Error::NonFinite { step: 0, node });
    }
    evolve_2d(&mut u, sigma, &disc, config.boundary)?;
    field(u, 2, &disc, config)
}

/// Dispatches on the dimension of the uncertainty set.
pub fn solve_gheat<T: Real>(
    phi: &Payoff<T>,
    uncertainty: &Uncertainty<T>,
    config: &SolverConfig<T>,
) -> Result<SolutionField<T>> {
    match uncertainty {
        Uncertainty::Interval(iv) => solve_gheat_1d(phi, iv, config),
        Uncertainty::Set(set) => solve_gheat_2d(phi, set, config),
    }
}

/// `Ê[φ(√t·X)]` for the G-normal `X` of the uncertainty set.
pub fn gnormal_expectation<T: Real>(
    phi: &Payoff<T>,
    uncertainty: &Uncertainty<T>,
    config: &SolverConfig<T>,
) -> Result<T> {
    Ok(solve_gheat(phi, uncertainty, config)?.at_origin())
}
