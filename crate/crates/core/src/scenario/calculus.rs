use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::control::PathPrefix;
use crate::scenario::sampler::{Path, PathEnsemble};

/// Simple process `η_t = Σ ξ_k 1_{[t_k, t_{k+1})}(t)`, one row of `ξ_k` per path.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProcess<T, V = T> {
    pub dt: T,
    pub values: Vec<Vec<V>>,
    /// Whether each `ξ_k` is known to depend on the path up to `t_k` only.
    pub adapted: bool,
}

pub type ComplexStepProcess<T> = StepProcess<T, Complex<T>>;

impl<T: Real, V: Clone + Send> StepProcess<T, V> {
    /// Evaluates `rule` on every path prefix; adapted by construction.
    pub fn from_rule<F>(paths: &PathEnsemble<T>, rule: F) -> Self
    where
        F: Fn(&PathPrefix<'_, T>) -> V,
    {
        let values = paths
            .paths
            .iter()
            .map(|p| step_values(p, &rule))
            .collect();
        Self {
            dt: paths.grid.dt,
            values,
            adapted: true,
        }
    }

    /// Wraps precomputed values; the caller vouches for adaptedness.
    pub fn from_values(dt: T, values: Vec<Vec<V>>, adapted: bool) -> Self {
        Self { dt, values, adapted }
    }

    fn check(&self, paths: &PathEnsemble<T>) -> Result<()> {
        if !self.adapted {
            return Err(Error::NotAdapted);
        }
        let tol = T::lit(1e-12) * paths.grid.dt;
        if (self.dt - paths.grid.dt).abs() > tol {
            return Err(Error::GridMismatch(format!(
                "step process dt {} differs from path dt {}",
                self.dt, paths.grid.dt
            )));
        }
        if self.values.len() != paths.n_paths() {
            return Err(Error::GridMismatch(format!(
                "{} step rows for {} paths",
                self.values.len(),
                paths.n_paths()
            )));
        }
        if let Some(row) = self.values.iter().find(|r| r.len() != paths.n_steps()) {
            return Err(Error::GridMismatch(format!(
                "{} step values for {} steps",
                row.len(),
                paths.n_steps()
            )));
        }
        Ok(())
    }
}

/// `ξ_k = rule(prefix up to t_k)` for every step of one path.
pub fn step_values<T: Real, V, F>(path: &Path<T>, rule: &F) -> Vec<V>
where
    F: Fn(&PathPrefix<'_, T>) -> V,
{
    (0..path.n_steps())
        .map(|k| {
            let prefix = PathPrefix::new(path.dim, k, path.time(k), &path.states()[..(k + 1) * path.dim]);
            rule(&prefix)
        })
        .collect()
}

/// Left-endpoint sum `Σ_{k∈[from,to)} ξ_k ΔB_k^{(c)}` on one path.
pub fn ito_sum<T: Real>(xi: &[T], path: &Path<T>, component: usize, from: usize, to: usize) -> T {
    (from..to).map(|k| xi[k] * path.increment(k, component)).sum()
}

/// Complex left-endpoint sum with `B = B¹ + iB²`, assembled from the four
/// real sums `∫η¹dB¹ − ∫η²dB²` and `∫η¹dB² + ∫η²dB¹`.
pub fn ito_sum_complex<T: Real>(xi: &[Complex<T>], path: &Path<T>, from: usize, to: usize) -> Complex<T> {
    let (mut r11, mut r22, mut r12, mut r21) = (T::zero(), T::zero(), T::zero(), T::zero());
    for k in from..to {
        let (d1, d2) = (path.increment(k, 0), path.increment(k, 1));
        r11 += xi[k].re * d1;
        r22 += xi[k].im * d2;
        r12 += xi[k].re * d2;
        r21 += xi[k].im * d1;
    }
    Complex::new(r11 - r22, r12 + r21)
}

/// `∫_{t_from}^{t_to} η dB` per path for a real path ensemble.
pub fn ito_integral_between<T: Real>(
    eta: &StepProcess<T>,
    paths: &PathEnsemble<T>,
    from: usize,
    to: usize,
) -> Result<Vec<T>> {
    eta.check(paths)?;
    if paths.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: paths.dim(),
        });
    }
    if from > to || to > paths.n_steps() {
        return Err(Error::GridMismatch(format!("step range {from}..{to} outside the grid")));
    }
    Ok(eta
        .values
        .iter()
        .zip(&paths.paths)
        .map(|(xi, p)| ito_sum(xi, p, 0, from, to))
        .collect())
}

/// `∫_0^T η dB` per path.
pub fn ito_integral<T: Real>(eta: &StepProcess<T>, paths: &PathEnsemble<T>) -> Result<Vec<T>> {
    ito_integral_between(eta, paths, 0, paths.n_steps())
}

/// `∫_0^T η dB` per path for complex `η` and `B = B¹ + iB²`.
pub fn ito_integral_complex<T: Real>(
    eta: &ComplexStepProcess<T>,
    paths: &PathEnsemble<T>,
) -> Result<Vec<Complex<T>>> {
    eta.check(paths)?;
    if paths.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: paths.dim(),
        });
    }
    Ok(eta
        .values
        .iter()
        .zip(&paths.paths)
        .map(|(xi, p)| ito_sum_complex(xi, p, 0, p.n_steps()))
        .collect())
}

/// Realized quadratic and mutual variations of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticVariation<T> {
    /// `Σ (ΔB¹)²`
    pub first: T,
    /// `Σ (ΔB²)²`, zero for scalar paths.
    pub second: T,
    /// `Σ ΔB¹ ΔB²`
    pub cross: T,
    /// `¼(Σ(ΔB¹+ΔB²)² − Σ(ΔB¹−ΔB²)²)`
    pub cross_polarized: T,
}

impl<T: Real> QuadraticVariation<T> {
    /// `⟨B⟩ = ⟨B¹⟩ − ⟨B²⟩ + 2i⟨B¹,B²⟩`
    pub fn complex(&self) -> Complex<T> {
        Complex::new(self.first - self.second, T::two() * self.cross)
    }

    /// `⟨B, B̄⟩ = ⟨B¹⟩ + ⟨B²⟩`
    pub fn with_conjugate(&self) -> T {
        self.first + self.second
    }
}

pub fn path_quadratic_variation<T: Real>(path: &Path<T>) -> QuadraticVariation<T> {
    let mut q = QuadraticVariation {
        first: T::zero(),
        second: T::zero(),
        cross: T::zero(),
        cross_polarized: T::zero(),
    };
    let (mut plus, mut minus) = (T::zero(), T::zero());
    for k in 0..path.n_steps() {
        let d1 = path.increment(k, 0);
        q.first += d1 * d1;
        if path.dim == 2 {
            let d2 = path.increment(k, 1);
            q.second += d2 * d2;
            q.cross += d1 * d2;
            plus += (d1 + d2) * (d1 + d2);
            minus += (d1 - d2) * (d1 - d2);
        }
    }
    q.cross_polarized = T::lit(0.25) * (plus - minus);
    q
}

/// Per-path realized variations of an ensemble.
pub fn quadratic_variation<T: Real>(paths: &PathEnsemble<T>) -> Vec<QuadraticVariation<T>> {
    paths.paths.iter().map(path_quadratic_variation).collect()
}

/// `⟨Bᵃ, Bᵃ̄⟩` on one planar path for `Bᵃ = ⟨a, B⟩`, both directly and by
/// polarization, returned as `(direct, polarized)`.
pub fn mutual_variation<T: Real>(path: &Path<T>, a: [T; 2], abar: [T; 2]) -> (T, T) {
    let proj = |w: [T; 2], k: usize| w[0] * path.increment(k, 0) + w[1] * path.increment(k, 1);
    let sum = [a[0] + abar[0], a[1] + abar[1]];
    let diff = [a[0] - abar[0], a[1] - abar[1]];
    let (mut direct, mut plus, mut minus) = (T::zero(), T::zero(), T::zero());
    for k in 0..path.n_steps() {
        direct += proj(a, k) * proj(abar, k);
        plus += proj(sum, k).powi(2);
        minus += proj(diff, k).powi(2);
    }
    (direct, T::lit(0.25) * (plus - minus))
}

/// `B_T² − 2 ∫ B dB` for component `c`, the defining identity of `⟨B⟩`.
pub fn quadratic_variation_by_identity<T: Real>(path: &Path<T>, component: usize) -> T {
    let xi: Vec<T> = (0..path.n_steps()).map(|k| path.state(k)[component]).collect();
    let terminal = path.terminal()[component];
    terminal * terminal - T::two() * ito_sum(&xi, path, component, 0, path.n_steps())
}

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Real function with optional derivatives.
#[derive(Clone)]
pub struct SmoothFunction<T> {
    pub value: RealFn<T>,
    pub first: Option<RealFn<T>>,
    pub second: Option<RealFn<T>>,
}

impl<T> fmt::Debug for SmoothFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFunction")
            .field("first", &self.first.is_some())
            .field("second", &self.second.is_some())
            .finish_non_exhaustive()
    }
}

impl<T: Real> SmoothFunction<T> {
    pub fn new(
        value: impl Fn(T) -> T + Send + Sync + 'static,
        first: impl Fn(T) -> T + Send + Sync + 'static,
        second: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            first: Some(Arc::new(first)),
            second: Some(Arc::new(second)),
        }
    }

    /// `xⁿ` with exact derivatives.
    pub fn power(n: i32) -> Self {
        let nf = T::from_i32(n).expect("small exponent");
        let nm1 = T::from_i32(n - 1).expect("small exponent");
        Self::new(
            move |x: T| x.powi(n),
            move |x: T| nf * x.powi(n - 1),
            move |x: T| nf * nm1 * x.powi(n - 2),
        )
    }
}

type Coefficient<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// `X_t = X_0 + ∫α dt + ∫η d⟨B⟩ + ∫β dB` with Markov coefficients `(t, X_t)`.
#[derive(Clone)]
pub struct ItoProcess<T> {
    pub x0: T,
    pub drift: Coefficient<T>,
    pub qv_drift: Coefficient<T>,
    pub diffusion: Coefficient<T>,
}

impl<T> fmt::Debug for ItoProcess<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ItoProcess").field("x0", &self.x0).finish_non_exhaustive()
    }
}

impl<T: Real> ItoProcess<T> {
    /// `X = B`
    pub fn brownian() -> Self {
        Self {
            x0: T::zero(),
            drift: Arc::new(|_, _| T::zero()),
            qv_drift: Arc::new(|_, _| T::zero()),
            diffusion: Arc::new(|_, _| T::one()),
        }
    }
}

/// `Φ(X_T) − Φ(X_0)` minus the discrete right-hand side of the G-Itô formula
/// on one scalar path.
pub fn ito_residual_path<T: Real>(phi: &SmoothFunction<T>, x: &ItoProcess<T>, path: &Path<T>) -> Result<T> {
    let d1 = phi.first.as_ref().ok_or(Error::MissingDerivative("first derivative of Φ"))?;
    let d2 = phi.second.as_ref().ok_or(Error::MissingDerivative("second derivative of Φ"))?;
    let mut xk = x.x0;
    let mut rhs = T::zero();
    for k in 0..path.n_steps() {
        let t = path.time(k);
        let db = path.increment(k, 0);
        let dq = db * db;
        let (a, e, b) = ((x.drift)(t, xk), (x.qv_drift)(t, xk), (x.diffusion)(t, xk));
        let (g1, g2) = (d1(xk), d2(xk));
        rhs += g1 * (b * db + a * path.dt) + (g1 * e + T::half() * g2 * b * b) * dq;
        xk += a * path.dt + e * dq + b * db;
    }
    Ok((phi.value)(xk) - (phi.value)(x.x0) - rhs)
}

/// Per-path G-Itô residuals; they vanish in L² as `dt → 0`.
pub fn ito_formula_residual_real<T: Real>(
    phi: &SmoothFunction<T>,
    x: &ItoProcess<T>,
    paths: &PathEnsemble<T>,
) -> Result<Vec<T>> {
    if paths.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: paths.dim(),
        });
    }
    paths.paths.iter().map(|p| ito_residual_path(phi, x, p)).collect()
}

/// Root mean square of per-path values.
pub fn l2_norm<T: Real>(values: &[T]) -> f64 {
    let n = values.len().max(1) as f64;
    (values.iter().map(|v| v.as_f64().powi(2)).sum::<f64>() / n).sqrt()
}

/// Root mean square modulus of complex per-path values.
pub fn l2_norm_complex<T: Real>(values: &[Complex<T>]) -> f64 {
    let n = values.len().max(1) as f64;
    (values.iter().map(|v| v.norm_sqr().as_f64()).sum::<f64>() / n).sqrt()
}
