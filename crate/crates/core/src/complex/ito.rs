use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::complex::analytic::{second_wirtinger, AnalyticFunction, WirtingerPair};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::calculus::l2_norm_complex;
use crate::scenario::sampler::{Path, PathEnsemble};

type Coefficient<T> = Arc<dyn Fn(T, Complex<T>) -> Complex<T> + Send + Sync>;

/// `Z_t = Z_0 + ∫α dt + ∫η d⟨B⟩ + ∫β dB` driven by `B = B¹ + iB²`, with
/// Markov coefficients of `(t, Z_t)`.
#[derive(Clone)]
pub struct ComplexItoProcess<T> {
    pub z0: Complex<T>,
    pub drift: Coefficient<T>,
    pub qv_drift: Coefficient<T>,
    pub diffusion: Coefficient<T>,
}

impl<T: fmt::Debug> fmt::Debug for ComplexItoProcess<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexItoProcess").field("z0", &self.z0).finish_non_exhaustive()
    }
}

impl<T: Real> ComplexItoProcess<T> {
    /// `Z = B`
    pub fn brownian() -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        Self {
            z0: zero,
            drift: Arc::new(move |_, _| zero),
            qv_drift: Arc::new(move |_, _| zero),
            diffusion: Arc::new(|_, _| Complex::new(T::one(), T::zero())),
        }
    }
}

/// Per-path residuals and their root mean square.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexItoResidual<T> {
    pub per_path: Vec<Complex<T>>,
    pub l2: f64,
}

/// `f(Z_T) − f(Z_0)` minus the discrete complex Itô expansion
///
/// `∂f (α dt + η Δ⟨B⟩ + β ΔB) + ∂̄f (conj of the same)
///  + ½∂∂f β² Δ⟨B⟩ + ½∂̄∂̄f β̄² Δ⟨B̄⟩ + ∂∂̄f |β|² Δ⟨B,B̄⟩`
///
/// with `Δ⟨B⟩ = (ΔB)²` and `Δ⟨B,B̄⟩ = |ΔB|²`.
pub fn complex_ito_residual_path<T: Real>(
    f: &AnalyticFunction<T>,
    z: &ComplexItoProcess<T>,
    path: &Path<T>,
) -> Result<Complex<T>> {
    if path.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: path.dim,
        });
    }
    let dt = Complex::new(path.dt, T::zero());
    let half = T::half();
    let mut zk = z.z0;
    let mut rhs = Complex::new(T::zero(), T::zero());
    for k in 0..path.n_steps() {
        let t = path.time(k);
        let db = Complex::new(path.increment(k, 0), path.increment(k, 1));
        let dq = db * db;
        let (a, e, b) = ((z.drift)(t, zk), (z.qv_drift)(t, zk), (z.diffusion)(t, zk));
        let p = f.partials(zk)?;
        let w = WirtingerPair::from_partials(p.dx, p.dy);
        let [dd, bb, dbb] = second_wirtinger(p.second.ok_or(Error::MissingDerivative("second partials of f"))?);
        let first = a * dt + e * dq + b * db;
        rhs += w.d * first + w.dbar * first.conj();
        rhs += dd * (b * b * dq).scale(half) + bb * (b * b * dq).conj().scale(half);
        rhs += dbb * db.norm_sqr() * b.norm_sqr();
        zk += first;
    }
    Ok(f.value(zk)? - f.value(z.z0)? - rhs)
}

/// Complex Itô residual over an ensemble of planar paths.
pub fn complex_ito_residual<T: Real>(
    f: &AnalyticFunction<T>,
    z: &ComplexItoProcess<T>,
    paths: &PathEnsemble<T>,
) -> Result<ComplexItoResidual<T>> {
    let per_path = paths
        .paths
        .iter()
        .map(|p| complex_ito_residual_path(f, z, p))
        .collect::<Result<Vec<_>>>()?;
    let l2 = l2_norm_complex(&per_path);
    Ok(ComplexItoResidual { per_path, l2 })
}
