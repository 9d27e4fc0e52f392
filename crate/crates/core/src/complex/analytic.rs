use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cauchy–Riemann tolerance for functions flagged analytic.
pub const CAUCHY_RIEMANN_TOL: f64 = 1e-8;

/// Value and real partial derivatives of `f = u + iv` at one point, with
/// `dx = u_x + i v_x` and `dy = u_y + i v_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials<T> {
    pub value: Complex<T>,
    pub dx: Complex<T>,
    pub dy: Complex<T>,
    /// `(f_xx, f_xy, f_yy)` when available.
    pub second: Option<[Complex<T>; 3]>,
}

/// `∂f = ½(f_x − i f_y)` and `∂̄f = ½(f_x + i f_y)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WirtingerPair<T> {
    pub d: Complex<T>,
    pub dbar: Complex<T>,
}

impl<T: Real> WirtingerPair<T> {
    pub fn from_partials(dx: Complex<T>, dy: Complex<T>) -> Self {
        let i = Complex::<T>::i();
        Self {
            d: (dx - i * dy).scale(T::half()),
            dbar: (dx + i * dy).scale(T::half()),
        }
    }

    /// `f_x = ∂f + ∂̄f`
    pub fn dx(&self) -> Complex<T> {
        self.d + self.dbar
    }

    /// `f_y = i(∂f − ∂̄f)`
    pub fn dy(&self) -> Complex<T> {
        Complex::<T>::i() * (self.d - self.dbar)
    }
}

/// Second Wirtinger derivatives `(∂∂f, ∂̄∂̄f, ∂∂̄f)` from real second partials.
pub fn second_wirtinger<T: Real>(second: [Complex<T>; 3]) -> [Complex<T>; 3] {
    let [xx, xy, yy] = second;
    let i = Complex::<T>::i();
    let q = T::lit(0.25);
    let two = T::two();
    [
        (xx - i * xy.scale(two) - yy).scale(q),
        (xx + i * xy.scale(two) - yy).scale(q),
        (xx + yy).scale(q),
    ]
}

type PartialsFn<T> = Arc<dyn Fn(Complex<T>) -> Result<Partials<T>> + Send + Sync>;

/// Planar map `f = u + iv` with exact partial derivatives.
///
/// Catalog entries are addressed by key; only those flagged analytic are
/// accepted by the conformal checks.
#[derive(Clone)]
pub struct AnalyticFunction<T> {
    key: String,
    analytic: bool,
    partials: PartialsFn<T>,
}

impl<T> fmt::Debug for AnalyticFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticFunction")
            .field("key", &self.key)
            .field("analytic", &self.analytic)
            .finish_non_exhaustive()
    }
}

/// Keys accepted by [`AnalyticFunction::from_key`].
pub const CATALOG: [&str; 7] = ["z", "z2", "z3", "exp", "recip", "conj", "abs2"];

/// Real parts beyond this are clamped before exponentiating.
pub const EXP_CLAMP: f64 = 8.0;
/// Pole and excluded radius of the `recip` entry.
pub const RECIP_POLE: f64 = 4.0;
pub const RECIP_GUARD: f64 = 1.0;

fn holomorphic<T: Real>(value: Complex<T>, d1: Complex<T>, d2: Complex<T>) -> Partials<T> {
    // f_x = f', f_y = i f', f_xx = f'', f_xy = i f'', f_yy = −f''
    let i = Complex::<T>::i();
    Partials {
        value,
        dx: d1,
        dy: i * d1,
        second: Some([d2, i * d2, -d2]),
    }
}

impl<T: Real> AnalyticFunction<T> {
    pub fn new(
        key: impl Into<String>,
        analytic: bool,
        partials: impl Fn(Complex<T>) -> Result<Partials<T>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            key: key.into(),
            analytic,
            partials: Arc::new(partials),
        }
    }

    /// Holomorphic function from `f`, `f'` and `f''`.
    pub fn holomorphic(
        key: impl Into<String>,
        f: impl Fn(Complex<T>) -> [Complex<T>; 3] + Send + Sync + 'static,
    ) -> Self {
        Self::new(key, true, move |z| {
            let [v, d1, d2] = f(z);
            Ok(holomorphic(v, d1, d2))
        })
    }

    pub fn from_key(key: &str) -> Result<Self> {
        let two = T::two();
        let three = T::lit(3.0);
        let six = T::lit(6.0);
        let out = match key {
            "z" => Self::holomorphic(key, |z| [z, Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero())]),
            "z2" => Self::holomorphic(key, move |z| [z * z, z.scale(two), Complex::new(two, T::zero())]),
            "z3" => Self::holomorphic(key, move |z| [z * z * z, (z * z).scale(three), z.scale(six)]),
            "exp" => Self::holomorphic(key, |z: Complex<T>| {
                let c = T::lit(EXP_CLAMP);
                let e = Complex::new(z.re.max(-c).min(c), z.im).exp();
                [e, e, e]
            }),
            "recip" => Self::new(key, true, |z: Complex<T>| {
                let w = z - Complex::new(T::lit(RECIP_POLE), T::zero());
                if w.norm() < T::lit(RECIP_GUARD) {
                    return Err(Error::OutsideDomain {
                        key: "recip".into(),
                        x: z.re.as_f64(),
                        y: z.im.as_f64(),
                    });
                }
                let inv = w.inv();
                Ok(holomorphic(inv, -(inv * inv), (inv * inv * inv).scale(T::two())))
            }),
            "conj" => Self::new(key, false, |z: Complex<T>| {
                let zero = Complex::new(T::zero(), T::zero());
                Ok(Partials {
                    value: z.conj(),
                    dx: Complex::new(T::one(), T::zero()),
                    dy: Complex::new(T::zero(), -T::one()),
                    second: Some([zero; 3]),
                })
            }),
            "abs2" => Self::new(key, false, move |z: Complex<T>| {
                let zero = Complex::new(T::zero(), T::zero());
                let two = Complex::new(T::two(), T::zero());
                Ok(Partials {
                    value: Complex::new(z.norm_sqr(), T::zero()),
                    dx: Complex::new(T::two() * z.re, T::zero()),
                    dy: Complex::new(T::two() * z.im, T::zero()),
                    second: Some([two, zero, two]),
                })
            }),
            other => return Err(Error::UnknownKey(other.to_string())),
        };
        Ok(out)
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic
    }

    pub fn partials(&self, z: Complex<T>) -> Result<Partials<T>> {
        (self.partials)(z)
    }

    pub fn value(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.partials(z)?.value)
    }

    /// `f'(z) = ∂f`, defined for analytic entries only.
    pub fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        self.require_analytic()?;
        Ok(self.partials(z)?.dx)
    }

    pub fn require_analytic(&self) -> Result<()> {
        if self.analytic {
            Ok(())
        } else {
            Err(Error::NotAnalytic(self.key.clone()))
        }
    }

    /// `|u_x − v_y| + |u_y + v_x|`
    pub fn cauchy_riemann_residual(&self, z: Complex<T>) -> Result<f64> {
        let p = self.partials(z)?;
        Ok((p.dx.re - p.dy.im).abs().as_f64() + (p.dy.re + p.dx.im).abs().as_f64())
    }

    /// Checks the Cauchy–Riemann equations on `points` when the function is
    /// flagged analytic; points inside an excluded disk are skipped.
    pub fn verify_cauchy_riemann(&self, points: &[Complex<T>]) -> Result<()> {
        if !self.analytic {
            return Ok(());
        }
        for &z in points {
            let residual = match self.cauchy_riemann_residual(z) {
                Ok(r) => r,
                Err(Error::OutsideDomain { .. }) => continue,
                Err(e) => return Err(e),
            };
            let scale = 1.0 + self.partials(z)?.dx.norm().as_f64();
            if !(residual <= CAUCHY_RIEMANN_TOL * scale) {
                return Err(Error::CauchyRiemann {
                    residual,
                    tolerance: CAUCHY_RIEMANN_TOL * scale,
                    x: z.re.as_f64(),
                    y: z.im.as_f64(),
                });
            }
        }
        Ok(())
    }
}

/// Wirtinger derivatives of `f` at `z` from its exact partials.
pub fn wirtinger<T: Real>(f: &AnalyticFunction<T>, z: Complex<T>) -> Result<WirtingerPair<T>> {
    let p = f.partials(z)?;
    Ok(WirtingerPair::from_partials(p.dx, p.dy))
}

/// Wirtinger derivatives of an arbitrary planar map by central differences.
pub fn wirtinger_numeric<T: Real>(f: impl Fn(Complex<T>) -> Complex<T>, z: Complex<T>, h: T) -> WirtingerPair<T> {
    let hx = Complex::new(h, T::zero());
    let hy = Complex::new(T::zero(), h);
    let inv = T::one() / (T::two() * h);
    let dx = (f(z + hx) - f(z - hx)).scale(inv);
    let dy = (f(z + hy) - f(z - hy)).scale(inv);
    WirtingerPair::from_partials(dx, dy)
}
