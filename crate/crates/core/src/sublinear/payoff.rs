use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Growth class a payoff is declared to belong to. Recorded, not enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Growth {
    #[default]
    BoundedLipschitz,
    LocallyLipschitzPolynomial,
}

type PayoffFn<T> = dyn Fn(&[T]) -> T + Send + Sync;

/// Real test function on ℝᵈ with optional Lipschitz metadata.
#[derive(Clone)]
pub struct Payoff<T> {
    f: Arc<PayoffFn<T>>,
    dim: usize,
    lipschitz_bound: Option<T>,
    growth: Growth,
}

impl<T: Real> fmt::Debug for Payoff<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Payoff")
            .field("dim", &self.dim)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("growth", &self.growth)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Payoff<T> {
    pub fn new(dim: usize, f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            dim,
            lipschitz_bound: None,
            growth: Growth::LocallyLipschitzPolynomial,
        }
    }

    /// Payoff on ℝ.
    pub fn scalar(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::new(1, move |x: &[T]| f(x[0]))
    }

    /// Payoff on ℝ².
    pub fn planar(f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        Self::new(2, move |x: &[T]| f(x[0], x[1]))
    }

    pub fn constant(dim: usize, c: T) -> Self {
        Self::new(dim, move |_| c)
            .with_lipschitz(T::zero())
            .with_growth(Growth::BoundedLipschitz)
    }

    pub fn with_lipschitz(mut self, bound: T) -> Self {
        self.lipschitz_bound = Some(bound);
        self
    }

    pub fn with_growth(mut self, growth: Growth) -> Self {
        self.growth = growth;
        self
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.dim);
        (self.f)(x)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz_bound(&self) -> Option<T> {
        self.lipschitz_bound
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn scale(&self, lambda: T) -> Self {
        let f = self.f.clone();
        Self {
            f: Arc::new(move |x| lambda * f(x)),
            dim: self.dim,
            lipschitz_bound: self.lipschitz_bound.map(|l| l * lambda.abs()),
            growth: self.growth,
        }
    }

    pub fn shift(&self, c: T) -> Self {
        let f = self.f.clone();
        Self {
            f: Arc::new(move |x| f(x) + c),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Payoff<T>) -> Self {
        assert_eq!(self.dim, other.dim, "payoff dimensions differ");
        let (f, g) = (self.f.clone(), other.f.clone());
        Self {
            f: Arc::new(move |x| f(x) + g(x)),
            dim: self.dim,
            lipschitz_bound: self.lipschitz_bound.zip(other.lipschitz_bound).map(|(a, b)| a + b),
            growth: self.growth.max_with(other.growth),
        }
    }

    /// Pointwise maximum; dominates both arguments.
    pub fn max(&self, other: &Payoff<T>) -> Self {
        assert_eq!(self.dim, other.dim, "payoff dimensions differ");
        let (f, g) = (self.f.clone(), other.f.clone());
        Self {
            f: Arc::new(move |x| f(x).max(g(x))),
            dim: self.dim,
            lipschitz_bound: self
                .lipschitz_bound
                .zip(other.lipschitz_bound)
                .map(|(a, b)| a.max(b)),
            growth: self.growth.max_with(other.growth),
        }
    }

    /// Largest difference quotient `|φ(p) − φ(q)| / |p − q|` over all pairs of
    /// sample points that exceeds the declared bound, if any.
    ///
    /// Returns `None` when no bound is declared or the bound holds with 1e-9
    /// relative slack.
    pub fn lipschitz_excess(&self, points: &[Vec<T>]) -> Option<T> {
        let bound = self.lipschitz_bound?;
        let values: Vec<T> = points.iter().map(|p| self.eval(p)).collect();
        let mut worst = T::zero();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                let dist = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (*a - *b) * (*a - *b))
                    .sum::<T>()
                    .sqrt();
                if dist > T::zero() {
                    worst = worst.max((values[i] - values[j]).abs() / dist);
                }
            }
        }
        (worst > bound * (T::one() + T::lit(1e-9))).then_some(worst)
    }
}

impl Growth {
    fn max_with(self, other: Growth) -> Growth {
        if self == Growth::LocallyLipschitzPolynomial || other == Growth::LocallyLipschitzPolynomial {
            Growth::LocallyLipschitzPolynomial
        } else {
            Growth::BoundedLipschitz
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinators() {
        let p = Payoff::scalar(|x: f64| x * x);
        let q = Payoff::scalar(|x: f64| 1.0 - x);
        assert_eq!(p.scale(3.0).eval(&[2.0]), 12.0);
        assert_eq!(p.shift(-1.0).eval(&[2.0]), 3.0);
        assert_eq!(p.add(&q).eval(&[2.0]), 3.0);
        assert_eq!(p.max(&q).eval(&[0.5]), 0.5);
        assert_eq!(Payoff::constant(2, 7.0).eval(&[1.0, -3.0]), 7.0);
    }

    #[test]
    fn lipschitz_metadata_is_checked_on_samples() {
        let grid: Vec<Vec<f64>> = (0..41).map(|i| vec![-2.0 + 0.1 * i as f64]).collect();
        let abs = Payoff::scalar(|x: f64| x.abs()).with_lipschitz(1.0);
        assert_eq!(abs.lipschitz_excess(&grid), None);
        let lying = Payoff::scalar(|x: f64| 3.0 * x).with_lipschitz(1.0);
        let excess = lying.lipschitz_excess(&grid).unwrap();
        assert!((excess - 3.0).abs() < 1e-9);
        assert_eq!(Payoff::scalar(|x: f64| x).lipschitz_excess(&grid), None);
    }
}
