//! Volatility uncertainty sets and the generator functionals built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Variance interval `[lo, hi]` of a one-dimensional G-normal law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SigmaSpec<T>", into = "SigmaSpec<T>")]
#[serde(bound = "T: Real")]
pub struct VolatilityInterval<T> {
    sigma_lo_sq: T,
    sigma_hi_sq: T,
}

impl<T: Real> VolatilityInterval<T> {
    pub fn new(sigma_lo_sq: T, sigma_hi_sq: T) -> Result<Self> {
        let ok = sigma_lo_sq >= T::zero()
            && sigma_lo_sq <= sigma_hi_sq
            && sigma_hi_sq.is_finite();
        if !ok {
            return Err(Error::InvalidInterval {
                lo: sigma_lo_sq.as_f64(),
                hi: sigma_hi_sq.as_f64(),
            });
        }
        Ok(Self { sigma_lo_sq, sigma_hi_sq })
    }

    /// Degenerate interval: classical Brownian motion with variance `sigma_sq`.
    pub fn classical(sigma_sq: T) -> Result<Self> {
        Self::new(sigma_sq, sigma_sq)
    }

    pub fn lo(&self) -> T {
        self.sigma_lo_sq
    }

    pub fn hi(&self) -> T {
        self.sigma_hi_sq
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma_lo_sq == self.sigma_hi_sq
    }

    /// Scalar generator `½(σ̄²α⁺ − σ̲²α⁻)`.
    #[inline]
    pub fn g(&self, alpha: T) -> T {
        T::half() * (self.sigma_hi_sq * alpha.pos_part() - self.sigma_lo_sq * alpha.neg_part())
    }
}

/// Free-function form of [`VolatilityInterval::g`].
pub fn g_scalar<T: Real>(alpha: T, iv: &VolatilityInterval<T>) -> T {
    iv.g(alpha)
}

/// Symmetric 2×2 matrix `[[a11, a12], [a12, a22]]`.
///
/// As a covariance vertex the entries are `(σ₁², σ₂²; σ₂², σ₃²)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2<T> {
    pub a11: T,
    pub a12: T,
    pub a22: T,
}

impl<T: Real> Sym2<T> {
    pub fn new(a11: T, a12: T, a22: T) -> Self {
        Self { a11, a12, a22 }
    }

    pub fn diag(a11: T, a22: T) -> Self {
        Self::new(a11, T::zero(), a22)
    }

    pub fn scalar(s: T) -> Self {
        Self::diag(s, s)
    }

    pub fn zero() -> Self {
        Self::diag(T::zero(), T::zero())
    }

    pub fn trace(&self) -> T {
        self.a11 + self.a22
    }

    pub fn det(&self) -> T {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    /// `tr(self · other)` for two symmetric matrices.
    #[inline]
    pub fn frobenius(&self, other: &Sym2<T>) -> T {
        self.a11 * other.a11 + T::two() * self.a12 * other.a12 + self.a22 * other.a22
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a22.is_finite()
    }

    pub fn is_psd(&self) -> bool {
        let scale = self.a11.abs().max(self.a22.abs()).max(self.a12.abs());
        let slack = T::lit(1e-12) * scale * scale;
        self.a11 >= T::zero() && self.a22 >= T::zero() && self.det() >= -slack
    }

    /// Closed-form principal square root of a PSD matrix.
    pub fn sqrt_psd(&self) -> Option<Sym2<T>> {
        if !self.is_psd() {
            return None;
        }
        let s = self.det().max(T::zero()).sqrt();
        let t = (self.trace() + T::two() * s).sqrt();
        if t == T::zero() {
            return Some(Sym2::zero());
        }
        Some(Sym2::new((self.a11 + s) / t, self.a12 / t, (self.a22 + s) / t))
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a12 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn to_rows(&self) -> [[T; 2]; 2] {
        [[self.a11, self.a12], [self.a12, self.a22]]
    }
}

/// General 2×2 matrix, used where symmetry has to be validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: Real> Mat2<T> {
    pub fn to_sym(&self) -> Result<Sym2<T>> {
        let [[a, b], [c, d]] = self.0;
        let scale = T::one().max(b.abs()).max(c.abs());
        if (b - c).abs() > T::lit(1e-12) * scale {
            return Err(Error::NotSymmetric {
                upper: b.as_f64(),
                lower: c.as_f64(),
            });
        }
        Ok(Sym2::new(a, b, d))
    }
}

impl<T: Real> From<Sym2<T>> for Mat2<T> {
    fn from(s: Sym2<T>) -> Self {
        Mat2(s.to_rows())
    }
}

/// Entrywise suprema `σ̄ᵢ² = max |σᵢ²|` over the vertices of a covariance set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceBounds<T> {
    pub sigma1_sq: T,
    pub sigma2_sq: T,
    pub sigma3_sq: T,
}

/// Convex hull of finitely many 2×2 PSD covariance matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SigmaSpec<T>", into = "SigmaSpec<T>")]
#[serde(bound = "T: Real")]
pub struct CovarianceSet<T> {
    vertices: Vec<Sym2<T>>,
}

impl<T: Real> CovarianceSet<T> {
    pub fn from_vertices(vertices: Vec<Sym2<T>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        for (index, v) in vertices.iter().enumerate() {
            if !v.is_finite() || !v.is_psd() {
                return Err(Error::NotPositiveSemidefinite { index });
            }
        }
        Ok(Self { vertices })
    }

    /// `{σ²I : σ² ∈ [lo, hi]}`; a single vertex when the interval is degenerate.
    pub fn conformal(iv: &VolatilityInterval<T>) -> Self {
        let mut vertices = vec![Sym2::scalar(iv.lo())];
        if !iv.is_degenerate() {
            vertices.push(Sym2::scalar(iv.hi()));
        }
        Self { vertices }
    }

    /// One-dimensional interval embedded as `diag(σ², 0)`.
    pub fn embedded_interval(iv: &VolatilityInterval<T>) -> Self {
        let mut vertices = vec![Sym2::diag(iv.lo(), T::zero())];
        if !iv.is_degenerate() {
            vertices.push(Sym2::diag(iv.hi(), T::zero()));
        }
        Self { vertices }
    }

    /// Uncorrelated box `σ₁² ∈ first`, `σ₃² ∈ second`, `σ₂² = 0` (four corners, deduplicated).
    pub fn diagonal_box(first: VolatilityInterval<T>, second: VolatilityInterval<T>) -> Self {
        let mut vertices: Vec<Sym2<T>> = Vec::with_capacity(4);
        for a in [first.lo(), first.hi()] {
            for c in [second.lo(), second.hi()] {
                let v = Sym2::diag(a, c);
                if !vertices.contains(&v) {
                    vertices.push(v);
                }
            }
        }
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Sym2<T>] {
        &self.vertices
    }

    pub fn bounds(&self) -> CovarianceBounds<T> {
        let mut b = CovarianceBounds {
            sigma1_sq: T::zero(),
            sigma2_sq: T::zero(),
            sigma3_sq: T::zero(),
        };
        for v in &self.vertices {
            b.sigma1_sq = b.sigma1_sq.max(v.a11.abs());
            b.sigma2_sq = b.sigma2_sq.max(v.a12.abs());
            b.sigma3_sq = b.sigma3_sq.max(v.a22.abs());
        }
        b
    }

    /// `true` when every vertex satisfies `σ₁², σ₃² ≥ |σ₂²|`.
    pub fn check_diagonal_dominance(&self) -> Result<()> {
        for (index, v) in self.vertices.iter().enumerate() {
            if v.a11 < v.a12.abs() || v.a22 < v.a12.abs() {
                return Err(Error::NotDiagonallyDominant { index });
            }
        }
        Ok(())
    }

    /// Matrix generator for a matrix already known to be symmetric.
    #[inline]
    pub fn g_sym(&self, a: &Sym2<T>) -> T {
        let mut best = T::neg_infinity();
        for v in &self.vertices {
            best = best.max(a.frobenius(v));
        }
        T::half() * best
    }

    /// Matrix generator `½ max_Λ tr(AΛ)`; rejects non-symmetric `A`.
    pub fn g_matrix(&self, a: &Mat2<T>) -> Result<T> {
        Ok(self.g_sym(&a.to_sym()?))
    }

    /// Whether the set equals `{σ²I}` over an interval.
    pub fn is_conformal(&self) -> bool {
        self.vertices
            .iter()
            .all(|v| v.a12 == T::zero() && v.a11 == v.a22)
    }
}

/// Free-function form of [`CovarianceSet::g_matrix`].
pub fn g_matrix<T: Real>(a: &Mat2<T>, sigma: &CovarianceSet<T>) -> Result<T> {
    sigma.g_matrix(a)
}

/// Either a one-dimensional interval or a two-dimensional covariance set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SigmaSpec<T>", into = "SigmaSpec<T>")]
#[serde(bound = "T: Real")]
pub enum Uncertainty<T> {
    Interval(VolatilityInterval<T>),
    Set(CovarianceSet<T>),
}

impl<T: Real> Uncertainty<T> {
    pub fn dim(&self) -> usize {
        match self {
            Uncertainty::Interval(_) => 1,
            Uncertainty::Set(_) => 2,
        }
    }

    pub fn as_interval(&self) -> Option<&VolatilityInterval<T>> {
        match self {
            Uncertainty::Interval(iv) => Some(iv),
            Uncertainty::Set(_) => None,
        }
    }

    pub fn as_set(&self) -> Option<&CovarianceSet<T>> {
        match self {
            Uncertainty::Interval(_) => None,
            Uncertainty::Set(s) => Some(s),
        }
    }

    /// Largest diagonal variance over the set.
    pub fn max_variance(&self) -> T {
        match self {
            Uncertainty::Interval(iv) => iv.hi(),
            Uncertainty::Set(s) => {
                let b = s.bounds();
                b.sigma1_sq.max(b.sigma3_sq)
            }
        }
    }

    /// Denominator of the explicit-scheme CFL ratio (multiplies `Δt/Δx²`).
    pub fn cfl_weight(&self) -> T {
        match self {
            Uncertainty::Interval(iv) => iv.hi(),
            Uncertainty::Set(s) => {
                let b = s.bounds();
                b.sigma1_sq + b.sigma3_sq + T::two() * b.sigma2_sq
            }
        }
    }
}

impl<T> From<VolatilityInterval<T>> for Uncertainty<T> {
    fn from(iv: VolatilityInterval<T>) -> Self {
        Uncertainty::Interval(iv)
    }
}

impl<T> From<CovarianceSet<T>> for Uncertainty<T> {
    fn from(s: CovarianceSet<T>) -> Self {
        Uncertainty::Set(s)
    }
}

/// JSON wire form shared by intervals and covariance sets.
///
/// ```json
/// {"kind": "interval",  "sigma_lo_sq": 0.25, "sigma_hi_sq": 1.0}
/// {"kind": "conformal", "sigma_lo_sq": 0.25, "sigma_hi_sq": 1.0}
/// {"kind": "vertices",  "vertices": [[[1.0, 0.0], [0.0, 0.25]]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
#[serde(bound = "T: Real")]
pub enum SigmaSpec<T> {
    Interval { sigma_lo_sq: T, sigma_hi_sq: T },
    Conformal { sigma_lo_sq: T, sigma_hi_sq: T },
    Vertices { vertices: Vec<[[T; 2]; 2]> },
}

impl<T: Real> SigmaSpec<T> {
    pub fn resolve(&self) -> Result<Uncertainty<T>> {
        match self {
            SigmaSpec::Interval { sigma_lo_sq, sigma_hi_sq } => Ok(Uncertainty::Interval(
                VolatilityInterval::new(*sigma_lo_sq, *sigma_hi_sq)?,
            )),
            SigmaSpec::Conformal { sigma_lo_sq, sigma_hi_sq } => Ok(Uncertainty::Set(
                CovarianceSet::conformal(&VolatilityInterval::new(*sigma_lo_sq, *sigma_hi_sq)?),
            )),
            SigmaSpec::Vertices { vertices } => {
                let syms = vertices
                    .iter()
                    .map(|rows| Mat2(*rows).to_sym())
                    .collect::<Result<Vec<_>>>()?;
                Ok(Uncertainty::Set(CovarianceSet::from_vertices(syms)?))
            }
        }
    }
}

impl<T: Real> From<VolatilityInterval<T>> for SigmaSpec<T> {
    fn from(iv: VolatilityInterval<T>) -> Self {
        SigmaSpec::Interval {
            sigma_lo_sq: iv.lo(),
            sigma_hi_sq: iv.hi(),
        }
    }
}

impl<T: Real> From<CovarianceSet<T>> for SigmaSpec<T> {
    fn from(s: CovarianceSet<T>) -> Self {
        SigmaSpec::Vertices {
            vertices: s.vertices.iter().map(Sym2::to_rows).collect(),
        }
    }
}

impl<T: Real> From<Uncertainty<T>> for SigmaSpec<T> {
    fn from(u: Uncertainty<T>) -> Self {
        match u {
            Uncertainty::Interval(iv) => iv.into(),
            Uncertainty::Set(s) => s.into(),
        }
    }
}

impl<T: Real> TryFrom<SigmaSpec<T>> for Uncertainty<T> {
    type Error = Error;
    fn try_from(spec: SigmaSpec<T>) -> Result<Self> {
        spec.resolve()
    }
}

impl<T: Real> TryFrom<SigmaSpec<T>> for VolatilityInterval<T> {
    type Error = Error;
    fn try_from(spec: SigmaSpec<T>) -> Result<Self> {
        match spec.resolve()? {
            Uncertainty::Interval(iv) => Ok(iv),
            Uncertainty::Set(_) => Err(Error::InvalidConfig(
                "expected kind \"interval\" for a one-dimensional law".into(),
            )),
        }
    }
}

impl<T: Real> TryFrom<SigmaSpec<T>> for CovarianceSet<T> {
    type Error = Error;
    fn try_from(spec: SigmaSpec<T>) -> Result<Self> {
        match spec.resolve()? {
            Uncertainty::Set(s) => Ok(s),
            Uncertainty::Interval(_) => Err(Error::InvalidConfig(
                "expected kind \"conformal\" or \"vertices\" for a covariance set".into(),
            )),
        }
    }
}
