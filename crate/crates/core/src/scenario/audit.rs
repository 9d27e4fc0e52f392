use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::control::{control_catalog, ControlFamily};
use crate::scenario::estimate::{scenario_sup_many, ScenarioEstimate, ScenarioTable};
use crate::scenario::sampler::{Path, Sampler, ScenarioGrid};
use crate::sublinear::{CovarianceSet, Uncertainty, VolatilityInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Violation,
}

/// One audited inequality or identity for one integrand.
///
/// `margin` is `rhs − lhs` for inequalities and `−|lhs − rhs|` for
/// identities; a row is a violation only when `−margin` exceeds `half_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub inequality: String,
    pub integrand: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub half_width: f64,
    pub verdict: Verdict,
}

impl AuditRow {
    fn new(inequality: &str, integrand: &str, lhs: f64, rhs: f64, margin: f64, half_width: f64) -> Self {
        let verdict = if -margin > half_width { Verdict::Violation } else { Verdict::Pass };
        Self {
            inequality: inequality.to_string(),
            integrand: integrand.to_string(),
            lhs,
            rhs,
            margin,
            half_width,
            verdict,
        }
    }

    /// `lhs ≤ coeff·rhs` from two scenario estimates.
    fn bound(inequality: &str, integrand: &str, lhs: &ScenarioEstimate, coeff: f64, rhs: &ScenarioEstimate) -> Self {
        let r = coeff * rhs.value;
        Self::new(
            inequality,
            integrand,
            lhs.value,
            r,
            r - lhs.value,
            lhs.family_half_width + coeff * rhs.family_half_width,
        )
    }

    /// Both `Ê[X]` and `−Ê[−X]` vanish; one row per side.
    fn zero_rows(inequality: &str, integrand: &str, table: &ScenarioTable, stat: usize) -> [Self; 2] {
        let up = table.sup(stat);
        let lo = table.inf(stat);
        [
            Self::new(&format!("{inequality} (upper)"), integrand, up.value, 0.0, -up.value.abs(), up.family_half_width),
            Self::new(&format!("{inequality} (lower)"), integrand, lo.value, 0.0, -lo.value.abs(), lo.family_half_width),
        ]
    }
}

/// Audit outcome; the constants are only set for complex audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    /// `K = σ̄₁² + σ̄₂²` with `σ̄₂²` the largest variance of the second component.
    pub k: Option<f64>,
    pub stated_constant: Option<f64>,
    /// Largest observed `Ê[|∫η dB|²] / Ê[∫|η|² dt]` over the catalog.
    pub empirical_constant: Option<f64>,
    pub n_paths: usize,
    pub confidence: f64,
    pub controls: Vec<String>,
}

impl AuditReport {
    pub fn violations(&self) -> Vec<&AuditRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Violation).collect()
    }

    pub fn is_clean(&self) -> bool {
        self.violations().is_empty()
    }
}

type RealIntegrand<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;
type ComplexIntegrand<T> = Arc<dyn Fn(T, Complex<T>) -> Complex<T> + Send + Sync>;

/// Bounded Markov integrands `ξ_k = η(t_k, B_{t_k})` for scalar audits.
pub fn real_integrands<T: Real>() -> Vec<(&'static str, RealIntegrand<T>)> {
    vec![
        ("zero", Arc::new(|_, _| T::zero())),
        ("one", Arc::new(|_, _| T::one())),
        ("cos", Arc::new(|_, b: T| b.cos())),
        ("clamp", Arc::new(|_, b: T| b.max(-T::one()).min(T::one()))),
        ("positive-part-indicator", Arc::new(|_, b: T| if b > T::zero() { T::one() } else { T::zero() })),
    ]
}

/// Bounded Markov integrands for planar audits, with `B = B¹ + iB²`.
pub fn complex_integrands<T: Real>() -> Vec<(&'static str, ComplexIntegrand<T>)> {
    vec![
        ("zero", Arc::new(|_, _| Complex::new(T::zero(), T::zero()))),
        ("one", Arc::new(|_, _| Complex::new(T::one(), T::zero()))),
        ("i", Arc::new(|_, _| Complex::new(T::zero(), T::one()))),
        ("rotation", Arc::new(|t: T, _| Complex::from_polar(T::one(), T::lit(std::f64::consts::TAU) * t))),
        ("clamp", Arc::new(|_, b: Complex<T>| b / b.norm().max(T::one()))),
    ]
}

const REAL_STATS: usize = 6;

fn real_statistics<T: Real>(path: &Path<T>, etas: &[(&'static str, RealIntegrand<T>)]) -> Vec<T> {
    let mut out = Vec::with_capacity(etas.len() * REAL_STATS);
    for (_, eta) in etas {
        let (mut i, mut sq_dt, mut qv, mut abs_dt, mut sq_qv) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for k in 0..path.n_steps() {
            let xi = eta(path.time(k), path.state(k)[0]);
            let db = path.increment(k, 0);
            i += xi * db;
            sq_dt += xi * xi * path.dt;
            qv += xi * db * db;
            abs_dt += xi.abs() * path.dt;
            sq_qv += xi * xi * db * db;
        }
        out.extend([i, i * i, sq_dt, qv.abs(), abs_dt, i * i - sq_qv]);
    }
    out
}

const COMPLEX_STATS: usize = 8;

fn complex_statistics<T: Real>(path: &Path<T>, etas: &[(&'static str, ComplexIntegrand<T>)]) -> Vec<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = Vec::with_capacity(etas.len() * COMPLEX_STATS);
    for (_, eta) in etas {
        let (mut i, mut j, mut sq_qv) = (zero, zero, zero);
        let (mut sq_dt, mut abs_dt) = (T::zero(), T::zero());
        for k in 0..path.n_steps() {
            let s = path.state(k);
            let xi = eta(path.time(k), Complex::new(s[0], s[1]));
            let db = Complex::new(path.increment(k, 0), path.increment(k, 1));
            let dq = db * db;
            i += xi * db;
            j += xi * dq;
            sq_qv += xi * xi * dq;
            sq_dt += xi.norm_sqr() * path.dt;
            abs_dt += xi.norm() * path.dt;
        }
        let diff = i * i - sq_qv;
        out.extend([i.re, i.im, i.norm_sqr(), sq_dt, j.norm(), abs_dt, diff.re, diff.im]);
    }
    out
}

/// Scalar audit: zero mean, `Ê[|∫η dB|²] ≤ σ̄² Ê[∫|η|² dt]`,
/// `Ê[|∫η d⟨B⟩|] ≤ σ̄² Ê[∫|η| dt]` and `Ê[(∫η dB)²] = Ê[∫η² d⟨B⟩]`.
pub fn real_bound_audit<T: Real>(
    interval: &VolatilityInterval<T>,
    grid: ScenarioGrid<T>,
    families: &[ControlFamily],
    confidence: f64,
) -> Result<AuditReport> {
    let sampler = Sampler::new(&Uncertainty::Interval(*interval), grid)?;
    let controls = control_catalog::<T>(families, sampler.n_vertices());
    let etas = real_integrands::<T>();
    let table = scenario_sup_many(&sampler, &controls, |p| real_statistics(p, &etas))?.with_confidence(confidence);
    let hi = interval.hi().as_f64();
    let mut rows = Vec::new();
    for (e, (name, _)) in etas.iter().enumerate() {
        let s = e * REAL_STATS;
        rows.extend(AuditRow::zero_rows("E[int eta dB] = 0", name, &table, s));
        rows.push(AuditRow::bound(
            "E[|int eta dB|^2] <= s^2 E[int |eta|^2 dt]",
            name,
            &table.sup(s + 1),
            hi,
            &table.sup(s + 2),
        ));
        rows.push(AuditRow::bound(
            "E[|int eta d<B>|] <= s^2 E[int |eta| dt]",
            name,
            &table.sup(s + 3),
            hi,
            &table.sup(s + 4),
        ));
        rows.extend(AuditRow::zero_rows("E[(int eta dB)^2 - int eta^2 d<B>] = 0", name, &table, s + 5));
    }
    Ok(AuditReport {
        rows,
        k: None,
        stated_constant: None,
        empirical_constant: None,
        n_paths: table.n_paths,
        confidence,
        controls: table.controls,
    })
}

/// Planar audit of the complex integral: zero mean, the `16K` isometry bound,
/// the `⟨B⟩`-integral bound and the complex isometry identity.
pub fn complex_bound_audit<T: Real>(
    set: &CovarianceSet<T>,
    grid: ScenarioGrid<T>,
    families: &[ControlFamily],
    confidence: f64,
) -> Result<AuditReport> {
    let sampler = Sampler::new(&Uncertainty::Set(set.clone()), grid)?;
    let controls = control_catalog::<T>(families, sampler.n_vertices());
    let etas = complex_integrands::<T>();
    let table = scenario_sup_many(&sampler, &controls, |p| complex_statistics(p, &etas))?.with_confidence(confidence);
    let b = set.bounds();
    let k = (b.sigma1_sq + b.sigma3_sq).as_f64();
    let stated = 16.0 * k;
    let j_const = 4.0 * (b.sigma1_sq + b.sigma3_sq + T::two() * b.sigma2_sq).as_f64();
    let mut rows = Vec::new();
    let mut empirical: f64 = 0.0;
    for (e, (name, _)) in etas.iter().enumerate() {
        let s = e * COMPLEX_STATS;
        rows.extend(AuditRow::zero_rows("Re E_C[int eta dB] = 0", name, &table, s));
        rows.extend(AuditRow::zero_rows("Im E_C[int eta dB] = 0", name, &table, s + 1));
        let (lhs, rhs) = (table.sup(s + 2), table.sup(s + 3));
        if rhs.value > 0.0 {
            empirical = empirical.max(lhs.value / rhs.value);
        }
        rows.push(AuditRow::bound("E[|int eta dB|^2] <= 16K E[int |eta|^2 dt]", name, &lhs, stated, &rhs));
        rows.push(AuditRow::bound(
            "E[|J(eta)|] <= 4(s1^2 + s3^2 + 2 s2^2) E[int |eta| dt]",
            name,
            &table.sup(s + 4),
            j_const,
            &table.sup(s + 5),
        ));
        rows.extend(AuditRow::zero_rows("Re E_C[(int eta dB)^2 - int eta^2 d<B>] = 0", name, &table, s + 6));
        rows.extend(AuditRow::zero_rows("Im E_C[(int eta dB)^2 - int eta^2 d<B>] = 0", name, &table, s + 7));
    }
    Ok(AuditReport {
        rows,
        k: Some(k),
        stated_constant: Some(stated),
        empirical_constant: Some(empirical),
        n_paths: table.n_paths,
        confidence,
        controls: table.controls,
    })
}

/// Runs the scalar or planar audit matching the uncertainty set.
pub fn bound_audit<T: Real>(
    uncertainty: &Uncertainty<T>,
    grid: ScenarioGrid<T>,
    families: &[ControlFamily],
    confidence: f64,
) -> Result<AuditReport> {
    if families.is_empty() {
        return Err(Error::Empty("control family"));
    }
    match uncertainty {
        Uncertainty::Interval(iv) => real_bound_audit(iv, grid, families, confidence),
        Uncertainty::Set(set) => complex_bound_audit(set, grid, families, confidence),
    }
}
