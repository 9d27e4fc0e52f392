use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::complex::analytic::AnalyticFunction;
use crate::error::{Error, Result};
use crate::gheat::{solve_gheat_2d, SolverConfig};
use crate::report::CheckReport;
use crate::scalar::Real;
use crate::scenario::control::{control_catalog, ControlFamily, ControlRule};
use crate::scenario::estimate::{scenario_sup_many, summarize, CONFIDENCE};
use crate::scenario::sampler::{Path, Sampler, ScenarioGrid};
use crate::sublinear::{CovarianceSet, Payoff, Uncertainty, VolatilityInterval};

/// Multiple of the martingale floor allowed in zero-variation checks.
pub const FLOOR_MULTIPLE: f64 = 3.0;

/// Largest relative gap allowed between `⟨f(B), f(B)̄⟩` and `∫|f′(B)|² d⟨B,B̄⟩`.
pub const PUSHFORWARD_REL_TOL: f64 = 0.02;

/// `{σ²I : σ² ∈ [σ̲², σ̄²]}` as the two-vertex set `{σ̲²I, σ̄²I}`.
pub fn make_conformal_set<T: Real>(iv: &VolatilityInterval<T>) -> CovarianceSet<T> {
    CovarianceSet::conformal(iv)
}

/// `G_C(c) = ½Ê_C[cZ²]` for the complex G-normal `Z` of `sigma` over the
/// horizon of `config`, from two planar G-heat solves.
pub fn gc_coefficient<T: Real>(sigma: &CovarianceSet<T>, c: Complex<T>, config: &SolverConfig<T>) -> Result<Complex<T>> {
    let re = Payoff::planar(move |x, y| (c * Complex::new(x, y).powi(2)).re);
    let im = Payoff::planar(move |x, y| (c * Complex::new(x, y).powi(2)).im);
    let u = solve_gheat_2d(&re, sigma, config)?.at_origin();
    let v = solve_gheat_2d(&im, sigma, config)?.at_origin();
    Ok(Complex::new(u, v).scale(T::half()))
}

/// Scenario test of `X = 0` q.s. for `X = Σ_k ΔX_k`, through `Ê[|X|²]`.
///
/// The pass threshold is `FLOOR_MULTIPLE · sup Ê[Σ|ΔX_k|²]` plus the
/// simultaneous half-width. When every `ΔX_k` is a martingale difference this
/// floor is exactly `E|X|²`, so it absorbs discretization noise but not a
/// drift in `X`.
pub fn maximal_zero_check<T, F>(
    check_id: &str,
    property: &str,
    sampler: &Sampler<T>,
    controls: &[Arc<dyn ControlRule<T>>],
    confidence: f64,
    increment: F,
) -> Result<CheckReport>
where
    T: Real,
    F: Fn(&Path<T>, usize) -> Complex<T> + Sync,
{
    let table = scenario_sup_many(sampler, controls, |p| {
        let mut x = Complex::new(T::zero(), T::zero());
        let mut floor = T::zero();
        for k in 0..p.n_steps() {
            let d = increment(p, k);
            x += d;
            floor += d.norm_sqr();
        }
        vec![x.norm_sqr(), floor]
    })?
    .with_confidence(confidence);
    let est = table.sup(0);
    let floor = table.sup(1).value;
    Ok(CheckReport::at_most(
        check_id,
        property,
        est.value,
        0.0,
        FLOOR_MULTIPLE * floor + est.family_half_width,
    ))
}

/// Grids and tolerances for [`conformal_invariance_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConformalSettings<T> {
    pub solver: SolverConfig<T>,
    pub paths: ScenarioGrid<T>,
    pub families: Vec<ControlFamily>,
    /// Grid error budget; the PDE check allows three times this.
    pub grid_tol: f64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

fn default_confidence() -> f64 {
    CONFIDENCE
}

/// Four-part conformal invariance test of an analytic `f` under `sigma`:
/// (a) planar G-heat flow leaves `Re f`, `Im f` fixed at the origin,
/// (b) `⟨B⟩ = 0` q.s., (c) `⟨f(B)⟩ = 0` q.s., (d) `⟨f(B), f(B)̄⟩` matches
/// `∫|f′(B)|² d⟨B,B̄⟩` in ensemble mean under every control.
pub fn conformal_invariance_check<T: Real>(
    sigma: &CovarianceSet<T>,
    f: &AnalyticFunction<T>,
    settings: &ConformalSettings<T>,
) -> Result<Vec<CheckReport>> {
    f.require_analytic()?;
    let origin = Complex::new(T::zero(), T::zero());
    let f0 = f.value(origin)?;

    let g = f.clone();
    let re = Payoff::planar(move |x, y| g.value(Complex::new(x, y)).map_or(T::nan(), |v| v.re));
    let g = f.clone();
    let im = Payoff::planar(move |x, y| g.value(Complex::new(x, y)).map_or(T::nan(), |v| v.im));
    let drift_re = (solve_gheat_2d(&re, sigma, &settings.solver)?.at_origin() - f0.re).abs().as_f64();
    let drift_im = (solve_gheat_2d(&im, sigma, &settings.solver)?.at_origin() - f0.im).abs().as_f64();
    let a = CheckReport::at_most(
        "a-harmonic-stationarity",
        "G-heat flow of Re f and Im f stays at f(0) at the origin",
        drift_re.max(drift_im),
        0.0,
        3.0 * settings.grid_tol,
    );

    let sampler = Sampler::new(&Uncertainty::Set(sigma.clone()), settings.paths)?;
    let controls = control_catalog::<T>(&settings.families, sampler.n_vertices());
    if controls.is_empty() {
        return Err(Error::Empty("control"));
    }
    let db = |p: &Path<T>, k: usize| Complex::new(p.increment(k, 0), p.increment(k, 1));
    let b = maximal_zero_check("b-quadratic-variation", "<B> = 0 q.s.", &sampler, &controls, settings.confidence, |p, k| db(p, k).powi(2))?;

    let point = |p: &Path<T>, k: usize| {
        let s = p.state(k);
        Complex::new(s[0], s[1])
    };
    let fv = |z: Complex<T>| f.value(z).unwrap_or(Complex::new(T::nan(), T::nan()));
    let c = maximal_zero_check("c-pushforward-variation", "<f(B)> = 0 q.s.", &sampler, &controls, settings.confidence, |p, k| {
        (fv(point(p, k + 1)) - fv(point(p, k))).powi(2)
    })?;

    let mut worst: f64 = 0.0;
    for control in &controls {
        let samples = sampler.map_paths(control.as_ref(), |p| {
            let (mut lhs, mut rhs) = (T::zero(), T::zero());
            for k in 0..p.n_steps() {
                let (z0, z1) = (point(p, k), point(p, k + 1));
                lhs += (fv(z1) - fv(z0)).norm_sqr();
                let d = f.derivative(z0).unwrap_or(Complex::new(T::nan(), T::nan()));
                rhs += d.norm_sqr() * db(p, k).norm_sqr();
            }
            vec![lhs, rhs]
        })?;
        let (means, _) = summarize(&samples);
        let rel = if means[1] == 0.0 { (means[0] - means[1]).abs() } else { (means[0] / means[1] - 1.0).abs() };
        worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
    }
    let d = CheckReport::at_most(
        "d-conjugate-variation",
        "mean <f(B), conj f(B)> = mean of int |f'(B)|^2 d<B, conj B> under every control",
        worst,
        0.0,
        PUSHFORWARD_REL_TOL,
    );
    Ok(vec![a, b, c, d])
}

/// Scenario estimates of `Ê[φ(B_T)]` from unrotated paths and from paths
/// whose increments are multiplied by `e^{iθ}` (on an independent seed); for
/// conformal sets and rotation-invariant `φ` the two agree within their
/// simultaneous half-widths.
pub fn rotation_closure_check<T: Real>(
    sigma: &CovarianceSet<T>,
    theta: T,
    phi: &Payoff<T>,
    grid: ScenarioGrid<T>,
    families: &[ControlFamily],
) -> Result<CheckReport> {
    if phi.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: phi.dim() });
    }
    let base = Sampler::new(&Uncertainty::Set(sigma.clone()), grid)?;
    let rotated = base.with_grid(ScenarioGrid {
        seed: grid.seed.wrapping_add(0x9E37_79B9),
        ..grid
    })?;
    let controls = control_catalog::<T>(families, base.n_vertices());
    let rot = Complex::from_polar(T::one(), theta);
    let plain = scenario_sup_many(&base, &controls, |p| vec![phi.eval(p.terminal())])?.sup(0);
    let turned = scenario_sup_many(&rotated, &controls, |p| {
        let s = p.terminal();
        let z = rot * Complex::new(s[0], s[1]);
        vec![phi.eval(&[z.re, z.im])]
    })?
    .sup(0);
    Ok(CheckReport::at_most(
        "rotation-closure",
        "E_C[phi(e^{i theta} B_T)] = E_C[phi(B_T)] for rotation-invariant phi",
        (plain.value - turned.value).abs(),
        0.0,
        plain.family_half_width + turned.family_half_width,
    ))
}

