use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::gheat::{iterated_expectation, nested_expect, SolverConfig, Stage};
use crate::report::CheckReport;
use crate::scalar::Real;
use crate::scenario::control::ControlRule;
use crate::scenario::estimate::scenario_sup_many;
use crate::scenario::sampler::{Path, Sampler};
use crate::sublinear::{Payoff, Uncertainty};

type PathFunctional<T> = Arc<dyn Fn(&Path<T>) -> T + Send + Sync>;

/// Real random quantity on G-Brownian paths.
#[derive(Clone)]
pub enum RealQuantity<T> {
    /// `φ(B_{t₁}, …, B_{tₙ})` with the path values concatenated; an empty
    /// time list means a constant. Both engines can evaluate it.
    Cylinder { payoff: Payoff<T>, times: Vec<T> },
    /// Arbitrary functional of a simulated path; scenario engine only.
    Functional(PathFunctional<T>),
}

impl<T: fmt::Debug> fmt::Debug for RealQuantity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealQuantity::Cylinder { times, .. } => f.debug_struct("Cylinder").field("times", times).finish_non_exhaustive(),
            RealQuantity::Functional(_) => f.write_str("Functional"),
        }
    }
}

/// Index of `t` on a grid of step `dt`, if it is a grid time.
fn grid_index<T: Real>(t: T, dt: T) -> Result<usize> {
    let k = (t / dt).round();
    if (k * dt - t).abs() > T::lit(1e-9) * (T::one() + t.abs()) || k < T::zero() {
        return Err(Error::GridMismatch(format!("time {t} is not a multiple of dt = {dt}")));
    }
    Ok(k.as_f64() as usize)
}

impl<T: Real> RealQuantity<T> {
    pub fn constant(c: T) -> Self {
        RealQuantity::Cylinder {
            payoff: Payoff::constant(0, c),
            times: Vec::new(),
        }
    }

    /// `φ(B_t)` for a single observation time.
    pub fn at(payoff: Payoff<T>, t: T) -> Self {
        RealQuantity::Cylinder {
            payoff,
            times: vec![t],
        }
    }

    pub fn functional(f: impl Fn(&Path<T>) -> T + Send + Sync + 'static) -> Self {
        RealQuantity::Functional(Arc::new(f))
    }

    pub fn eval_path(&self, path: &Path<T>) -> Result<T> {
        match self {
            RealQuantity::Functional(f) => Ok(f(path)),
            RealQuantity::Cylinder { payoff, times } => {
                let mut x = Vec::with_capacity(times.len() * path.dim);
                for &t in times {
                    let k = grid_index(t, path.dt)?;
                    if k > path.n_steps() {
                        return Err(Error::GridMismatch(format!("time {t} is past the path horizon")));
                    }
                    x.extend_from_slice(path.state(k));
                }
                Ok(payoff.eval(&x))
            }
        }
    }

    /// `c + Σ wᵢ Xᵢ`, kept as a cylinder when every term is one.
    pub fn linear(terms: &[(T, &RealQuantity<T>)], c: T) -> Self {
        let cylinders: Option<Vec<(T, &Payoff<T>, &Vec<T>)>> = terms
            .iter()
            .map(|(w, q)| match q {
                RealQuantity::Cylinder { payoff, times } => Some((*w, payoff, times)),
                RealQuantity::Functional(_) => None,
            })
            .collect();
        let Some(cylinders) = cylinders else {
            let owned: Vec<(T, RealQuantity<T>)> = terms.iter().map(|(w, q)| (*w, (*q).clone())).collect();
            return RealQuantity::functional(move |p| {
                owned.iter().fold(c, |acc, (w, q)| acc + *w * q.eval_path(p).unwrap_or(T::nan()))
            });
        };
        let mut times: Vec<T> = cylinders.iter().flat_map(|(_, _, t)| t.iter().copied()).collect();
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        times.dedup();
        let dim = cylinders
            .iter()
            .find(|(_, _, t)| !t.is_empty())
            .map_or(1, |(_, p, t)| p.dim() / t.len());
        let parts: Vec<(T, Payoff<T>, Vec<usize>)> = cylinders
            .iter()
            .map(|(w, p, ts)| {
                let idx = ts.iter().map(|t| times.iter().position(|s| s == t).expect("merged")).collect();
                (*w, (*p).clone(), idx)
            })
            .collect();
        let payoff = Payoff::new(dim * times.len(), move |x: &[T]| {
            let mut acc = c;
            let mut buf = Vec::new();
            for (w, p, idx) in &parts {
                buf.clear();
                for &i in idx {
                    buf.extend_from_slice(&x[i * dim..(i + 1) * dim]);
                }
                acc += *w * p.eval(&buf);
            }
            acc
        });
        RealQuantity::Cylinder { payoff, times }
    }
}

/// `Z = X + iY` with real components.
#[derive(Clone, Debug)]
pub struct ComplexRV<T> {
    pub re: RealQuantity<T>,
    pub im: RealQuantity<T>,
}

impl<T: Real> ComplexRV<T> {
    pub fn new(re: RealQuantity<T>, im: RealQuantity<T>) -> Self {
        Self { re, im }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::new(RealQuantity::constant(c.re), RealQuantity::constant(c.im))
    }

    /// `f(B_t)` for a planar map given in real form.
    pub fn at(f: impl Fn(Complex<T>) -> Complex<T> + Send + Sync + 'static, t: T) -> Self {
        let f = Arc::new(f);
        let g = f.clone();
        Self::new(
            RealQuantity::at(Payoff::planar(move |x, y| f(Complex::new(x, y)).re), t),
            RealQuantity::at(Payoff::planar(move |x, y| g(Complex::new(x, y)).im), t),
        )
    }

    /// `a + w·Z₁ + v·Z₂` for complex weights.
    pub fn combine(a: Complex<T>, w: Complex<T>, z1: &Self, v: Complex<T>, z2: &Self) -> Self {
        Self::new(
            RealQuantity::linear(&[(w.re, &z1.re), (-w.im, &z1.im), (v.re, &z2.re), (-v.im, &z2.im)], a.re),
            RealQuantity::linear(&[(w.im, &z1.re), (w.re, &z1.im), (v.im, &z2.re), (v.re, &z2.im)], a.im),
        )
    }

    pub fn scale(&self, w: Complex<T>) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        Self::combine(zero, w, self, zero, self)
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex::new(-T::one(), T::zero()))
    }
}

/// How expectations of path quantities are evaluated.
#[derive(Clone)]
pub enum Engine<T> {
    /// Backward G-heat recursion; `tolerance` is the grid error budget.
    Pde {
        uncertainty: Uncertainty<T>,
        config: SolverConfig<T>,
        tolerance: f64,
    },
    /// Best control mean over a control family; tolerances are confidence
    /// half-widths.
    Scenario {
        sampler: Sampler<T>,
        controls: Vec<Arc<dyn ControlRule<T>>>,
    },
}

impl<T> fmt::Debug for Engine<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Pde { tolerance, .. } => f.debug_struct("Pde").field("tolerance", tolerance).finish_non_exhaustive(),
            Engine::Scenario { controls, .. } => f.debug_struct("Scenario").field("controls", &controls.len()).finish_non_exhaustive(),
        }
    }
}

/// `Ê_C[Z]` with a per-component error allowance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate<T> {
    pub value: Complex<T>,
    /// Engine tolerance on each component.
    pub tolerance: f64,
}

fn real_expect<T: Real>(q: &RealQuantity<T>, engine: &Engine<T>) -> Result<(T, f64)> {
    match (q, engine) {
        (RealQuantity::Cylinder { payoff, times }, _) if times.is_empty() => Ok((payoff.eval(&[]), 0.0)),
        (RealQuantity::Cylinder { payoff, times }, Engine::Pde { uncertainty, config, tolerance }) => {
            Ok((nested_expect(payoff, times, uncertainty, config)?.value(), *tolerance))
        }
        (RealQuantity::Functional(_), Engine::Pde { .. }) => {
            Err(Error::Unsupported("path functionals need the scenario engine".into()))
        }
        (q, Engine::Scenario { sampler, controls }) => {
            // evaluate once up front so grid mismatches surface as errors
            let probe = sampler.sample_path(0, controls.first().ok_or(Error::Empty("control"))?.as_ref())?;
            q.eval_path(&probe)?;
            let table = scenario_sup_many(sampler, controls, |p| vec![q.eval_path(p).unwrap_or(T::nan())])?;
            let est = table.sup(0);
            Ok((T::lit(est.value), est.family_half_width))
        }
    }
}

/// `Ê_C[X + iY] = Ê[X] + iÊ[Y]`
pub fn complex_expect<T: Real>(z: &ComplexRV<T>, engine: &Engine<T>) -> Result<ComplexEstimate<T>> {
    let (re, tol_re) = real_expect(&z.re, engine)?;
    let (im, tol_im) = real_expect(&z.im, engine)?;
    Ok(ComplexEstimate {
        value: Complex::new(re, im),
        tolerance: tol_re.max(tol_im),
    })
}

fn distance<T: Real>(a: Complex<T>, b: Complex<T>) -> f64 {
    (a - b).norm().as_f64()
}

/// `Ê_C[Z₁ + cZ₂] = Ê_C[Z₁] + cÊ_C[Z₂]` for symmetric `Z₂`.
///
/// When `Ê_C[Z₂] ≠ −Ê_C[−Z₂]` beyond tolerance the report is marked
/// precondition-unmet rather than failed.
pub fn c_linearity_check<T: Real>(z1: &ComplexRV<T>, z2: &ComplexRV<T>, c: Complex<T>, engine: &Engine<T>) -> Result<CheckReport> {
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let e1 = complex_expect(z1, engine)?;
    let e2 = complex_expect(z2, engine)?;
    let m2 = complex_expect(&z2.neg(), engine)?;
    let ec = complex_expect(&ComplexRV::combine(zero, one, z1, c, z2), engine)?;
    let cn = c.norm().as_f64();
    let sym_tol = 2.0 * (e2.tolerance + m2.tolerance);
    let tol = 2.0 * (ec.tolerance + e1.tolerance + cn * e2.tolerance);
    let margin = distance(ec.value, e1.value + c * e2.value);
    let report = CheckReport::at_most(
        "c-linearity",
        "E_C[Z1 + c Z2] = E_C[Z1] + c E_C[Z2] when E_C[Z2] = -E_C[-Z2]",
        margin,
        0.0,
        tol,
    );
    if distance(e2.value, -m2.value) > sym_tol {
        Ok(report.precondition_unmet())
    } else {
        Ok(report)
    }
}

/// Outcome of comparing a joint expectation with its iterated form.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceCheck<T> {
    pub joint: Complex<T>,
    pub iterated: Complex<T>,
    pub report: CheckReport,
}

/// Compares `Ê_C[φ(Z₁, Z₂)]` for `Zᵢ = B_{tᵢ} − B_{sᵢ}` on disjoint intervals,
/// computed as a path expectation, against the two-stage iterated form
/// `Ê_C[Ê_C[φ(z, Z₂)]_{z = Z₁}]` (later increment inside).
///
/// `phi_re`, `phi_im` take `(z₁, z₂)` flattened in real coordinates.
#[allow(clippy::too_many_arguments)]
pub fn independence_reduction_check<T: Real>(
    first: (T, T),
    second: (T, T),
    phi_re: &Payoff<T>,
    phi_im: &Payoff<T>,
    uncertainty: &Uncertainty<T>,
    config: &SolverConfig<T>,
    tolerance: f64,
) -> Result<IndependenceCheck<T>> {
    let ((s1, t1), (s2, t2)) = (first, second);
    if !(s1 >= T::zero() && s1 < t1 && s2 >= T::zero() && s2 < t2) {
        return Err(Error::NonIncreasingTimes);
    }
    if s1.max(s2) < t1.min(t2) {
        return Err(Error::OverlappingIncrements(s1.as_f64(), t1.as_f64(), s2.as_f64(), t2.as_f64()));
    }
    let dim = uncertainty.dim();
    for phi in [phi_re, phi_im] {
        if phi.dim() != 2 * dim {
            return Err(Error::DimensionMismatch {
                expected: 2 * dim,
                got: phi.dim(),
            });
        }
    }
    let swapped = s2 < s1;

    let mut times: Vec<T> = [s1, t1, s2, t2].into_iter().filter(|&t| t > T::zero()).collect();
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    times.dedup();
    let slot = |t: T| times.iter().position(|&s| s == t);
    let (i_s1, i_t1, i_s2, i_t2) = (slot(s1), slot(t1).expect("t1"), slot(s2), slot(t2).expect("t2"));
    let on_path = |phi: &Payoff<T>| {
        let phi = phi.clone();
        Payoff::new(dim * times.len(), move |x: &[T]| {
            let at = |i: Option<usize>, c: usize| i.map_or(T::zero(), |i| x[i * dim + c]);
            let mut z = Vec::with_capacity(2 * dim);
            for c in 0..dim {
                z.push(at(Some(i_t1), c) - at(i_s1, c));
            }
            for c in 0..dim {
                z.push(at(Some(i_t2), c) - at(i_s2, c));
            }
            phi.eval(&z)
        })
    };
    let joint = |phi: &Payoff<T>| -> Result<T> { Ok(nested_expect(&on_path(phi), &times, uncertainty, config)?.value()) };

    let (h_outer, h_inner) = if swapped { (t2 - s2, t1 - s1) } else { (t1 - s1, t2 - s2) };
    let stages = [
        Stage {
            uncertainty: uncertainty.clone(),
            config: config.with_horizon(h_outer),
        },
        Stage {
            uncertainty: uncertainty.clone(),
            config: config.with_horizon(h_inner),
        },
    ];
    let iterated = |phi: &Payoff<T>| -> Result<T> {
        let psi = if swapped {
            let phi = phi.clone();
            Payoff::new(2 * dim, move |x: &[T]| {
                let mut z = x[dim..].to_vec();
                z.extend_from_slice(&x[..dim]);
                phi.eval(&z)
            })
        } else {
            phi.clone()
        };
        Ok(iterated_expectation(&psi, &stages)?.value())
    };

    let joint = Complex::new(joint(phi_re)?, joint(phi_im)?);
    let iterated = Complex::new(iterated(phi_re)?, iterated(phi_im)?);
    let report = CheckReport::at_most(
        "independence-reduction",
        "E_C[phi(Z1, Z2)] = E_C[E_C[phi(z, Z2)] at z = Z1] for independent increments",
        distance(joint, iterated),
        0.0,
        tolerance,
    );
    Ok(IndependenceCheck { joint, iterated, report })
}
