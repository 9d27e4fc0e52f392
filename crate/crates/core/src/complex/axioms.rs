use num_complex::Complex;

use crate::error::Result;
use crate::scalar::Real;
use crate::sublinear::axioms::{Axiom, AxiomReport, ProbeSet, Tally};
use crate::sublinear::Payoff;

/// Complex payoff `φ = φ_re + iφ_im` on a common domain.
#[derive(Clone)]
pub struct ComplexPayoff<T> {
    pub re: Payoff<T>,
    pub im: Payoff<T>,
}

impl<T: Real> std::fmt::Debug for ComplexPayoff<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComplexPayoff").field("re", &self.re).field("im", &self.im).finish()
    }
}

impl<T: Real> ComplexPayoff<T> {
    pub fn new(re: Payoff<T>, im: Payoff<T>) -> Self {
        Self { re, im }
    }

    pub fn constant(dim: usize, c: Complex<T>) -> Self {
        Self::new(Payoff::constant(dim, c.re), Payoff::constant(dim, c.im))
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    pub fn eval(&self, x: &[T]) -> Complex<T> {
        Complex::new(self.re.eval(x), self.im.eval(x))
    }

    pub fn scale(&self, lambda: T) -> Self {
        Self::new(self.re.scale(lambda), self.im.scale(lambda))
    }

    pub fn shift(&self, c: Complex<T>) -> Self {
        Self::new(self.re.shift(c.re), self.im.shift(c.im))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.re.add(&other.re), self.im.add(&other.im))
    }

    /// Componentwise maximum, which dominates both arguments componentwise.
    pub fn max(&self, other: &Self) -> Self {
        Self::new(self.re.max(&other.re), self.im.max(&other.im))
    }
}

/// Largest componentwise excess `max(a.re − b.re, a.im − b.im)`.
fn excess(a: Complex<f64>, b: Complex<f64>) -> f64 {
    (a.re - b.re).max(a.im - b.im)
}

/// Probes a complex expectation functional for constant preservation,
/// positive homogeneity, constant transferability, componentwise
/// monotonicity and convexity.
///
/// Complex probe constants pair each real probe constant with every other.
pub fn complex_axiom_report<T, E>(
    evaluator: E,
    payoffs: &[ComplexPayoff<T>],
    points: &[Vec<T>],
    probes: &ProbeSet<T>,
    tolerance: T,
) -> AxiomReport
where
    T: Real,
    E: Fn(&ComplexPayoff<T>) -> Result<Complex<T>>,
{
    let mut tally = Tally::new();
    let dim = payoffs.first().map_or(1, ComplexPayoff::dim);
    let eval = |phi: &ComplexPayoff<T>, label: &dyn Fn() -> String, tally: &mut Tally| match evaluator(phi) {
        Ok(v) => Some(Complex::new(v.re.as_f64(), v.im.as_f64())),
        Err(e) => {
            tally.fail(format!("{}: {e}", label()));
            None
        }
    };
    let constants: Vec<Complex<T>> = probes
        .constants
        .iter()
        .zip(probes.constants.iter().rev())
        .map(|(&a, &b)| Complex::new(a, b))
        .collect();
    let as_f64 = |c: Complex<T>| Complex::new(c.re.as_f64(), c.im.as_f64());

    for &c in &constants {
        if let Some(v) = eval(&ComplexPayoff::constant(dim, c), &|| format!("constant {c}"), &mut tally) {
            tally.record(Axiom::ConstantPreserving, (v - as_f64(c)).norm(), || format!("c = {c}"));
        }
    }

    let base: Vec<Option<Complex<f64>>> = payoffs
        .iter()
        .enumerate()
        .map(|(i, phi)| eval(phi, &|| format!("payoff {i}"), &mut tally))
        .collect();

    for (i, phi) in payoffs.iter().enumerate() {
        let Some(e) = base[i] else { continue };
        for &lam in &probes.scales {
            if let Some(v) = eval(&phi.scale(lam), &|| format!("{lam} * payoff {i}"), &mut tally) {
                tally.record(Axiom::PositiveHomogeneity, (v - e * lam.as_f64()).norm(), || {
                    format!("payoff {i}, lambda = {lam}")
                });
            }
        }
        for &c in &constants {
            if let Some(v) = eval(&phi.shift(c), &|| format!("payoff {i} + {c}"), &mut tally) {
                tally.record(Axiom::ConstantTransferability, (v - e - as_f64(c)).norm(), || {
                    format!("payoff {i}, c = {c}")
                });
            }
        }
    }

    for i in 0..payoffs.len() {
        for j in 0..payoffs.len() {
            let (Some(ei), Some(ej)) = (base[i], base[j]) else { continue };
            if i != j {
                if let Some(v) = eval(&payoffs[i].max(&payoffs[j]), &|| format!("max(payoff {i}, payoff {j})"), &mut tally) {
                    tally.record(Axiom::Monotonicity, excess(ei, v), || format!("payoff {i} <= max with payoff {j}"));
                }
                let dominated = !points.is_empty()
                    && points.iter().all(|p| {
                        let (a, b) = (payoffs[i].eval(p), payoffs[j].eval(p));
                        a.re <= b.re && a.im <= b.im
                    });
                if dominated {
                    tally.record(Axiom::Monotonicity, excess(ei, ej), || {
                        format!("payoff {i} <= payoff {j} on all sample points")
                    });
                }
            }
            if j >= i {
                for &a in &probes.weights {
                    let mix = payoffs[i].scale(a).add(&payoffs[j].scale(T::one() - a));
                    if let Some(v) = eval(&mix, &|| format!("convex mix of payoffs {i}, {j}"), &mut tally) {
                        let a = a.as_f64();
                        tally.record(Axiom::Convexity, excess(v, ei * a + ej * (1.0 - a)), || {
                            format!("payoffs {i}, {j}, alpha = {a}")
                        });
                    }
                }
            }
        }
    }

    tally.finish(tolerance.as_f64())
}
