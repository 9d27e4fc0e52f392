use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Real;
use crate::sublinear::payoff::Payoff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    ConstantPreserving,
    PositiveHomogeneity,
    ConstantTransferability,
    Monotonicity,
    Subadditivity,
    Convexity,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Axiom::ConstantPreserving => "constant preserving",
            Axiom::PositiveHomogeneity => "positive homogeneity",
            Axiom::ConstantTransferability => "constant transferability",
            Axiom::Monotonicity => "monotonicity",
            Axiom::Subadditivity => "subadditivity",
            Axiom::Convexity => "convexity",
        };
        f.write_str(name)
    }
}

/// Largest signed violation of one axiom over every probe that was evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    /// Positive means the axiom is broken by that much.
    pub max_violation: f64,
    pub worst_case: String,
    pub cases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub tolerance: f64,
    pub checks: Vec<AxiomCheck>,
    /// Probes on which the evaluator itself failed.
    pub evaluator_failures: Vec<String>,
}

impl AxiomReport {
    pub fn violations(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| c.max_violation > self.tolerance)
    }

    pub fn check(&self, axiom: Axiom) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }

    pub fn is_compliant(&self) -> bool {
        self.evaluator_failures.is_empty() && self.violations().next().is_none()
    }
}

/// Scalars and constants used to build derived probes from the payoff family.
#[derive(Debug, Clone)]
pub struct ProbeSet<T> {
    pub constants: Vec<T>,
    pub scales: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Default for ProbeSet<T> {
    fn default() -> Self {
        let l = T::lit;
        Self {
            constants: vec![l(-1.5), l(0.0), l(0.75), l(3.0)],
            scales: vec![l(0.0), l(0.5), l(2.0), l(8.0)],
            weights: vec![l(0.25), l(0.5), l(0.9)],
        }
    }
}

/// Accumulates the worst case per axiom.
pub(crate) struct Tally {
    checks: Vec<AxiomCheck>,
    failures: Vec<String>,
}

impl Tally {
    pub(crate) fn new() -> Self {
        Self {
            checks: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, axiom: Axiom, violation: f64, case: impl FnOnce() -> String) {
        let violation = if violation.is_nan() { f64::INFINITY } else { violation };
        match self.checks.iter_mut().find(|c| c.axiom == axiom) {
            Some(c) => {
                c.cases += 1;
                if violation > c.max_violation {
                    c.max_violation = violation;
                    c.worst_case = case();
                }
            }
            None => self.checks.push(AxiomCheck {
                axiom,
                max_violation: violation,
                worst_case: case(),
                cases: 1,
            }),
        }
    }

    pub(crate) fn fail(&mut self, what: String) {
        self.failures.push(what);
    }

    pub(crate) fn finish(self, tolerance: f64) -> AxiomReport {
        AxiomReport {
            tolerance,
            checks: self.checks,
            evaluator_failures: self.failures,
        }
    }
}

/// Probes a real expectation functional for the sublinear axioms.
///
/// Derived payoffs are built from `payoffs` with the scalars in `probes`.
/// `points` are sample inputs on which pointwise ordering between family
/// members is detected; every detected pair `φᵢ ≤ φⱼ` is checked for
/// monotonicity in addition to the always-ordered pair `φᵢ ≤ max(φᵢ, φⱼ)`.
/// Evaluator errors are collected in the report instead of being raised.
pub fn axiom_report<T, E>(
    evaluator: E,
    payoffs: &[Payoff<T>],
    points: &[Vec<T>],
    probes: &ProbeSet<T>,
    tolerance: T,
) -> AxiomReport
where
    T: Real,
    E: Fn(&Payoff<T>) -> Result<T>,
{
    let mut tally = Tally::new();
    let dim = payoffs.first().map_or(1, Payoff::dim);
    let eval = |phi: &Payoff<T>, label: &dyn Fn() -> String, tally: &mut Tally| match evaluator(phi) {
        Ok(v) => Some(v.as_f64()),
        Err(e) => {
            tally.fail(format!("{}: {e}", label()));
            None
        }
    };

    for &c in &probes.constants {
        if let Some(v) = eval(&Payoff::constant(dim, c), &|| format!("constant {c}"), &mut tally) {
            tally.record(Axiom::ConstantPreserving, (v - c.as_f64()).abs(), || format!("c = {c}"));
        }
    }

    let base: Vec<Option<f64>> = payoffs
        .iter()
        .enumerate()
        .map(|(i, phi)| eval(phi, &|| format!("payoff {i}"), &mut tally))
        .collect();

    for (i, phi) in payoffs.iter().enumerate() {
        let Some(e) = base[i] else { continue };
        for &lam in &probes.scales {
            if let Some(v) = eval(&phi.scale(lam), &|| format!("{lam} * payoff {i}"), &mut tally) {
                let l = lam.as_f64();
                tally.record(Axiom::PositiveHomogeneity, (v - l * e).abs(), || {
                    format!("payoff {i}, lambda = {lam}")
                });
            }
        }
        for &c in &probes.constants {
            if let Some(v) = eval(&phi.shift(c), &|| format!("payoff {i} + {c}"), &mut tally) {
                tally.record(Axiom::ConstantTransferability, (v - e - c.as_f64()).abs(), || {
                    format!("payoff {i}, c = {c}")
                });
            }
        }
    }

    for i in 0..payoffs.len() {
        for j in 0..payoffs.len() {
            let (Some(ei), Some(ej)) = (base[i], base[j]) else { continue };
            if i != j {
                let upper = payoffs[i].max(&payoffs[j]);
                if let Some(v) = eval(&upper, &|| format!("max(payoff {i}, payoff {j})"), &mut tally) {
                    tally.record(Axiom::Monotonicity, ei - v, || format!("payoff {i} <= max with payoff {j}"));
                }
                let dominated = !points.is_empty()
                    && points.iter().all(|p| payoffs[i].eval(p) <= payoffs[j].eval(p));
                if dominated {
                    tally.record(Axiom::Monotonicity, ei - ej, || {
                        format!("payoff {i} <= payoff {j} on all sample points")
                    });
                }
            }
            if j >= i {
                if let Some(v) = eval(&payoffs[i].add(&payoffs[j]), &|| format!("payoff {i} + payoff {j}"), &mut tally) {
                    tally.record(Axiom::Subadditivity, v - ei - ej, || format!("payoffs {i}, {j}"));
                }
                for &a in &probes.weights {
                    let mix = payoffs[i].scale(a).add(&payoffs[j].scale(T::one() - a));
                    if let Some(v) = eval(&mix, &|| format!("convex mix of payoffs {i}, {j}"), &mut tally) {
                        let a = a.as_f64();
                        tally.record(Axiom::Convexity, v - a * ei - (1.0 - a) * ej, || {
                            format!("payoffs {i}, {j}, alpha = {a}")
                        });
                    }
                }
            }
        }
    }

    tally.finish(tolerance.as_f64())
}
