use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::control::ControlRule;
use crate::scenario::sampler::{Path, Sampler};
use crate::sublinear::Payoff;

/// Default confidence level of Monte Carlo intervals.
pub const CONFIDENCE: f64 = 0.99;

/// Two-sided normal quantile at `confidence`, Bonferroni-split over `family`
/// simultaneous intervals.
pub fn normal_quantile(confidence: f64, family: usize) -> f64 {
    let alpha = (1.0 - confidence) / (2.0 * family.max(1) as f64);
    Normal::standard().inverse_cdf(1.0 - alpha)
}

/// Sample mean and standard error per statistic, accumulated in path order.
pub fn summarize<T: Real>(samples: &[Vec<T>]) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len();
    let width = samples.first().map_or(0, Vec::len);
    let mut means = vec![0.0; width];
    for s in samples {
        for (m, x) in means.iter_mut().zip(s) {
            *m += x.as_f64();
        }
    }
    means.iter_mut().for_each(|m| *m /= n.max(1) as f64);
    let mut var = vec![0.0; width];
    for s in samples {
        for ((v, m), x) in var.iter_mut().zip(&means).zip(s) {
            let d = x.as_f64() - m;
            *v += d * d;
        }
    }
    let std_errs = var
        .into_iter()
        .map(|v| {
            if n < 2 {
                f64::INFINITY
            } else {
                (v / (n - 1) as f64 / n as f64).sqrt()
            }
        })
        .collect();
    (means, std_errs)
}

/// Per-control Monte Carlo means of one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlEstimate {
    pub control: String,
    pub mean: f64,
    pub std_err: f64,
}

/// Best (or worst) control mean with its confidence half-widths.
///
/// `half_width` is the 99% half-width of the winning mean alone;
/// `family_half_width` covers all controls simultaneously and is what
/// verdicts use, since a maximum over noisy means is biased upward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEstimate {
    pub value: f64,
    pub half_width: f64,
    pub family_half_width: f64,
    pub winner: String,
    pub n_paths: usize,
    pub per_control: Vec<ControlEstimate>,
}

/// Means of several path statistics under each control of a family, all
/// computed from one simulation pass per control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTable {
    pub controls: Vec<String>,
    pub means: Vec<Vec<f64>>,
    pub std_errs: Vec<Vec<f64>>,
    pub n_paths: usize,
    /// Confidence level of the reported half-widths.
    pub confidence: f64,
}

impl ScenarioTable {
    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn n_statistics(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    fn pick(&self, stat: usize, maximize: bool) -> ScenarioEstimate {
        let per_control: Vec<ControlEstimate> = self
            .controls
            .iter()
            .enumerate()
            .map(|(c, name)| ControlEstimate {
                control: name.clone(),
                mean: self.means[c][stat],
                std_err: self.std_errs[c][stat],
            })
            .collect();
        let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
        let mut best = 0;
        for (c, e) in per_control.iter().enumerate() {
            if better(e.mean, per_control[best].mean) {
                best = c;
            }
        }
        let worst_se = per_control.iter().map(|e| e.std_err).fold(0.0, f64::max);
        ScenarioEstimate {
            value: per_control[best].mean,
            half_width: normal_quantile(self.confidence, 1) * per_control[best].std_err,
            family_half_width: normal_quantile(self.confidence, per_control.len()) * worst_se,
            winner: per_control[best].control.clone(),
            n_paths: self.n_paths,
            per_control,
        }
    }

    /// `Ê[X]` estimated from below by the best control.
    pub fn sup(&self, stat: usize) -> ScenarioEstimate {
        self.pick(stat, true)
    }

    /// `−Ê[−X]` estimated from above by the worst control.
    pub fn inf(&self, stat: usize) -> ScenarioEstimate {
        self.pick(stat, false)
    }
}

/// Runs every control on the sampler's grid and tabulates `statistics(path)`.
pub fn scenario_sup_many<T, F>(
    sampler: &Sampler<T>,
    controls: &[Arc<dyn ControlRule<T>>],
    statistics: F,
) -> Result<ScenarioTable>
where
    T: Real,
    F: Fn(&Path<T>) -> Vec<T> + Sync,
{
    if controls.is_empty() {
        return Err(Error::Empty("control"));
    }
    let mut table = ScenarioTable {
        controls: Vec::with_capacity(controls.len()),
        means: Vec::with_capacity(controls.len()),
        std_errs: Vec::with_capacity(controls.len()),
        n_paths: sampler.grid.n_paths,
        confidence: CONFIDENCE,
    };
    for control in controls {
        let samples = sampler.map_paths(control.as_ref(), &statistics)?;
        let (means, std_errs) = summarize(&samples);
        table.controls.push(control.name());
        table.means.push(means);
        table.std_errs.push(std_errs);
    }
    Ok(table)
}

/// Scenario lower bound for `Ê[φ(B_T)]`: the largest control mean.
pub fn scenario_sup_expect<T: Real>(
    phi: &Payoff<T>,
    controls: &[Arc<dyn ControlRule<T>>],
    sampler: &Sampler<T>,
) -> Result<ScenarioEstimate> {
    if phi.dim() != sampler.dim() {
        return Err(Error::DimensionMismatch {
            expected: sampler.dim(),
            got: phi.dim(),
        });
    }
    Ok(scenario_sup_many(sampler, controls, |p| vec![phi.eval(p.terminal())])?.sup(0))
}

/// Scenario estimate of `−Ê[−φ(B_T)]`: the smallest control mean.
pub fn scenario_inf_expect<T: Real>(
    phi: &Payoff<T>,
    controls: &[Arc<dyn ControlRule<T>>],
    sampler: &Sampler<T>,
) -> Result<ScenarioEstimate> {
    if phi.dim() != sampler.dim() {
        return Err(Error::DimensionMismatch {
            expected: sampler.dim(),
            got: phi.dim(),
        });
    }
    Ok(scenario_sup_many(sampler, controls, |p| vec![phi.eval(p.terminal())])?.inf(0))
}
