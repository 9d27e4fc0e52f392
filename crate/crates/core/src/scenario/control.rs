use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// States `B_{t_0}, …, B_{t_k}` observed so far on one path.
#[derive(Debug, Clone, Copy)]
pub struct PathPrefix<'a, T> {
    pub dim: usize,
    pub step: usize,
    pub time: T,
    states: &'a [T],
}

impl<'a, T: Real> PathPrefix<'a, T> {
    pub(crate) fn new(dim: usize, step: usize, time: T, states: &'a [T]) -> Self {
        debug_assert_eq!(states.len(), (step + 1) * dim);
        Self {
            dim,
            step,
            time,
            states,
        }
    }

    pub fn current(&self) -> &'a [T] {
        &self.states[self.step * self.dim..]
    }

    pub fn state(&self, k: usize) -> &'a [T] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }
}

/// Adapted choice of a covariance vertex at each step.
///
/// `select` only ever sees the path prefix up to the current time, so a rule
/// cannot anticipate future increments.
pub trait ControlRule<T>: Send + Sync {
    fn name(&self) -> String;

    fn select(&self, prefix: &PathPrefix<'_, T>) -> usize;

    fn validate(&self, _n_steps: usize, _n_vertices: usize) -> Result<()> {
        Ok(())
    }
}

fn check_index(index: usize, available: usize) -> Result<()> {
    if index < available {
        Ok(())
    } else {
        Err(Error::InvalidVertexIndex { index, available })
    }
}

/// The same vertex at every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constant(pub usize);

impl<T: Real> ControlRule<T> for Constant {
    fn name(&self) -> String {
        format!("constant:{}", self.0)
    }

    fn select(&self, _: &PathPrefix<'_, T>) -> usize {
        self.0
    }

    fn validate(&self, _: usize, n_vertices: usize) -> Result<()> {
        check_index(self.0, n_vertices)
    }
}

/// Alternates between two vertices, starting with `first`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BangBang {
    pub first: usize,
    pub second: usize,
}

impl<T: Real> ControlRule<T> for BangBang {
    fn name(&self) -> String {
        format!("bang-bang:{}:{}", self.first, self.second)
    }

    fn select(&self, prefix: &PathPrefix<'_, T>) -> usize {
        if prefix.step % 2 == 0 {
            self.first
        } else {
            self.second
        }
    }

    fn validate(&self, _: usize, n_vertices: usize) -> Result<()> {
        check_index(self.first, n_vertices)?;
        check_index(self.second, n_vertices)
    }
}

/// Deterministic per-step vertex list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule(pub Vec<usize>);

impl<T: Real> ControlRule<T> for Schedule {
    fn name(&self) -> String {
        "schedule".into()
    }

    fn select(&self, prefix: &PathPrefix<'_, T>) -> usize {
        self.0[prefix.step]
    }

    fn validate(&self, n_steps: usize, n_vertices: usize) -> Result<()> {
        if self.0.len() != n_steps {
            return Err(Error::GridMismatch(format!(
                "schedule has {} entries for {} steps",
                self.0.len(),
                n_steps
            )));
        }
        self.0.iter().try_for_each(|&i| check_index(i, n_vertices))
    }
}

type Key<T> = Arc<dyn Fn(&PathPrefix<'_, T>) -> T + Send + Sync>;

/// Picks `positive` when the key function of the prefix is positive and
/// `negative` otherwise.
#[derive(Clone)]
pub struct SignFeedback<T> {
    pub label: String,
    pub key: Key<T>,
    pub positive: usize,
    pub negative: usize,
}

impl<T> fmt::Debug for SignFeedback<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignFeedback")
            .field("label", &self.label)
            .field("positive", &self.positive)
            .field("negative", &self.negative)
            .finish_non_exhaustive()
    }
}

impl<T: Real> SignFeedback<T> {
    pub fn new(
        label: impl Into<String>,
        positive: usize,
        negative: usize,
        key: impl Fn(&PathPrefix<'_, T>) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            key: Arc::new(key),
            positive,
            negative,
        }
    }
}

impl<T: Real> ControlRule<T> for SignFeedback<T> {
    fn name(&self) -> String {
        format!("sign-feedback:{}:{}:{}", self.label, self.positive, self.negative)
    }

    fn select(&self, prefix: &PathPrefix<'_, T>) -> usize {
        if (self.key)(prefix) > T::zero() {
            self.positive
        } else {
            self.negative
        }
    }

    fn validate(&self, _: usize, n_vertices: usize) -> Result<()> {
        check_index(self.positive, n_vertices)?;
        check_index(self.negative, n_vertices)
    }
}

/// Named groups of controls used by experiments and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlFamily {
    /// One constant control per vertex.
    Constants,
    /// Every ordered pair of distinct vertices, alternating each step.
    BangBang,
    /// Switches between each pair of distinct vertices on the sign of the
    /// first state coordinate, in both orientations.
    SignFeedback,
}

impl ControlFamily {
    pub fn key(&self) -> &'static str {
        match self {
            ControlFamily::Constants => "constants",
            ControlFamily::BangBang => "bang-bang",
            ControlFamily::SignFeedback => "sign-feedback",
        }
    }

    pub fn parse(key: &str) -> Result<Self> {
        match key {
            "constants" => Ok(ControlFamily::Constants),
            "bang-bang" => Ok(ControlFamily::BangBang),
            "sign-feedback" => Ok(ControlFamily::SignFeedback),
            other => Err(Error::UnknownKey(other.to_string())),
        }
    }

    pub fn controls<T: Real>(&self, n_vertices: usize) -> Vec<Arc<dyn ControlRule<T>>> {
        let pairs = || {
            (0..n_vertices).flat_map(move |a| (0..n_vertices).filter(move |&b| b != a).map(move |b| (a, b)))
        };
        match self {
            ControlFamily::Constants => (0..n_vertices)
                .map(|i| Arc::new(Constant(i)) as Arc<dyn ControlRule<T>>)
                .collect(),
            ControlFamily::BangBang => pairs()
                .map(|(first, second)| Arc::new(BangBang { first, second }) as Arc<dyn ControlRule<T>>)
                .collect(),
            ControlFamily::SignFeedback => pairs()
                .map(|(positive, negative)| {
                    Arc::new(SignFeedback::new("b1", positive, negative, |p: &PathPrefix<'_, T>| {
                        p.current()[0]
                    })) as Arc<dyn ControlRule<T>>
                })
                .collect(),
        }
    }
}

/// Concatenated controls of several families, in order.
pub fn control_catalog<T: Real>(families: &[ControlFamily], n_vertices: usize) -> Vec<Arc<dyn ControlRule<T>>> {
    families.iter().flat_map(|f| f.controls(n_vertices)).collect()
}
