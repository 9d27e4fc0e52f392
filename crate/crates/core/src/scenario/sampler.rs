use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scenario::control::{ControlRule, PathPrefix};
use crate::sublinear::{Sym2, Uncertainty};

/// Square roots of the admissible covariances, indexed like the vertices.
#[derive(Debug, Clone, PartialEq)]
pub enum VolatilityModel<T> {
    /// Standard deviations `σ̲, σ̄` of a scalar interval (always two entries).
    Scalar(Vec<T>),
    /// PSD square roots of the vertices of a 2×2 covariance set.
    Planar(Vec<Sym2<T>>),
}

impl<T: Real> VolatilityModel<T> {
    pub fn new(uncertainty: &Uncertainty<T>) -> Result<Self> {
        match uncertainty {
            Uncertainty::Interval(iv) => Ok(VolatilityModel::Scalar(vec![iv.lo().sqrt(), iv.hi().sqrt()])),
            Uncertainty::Set(set) => set
                .vertices()
                .iter()
                .enumerate()
                .map(|(index, v)| v.sqrt_psd().ok_or(Error::NotPositiveSemidefinite { index }))
                .collect::<Result<Vec<_>>>()
                .map(VolatilityModel::Planar),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            VolatilityModel::Scalar(_) => 1,
            VolatilityModel::Planar(_) => 2,
        }
    }

    pub fn n_vertices(&self) -> usize {
        match self {
            VolatilityModel::Scalar(v) => v.len(),
            VolatilityModel::Planar(v) => v.len(),
        }
    }
}

/// One simulated path: states `B_{t_0} = 0, …, B_{t_N}` and the vertex used on
/// each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Path<T> {
    pub dim: usize,
    pub dt: T,
    states: Vec<T>,
    vertices: Vec<usize>,
}

impl<T: Real> Path<T> {
    /// Builds a path from explicit states (flattened, `dim` per time point).
    pub fn from_states(dim: usize, dt: T, states: Vec<T>, vertices: Vec<usize>) -> Result<Self> {
        if dim == 0 || states.len() % dim != 0 || states.len() / dim != vertices.len() + 1 {
            return Err(Error::GridMismatch("states must hold n_steps + 1 points".into()));
        }
        Ok(Self {
            dim,
            dt,
            states,
            vertices,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.vertices.len()
    }

    pub fn state(&self, k: usize) -> &[T] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn terminal(&self) -> &[T] {
        self.state(self.n_steps())
    }

    /// Component `c` of `B_{t_{k+1}} − B_{t_k}`.
    #[inline]
    pub fn increment(&self, k: usize, c: usize) -> T {
        self.states[(k + 1) * self.dim + c] - self.states[k * self.dim + c]
    }

    pub fn vertex(&self, k: usize) -> usize {
        self.vertices[k]
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn states(&self) -> &[T] {
        &self.states
    }

    pub fn time(&self, k: usize) -> T {
        self.dt * T::from_usize_lossy(k)
    }

    /// The same path with its tail after step `k` replaced by `tail`
    /// increments (used to probe adaptedness).
    pub fn with_tail(&self, k: usize, tail: &[T]) -> Self {
        let mut out = self.clone();
        let dim = self.dim;
        for (j, chunk) in tail.chunks(dim).enumerate() {
            let step = k + j;
            if step >= self.n_steps() {
                break;
            }
            for c in 0..dim {
                out.states[(step + 1) * dim + c] = out.states[step * dim + c] + chunk[c];
            }
        }
        out
    }
}

/// Time grid, path count and seed of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound = "T: Real")]
pub struct ScenarioGrid<T> {
    pub dt: T,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
}

impl<T: Real> ScenarioGrid<T> {
    pub fn horizon(&self) -> T {
        self.dt * T::from_usize_lossy(self.n_steps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if self.n_steps == 0 || self.n_paths == 0 {
            return Err(Error::InvalidConfig("n_steps and n_paths must be at least 1".into()));
        }
        Ok(())
    }
}

/// Generates G-Brownian paths under adapted controls.
///
/// Path `i` draws its Gaussian innovations from a ChaCha8 stream keyed by
/// `(seed, i)`, always `dim` draws per step regardless of the control, so
/// every control sees the same innovations (common random numbers) and the
/// parallel schedule cannot change any result.
#[derive(Debug, Clone)]
pub struct Sampler<T> {
    pub model: VolatilityModel<T>,
    pub grid: ScenarioGrid<T>,
}

impl<T: Real> Sampler<T> {
    pub fn new(uncertainty: &Uncertainty<T>, grid: ScenarioGrid<T>) -> Result<Self> {
        grid.validate()?;
        Ok(Self {
            model: VolatilityModel::new(uncertainty)?,
            grid,
        })
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn n_vertices(&self) -> usize {
        self.model.n_vertices()
    }

    pub fn with_grid(&self, grid: ScenarioGrid<T>) -> Result<Self> {
        grid.validate()?;
        Ok(Self {
            model: self.model.clone(),
            grid,
        })
    }

    fn rng(&self, path_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.grid.seed);
        rng.set_stream(path_index as u64);
        rng
    }

    pub fn sample_path(&self, path_index: usize, control: &dyn ControlRule<T>) -> Result<Path<T>> {
        let n = self.grid.n_steps;
        let dim = self.dim();
        let n_vertices = self.n_vertices();
        let sqrt_dt = self.grid.dt.sqrt();
        let mut rng = self.rng(path_index);
        let mut states = Vec::with_capacity((n + 1) * dim);
        states.resize(dim, T::zero());
        let mut vertices = Vec::with_capacity(n);
        let mut z = [T::zero(); 2];
        for k in 0..n {
            let prefix = PathPrefix::new(dim, k, self.grid.dt * T::from_usize_lossy(k), &states);
            let v = control.select(&prefix);
            if v >= n_vertices {
                return Err(Error::InvalidVertexIndex {
                    index: v,
                    available: n_vertices,
                });
            }
            for zc in z.iter_mut().take(dim) {
                let draw: f64 = StandardNormal.sample(&mut rng);
                *zc = T::lit(draw);
            }
            let base = k * dim;
            match &self.model {
                VolatilityModel::Scalar(sd) => {
                    let next = states[base] + sd[v] * sqrt_dt * z[0];
                    states.push(next);
                }
                VolatilityModel::Planar(roots) => {
                    let d = roots[v].apply([z[0], z[1]]);
                    let (x, y) = (states[base] + d[0] * sqrt_dt, states[base + 1] + d[1] * sqrt_dt);
                    states.push(x);
                    states.push(y);
                }
            }
            vertices.push(v);
        }
        Ok(Path {
            dim,
            dt: self.grid.dt,
            states,
            vertices,
        })
    }

    /// Applies `f` to every path without keeping the ensemble; results are in
    /// path order.
    pub fn map_paths<R, F>(&self, control: &dyn ControlRule<T>, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&Path<T>) -> R + Sync,
    {
        control.validate(self.grid.n_steps, self.n_vertices())?;
        (0..self.grid.n_paths)
            .into_par_iter()
            .map(|i| self.sample_path(i, control).map(|p| f(&p)))
            .collect()
    }

    pub fn sample_paths(&self, control: &dyn ControlRule<T>) -> Result<PathEnsemble<T>> {
        let paths = self.map_paths(control, Path::clone)?;
        Ok(PathEnsemble {
            grid: self.grid,
            control: control.name(),
            paths,
        })
    }
}

/// Stored paths sharing one time grid and control.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble<T> {
    pub grid: ScenarioGrid<T>,
    pub control: String,
    pub paths: Vec<Path<T>>,
}

impl<T: Real> PathEnsemble<T> {
    pub fn dim(&self) -> usize {
        self.paths.first().map_or(0, |p| p.dim)
    }

    pub fn n_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps
    }

    /// CSV with columns `path, step, t, B1[, B2], vertex_index`; the vertex
    /// column of the terminal row is empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let dim = self.dim();
        let mut header = vec!["path", "step", "t", "B1"];
        if dim == 2 {
            header.push("B2");
        }
        header.push("vertex_index");
        w.write_record(&header)?;
        for (i, p) in self.paths.iter().enumerate() {
            for k in 0..=p.n_steps() {
                let mut row = vec![i.to_string(), k.to_string(), p.time(k).to_string()];
                row.extend(p.state(k).iter().map(T::to_string));
                row.push(if k < p.n_steps() { p.vertex(k).to_string() } else { String::new() });
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
