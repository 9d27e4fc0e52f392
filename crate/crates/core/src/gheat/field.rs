use std::io::Write;

use crate::error::{Error, Result};
use crate::gheat::config::BoundaryRule;
use crate::scalar::Real;

/// Values on a symmetric uniform tensor grid, one axis per coordinate,
/// stored row-major with the first coordinate varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridTable<T> {
    half_nodes: Vec<usize>,
    steps: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> GridTable<T> {
    pub fn new(half_nodes: Vec<usize>, steps: Vec<T>, values: Vec<T>) -> Result<Self> {
        if half_nodes.len() != steps.len() || half_nodes.is_empty() {
            return Err(Error::GridMismatch("one step per axis required".into()));
        }
        let expected: usize = half_nodes.iter().map(|h| 2 * h + 1).product();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            half_nodes,
            steps,
            values,
        })
    }

    pub fn dims(&self) -> usize {
        self.half_nodes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.half_nodes.iter().map(|h| 2 * h + 1).collect()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn axis(&self, k: usize) -> Vec<T> {
        let n = self.half_nodes[k] as isize;
        (-n..=n)
            .map(|i| T::from_isize(i).expect("grid index fits scalar") * self.steps[k])
            .collect()
    }

    /// Value at the node closest to the origin, which is exactly the origin.
    pub fn at_origin(&self) -> T {
        let mut flat = 0;
        for &h in &self.half_nodes {
            flat = flat * (2 * h + 1) + h;
        }
        self.values[flat]
    }

    /// Multilinear interpolation; points off the grid follow `rule`.
    pub fn interpolate(&self, point: &[T], rule: BoundaryRule) -> T {
        debug_assert_eq!(point.len(), self.dims());
        let d = self.dims();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for k in 0..d {
            let n = 2 * self.half_nodes[k];
            let pos = point[k] / self.steps[k] + T::from_usize_lossy(self.half_nodes[k]);
            let pos = match rule {
                BoundaryRule::ClampPayoff => pos.max(T::zero()).min(T::from_usize_lossy(n)),
                BoundaryRule::LinearExtrapolate => pos,
            };
            let cell = pos.floor().max(T::zero()).min(T::from_usize_lossy(n - 1));
            let i = cell.to_usize().unwrap_or(0);
            base.push(i);
            frac.push(pos - cell);
        }
        let shape = self.shape();
        let mut acc = T::zero();
        for corner in 0..(1usize << d) {
            let mut weight = T::one();
            let mut flat = 0;
            for k in 0..d {
                let up = (corner >> (d - 1 - k)) & 1 == 1;
                weight *= if up { frac[k] } else { T::one() - frac[k] };
                flat = flat * shape[k] + base[k] + usize::from(up);
            }
            if weight != T::zero() {
                acc += weight * self.values[flat];
            }
        }
        acc
    }
}

/// Viscosity-solution values of the G-heat equation at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField<T> {
    pub table: GridTable<T>,
    pub horizon: T,
    pub dt: T,
    pub n_steps: usize,
    pub cfl_ratio: T,
    pub boundary: BoundaryRule,
}

impl<T: Real> SolutionField<T> {
    pub fn dims(&self) -> usize {
        self.table.dims()
    }

    pub fn values(&self) -> &[T] {
        self.table.values()
    }

    pub fn axis(&self, k: usize) -> Vec<T> {
        self.table.axis(k)
    }

    /// `u(t, 0)`, i.e. the G-expectation of the payoff of `√t·X`.
    pub fn at_origin(&self) -> T {
        self.table.at_origin()
    }

    /// `u(t, x)` between nodes by multilinear interpolation.
    pub fn value_at(&self, x: &[T]) -> T {
        self.table.interpolate(x, self.boundary)
    }

    /// CSV with columns `x[, y], u`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let axes: Vec<Vec<T>> = (0..self.dims()).map(|k| self.axis(k)).collect();
        match axes.as_slice() {
            [x] => {
                w.write_record(["x", "u"])?;
                for (xi, u) in x.iter().zip(self.values()) {
                    w.write_record([xi.to_string(), u.to_string()])?;
                }
            }
            [x, y] => {
                w.write_record(["x", "y", "u"])?;
                let mut it = self.values().iter();
                for xi in x {
                    for yj in y {
                        let u = it.next().expect("table sized to grid");
                        w.write_record([xi.to_string(), yj.to_string(), u.to_string()])?;
                    }
                }
            }
            _ => return Err(Error::Unsupported("csv export supports one or two axes".into())),
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_is_exact_on_bilinear_data() {
        let (h, dx) = (3usize, 0.5f64);
        let axis: Vec<f64> = (-3..=3).map(|i| i as f64 * dx).collect();
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 0.5 * x * y;
        let values = axis.iter().flat_map(|&x| axis.iter().map(move |&y| f(x, y))).collect();
        let t = GridTable::new(vec![h, h], vec![dx, dx], values).unwrap();
        assert_eq!(t.at_origin(), 1.0);
        for p in [[0.1, -0.7], [1.4, 1.2], [-1.5, 1.5]] {
            assert!((t.interpolate(&p, BoundaryRule::ClampPayoff) - f(p[0], p[1])).abs() < 1e-12);
        }
        // outside the grid: extrapolation continues the bilinear form, clamp freezes it
        assert!((t.interpolate(&[2.5, 0.0], BoundaryRule::LinearExtrapolate) - f(2.5, 0.0)).abs() < 1e-12);
        assert!((t.interpolate(&[2.5, 0.0], BoundaryRule::ClampPayoff) - f(1.5, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn csv_columns() {
        let t = GridTable::new(vec![1], vec![1.0f64], vec![1.0, 0.0, 1.0]).unwrap();
        let field = SolutionField {
            table: t,
            horizon: 1.0,
            dt: 0.1,
            n_steps: 10,
            cfl_ratio: 0.1,
            boundary: BoundaryRule::ClampPayoff,
        };
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,u\n-1,1\n0,0\n1,1\n");
    }
}
