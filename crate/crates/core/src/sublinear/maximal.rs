use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sublinear::payoff::Payoff;

/// Support `Γ` of a maximal distribution: an axis-aligned box or the convex
/// hull of finitely many points, in one or two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum MaximalSupport<T> {
    Box { lo: Vec<T>, hi: Vec<T> },
    Points(Vec<Vec<T>>),
}

impl<T: Real> MaximalSupport<T> {
    /// One-dimensional support `[μ̲, μ̄]`.
    pub fn interval(lo: T, hi: T) -> Self {
        MaximalSupport::Box {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MaximalSupport::Box { lo, .. } => lo.len(),
            MaximalSupport::Points(p) => p.first().map_or(0, Vec::len),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        match self {
            MaximalSupport::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
                    return Err(Error::UnboundedSupport("box corners must share dimension 1 or 2".into()));
                }
                if !finite(lo) || !finite(hi) {
                    return Err(Error::UnboundedSupport("box corners must be finite".into()));
                }
                if lo.iter().zip(hi).any(|(a, b)| a > b) {
                    return Err(Error::UnboundedSupport("box requires lo <= hi componentwise".into()));
                }
            }
            MaximalSupport::Points(points) => {
                let d = self.dim();
                if points.is_empty() || d == 0 || d > 2 {
                    return Err(Error::UnboundedSupport("point set must be non-empty in dimension 1 or 2".into()));
                }
                if points.iter().any(|p| p.len() != d || !finite(p)) {
                    return Err(Error::UnboundedSupport("points must be finite and share one dimension".into()));
                }
            }
        }
        Ok(())
    }

    /// Grid points covering `Γ` so that every point of `Γ` lies within
    /// `resolution` of a sample.
    pub fn sample(&self, resolution: T) -> Result<Vec<Vec<T>>> {
        self.validate()?;
        if !(resolution > T::zero()) {
            return Err(Error::InvalidConfig("resolution must be positive".into()));
        }
        match self {
            MaximalSupport::Box { lo, hi } => {
                let axes: Vec<Vec<T>> = lo
                    .iter()
                    .zip(hi)
                    .map(|(&a, &b)| linspace_covering(a, b, resolution))
                    .collect();
                Ok(match axes.as_slice() {
                    [x] => x.iter().map(|&v| vec![v]).collect(),
                    [x, y] => x
                        .iter()
                        .flat_map(|&a| y.iter().map(move |&b| vec![a, b]))
                        .collect(),
                    _ => unreachable!("validated dimension"),
                })
            }
            MaximalSupport::Points(points) if self.dim() == 1 => {
                let lo = points.iter().map(|p| p[0]).fold(T::infinity(), T::min);
                let hi = points.iter().map(|p| p[0]).fold(T::neg_infinity(), T::max);
                MaximalSupport::interval(lo, hi).sample(resolution)
            }
            MaximalSupport::Points(points) => {
                let hull = convex_hull(points);
                Ok(sample_polygon(&hull, resolution))
            }
        }
    }
}

fn linspace_covering<T: Real>(a: T, b: T, resolution: T) -> Vec<T> {
    if a == b {
        return vec![a];
    }
    let n = ((b - a) / resolution).ceil().to_usize().unwrap_or(1).max(1);
    let step = (b - a) / T::from_usize_lossy(n);
    (0..=n)
        .map(|i| if i == n { b } else { a + step * T::from_usize_lossy(i) })
        .collect()
}

/// Andrew's monotone chain, counter-clockwise, collinear points dropped.
fn convex_hull<T: Real>(points: &[Vec<T>]) -> Vec<[T; 2]> {
    let mut pts: Vec<[T; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [T; 2], a: [T; 2], b: [T; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[T; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[T; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= T::zero() {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn sample_polygon<T: Real>(hull: &[[T; 2]], resolution: T) -> Vec<Vec<T>> {
    let dist = |a: [T; 2], b: [T; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    match hull.len() {
        0 => vec![],
        1 => vec![hull[0].to_vec()],
        2 => {
            let n = (dist(hull[0], hull[1]) / resolution).ceil().to_usize().unwrap_or(1).max(1);
            (0..=n)
                .map(|i| {
                    let s = T::from_usize_lossy(i) / T::from_usize_lossy(n);
                    vec![
                        hull[0][0] + s * (hull[1][0] - hull[0][0]),
                        hull[0][1] + s * (hull[1][1] - hull[0][1]),
                    ]
                })
                .collect()
        }
        _ => {
            let p0 = hull[0];
            let mut out = Vec::new();
            for w in hull[1..].windows(2) {
                let (p1, p2) = (w[0], w[1]);
                let longest = dist(p0, p1).max(dist(p0, p2)).max(dist(p1, p2));
                let n = (longest / resolution).ceil().to_usize().unwrap_or(1).max(1);
                let nf = T::from_usize_lossy(n);
                for a in 0..=n {
                    for b in 0..=(n - a) {
                        let (sa, sb) = (T::from_usize_lossy(a) / nf, T::from_usize_lossy(b) / nf);
                        out.push(vec![
                            p0[0] + sa * (p1[0] - p0[0]) + sb * (p2[0] - p0[0]),
                            p0[1] + sa * (p1[1] - p0[1]) + sb * (p2[1] - p0[1]),
                        ]);
                    }
                }
            }
            out
        }
    }
}

/// `Ê[φ(η)] = max_{y∈Γ} φ(y)` evaluated on a grid refinement of `Γ`.
///
/// For a payoff with Lipschitz constant `L` the result is within
/// `L · resolution` of the exact maximum.
pub fn maximal_expectation<T: Real>(
    phi: &Payoff<T>,
    gamma: &MaximalSupport<T>,
    resolution: T,
) -> Result<T> {
    gamma.validate()?;
    if phi.dim() != gamma.dim() {
        return Err(Error::DimensionMismatch {
            expected: gamma.dim(),
            got: phi.dim(),
        });
    }
    let samples = gamma.sample(resolution)?;
    Ok(samples
        .iter()
        .map(|y| phi.eval(y))
        .fold(T::neg_infinity(), T::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interval_examples() {
        let gamma = MaximalSupport::interval(-1.0, 2.0);
        let id = Payoff::scalar(|x: f64| x);
        assert_eq!(maximal_expectation(&id, &gamma, 0.01).unwrap(), 2.0);
        let sq = Payoff::scalar(|x: f64| x * x);
        assert_eq!(maximal_expectation(&sq, &gamma, 0.01).unwrap(), 4.0);
        let c = Payoff::constant(1, 3.5);
        assert_eq!(maximal_expectation(&c, &gamma, 0.3).unwrap(), 3.5);
        // lower end recovered through the negated payoff
        let neg = Payoff::scalar(|x: f64| -x);
        assert_eq!(-maximal_expectation(&neg, &gamma, 0.01).unwrap(), -1.0);
    }

    #[test]
    fn unbounded_or_malformed_supports_are_rejected() {
        let id = Payoff::scalar(|x: f64| x);
        for gamma in [
            MaximalSupport::interval(0.0, f64::INFINITY),
            MaximalSupport::interval(1.0, 0.0),
            MaximalSupport::Points(vec![]),
        ] {
            assert!(matches!(
                maximal_expectation(&id, &gamma, 0.1),
                Err(Error::UnboundedSupport(_))
            ));
        }
    }

    #[test]
    fn point_hull_in_the_plane() {
        // triangle (0,0), (2,0), (0,2) plus an interior point
        let gamma = MaximalSupport::Points(vec![
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![0.0, 2.0],
            vec![0.5, 0.5],
        ]);
        let sum = Payoff::planar(|x: f64, y: f64| x + y);
        assert!((maximal_expectation(&sum, &gamma, 0.05).unwrap() - 2.0).abs() < 1e-12);
        // maximizer of -(x-1)^2-(y-1)^2 over the triangle is (1,1) on the hypotenuse
        let bump = Payoff::planar(|x: f64, y: f64| -((x - 1.0).powi(2) + (y - 1.0).powi(2)))
            .with_lipschitz(3.0);
        let v = maximal_expectation(&bump, &gamma, 0.01).unwrap();
        assert!(v <= 0.0 && v > -3.0 * 0.01);
    }

    proptest! {
        #[test]
        fn error_bounded_by_lipschitz_times_resolution(a in -3.0f64..0.0, w in 0.0f64..4.0,
                                                       peak in -4.0f64..4.0, res in 0.001f64..0.5) {
            let gamma = MaximalSupport::interval(a, a + w);
            let tent = Payoff::scalar(move |x: f64| -(x - peak).abs()).with_lipschitz(1.0);
            let exact = -(peak.clamp(a, a + w) - peak).abs();
            let v = maximal_expectation(&tent, &gamma, res).unwrap();
            prop_assert!(v <= exact + 1e-12);
            prop_assert!(exact - v <= res + 1e-12);
        }

        #[test]
        fn positively_homogeneous_and_monotone(lam in 0.0f64..10.0, shift in 0.0f64..2.0) {
            let gamma = MaximalSupport::Box { lo: vec![-1.0, 0.0], hi: vec![1.0, 2.0] };
            let phi = Payoff::planar(|x: f64, y: f64| (x * y).sin() - x);
            let base = maximal_expectation(&phi, &gamma, 0.05).unwrap();
            let scaled = maximal_expectation(&phi.scale(lam), &gamma, 0.05).unwrap();
            prop_assert!((scaled - lam * base).abs() <= 1e-12 * (1.0 + lam));
            let above = phi.add(&Payoff::planar(move |x: f64, _| shift * x * x));
            prop_assert!(maximal_expectation(&above, &gamma, 0.05).unwrap() >= base);
        }
    }
}
