use std::f64::consts::PI;

use gexp_core::gheat::{
    nested_expect, sequential_expect, solve_gheat_1d, solve_gheat_2d, BoundaryRule, SolverConfig,
};
use gexp_core::sublinear::{CovarianceSet, Payoff, Sym2, Uncertainty, VolatilityInterval};
use gexp_core::Error;
use proptest::prelude::*;

fn iv() -> VolatilityInterval<f64> {
    VolatilityInterval::new(0.25, 1.0).unwrap()
}

fn cfg_1d(rel: f64) -> SolverConfig<f64> {
    SolverConfig::auto(&iv().into(), 1.0, rel, 1.0)
}

fn conformal() -> CovarianceSet<f64> {
    CovarianceSet::conformal(&iv())
}

fn cfg_2d(set: &CovarianceSet<f64>, rel: f64) -> SolverConfig<f64> {
    SolverConfig::auto(&Uncertainty::Set(set.clone()), 1.0, rel, 1.0)
}

#[test]
fn one_dimensional_examples() {
    let cfg = cfg_1d(0.02);
    let linear = solve_gheat_1d(&Payoff::scalar(|x| x), &iv(), &cfg).unwrap();
    assert!(linear.at_origin().abs() <= 1e-12);
    let convex = solve_gheat_1d(&Payoff::scalar(|x| x * x), &iv(), &cfg).unwrap();
    assert!((convex.at_origin() - 1.0).abs() < 1e-3);
    let concave = solve_gheat_1d(&Payoff::scalar(|x: f64| -x * x), &iv(), &cfg).unwrap();
    assert!((concave.at_origin() + 0.25).abs() < 1e-3);
    // translation: u(1, x) = x² + 1 at nodes, within dx²/4 between them
    assert!((convex.value_at(&[0.8]) - 1.64).abs() < 1e-3);
    assert!((convex.value_at(&[0.7]) - 1.49).abs() < 0.25 * 0.08f64.powi(2) + 1e-3);
    assert!(convex.cfl_ratio <= 0.5);
    assert!((convex.dt * convex.n_steps as f64 - 1.0).abs() < 1e-12);
}

#[test]
fn two_dimensional_examples() {
    let set = conformal();
    let cfg = cfg_2d(&set, 0.05);
    let harmonic = solve_gheat_2d(&Payoff::planar(|x, y| x * x - y * y), &set, &cfg).unwrap();
    assert!(harmonic.at_origin().abs() < 1e-12);
    let one_axis = solve_gheat_2d(&Payoff::planar(|x, _| x * x), &set, &cfg).unwrap();
    let oracle = solve_gheat_1d(&Payoff::scalar(|x| x * x), &iv(), &cfg_1d(0.05)).unwrap();
    assert!((one_axis.at_origin() - oracle.at_origin()).abs() < 1e-3);
    assert!((one_axis.at_origin() - 1.0).abs() < 1e-3);
    let constant = solve_gheat_2d(&Payoff::constant(2, 7.0), &set, &cfg).unwrap();
    assert!(constant.values().iter().all(|&v| v == 7.0));
}

#[test]
fn correlated_vertices_use_the_matching_diagonal() {
    // one vertex with covariance 0.5: E[XY] = 0.5 for φ = xy, and -0.5 for -xy flipped
    for rho in [0.5, -0.5] {
        let set = CovarianceSet::from_vertices(vec![Sym2::new(1.0, rho, 1.0)]).unwrap();
        let cfg = cfg_2d(&set, 0.05);
        let v = solve_gheat_2d(&Payoff::planar(|x, y| x * y), &set, &cfg).unwrap().at_origin();
        assert!((v - rho).abs() < 1e-3, "rho {rho}: {v}");
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let mut cfg = cfg_1d(0.02);
    cfg.time_step *= 2.0;
    assert!(matches!(
        solve_gheat_1d(&Payoff::scalar(|x| x), &iv(), &cfg),
        Err(Error::CflViolation { .. })
    ));
    let skewed = CovarianceSet::from_vertices(vec![Sym2::new(1.0, 0.9, 0.85)]).unwrap();
    assert!(matches!(
        solve_gheat_2d(&Payoff::planar(|x, _| x), &skewed, &cfg_2d(&skewed, 0.1)),
        Err(Error::NotDiagonallyDominant { index: 0 })
    ));
    let blowup = Payoff::scalar(|x: f64| f64::MAX * x * x);
    let cfg = cfg_1d(0.05).with_boundary(BoundaryRule::LinearExtrapolate);
    assert!(matches!(solve_gheat_1d(&blowup, &iv(), &cfg), Err(Error::NonFinite { .. })));
    let nan = Payoff::scalar(|x: f64| if x > 1.0 { f64::NAN } else { 0.0 });
    assert!(matches!(
        solve_gheat_1d(&nan, &iv(), &cfg_1d(0.05)),
        Err(Error::NonFinite { step: 0, .. })
    ));
}

#[test]
fn classical_limit_matches_gaussian_moments() {
    let classical = VolatilityInterval::classical(1.0).unwrap();
    let cfg = SolverConfig::auto(&classical.into(), 1.0, 0.02, 1.0);
    let cases: [(Payoff<f64>, f64); 4] = [
        (Payoff::scalar(|x| x * x), 1.0),
        (Payoff::scalar(|x: f64| x.powi(4)), 3.0),
        (Payoff::scalar(|x: f64| x.abs()), (2.0 / PI).sqrt()),
        (Payoff::scalar(|x: f64| x.cos()), (-0.5f64).exp()),
    ];
    for (phi, exact) in cases {
        let v = solve_gheat_1d(&phi, &classical, &cfg).unwrap().at_origin();
        assert!(((v - exact) / exact).abs() < 0.01, "{v} vs {exact}");
    }
}

#[test]
fn semigroup_restart_agrees_with_one_shot() {
    let phi = Payoff::scalar(|x: f64| (2.0 * x).sin() + 0.3 * x.abs());
    let cfg = cfg_1d(0.025);
    let one_shot = solve_gheat_1d(&phi, &iv(), &cfg).unwrap();
    let fine = solve_gheat_1d(&phi, &iv(), &cfg.refined()).unwrap();
    let grid_error = (one_shot.at_origin() - fine.at_origin()).abs().max(1e-9);

    let first = solve_gheat_1d(&phi, &iv(), &cfg.with_horizon(0.4)).unwrap();
    let restart = Payoff::scalar(move |x| first.value_at(&[x]));
    let second = solve_gheat_1d(&restart, &iv(), &cfg.with_horizon(0.6)).unwrap();
    assert!((second.at_origin() - one_shot.at_origin()).abs() <= 2.0 * grid_error);
}

#[test]
fn nested_examples() {
    let sigma: Uncertainty<f64> = iv().into();
    let cfg = SolverConfig::auto(&sigma, 1.0, 0.05, 1.0);
    let single = nested_expect(&Payoff::scalar(|b| b), &[1.0], &sigma, &cfg).unwrap();
    assert!(single.value().abs() < 1e-12);

    let increment_sq = Payoff::new(2, |b: &[f64]| (b[1] - b[0]).powi(2));
    let v = nested_expect(&increment_sq, &[1.0, 2.0], &sigma, &cfg).unwrap();
    assert!((v.value() - 1.0).abs() < 1e-3);

    let integrand = Payoff::new(2, |b: &[f64]| b[0] * (b[1] - b[0]));
    let v = nested_expect(&integrand, &[1.0, 2.0], &sigma, &cfg).unwrap();
    assert!(v.value().abs() < 1e-3);

    // conditional on B₁ = x: E[B₂² | B₁ = x] = x² + 1
    let terminal_sq = Payoff::new(2, |b: &[f64]| b[1] * b[1]);
    let v = nested_expect(&terminal_sq, &[1.0, 2.0], &sigma, &cfg).unwrap();
    for x in [-1.2, 0.0, 0.4, 2.0] {
        assert!((v.conditional(&[x]).unwrap() - (x * x + 1.0)).abs() < 1e-3);
    }
    let off_node = v.conditional(&[0.5]).unwrap();
    assert!((off_node - 1.25).abs() < 0.25 * 0.2f64.powi(2) + 1e-3);
    assert!((v.value() - 2.0).abs() < 1e-3);

    assert!(matches!(
        nested_expect(&increment_sq, &[1.0, 1.0], &sigma, &cfg),
        Err(Error::NonIncreasingTimes)
    ));
}

#[test]
fn tower_property_on_three_stages() {
    let sigma: Uncertainty<f64> = iv().into();
    let cfg = SolverConfig::auto(&sigma, 1.0, 0.05, 1.0);
    let phi = Payoff::new(3, |b: &[f64]| (b[2] - b[1]).abs() * b[0] + (b[1] - 0.5 * b[0]).powi(2));
    let full = nested_expect(&phi, &[1.0, 2.0, 3.0], &sigma, &cfg).unwrap();

    // collapse the last stage first, then evaluate the two-stage problem
    let inner = full.clone();
    let collapsed = Payoff::new(2, move |b: &[f64]| inner.conditional(b).unwrap());
    let two_stage = nested_expect(&collapsed, &[1.0, 2.0], &sigma, &cfg).unwrap();
    assert!((two_stage.value() - full.value()).abs() < 1e-2 * full.value().abs().max(1.0));

    // conditioning on B₁ only agrees with the two-stage conditional
    for x in [-0.8, 0.0, 1.1] {
        let a = full.conditional(&[x]).unwrap();
        let b = two_stage.conditional(&[x]).unwrap();
        assert!((a - b).abs() < 1e-2 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn sequential_examples() {
    let cfg = cfg_1d(0.05);
    let abs = sequential_expect(&Payoff::scalar(|x: f64| x.abs()), &[iv()], &cfg).unwrap();
    assert!((abs - (2.0 / PI).sqrt()).abs() < 0.01 * (2.0 / PI).sqrt());
    let sum = sequential_expect(&Payoff::new(2, |x: &[f64]| x[0] + x[1]), &[iv(), iv()], &cfg).unwrap();
    assert!(sum.abs() < 1e-12);
    assert!(matches!(
        sequential_expect(&Payoff::scalar(|x| x), &[], &cfg),
        Err(Error::Empty(_))
    ));
}

#[test]
fn order_of_independent_variables_matters() {
    // X first, Y independent of X
    let cfg = cfg_1d(0.05);
    let y_last_linear = sequential_expect(&Payoff::new(2, |v: &[f64]| v[0] * v[0] * v[1]), &[iv(), iv()], &cfg).unwrap();
    assert!(y_last_linear.abs() < 1e-9);
    // E[X E[Y²]] keeps the sign of X in the variance choice: ½(σ̄² − σ̲²) E|X|
    let y_last_square = sequential_expect(&Payoff::new(2, |v: &[f64]| v[0] * v[1] * v[1]), &[iv(), iv()], &cfg).unwrap();
    let exact = 0.5 * 0.75 * (2.0 / PI).sqrt();
    assert!((y_last_square - exact).abs() < 0.01 * exact, "{y_last_square}");
}

#[test]
fn single_precision_solve() {
    let iv32 = VolatilityInterval::new(0.25f32, 1.0).unwrap();
    let cfg = SolverConfig::auto(&iv32.into(), 1.0f32, 0.05, 1.0);
    let v = solve_gheat_1d(&Payoff::scalar(|x: f32| x * x), &iv32, &cfg).unwrap().at_origin();
    assert!((v - 1.0).abs() < 1e-3);
}

#[test]
fn csv_export_has_expected_columns() {
    let set = conformal();
    let field = solve_gheat_2d(&Payoff::planar(|x, y| x + y), &set, &cfg_2d(&set, 0.25)).unwrap();
    let mut buf = Vec::new();
    field.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,u"));
    assert_eq!(lines.count(), field.values().len());
}

fn probe_payoff(a: f64, b: f64, c: f64) -> Payoff<f64> {
    Payoff::scalar(move |x: f64| a * (b * x).sin() + c * x.abs() - 0.1 * x * x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn comparison_homogeneity_and_subadditivity(a in -2.0f64..2.0, b in 0.1f64..3.0, c in -1.0f64..1.0,
                                                gap in 0.0f64..1.0, lam in 0.0f64..5.0) {
        let cfg = cfg_1d(0.05);
        let phi = probe_payoff(a, b, c);
        let psi = phi.add(&Payoff::scalar(move |x: f64| gap * (1.0 + x.cos())));
        let u = solve_gheat_1d(&phi, &iv(), &cfg).unwrap();
        let v = solve_gheat_1d(&psi, &iv(), &cfg).unwrap();
        prop_assert!(u.values().iter().zip(v.values()).all(|(p, q)| p <= q));

        let scaled = solve_gheat_1d(&phi.scale(lam), &iv(), &cfg).unwrap();
        for (s, p) in scaled.values().iter().zip(u.values()) {
            prop_assert!((s - lam * p).abs() <= 1e-12 * (1.0 + lam * p.abs()));
        }

        let sum = solve_gheat_1d(&phi.add(&psi), &iv(), &cfg).unwrap();
        for ((s, p), q) in sum.values().iter().zip(u.values()).zip(v.values()) {
            prop_assert!(*s <= p + q + 1e-12);
        }
    }

    #[test]
    fn constants_and_bounds_are_preserved(c in -10.0f64..10.0, a in -2.0f64..2.0, b in 0.1f64..3.0) {
        let cfg = cfg_1d(0.05);
        let k = solve_gheat_1d(&Payoff::scalar(move |_| c), &iv(), &cfg).unwrap();
        prop_assert!(k.values().iter().all(|&v| v == c));
        let bounded = Payoff::scalar(move |x: f64| a * (b * x).sin());
        let u = solve_gheat_1d(&bounded, &iv(), &cfg).unwrap();
        prop_assert!(u.values().iter().all(|v| v.abs() <= a.abs() + 1e-12));
    }

    #[test]
    fn planar_comparison(a in -1.0f64..1.0, b in 0.2f64..2.0, gap in 0.0f64..1.0) {
        let set = CovarianceSet::from_vertices(vec![Sym2::new(0.25, 0.1, 0.5), Sym2::new(1.0, -0.3, 0.6)]).unwrap();
        let cfg = cfg_2d(&set, 0.1);
        let phi = Payoff::planar(move |x: f64, y: f64| a * (b * x * y).sin() + (x - y).abs());
        let psi = phi.add(&Payoff::planar(move |x: f64, y: f64| gap * (x * x + y * y).min(1.0)));
        let u = solve_gheat_2d(&phi, &set, &cfg).unwrap();
        let v = solve_gheat_2d(&psi, &set, &cfg).unwrap();
        prop_assert!(u.values().iter().zip(v.values()).all(|(p, q)| p <= q));
        let sum = solve_gheat_2d(&phi.add(&psi), &set, &cfg).unwrap();
        for ((s, p), q) in sum.values().iter().zip(u.values()).zip(v.values()) {
            prop_assert!(*s <= p + q + 1e-12);
        }
    }
}
