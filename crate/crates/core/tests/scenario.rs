use std::sync::Arc;

use gexp_core::scenario::calculus::{ito_residual_path, step_values};
use gexp_core::scenario::*;
use gexp_core::sublinear::{CovarianceSet, Payoff, Uncertainty, VolatilityInterval};
use gexp_core::Error;
use num_complex::Complex;
use proptest::prelude::*;

fn iv() -> VolatilityInterval<f64> {
    VolatilityInterval::new(0.25, 1.0).unwrap()
}

fn grid(dt: f64, n_steps: usize, n_paths: usize, seed: u64) -> ScenarioGrid<f64> {
    ScenarioGrid {
        dt,
        n_steps,
        n_paths,
        seed,
    }
}

fn scalar_sampler(g: ScenarioGrid<f64>) -> Sampler<f64> {
    Sampler::new(&iv().into(), g).unwrap()
}

fn planar_sampler(g: ScenarioGrid<f64>) -> Sampler<f64> {
    Sampler::new(&Uncertainty::Set(CovarianceSet::conformal(&iv())), g).unwrap()
}

fn all_families() -> Vec<ControlFamily> {
    vec![ControlFamily::Constants, ControlFamily::BangBang, ControlFamily::SignFeedback]
}

fn mean_terminal_square(ens: &PathEnsemble<f64>) -> f64 {
    ens.paths.iter().map(|p| p.terminal()[0].powi(2)).sum::<f64>() / ens.n_paths() as f64
}

#[test]
fn constant_and_bang_bang_variances() {
    let s = scalar_sampler(grid(0.01, 100, 20_000, 7));
    // sd of the mean of B², which has variance 2σ⁴
    let tol = |var: f64| 4.0 * (2.0f64).sqrt() * var / (20_000f64).sqrt();
    let lo = s.sample_paths(&Constant(0)).unwrap();
    assert!((mean_terminal_square(&lo) - 0.25).abs() < tol(0.25));
    let hi = s.sample_paths(&Constant(1)).unwrap();
    assert!((mean_terminal_square(&hi) - 1.0).abs() < tol(1.0));
    let bb = s.sample_paths(&BangBang { first: 0, second: 1 }).unwrap();
    assert!((mean_terminal_square(&bb) - 0.625).abs() < tol(0.625));
    assert!(bb.paths[0].vertices().iter().step_by(2).all(|&v| v == 0));
}

#[test]
fn zero_variance_paths_stay_at_origin() {
    let degenerate = VolatilityInterval::new(0.0, 1.0).unwrap();
    let s = Sampler::new(&degenerate.into(), grid(0.01, 50, 10, 1)).unwrap();
    let ens = s.sample_paths(&Constant(0)).unwrap();
    assert!(ens.paths.iter().all(|p| p.states().iter().all(|&x| x == 0.0)));
}

#[test]
fn invalid_controls_and_grids_are_rejected() {
    let s = scalar_sampler(grid(0.01, 10, 4, 1));
    assert!(matches!(
        s.sample_paths(&Constant(2)),
        Err(Error::InvalidVertexIndex { index: 2, available: 2 })
    ));
    assert!(matches!(s.sample_paths(&Schedule(vec![0; 3])), Err(Error::GridMismatch(_))));
    assert!(Sampler::new(&iv().into(), grid(0.0, 10, 4, 1)).is_err());
    assert!(Sampler::new(&iv().into(), grid(0.01, 10, 0, 1)).is_err());
}

#[test]
fn scenario_sup_examples() {
    let s = scalar_sampler(grid(0.01, 100, 20_000, 11));
    let controls = control_catalog::<f64>(&all_families(), 2);
    let sq = scenario_sup_expect(&Payoff::scalar(|x| x * x), &controls, &s).unwrap();
    assert!((sq.value - 1.0).abs() < sq.family_half_width, "{sq:?}");
    assert_eq!(sq.winner, "constant:1");
    let neg = scenario_sup_expect(&Payoff::scalar(|x: f64| -x * x), &controls, &s).unwrap();
    assert!((neg.value + 0.25).abs() < neg.family_half_width, "{neg:?}");
    let lin = scenario_sup_expect(&Payoff::scalar(|x| x), &controls, &s).unwrap();
    assert!(lin.value.abs() < lin.family_half_width);
    let lower = scenario_inf_expect(&Payoff::scalar(|x| x * x), &controls, &s).unwrap();
    assert!((lower.value - 0.25).abs() < lower.family_half_width);
    assert!(lin.family_half_width > lin.half_width);
    assert!(scenario_sup_expect(&Payoff::planar(|x, y| x + y), &controls, &s).is_err());
}

#[test]
fn quadratic_variation_identities_hold_per_path() {
    let s = scalar_sampler(grid(0.001, 1000, 50, 3));
    let ens = s.sample_paths(&BangBang { first: 1, second: 0 }).unwrap();
    for (p, q) in ens.paths.iter().zip(quadratic_variation(&ens)) {
        let by_identity = quadratic_variation_by_identity(p, 0);
        assert!((by_identity - q.first).abs() <= 1e-12 * (1.0 + q.first));
    }
    let eta = StepProcess::from_rule(&ens, |p| p.current()[0]);
    let ibb = ito_integral(&eta, &ens).unwrap();
    for (p, i) in ens.paths.iter().zip(&ibb) {
        let direct: f64 = (0..p.n_steps()).map(|k| p.increment(k, 0).powi(2)).sum();
        assert!(((p.terminal()[0].powi(2) - direct) / 2.0 - i).abs() < 1e-12);
    }

    let planar = planar_sampler(grid(0.001, 1000, 50, 5));
    let ens = planar.sample_paths(&Constant(1)).unwrap();
    for p in &ens.paths {
        let q = path_quadratic_variation(p);
        assert!((q.cross - q.cross_polarized).abs() < 1e-12);
        let z: Complex<f64> = (0..p.n_steps())
            .map(|k| Complex::new(p.increment(k, 0), p.increment(k, 1)).powi(2))
            .sum();
        assert!((z - q.complex()).norm() < 1e-12);
        let (direct, polar) = mutual_variation(p, [1.0, 0.0], [1.0, 0.0]);
        assert!((direct - q.first).abs() < 1e-12 && (polar - q.first).abs() < 1e-12);
        let (direct, polar) = mutual_variation(p, [0.6, -0.8], [0.3, 2.0]);
        assert!((direct - polar).abs() < 1e-12);
    }
}

#[test]
fn quadratic_variation_converges_to_constant_variance() {
    for (dt, n) in [(0.01, 100), (0.0001, 10_000)] {
        let s = scalar_sampler(grid(dt, n, 200, 9));
        let ens = s.sample_paths(&Constant(0)).unwrap();
        let errs: Vec<f64> = quadratic_variation(&ens).iter().map(|q| q.first - 0.25).collect();
        // L² error is σ²√(2 dt)
        assert!(l2_norm(&errs) < 1.5 * 0.25 * (2.0 * dt).sqrt());
    }
}

#[test]
fn complex_integral_of_one_is_the_endpoint() {
    let ens = planar_sampler(grid(0.01, 100, 20, 2)).sample_paths(&Constant(0)).unwrap();
    let one = ComplexStepProcess::from_rule(&ens, |_| Complex::new(1.0, 0.0));
    let i = ito_integral_complex(&one, &ens).unwrap();
    for (p, v) in ens.paths.iter().zip(&i) {
        assert!((v - Complex::new(p.terminal()[0], p.terminal()[1])).norm() < 1e-12);
    }
    let scalar = scalar_sampler(grid(0.01, 100, 20, 2)).sample_paths(&Constant(0)).unwrap();
    let wrong = ComplexStepProcess::from_rule(&scalar, |_| Complex::new(1.0, 0.0));
    assert!(ito_integral_complex(&wrong, &scalar).is_err());
}

#[test]
fn integrals_reject_unadapted_or_mismatched_integrands() {
    let ens = scalar_sampler(grid(0.01, 10, 5, 1)).sample_paths(&Constant(1)).unwrap();
    let peek = StepProcess::from_values(0.01, vec![vec![1.0; 10]; 5], false);
    assert!(matches!(ito_integral(&peek, &ens), Err(Error::NotAdapted)));
    let short = StepProcess::from_values(0.01, vec![vec![1.0; 9]; 5], true);
    assert!(matches!(ito_integral(&short, &ens), Err(Error::GridMismatch(_))));
    let coarse = StepProcess::from_values(0.02, vec![vec![1.0; 10]; 5], true);
    assert!(matches!(ito_integral(&coarse, &ens), Err(Error::GridMismatch(_))));
}

#[test]
fn integrals_up_to_t_ignore_the_future() {
    let ens = scalar_sampler(grid(0.01, 100, 20, 4)).sample_paths(&Constant(1)).unwrap();
    let rule = |p: &PathPrefix<'_, f64>| p.current()[0].sin() + p.time;
    let m = 40;
    let tail: Vec<f64> = (0..60).map(|j| ((j * 7919) % 13) as f64 * 0.1 - 0.6).collect();
    for p in &ens.paths {
        let altered = p.with_tail(m, &tail);
        assert_eq!(&altered.states()[..=m], &p.states()[..=m]);
        let a = step_values(p, &rule);
        let b = step_values(&altered, &rule);
        let before: f64 = (0..m).map(|k| a[k] * p.increment(k, 0)).sum();
        let after: f64 = (0..m).map(|k| b[k] * altered.increment(k, 0)).sum();
        assert_eq!(before, after);
    }
}

#[test]
fn ito_formula_residual_vanishes_for_squares() {
    let ens = scalar_sampler(grid(0.01, 100, 50, 6)).sample_paths(&BangBang { first: 0, second: 1 }).unwrap();
    let r = ito_formula_residual_real(&SmoothFunction::power(2), &ItoProcess::brownian(), &ens).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-12));
    let mut no_second = SmoothFunction::<f64>::power(2);
    no_second.second = None;
    assert!(matches!(
        ito_formula_residual_real(&no_second, &ItoProcess::brownian(), &ens),
        Err(Error::MissingDerivative(_))
    ));
}

#[test]
fn ito_formula_residual_for_cubes_halves_with_dt() {
    let norm = |dt: f64| {
        let n = (1.0 / dt).round() as usize;
        let ens = scalar_sampler(grid(dt, n, 2000, 8)).sample_paths(&Constant(1)).unwrap();
        l2_norm(&ito_formula_residual_real(&SmoothFunction::power(3), &ItoProcess::brownian(), &ens).unwrap())
    };
    let ratio = norm(0.002) / norm(0.001);
    assert!((1.7..2.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn ito_residual_of_a_drifted_process_is_small() {
    let x = ItoProcess {
        x0: 0.5,
        drift: Arc::new(|_, x: f64| -x),
        qv_drift: Arc::new(|t, _| t),
        diffusion: Arc::new(|_, x: f64| 1.0 + 0.1 * x.sin()),
    };
    let ens = scalar_sampler(grid(0.0005, 2000, 100, 12)).sample_paths(&Constant(1)).unwrap();
    let exp = SmoothFunction::new(f64::exp, f64::exp, f64::exp);
    let r: Vec<f64> = ens.paths.iter().map(|p| ito_residual_path(&exp, &x, p).unwrap()).collect();
    assert!(l2_norm(&r) < 0.02, "{}", l2_norm(&r));
}

#[test]
fn sampling_is_reproducible_across_thread_counts() {
    let s = planar_sampler(grid(0.01, 50, 64, 42));
    let control = SignFeedback::new("b1", 0, 1, |p: &PathPrefix<'_, f64>| p.current()[0]);
    let a = s.sample_paths(&control).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = pool.install(|| s.sample_paths(&control).unwrap());
    assert_eq!(a, b);
    let other = s.with_grid(grid(0.01, 50, 64, 43)).unwrap().sample_paths(&control).unwrap();
    assert_ne!(a.paths[0], other.paths[0]);
    // common random numbers: the same draws drive every control
    let c0 = s.sample_paths(&Constant(0)).unwrap();
    let c1 = s.sample_paths(&Constant(1)).unwrap();
    let ratio = c1.paths[3].terminal()[1] / c0.paths[3].terminal()[1];
    assert!((ratio - 2.0).abs() < 1e-12);
}

#[test]
fn ensemble_csv_layout() {
    let ens = planar_sampler(grid(0.5, 2, 2, 1)).sample_paths(&Constant(0)).unwrap();
    let mut buf = Vec::new();
    ens.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "path,step,t,B1,B2,vertex_index");
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[1].starts_with("0,0,0,0,0,0"));
    assert!(lines[3].ends_with(','));
}

#[test]
fn real_audit_reports_no_violations() {
    let report = bound_audit(&iv().into(), grid(0.01, 100, 4000, 21), &all_families(), CONFIDENCE).unwrap();
    assert!(report.is_clean(), "{:#?}", report.violations());
    let one = report
        .rows
        .iter()
        .find(|r| r.integrand == "one" && r.inequality.starts_with("E[|int eta dB|^2]"))
        .unwrap();
    assert!((one.lhs - 1.0).abs() < one.half_width && (one.rhs - 1.0).abs() < 1e-12);
    let zero: Vec<_> = report.rows.iter().filter(|r| r.integrand == "zero").collect();
    assert!(zero.iter().all(|r| r.lhs == 0.0 && r.rhs == 0.0));
}

#[test]
fn complex_audit_reports_no_violations() {
    let set = CovarianceSet::conformal(&iv());
    let report = bound_audit(&Uncertainty::Set(set), grid(0.01, 100, 4000, 22), &all_families(), CONFIDENCE).unwrap();
    assert!(report.is_clean(), "{:#?}", report.violations());
    assert_eq!(report.k, Some(2.0));
    assert_eq!(report.stated_constant, Some(32.0));
    // |∫dB|² = |B_1|² has mean 2σ̄² under the top vertex
    let empirical = report.empirical_constant.unwrap();
    assert!(empirical > 1.8 && empirical < 2.2, "{empirical}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ito_integral_is_linear_and_additive(a in -3.0f64..3.0, b in -3.0f64..3.0, split in 1usize..49, seed in 0u64..1000) {
        let ens = scalar_sampler(grid(0.02, 50, 8, seed)).sample_paths(&BangBang { first: 0, second: 1 }).unwrap();
        let f = StepProcess::from_rule(&ens, |p| p.current()[0].cos());
        let g = StepProcess::from_rule(&ens, |p| p.time - p.current()[0]);
        let combo = StepProcess::from_rule(&ens, |p| a * p.current()[0].cos() + b * (p.time - p.current()[0]));
        let (if_, ig, ic) = (ito_integral(&f, &ens).unwrap(), ito_integral(&g, &ens).unwrap(), ito_integral(&combo, &ens).unwrap());
        let head = ito_integral_between(&f, &ens, 0, split).unwrap();
        let tail = ito_integral_between(&f, &ens, split, 50).unwrap();
        for i in 0..8 {
            prop_assert!((ic[i] - a * if_[i] - b * ig[i]).abs() < 1e-10);
            prop_assert!((head[i] + tail[i] - if_[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn scenario_sup_dominates_each_control(seed in 0u64..1000, c in -1.0f64..1.0) {
        let s = scalar_sampler(grid(0.05, 20, 200, seed));
        let controls = control_catalog::<f64>(&all_families(), 2);
        let phi = Payoff::scalar(move |x: f64| (x - c).abs());
        let est = scenario_sup_expect(&phi, &controls, &s).unwrap();
        prop_assert!(est.per_control.iter().all(|e| e.mean <= est.value));
        let constants = scenario_sup_expect(&phi, &controls[..2], &s).unwrap();
        prop_assert!(constants.value <= est.value);
    }
}
