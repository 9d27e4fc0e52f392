use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use gexp_core::complex::{
    complex_axiom_report, complex_ito_residual, conformal_invariance_check, AnalyticFunction, ComplexItoProcess,
    ComplexPayoff, ConformalSettings,
};
use gexp_core::gheat::{gnormal_expectation, sequential_expect, solve_gheat_1d, SolverConfig};
use gexp_core::scenario::calculus::quadratic_variation_by_identity;
use gexp_core::scenario::{bound_audit, control_catalog, path_quadratic_variation, scenario_sup_many, Sampler, Verdict};
use gexp_core::sublinear::{axiom_report, AxiomReport, CovarianceSet, Payoff, ProbeSet, Uncertainty, VolatilityInterval};
use gexp_core::{CheckReport, CheckVerdict};

use crate::config::{ConfigError, ExperimentConfig};

/// Registered experiments and a one-line description of each.
pub const CATALOG: [(&str, &str); 7] = [
    ("gnormal-moments", "G-heat moments of a one-dimensional G-normal variable"),
    ("qv-distribution", "scenario bounds on the quadratic variation of a G-Brownian motion"),
    ("ito-bounds", "Monte Carlo audit of Ito integral inequalities and identities"),
    ("complex-ito", "complex Ito formula residuals on planar G-Brownian paths"),
    ("conformal-suite", "conformal invariance checks (a)-(d) for an analytic map"),
    ("counterexample", "independent G-normal pair that is not a G-normal vector"),
    ("axioms", "sublinear and complex expectation axioms of the G-heat engine"),
];

/// Plot-ready table of strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Verdicts and raw tables of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub experiment_id: String,
    pub checks: Vec<CheckReport>,
    pub tables: Vec<Table>,
}

impl ReportBundle {
    pub fn empty(experiment_id: &str) -> Self {
        Self {
            experiment_id: experiment_id.to_string(),
            checks: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckReport::passed)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerics(#[from] gexp_core::Error),
}

type Outcome = Result<ReportBundle, ExperimentError>;

fn num(v: f64) -> String {
    v.to_string()
}

fn interval(c: &ExperimentConfig) -> Result<VolatilityInterval<f64>, ConfigError> {
    match c.uncertainty()? {
        Uncertainty::Interval(iv) => Ok(iv),
        Uncertainty::Set(_) => Err(ConfigError {
            field: "sigma_spec".into(),
            line: None,
            message: format!("{} needs a one-dimensional interval (kind \"interval\")", c.experiment_id),
        }),
    }
}

fn planar(c: &ExperimentConfig) -> Result<CovarianceSet<f64>, ConfigError> {
    match c.uncertainty()? {
        Uncertainty::Set(s) => Ok(s),
        Uncertainty::Interval(_) => Err(ConfigError {
            field: "sigma_spec".into(),
            line: None,
            message: format!("{} needs a planar set (kind \"conformal\" or \"vertices\")", c.experiment_id),
        }),
    }
}

/// The configured solver, or the automatic grid at relative step `rel`.
fn solver(c: &ExperimentConfig, u: &Uncertainty<f64>, rel: f64) -> SolverConfig<f64> {
    c.solver.unwrap_or_else(|| SolverConfig::auto(u, 1.0, rel, 1.0))
}

/// Runs the experiment named in `config`; deterministic given the config.
pub fn run_experiment(config: &ExperimentConfig) -> Outcome {
    config.validate()?;
    let mut bundle = match config.experiment_id.as_str() {
        "gnormal-moments" => gnormal_moments(config),
        "qv-distribution" => qv_distribution(config),
        "ito-bounds" => ito_bounds(config),
        "complex-ito" => complex_ito(config),
        "conformal-suite" => conformal_suite(config),
        "counterexample" => counterexample(config),
        "axioms" => axioms(config),
        other => unreachable!("validated experiment id {other}"),
    }?;
    bundle.tables.insert(0, checks_table(&bundle.checks));
    Ok(bundle)
}

fn checks_table(checks: &[CheckReport]) -> Table {
    let mut t = Table::new("checks", &["check_id", "property", "estimate", "target", "tolerance", "verdict"]);
    for c in checks {
        let verdict = match c.verdict {
            CheckVerdict::Pass => "pass",
            CheckVerdict::Fail => "fail",
            CheckVerdict::PreconditionUnmet => "precondition-unmet",
        };
        t.push(vec![
            c.check_id.clone(),
            c.property.clone(),
            num(c.estimate),
            num(c.target),
            num(c.tolerance),
            verdict.into(),
        ]);
    }
    t
}

fn gnormal_moments(c: &ExperimentConfig) -> Outcome {
    let iv = interval(c)?;
    let u = Uncertainty::Interval(iv);
    let s = solver(c, &u, 0.02);
    let t = s.horizon;
    let (lo, hi) = (iv.lo() * t, iv.hi() * t);
    let cases = [
        ("second-moment-upper", "E[X^2] = s_hi^2 t", Payoff::scalar(|x: f64| x * x), hi),
        ("second-moment-lower", "E[-X^2] = -s_lo^2 t", Payoff::scalar(|x: f64| -x * x), -lo),
        ("fourth-moment", "E[X^4] = 3 (s_hi^2 t)^2", Payoff::scalar(|x: f64| x.powi(4)), 3.0 * hi * hi),
        ("absolute-moment", "E[|X|] = sqrt(2 s_hi^2 t / pi)", Payoff::scalar(f64::abs), (2.0 * hi / PI).sqrt()),
    ];
    let mut bundle = ReportBundle::empty(&c.experiment_id);
    let mut solution = Table::new("solution-x2", &["x", "u"]);
    for (i, (id, property, phi, target)) in cases.into_iter().enumerate() {
        let field = solve_gheat_1d(&phi, &iv, &s)?;
        let tol = (0.01 * target.abs()).max(c.tolerances.grid_tol);
        bundle.checks.push(CheckReport::near(id, property, field.at_origin(), target, tol));
        if i == 0 {
            for (x, v) in field.axis(0).iter().zip(field.values()) {
                solution.push(vec![num(*x), num(*v)]);
            }
        }
    }
    bundle.tables.push(solution);
    Ok(bundle)
}

fn qv_distribution(c: &ExperimentConfig) -> Outcome {
    let iv = interval(c)?;
    let sampler = Sampler::new(&iv.into(), c.mc.grid())?;
    let controls = control_catalog::<f64>(&c.mc.controls, sampler.n_vertices());
    let table = scenario_sup_many(&sampler, &controls, |p| {
        let q = path_quadratic_variation(p).first;
        vec![q, (q - quadratic_variation_by_identity(p, 0)).abs()]
    })?
    .with_confidence(c.tolerances.stat_confidence);
    let horizon = c.mc.grid().horizon();
    let (up, down) = (table.sup(0), table.inf(0));
    let mut bundle = ReportBundle::empty(&c.experiment_id);
    let upper = iv.hi() * horizon;
    let lower = iv.lo() * horizon;
    bundle.checks.push(CheckReport::near("qv-upper", "E[<B>_T] = s_hi^2 T", up.value, upper, 0.02 * upper + 1e-12));
    bundle.checks.push(CheckReport::near("qv-lower", "-E[-<B>_T] = s_lo^2 T", down.value, lower, 0.02 * lower + 1e-12));
    bundle.checks.push(CheckReport::at_most(
        "qv-identity",
        "<B>_T = B_T^2 - 2 int B dB on every path",
        table.sup(1).value,
        0.0,
        1e-10,
    ));
    let mut t = Table::new("controls", &["control", "mean_qv", "std_err"]);
    for e in &up.per_control {
        t.push(vec![e.control.clone(), num(e.mean), num(e.std_err)]);
    }
    bundle.tables.push(t);
    Ok(bundle)
}

fn ito_bounds(c: &ExperimentConfig) -> Outcome {
    let u = c.uncertainty()?;
    let report = bound_audit(&u, c.mc.grid(), &c.mc.controls, c.tolerances.stat_confidence)?;
    let mut bundle = ReportBundle::empty(&c.experiment_id);
    let mut t = Table::new("audit", &["inequality", "integrand", "lhs", "rhs", "margin", "half_width", "verdict"]);
    for row in &report.rows {
        let mut check = CheckReport::at_most(
            format!("{} [{}]", row.inequality, row.integrand),
            row.inequality.clone(),
            -row.margin,
            0.0,
            row.half_width,
        );
        check.verdict = match row.verdict {
            Verdict::Pass => CheckVerdict::Pass,
            Verdict::Violation => CheckVerdict::Fail,
        };
        bundle.checks.push(check);
        t.push(vec![
            row.inequality.clone(),
            row.integrand.clone(),
            num(row.lhs),
            num(row.rhs),
            num(row.margin),
            num(row.half_width),
            format!("{:?}", row.verdict).to_lowercase(),
        ]);
    }
    bundle.tables.push(t);
    if let (Some(k), Some(stated), Some(empirical)) = (report.k, report.stated_constant, report.empirical_constant) {
        let mut consts = Table::new("constants", &["K", "stated_constant", "empirical_constant"]);
        consts.push(vec![num(k), num(stated), num(empirical)]);
        bundle.tables.push(consts);
    }
    Ok(bundle)
}

fn complex_ito(c: &ExperimentConfig) -> Outcome {
    let set = planar(c)?;
    let sampler = Sampler::new(&Uncertainty::Set(set), c.mc.grid())?;
    let mut fine_grid = c.mc.grid();
    fine_grid.dt *= 0.5;
    fine_grid.n_steps *= 2;
    let fine = sampler.with_grid(fine_grid)?;
    let controls = control_catalog::<f64>(&c.mc.controls, sampler.n_vertices());
    let bm = ComplexItoProcess::brownian();
    let (square, conj, cube) = (
        AnalyticFunction::from_key("z2")?,
        AnalyticFunction::from_key("conj")?,
        AnalyticFunction::from_key("z3")?,
    );
    let mut t = Table::new("residuals", &["control", "l2_z2", "l2_conj", "l2_z3_dt", "l2_z3_half_dt", "ratio"]);
    let (mut exact, mut worst_ratio) = (0.0f64, f64::INFINITY);
    for control in &controls {
        let coarse = sampler.sample_paths(control.as_ref())?;
        let r2 = complex_ito_residual(&square, &bm, &coarse)?.l2;
        let rc = complex_ito_residual(&conj, &bm, &coarse)?.l2;
        let r3 = complex_ito_residual(&cube, &bm, &coarse)?.l2;
        let r3f = complex_ito_residual(&cube, &bm, &fine.sample_paths(control.as_ref())?)?.l2;
        exact = exact.max(r2).max(rc);
        worst_ratio = worst_ratio.min(r3 / r3f);
        t.push(vec![control.name(), num(r2), num(rc), num(r3), num(r3f), num(r3 / r3f)]);
    }
    let mut bundle = ReportBundle::empty(&c.experiment_id);
    bundle.checks.push(CheckReport::at_most(
        "exact-residuals",
        "complex Ito residual vanishes on every path for f = z^2 and f = conj z",
        exact,
        0.0,
        1e-10,
    ));
    bundle.checks.push(CheckReport::at_most(
        "cubic-convergence",
        "residual L2 norm for f = z^3 shrinks by at least sqrt 2 when dt halves",
        -worst_ratio,
        -2f64.sqrt(),
        0.0,
    ));
    bundle.tables.push(t);
    Ok(bundle)
}

fn conformal_suite(c: &ExperimentConfig) -> Outcome {
    let set = planar(c)?;
    let u = Uncertainty::Set(set.clone());
    let settings = ConformalSettings {
        solver: solver(c, &u, 0.05),
        paths: c.mc.grid(),
        families: c.mc.controls.clone(),
        grid_tol: c.tolerances.grid_tol,
        confidence: c.tolerances.stat_confidence,
    };
    let f = AnalyticFunction::from_key(&c.analytic)?;
    let mut bundle = ReportBundle::empty(&c.experiment_id);
    bundle.checks = conformal_invariance_check(&set, &f, &settings)?;
    Ok(bundle)
}

fn counterexample(c: &ExperimentConfig) -> Outcome {
    let iv = interval(c)?;
    let u = Uncertainty::Interval(iv);
    let s = solver(c, &u, 0.05);
    // (X₁, X₂, X̄₁, X̄₂) in order of independence, φ(x, y) = x²y on X + X̄
    let pair_sum = Payoff::new(4, |v: &[f64]| (v[0] + v[2]).powi(2) * (v[1] + v[3]));
    let value = sequential_expect(&pair_sum, &[iv; 4], &s)?;
    let target = 0.5 * (iv.hi() - iv.lo()) * (2.0 * iv.hi() / PI).sqrt();
    let rescaled = Payoff::new(2, |v: &[f64]| 2.0 * v[0] * v[0] * 2f64.sqrt() * v[1]);
    let single = sequential_expect(&rescaled, &[iv; 2], &s)?;
    let mut bundle = ReportBundle::empty(&c.experiment_id);
    bundle.checks.push(CheckReport::near(
        "independent-copy-sum",
        "E[phi(X + Xbar)] = (s_hi^2 - s_lo^2) s_hi / sqrt(2 pi) for phi(x, y) = x^2 y",
        value,
        target,
        0.02 * target.abs() + 1e-12,
    ));
    bundle.checks.push(CheckReport::near(
        "rescaled-vector",
        "E[phi(sqrt 2 X)] = 0",
        single,
        0.0,
        c.tolerances.grid_tol,
    ));
    let mut t = Table::new("values", &["quantity", "value", "target"]);
    t.push(vec!["E[phi(X + Xbar)]".into(), num(value), num(target)]);
    t.push(vec!["E[phi(sqrt2 X)]".into(), num(single), num(0.0)]);
    bundle.tables.push(t);
    Ok(bundle)
}

const AXIOM_TOL: f64 = 1e-9;

fn axiom_checks(prefix: &str, report: &AxiomReport, bundle: &mut ReportBundle, table: &mut Table) {
    for check in &report.checks {
        bundle.checks.push(CheckReport::at_most(
            format!("{prefix}:{}", check.axiom),
            check.axiom.to_string(),
            check.max_violation,
            0.0,
            report.tolerance,
        ));
        table.push(vec![
            prefix.into(),
            check.axiom.to_string(),
            num(check.max_violation),
            check.worst_case.clone(),
            check.cases.to_string(),
        ]);
    }
    bundle.checks.push(CheckReport::at_most(
        format!("{prefix}:evaluator-failures"),
        "the engine evaluates every probe",
        report.evaluator_failures.len() as f64,
        0.0,
        0.0,
    ));
}

fn axioms(c: &ExperimentConfig) -> Outcome {
    let u = c.uncertainty()?;
    let mut bundle = ReportBundle::empty(&c.experiment_id);
    let mut table = Table::new("axioms", &["suite", "axiom", "max_violation", "worst_case", "cases"]);
    let probes = ProbeSet::default();
    let (family, points, rel): (Vec<Payoff<f64>>, Vec<Vec<f64>>, f64) = match &u {
        Uncertainty::Interval(_) => (
            vec![
                Payoff::scalar(|x| x),
                Payoff::scalar(|x| x * x - 0.5),
                Payoff::scalar(|x: f64| (3.0 * x).sin()),
                Payoff::scalar(|x: f64| -(x - 0.3).abs()),
                Payoff::scalar(|x: f64| x.max(0.0)),
            ],
            (-40..=40).map(|i| vec![i as f64 * 0.1]).collect(),
            0.05,
        ),
        Uncertainty::Set(_) => (
            vec![
                Payoff::planar(|x, y| x * x - y * y),
                Payoff::planar(|x, y| x * y),
                Payoff::planar(|x: f64, y: f64| (x * x + y * y).sqrt()),
                Payoff::planar(|x: f64, _| x.cos()),
            ],
            (-8..=8).flat_map(|i| (-8..=8).map(move |j| vec![i as f64 * 0.4, j as f64 * 0.4])).collect(),
            0.1,
        ),
    };
    let s = solver(c, &u, rel);
    let pde = |phi: &Payoff<f64>| gnormal_expectation(phi, &u, &s);
    let real = axiom_report(pde, &family, &points, &probes, AXIOM_TOL);
    axiom_checks("sublinear", &real, &mut bundle, &mut table);

    let faulty = |phi: &Payoff<f64>| pde(phi).map(|v| if v > 1.0 { 1.5 * v } else { v });
    let seeded = axiom_report(faulty, &family, &points, &probes, AXIOM_TOL);
    bundle.checks.push(CheckReport::near(
        "sublinear:seeded-fault-detected",
        "an evaluator that inflates values above 1 is flagged",
        if seeded.is_compliant() { 0.0 } else { 1.0 },
        1.0,
        0.0,
    ));

    if let Uncertainty::Set(_) = u {
        let cfamily: Vec<ComplexPayoff<f64>> = family
            .chunks(2)
            .map(|pair| ComplexPayoff::new(pair[0].clone(), pair[pair.len() - 1].scale(-1.0)))
            .collect();
        let cpde = |phi: &ComplexPayoff<f64>| Ok(num_complex::Complex::new(pde(&phi.re)?, pde(&phi.im)?));
        let complex = complex_axiom_report(cpde, &cfamily, &points, &probes, AXIOM_TOL);
        axiom_checks("complex", &complex, &mut bundle, &mut table);
    }
    bundle.tables.push(table);
    Ok(bundle)
}
