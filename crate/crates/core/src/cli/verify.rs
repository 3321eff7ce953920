//! The `verify` battery: deterministic identity checks and statistical
//! agreement checks between the exact formula, the oracle, and the simulator.

use serde::Serialize;

use crate::analytic::{regular_closed_form, AlphaSolver};
use crate::degree_dist::DegreeDistribution;
use crate::dynamics::{
    estimate_conditional_vacancy_curve, estimate_correlation, estimate_root_occupancy_curve,
    estimate_vertex_occupancy, z_score, SimConfig, TreeSpec,
};
use crate::error::Result;
use crate::numeric::integrate;
use crate::oracle::MasterEquationSystem;
use crate::rng::seeded;
use crate::time::Time;
use crate::tree_gen::{random_recursive_tree, regular_ball, TreeInstance};

use super::ExperimentConfig;

pub const ALL_CHECKS: &[&str] = &[
    "closed_form",
    "round_trip",
    "derivative",
    "oracle_vs_mc",
    "theorem_vs_mc",
    "radius_stability",
    "conditional_vacancy",
    "factorization",
];

const CLOSED_FORM_TOL: f64 = 1e-9;
const ROUND_TRIP_TOL: f64 = 1e-9;
const DERIVATIVE_TOL: f64 = 1e-6;
const INTEGRAL_TOL: f64 = 1e-8;
const Z_THRESHOLD: f64 = 3.0;
/// Absolute accuracy of oracle occupancies.
const ORACLE_ACCURACY: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst absolute error (deterministic checks) or worst |z| (statistical).
    pub metric: f64,
    pub threshold: f64,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub master_seed: u64,
    pub n_samples: u64,
    pub checks: Vec<CheckResult>,
}

/// Regular degrees and times used by the closed-form and derivative checks.
pub(crate) const REGULAR_DEGREES: [u32; 5] = [2, 3, 4, 5, 10];
pub(crate) const FINITE_TIMES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// The distributions every analytic identity is checked on.
pub fn shipped_distributions() -> Vec<DegreeDistribution> {
    let mut out: Vec<DegreeDistribution> = (2..=5)
        .map(|d| DegreeDistribution::regular(d).expect("valid degree"))
        .collect();
    out.extend([0.3, 0.5, 0.9].map(|p| DegreeDistribution::geometric_shifted(p).expect("valid p")));
    out.push(DegreeDistribution::custom(&[(2, 0.5), (4, 0.5)]).expect("valid pmf"));
    out
}

/// The small fixed trees the oracle is compared on.
pub fn oracle_trees() -> Vec<(&'static str, TreeInstance)> {
    let from = |edges: &[(u32, u32)]| TreeInstance::from_edges(edges).expect("valid tree");
    vec![
        ("single", from(&[])),
        ("edge", from(&[(0, 1)])),
        ("path-4", from(&[(0, 1), (1, 2), (2, 3)])),
        ("star-4", regular_ball(4, 1).expect("valid ball")),
        (
            "random-10",
            random_recursive_tree(10, &mut seeded(10)).expect("valid tree"),
        ),
    ]
}

/// `(label, distribution, radius, max_vertices, sample divisor)` for the
/// theorem-vs-simulation comparisons.
pub fn theorem_cases() -> Vec<(&'static str, DegreeDistribution, u32, usize, u64)> {
    vec![
        ("regular(2)", DegreeDistribution::regular(2).expect("valid"), 14, 1_000_000, 1),
        ("regular(3)", DegreeDistribution::regular(3).expect("valid"), 10, 1_000_000, 1),
        (
            "geometric(0.5)",
            DegreeDistribution::geometric_shifted(0.5).expect("valid"),
            12,
            1_000_000,
            5,
        ),
    ]
}

struct Tally {
    worst: f64,
    details: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            worst: 0.0,
            details: Vec::new(),
        }
    }

    fn record(&mut self, metric: f64, detail: String) {
        if metric > self.worst || metric.is_nan() {
            self.worst = metric;
        }
        self.details.push(detail);
    }

    fn finish(self, name: &str, threshold: f64) -> CheckResult {
        CheckResult {
            name: name.into(),
            passed: self.worst <= threshold,
            metric: self.worst,
            threshold,
            details: self.details,
        }
    }
}

fn closed_form(tol: f64) -> Result<CheckResult> {
    let mut tally = Tally::new();
    let times: Vec<Time> = FINITE_TIMES
        .iter()
        .map(|&t| Time::Finite(t))
        .chain([Time::Infinity])
        .collect();
    for d in REGULAR_DEGREES {
        let solver = AlphaSolver::new(DegreeDistribution::regular(d)?);
        for &t in &times {
            let err = (solver.occupancy(t)? - regular_closed_form(d, t)?).abs();
            tally.record(err, format!("D={d} t={t}: |diff|={err:.3e}"));
        }
    }
    Ok(tally.finish("closed_form", tol))
}

fn round_trip(tol: f64) -> Result<CheckResult> {
    let mut tally = Tally::new();
    for dist in shipped_distributions() {
        let solver = AlphaSolver::new(dist.clone());
        let mut worst: f64 = 0.0;
        for i in 0..=20 {
            let u = f64::from(i) * 0.1;
            worst = worst.max((solver.phi(solver.alpha_of_u(u)?)? - u).abs());
        }
        tally.record(worst, format!("{}: max|phi(alpha(u))-u|={worst:.3e}", dist.descriptor()));
    }
    Ok(tally.finish("round_trip", tol))
}

/// Finite-difference checks of the occupancy derivative and of the ODE for
/// `y`, plus integration of the derivative back to the occupancy.
fn derivative(tol_override: Option<f64>) -> Result<CheckResult> {
    let fd_tol = tol_override.unwrap_or(DERIVATIVE_TOL);
    let int_tol = tol_override.unwrap_or(INTEGRAL_TOL);
    let h = 1e-4;
    let mut tally = Tally::new();
    for dist in shipped_distributions() {
        let solver = AlphaSolver::new(dist.clone());
        let occ = |t: f64| solver.occupancy(Time::Finite(t));
        let y = |s: f64| solver.conditional_vacancy_y(Time::Finite(s));
        let mut worst_fd: f64 = 0.0;
        for t in FINITE_TIMES {
            let fd = (occ(t + h)? - occ(t - h)?) / (2.0 * h);
            worst_fd = worst_fd.max((fd - solver.occupancy_derivative(Time::Finite(t))?).abs());
        }
        let mut worst_ode: f64 = 0.0;
        for s in [0.25, 0.5, 1.0, 2.0] {
            let dy = (y(s + h)? - y(s - h)?) / (2.0 * h);
            let ys = y(s)?;
            let rhs = dist.gf(ys)? / ys * (-s).exp();
            worst_ode = worst_ode.max((-dy - rhs).abs());
        }
        let mut worst_int: f64 = 0.0;
        for t in FINITE_TIMES {
            // A failed evaluation becomes NaN, which integrate reports as an error.
            let integral = integrate(
                |s| solver.occupancy_derivative(Time::Finite(s)).unwrap_or(f64::NAN),
                0.0,
                t,
                1e-10,
                0.0,
            );
            worst_int = worst_int.max((integral? - occ(t)?).abs());
        }
        // Normalize each sub-check by its own tolerance so one threshold applies.
        let metric = (worst_fd / fd_tol).max(worst_ode / fd_tol).max(worst_int / int_tol);
        tally.record(
            metric,
            format!(
                "{}: fd={worst_fd:.3e} ode={worst_ode:.3e} integral={worst_int:.3e}",
                dist.descriptor()
            ),
        );
    }
    Ok(tally.finish("derivative", 1.0))
}

fn oracle_vs_mc(n: u64, seed: u64, z: f64) -> Result<CheckResult> {
    let times = [Time::Finite(0.5), Time::Finite(1.0), Time::Finite(2.0), Time::Infinity];
    let mut tally = Tally::new();
    for (i, (label, tree)) in oracle_trees().into_iter().enumerate() {
        let exact = MasterEquationSystem::new(&tree, &[])?.solve(&times)?;
        let mc = estimate_vertex_occupancy(&tree, &times, n, seed.wrapping_add(i as u64))?;
        let mut worst: f64 = 0.0;
        for (dist, row) in exact.iter().zip(&mc) {
            for (p, est) in dist.occupancy().into_iter().zip(row) {
                worst = worst.max(est.z_score_within(p, ORACLE_ACCURACY).abs());
            }
        }
        tally.record(worst, format!("{label}: max|z|={worst:.3}"));
    }
    Ok(tally.finish("oracle_vs_mc", z))
}

fn theorem_vs_mc(n: u64, seed: u64, z: f64) -> Result<CheckResult> {
    let times = [Time::Finite(1.0), Time::Infinity];
    let mut tally = Tally::new();
    for (label, dist, radius, cap, divisor) in theorem_cases() {
        let solver = AlphaSolver::new(dist.clone());
        let cfg = SimConfig::new(radius, (n / divisor).max(1), seed).with_max_vertices(cap);
        let est = estimate_root_occupancy_curve(&dist, &times, &cfg)?;
        for (&t, e) in times.iter().zip(&est) {
            let exact = solver.occupancy(t)?;
            let zs = e.z_score(exact).abs();
            tally.record(
                zs,
                format!("{label} R={radius} t={t}: mc={:.6} exact={exact:.6} |z|={zs:.3}", e.mean),
            );
        }
    }
    Ok(tally.finish("theorem_vs_mc", z))
}

fn radius_stability(n: u64, seed: u64, z: f64) -> Result<CheckResult> {
    let times = [Time::Finite(1.0), Time::Infinity];
    let mut tally = Tally::new();
    for (label, dist, radius, cap, divisor) in theorem_cases() {
        let samples = (n / divisor).max(1);
        let near = SimConfig::new(radius, samples, seed).with_max_vertices(cap);
        let far = SimConfig::new(radius + 2, samples, seed.wrapping_add(1)).with_max_vertices(cap);
        let a = estimate_root_occupancy_curve(&dist, &times, &near)?;
        let b = estimate_root_occupancy_curve(&dist, &times, &far)?;
        for ((&t, ea), eb) in times.iter().zip(&a).zip(&b) {
            let se = (ea.std_err.powi(2) + eb.std_err.powi(2)).sqrt();
            let zs = z_score(ea.mean - eb.mean, se).abs();
            tally.record(
                zs,
                format!("{label} R={radius} vs {} t={t}: |z|={zs:.3}", radius + 2),
            );
        }
    }
    Ok(tally.finish("radius_stability", z))
}

fn conditional_vacancy(n: u64, seed: u64, z: f64) -> Result<CheckResult> {
    let cases = [
        (DegreeDistribution::regular(2)?, Time::Infinity, 12u32),
        (DegreeDistribution::regular(3)?, Time::Finite(2f64.ln()), 10),
        (DegreeDistribution::regular(3)?, Time::Finite(0.0), 10),
    ];
    let mut tally = Tally::new();
    for (dist, s, radius) in cases {
        let solver = AlphaSolver::new(dist.clone());
        let exact = solver.conditional_vacancy_y(s)?;
        let est = estimate_conditional_vacancy_curve(&dist, &[s], &SimConfig::new(radius, n, seed))?.remove(0);
        let zs = est.z_score(exact).abs();
        tally.record(
            zs,
            format!("{} s={s} R={radius}: mc={:.6} y={exact:.6} |z|={zs:.3}", dist.descriptor(), est.mean),
        );
    }
    Ok(tally.finish("conditional_vacancy", z))
}

/// Joint vacancy of the root's neighbours given no arrival at the root,
/// against the product of single-branch estimates.
fn factorization(n: u64, seed: u64, z: f64) -> Result<CheckResult> {
    let mut tally = Tally::new();
    for (label, tree) in [("star", regular_ball(3, 1)?), ("ball(3,2)", regular_ball(3, 2)?)] {
        let spec = TreeSpec::Fixed(tree);
        for t in [Time::Finite(0.5), Time::Finite(1.0), Time::Finite(2.0)] {
            let joint = estimate_correlation(&spec, &[1, 2, 3], &[0], t, n, seed)?;
            let singles = (1..=3u32)
                .map(|i| estimate_correlation(&spec, &[i], &[0], t, n, seed.wrapping_add(u64::from(i))))
                .collect::<Result<Vec<_>>>()?;
            let product: f64 = singles.iter().map(|e| e.mean).product();
            // Delta method for the product's standard error.
            let product_var: f64 = (0..3)
                .map(|i| {
                    let others: f64 = (0..3).filter(|&j| j != i).map(|j| singles[j].mean).product();
                    (others * singles[i].std_err).powi(2)
                })
                .sum();
            let se = (joint.std_err.powi(2) + product_var).sqrt();
            let zs = z_score(joint.mean - product, se).abs();
            tally.record(
                zs,
                format!("{label} t={t}: joint={:.6} product={product:.6} |z|={zs:.3}", joint.mean),
            );
        }
    }
    Ok(tally.finish("factorization", z))
}

/// Runs the configured checks. The report's `passed` is false if any check
/// fails; errors inside a check abort the battery.
pub fn cmd_verify(config: &ExperimentConfig) -> Result<VerifyReport> {
    config.validate()?;
    let names: Vec<String> = match &config.checks {
        Some(list) => list.clone(),
        None => ALL_CHECKS.iter().map(|s| s.to_string()).collect(),
    };
    let z = config.z_threshold.unwrap_or(Z_THRESHOLD);
    let tol = config.abs_tolerance;
    let (n, seed) = (config.n_samples, config.master_seed);
    let mut checks = Vec::with_capacity(names.len());
    for name in &names {
        let result = match name.as_str() {
            "closed_form" => closed_form(tol.unwrap_or(CLOSED_FORM_TOL))?,
            "round_trip" => round_trip(tol.unwrap_or(ROUND_TRIP_TOL))?,
            "derivative" => derivative(tol)?,
            "oracle_vs_mc" => oracle_vs_mc(n, seed, z)?,
            "theorem_vs_mc" => theorem_vs_mc(n, seed, z)?,
            "radius_stability" => radius_stability(n, seed, z)?,
            "conditional_vacancy" => conditional_vacancy(n, seed, z)?,
            "factorization" => factorization(n, seed, z)?,
            other => unreachable!("validated check name {other}"),
        };
        checks.push(result);
    }
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        master_seed: seed,
        n_samples: n,
        checks,
    })
}
