//! Command-line front end: `analytic | simulate | oracle | verify`.
//!
//! Each command reads an [`ExperimentConfig`] (JSON file plus flag
//! overrides, flags win) and returns its output as text: CSV for data, JSON
//! for the verification report. Numbers are printed with 12 significant
//! digits and times use the literal `inf` for the jammed limit.
//!
//! Exit codes: 0 success, 1 validation, 2 runtime, 3 verification failure.

pub mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analytic::AlphaSolver;
use crate::degree_dist::DegreeDistribution;
use crate::dynamics::{estimate_root_occupancy_curve, z_score, SimConfig};
use crate::error::{Error, Result};
use crate::oracle::MasterEquationSystem;
use crate::time::{parse_time_list, Time};
use crate::tree_gen::{TreeInstance, DEFAULT_MAX_VERTICES};

pub use verify::{cmd_verify, CheckResult, VerifyReport, ALL_CHECKS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

/// Serializable experiment description. Missing fields take defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub distribution: DegreeDistribution,
    pub times: Vec<Time>,
    pub radius: u32,
    pub n_samples: u64,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    pub threads: Option<usize>,
    pub max_vertices: usize,
    /// `oracle`: edge-list file to solve.
    pub edges_path: Option<PathBuf>,
    /// `verify`: which checks to run (all when absent).
    pub checks: Option<Vec<String>>,
    /// `verify`: replaces the absolute tolerance of every deterministic check.
    pub abs_tolerance: Option<f64>,
    /// `verify`: replaces the |z| bound of every statistical check.
    pub z_threshold: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            distribution: DegreeDistribution::regular(2).expect("degree 2 is valid"),
            times: vec![Time::Infinity],
            radius: 10,
            n_samples: 10_000,
            master_seed: 20_240_601,
            output_path: None,
            threads: None,
            max_vertices: DEFAULT_MAX_VERTICES,
            edges_path: None,
            checks: None,
            abs_tolerance: None,
            z_threshold: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::Config("times must not be empty".into()));
        }
        for t in &self.times {
            t.check().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.radius < 1 {
            return Err(Error::Config("radius must be at least 1".into()));
        }
        if self.n_samples < 1 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        if self.max_vertices < 1 {
            return Err(Error::Config("max_vertices must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if let Some(checks) = &self.checks {
            if checks.is_empty() {
                return Err(Error::Config("check list is empty".into()));
            }
            if let Some(bad) = checks.iter().find(|c| !ALL_CHECKS.contains(&c.as_str())) {
                return Err(Error::Config(format!(
                    "unknown check {bad:?}; known checks: {}",
                    ALL_CHECKS.join(", ")
                )));
            }
        }
        for (name, v) in [("abs_tolerance", self.abs_tolerance), ("z_threshold", self.z_threshold)] {
            if let Some(v) = v {
                if v.is_nan() || v <= 0.0 {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    fn sim_config(&self) -> SimConfig {
        SimConfig::new(self.radius, self.n_samples, self.master_seed).with_max_vertices(self.max_vertices)
    }
}

/// One row of `simulate` output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub command: String,
    pub distribution: String,
    pub t: Time,
    pub analytic_value: f64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub n_samples: u64,
    pub radius: u32,
    pub seed: u64,
    pub z_score: f64,
}

/// `%.12g`-style formatting.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn fmt_time(t: Time) -> String {
    match t {
        Time::Finite(x) => fmt_num(x),
        Time::Infinity => "inf".into(),
    }
}

/// `t,u,alpha,occupancy,derivative` rows from the exact formula.
pub fn cmd_analytic(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let solver = AlphaSolver::new(config.distribution.clone());
    let mut out = String::from("t,u,alpha,occupancy,derivative\n");
    for row in solver.curve(&config.times)? {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_time(row.t),
            fmt_num(row.u),
            fmt_num(row.alpha),
            fmt_num(row.occupancy),
            fmt_num(row.derivative)
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

/// Monte Carlo root occupancy against the exact curve, one record per time.
pub fn simulate_records(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let solver = AlphaSolver::new(config.distribution.clone());
    let estimates = estimate_root_occupancy_curve(&config.distribution, &config.times, &config.sim_config())?;
    config
        .times
        .iter()
        .zip(estimates)
        .map(|(&t, est)| {
            let analytic = solver.occupancy(t)?;
            Ok(ResultRecord {
                command: "simulate".into(),
                distribution: config.distribution.descriptor(),
                t,
                analytic_value: analytic,
                mc_mean: est.mean,
                mc_stderr: est.std_err,
                n_samples: est.n_samples,
                radius: config.radius,
                seed: config.master_seed,
                z_score: z_score(est.mean - analytic, est.std_err),
            })
        })
        .collect()
}

pub fn cmd_simulate(config: &ExperimentConfig) -> Result<String> {
    let mut out = String::from(
        "command,distribution,t,analytic_value,mc_mean,mc_stderr,n_samples,radius,seed,z_score\n",
    );
    for r in simulate_records(config)? {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.command,
            r.distribution,
            fmt_time(r.t),
            fmt_num(r.analytic_value),
            fmt_num(r.mc_mean),
            fmt_num(r.mc_stderr),
            r.n_samples,
            r.radius,
            r.seed,
            fmt_num(r.z_score)
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

/// Exact per-vertex occupancy for the tree in `edges_text`.
pub fn cmd_oracle_text(config: &ExperimentConfig, edges_text: &str) -> Result<String> {
    config.validate()?;
    let tree = TreeInstance::parse_edge_list(edges_text)?;
    let system = MasterEquationSystem::new(&tree, &[])?;
    let mut out = String::from("vertex,t,occupancy_prob\n");
    for (dist, &t) in system.solve(&config.times)?.iter().zip(&config.times) {
        for (v, p) in dist.occupancy().into_iter().enumerate() {
            writeln!(out, "{v},{},{}", fmt_time(t), fmt_num(p)).expect("writing to a String cannot fail");
        }
    }
    Ok(out)
}

pub fn cmd_oracle(config: &ExperimentConfig) -> Result<String> {
    let path = config
        .edges_path
        .as_ref()
        .ok_or_else(|| Error::Config("oracle needs an edge-list file (--edges)".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    cmd_oracle_text(config, &text)
}

#[derive(Debug, Parser)]
#[command(name = "treepark", version, about = "Parking (blocking RSA) on random trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact occupancy curve: t,u,alpha,occupancy,derivative.
    Analytic(CommonArgs),
    /// Monte Carlo root occupancy compared with the exact curve.
    Simulate(CommonArgs),
    /// Exact per-vertex occupancy on a small tree given as an edge list.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Edge-list file: `u v` per line, `#` comments.
        #[arg(long)]
        edges: Option<PathBuf>,
    },
    /// Run the verification battery and emit a JSON report.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated subset of checks.
        #[arg(long)]
        checks: Option<String>,
        /// Absolute tolerance for deterministic checks.
        #[arg(long)]
        abs_tol: Option<f64>,
        /// |z| bound for statistical checks.
        #[arg(long)]
        z_threshold: Option<f64>,
    },
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Degree distribution as JSON, e.g. '{"kind":"regular","D":3}'.
    #[arg(long)]
    pub dist: Option<String>,
    /// Comma-separated times; `inf` for the jammed limit.
    #[arg(long = "t")]
    pub times: Option<String>,
    #[arg(long)]
    pub radius: Option<u32>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub max_vertices: Option<usize>,
}

impl CommonArgs {
    /// Loads `--config` (if any) and applies the flag overrides.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(dist) = &self.dist {
            config.distribution = serde_json::from_str(dist)?;
        }
        if let Some(times) = &self.times {
            config.times = parse_time_list(times).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(r) = self.radius {
            config.radius = r;
        }
        if let Some(n) = self.samples {
            config.n_samples = n;
        }
        if let Some(s) = self.seed {
            config.master_seed = s;
        }
        if let Some(out) = &self.out {
            config.output_path = Some(out.clone());
        }
        if let Some(t) = self.threads {
            config.threads = Some(t);
        }
        if let Some(m) = self.max_vertices {
            config.max_vertices = m;
        }
        Ok(config)
    }
}

fn resolve_command(command: &Command) -> Result<ExperimentConfig> {
    match command {
        Command::Analytic(common) | Command::Simulate(common) => common.resolve(),
        Command::Oracle { common, edges } => {
            let mut config = common.resolve()?;
            if let Some(e) = edges {
                config.edges_path = Some(e.clone());
            }
            Ok(config)
        }
        Command::Verify {
            common,
            checks,
            abs_tol,
            z_threshold,
        } => {
            let mut config = common.resolve()?;
            if let Some(list) = checks {
                config.checks = Some(
                    list.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect(),
                );
            }
            if abs_tol.is_some() {
                config.abs_tolerance = *abs_tol;
            }
            if z_threshold.is_some() {
                config.z_threshold = *z_threshold;
            }
            Ok(config)
        }
    }
}

/// Runs a parsed command; returns the text to emit and the exit code.
pub fn execute(command: &Command) -> Result<(String, i32)> {
    let config = resolve_command(command)?;
    config.validate()?;
    let work = || -> Result<(String, i32)> {
        match command {
            Command::Analytic(_) => Ok((cmd_analytic(&config)?, EXIT_OK)),
            Command::Simulate(_) => Ok((cmd_simulate(&config)?, EXIT_OK)),
            Command::Oracle { .. } => Ok((cmd_oracle(&config)?, EXIT_OK)),
            Command::Verify { .. } => {
                let report = cmd_verify(&config)?;
                let code = if report.passed { EXIT_OK } else { EXIT_VERIFICATION };
                Ok((serde_json::to_string_pretty(&report)? + "\n", code))
            }
        }
    };
    let (text, code) = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    match &config.output_path {
        Some(path) => fs::write(path, &text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok((text, code))
}

/// Entry point for the binary: parses `args`, runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok((_, code)) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.4323323583816936), "0.432332358382");
        assert_eq!(fmt_num(0.375), "0.375");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_num(-2.5e-7), "-2.5e-7");
        assert_eq!(fmt_num(1e-5), "0.00001");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(99999.99999999999), "100000");
    }

    #[test]
    fn config_defaults_and_validation() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"distribution":{"kind":"regular","D":3},"times":[1,"inf"]}"#).unwrap();
        assert_eq!(c.times, vec![Time::Finite(1.0), Time::Infinity]);
        assert_eq!(c.radius, 10);
        c.validate().unwrap();
        let bad = ExperimentConfig {
            n_samples: 0,
            ..ExperimentConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = ExperimentConfig {
            times: vec![],
            ..ExperimentConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ExperimentConfig {
            checks: Some(vec![]),
            ..ExperimentConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"radius":3,"bogus":1}"#).is_err());
    }

    #[test]
    fn analytic_rows() {
        let config = ExperimentConfig {
            times: vec![Time::Finite(0.0), Time::Infinity],
            ..ExperimentConfig::default()
        };
        let csv = cmd_analytic(&config).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,u,alpha,occupancy,derivative");
        assert_eq!(lines[1], "0,0,1,0,1");
        assert!(lines[2].starts_with("inf,1,0.367879441171,0.432332358382,0"));
    }

    #[test]
    fn oracle_rows() {
        let config = ExperimentConfig::default();
        let csv = cmd_oracle_text(&config, "# edge\n0 1\n").unwrap();
        assert_eq!(csv, "vertex,t,occupancy_prob\n0,inf,0.5\n1,inf,0.5\n");
        match cmd_oracle_text(&config, "0 1\n1 two\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        let big: String = (1..20).map(|v| format!("{} {v}\n", v - 1)).collect();
        assert!(matches!(cmd_oracle_text(&config, &big), Err(Error::OracleTooLarge { .. })));
        assert!(matches!(cmd_oracle(&config), Err(Error::Config(_))));
    }
}
