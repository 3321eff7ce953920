//! Runs a subset of the verification battery in-process and prints the
//! JSON report. The same battery backs `treepark verify`.

use treepark::cli::{cmd_verify, ExperimentConfig};
use treepark::Result;

fn main() -> Result<()> {
    let config = ExperimentConfig {
        n_samples: 5_000,
        checks: Some(
            ["closed_form", "round_trip", "derivative", "oracle_vs_mc", "conditional_vacancy"]
                .map(String::from)
                .to_vec(),
        ),
        ..ExperimentConfig::default()
    };
    let report = cmd_verify(&config)?;
    for check in &report.checks {
        println!(
            "{:<20} {} metric={:.3e} threshold={:.1e}",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            check.metric,
            check.threshold
        );
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
