//! Occupancy curve `ρ(t)` and its derivative for a geometric degree law,
//! printed as CSV ready for plotting.
//!
//! ```bash
//! cargo run --release -p treepark --example occupancy_curve > curve.csv
//! ```

use treepark::{AlphaSolver, DegreeDistribution, Result, Time};

fn main() -> Result<()> {
    let solver = AlphaSolver::new(DegreeDistribution::geometric_shifted(0.5)?);
    let times: Vec<Time> = (0..=40)
        .map(|i| Time::Finite(f64::from(i) / 5.0))
        .chain([Time::Infinity])
        .collect();

    println!("t,u,alpha,occupancy,derivative");
    for p in solver.curve(&times)? {
        println!("{},{:.10},{:.10},{:.10},{:.10}", p.t, p.u, p.alpha, p.occupancy, p.derivative);
    }
    Ok(())
}
