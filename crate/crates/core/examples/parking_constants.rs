//! Jammed-state density `(1 - α²)/2` for several degree laws, with the
//! regular-tree closed form alongside where one exists.
//!
//! ```bash
//! cargo run --release -p treepark --example parking_constants
//! ```

use treepark::{regular_closed_form, AlphaSolver, DegreeDistribution, Result, Time};

fn main() -> Result<()> {
    let laws = [
        DegreeDistribution::regular(2)?,
        DegreeDistribution::regular(3)?,
        DegreeDistribution::regular(4)?,
        DegreeDistribution::regular(10)?,
        DegreeDistribution::geometric_shifted(0.3)?,
        DegreeDistribution::geometric_shifted(0.5)?,
        DegreeDistribution::geometric_shifted(0.9)?,
        DegreeDistribution::custom(&[(2, 0.5), (4, 0.5)])?,
    ];

    println!("{:<22} {:>8} {:>14} {:>14} {:>14}", "distribution", "E[D]", "alpha(1)", "density", "closed form");
    for dist in laws {
        let solver = AlphaSolver::new(dist.clone());
        let closed = match dist.kind() {
            treepark::DegreeKind::Regular { degree } => format!("{:.12}", regular_closed_form(*degree, Time::Infinity)?),
            _ => "-".into(),
        };
        println!(
            "{:<22} {:>8.3} {:>14.12} {:>14.12} {:>14}",
            dist.descriptor(),
            dist.mean_degree(),
            solver.alpha_of_u(1.0)?,
            solver.parking_constant()?,
            closed
        );
    }
    Ok(())
}
