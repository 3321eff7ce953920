//! Exact per-vertex occupancy on a small tree from the forward equations,
//! compared with a quick simulation of the same tree.

use treepark::dynamics::estimate_vertex_occupancy;
use treepark::oracle::MasterEquationSystem;
use treepark::{Result, Time, TreeInstance};

fn main() -> Result<()> {
    // A spider: centre 0 with legs of length 1, 2 and 3.
    let tree = TreeInstance::parse_edge_list("0 1\n0 2\n2 3\n0 4\n4 5\n5 6\n")?;
    let times = [Time::Finite(0.5), Time::Finite(2.0), Time::Infinity];

    let system = MasterEquationSystem::new(&tree, &[])?;
    println!("{} vertices, {} states", system.vertex_count(), system.state_count());
    let exact = system.solve(&times)?;
    let mc = estimate_vertex_occupancy(&tree, &times, 50_000, 11)?;

    for ((t, dist), row) in times.iter().zip(&exact).zip(&mc) {
        println!("t = {t}");
        for (v, (p, est)) in dist.occupancy().iter().zip(row).enumerate() {
            println!("  vertex {v}: exact {p:.6}  mc {:.6} ± {:.6}", est.mean, est.std_err);
        }
    }

    let jammed = system.absorption_distribution().occupancy();
    println!("jump-chain check at t = inf: {:?}", jammed.iter().map(|p| format!("{p:.6}")).collect::<Vec<_>>());
    Ok(())
}
