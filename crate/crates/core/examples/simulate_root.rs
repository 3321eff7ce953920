//! Monte Carlo root occupancy on finite balls against the exact curve.
//! Every time point is read off the same set of replicates.

use treepark::dynamics::{estimate_root_occupancy_curve, SimConfig};
use treepark::{AlphaSolver, DegreeDistribution, Result, Time};

fn main() -> Result<()> {
    let times = [0.25, 0.5, 1.0, 2.0, f64::INFINITY].map(|t| Time::new(t).expect("valid time"));
    for (dist, radius) in [
        (DegreeDistribution::regular(3)?, 8),
        (DegreeDistribution::custom(&[(2, 0.5), (4, 0.5)])?, 8),
    ] {
        let solver = AlphaSolver::new(dist.clone());
        let config = SimConfig::new(radius, 20_000, 1);
        let estimates = estimate_root_occupancy_curve(&dist, &times, &config)?;
        println!("{} on balls of radius {radius}, n = {}", dist.descriptor(), config.n_samples);
        println!("  {:>6} {:>10} {:>10} {:>9} {:>7}", "t", "exact", "mc", "stderr", "z");
        for (t, est) in times.iter().zip(&estimates) {
            let exact = solver.occupancy(*t)?;
            println!(
                "  {:>6} {:>10.6} {:>10.6} {:>9.6} {:>7.2}",
                t.to_string(),
                exact,
                est.mean,
                est.std_err,
                est.z_score(exact)
            );
        }
    }
    Ok(())
}
