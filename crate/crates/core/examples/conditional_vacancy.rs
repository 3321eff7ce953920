//! Vacancy of a root neighbour given that nothing has arrived at the root:
//! simulation on rooted half-trees against `y(s) = α(1 - e^{-s})`.

use treepark::dynamics::{estimate_conditional_vacancy_curve, SimConfig};
use treepark::{AlphaSolver, DegreeDistribution, Result, Time};

fn main() -> Result<()> {
    let dist = DegreeDistribution::regular(3)?;
    let solver = AlphaSolver::new(dist.clone());
    let times = [0.0, 0.5, 2f64.ln(), 1.0, 3.0, f64::INFINITY].map(|s| Time::new(s).expect("valid time"));
    let estimates = estimate_conditional_vacancy_curve(&dist, &times, &SimConfig::new(10, 20_000, 3))?;

    println!("{:>8} {:>10} {:>10} {:>7}", "s", "y(s)", "mc", "z");
    for (s, est) in times.iter().zip(&estimates) {
        let y = solver.conditional_vacancy_y(*s)?;
        println!("{:>8.4} {:>10.6} {:>10.6} {:>7.2}", s.as_f64(), y, est.mean, est.z_score(y));
    }
    Ok(())
}
