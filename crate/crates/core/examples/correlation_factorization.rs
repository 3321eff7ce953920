//! With the root's arrivals suppressed, the branches hanging off it evolve
//! independently: the joint vacancy of the root's neighbours equals the
//! product of the single-branch vacancies.

use treepark::dynamics::{estimate_correlation, TreeSpec};
use treepark::{exact_correlation, regular_ball, Result, Time};

fn main() -> Result<()> {
    let star = regular_ball(3, 2)?;
    let spec = TreeSpec::Fixed(star.clone());
    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "t", "exact joint", "exact prod", "mc joint", "mc prod");
    for t in [0.5, 1.0, 2.0] {
        let t = Time::Finite(t);
        let joint = exact_correlation(&star, &[1, 2, 3], &[0], t)?;
        let single = exact_correlation(&star, &[1], &[0], t)?;
        let mc_joint = estimate_correlation(&spec, &[1, 2, 3], &[0], t, 50_000, 1)?;
        let mc_prod: f64 = (1..=3u32)
            .map(|i| estimate_correlation(&spec, &[i], &[0], t, 50_000, 1 + u64::from(i)).map(|e| e.mean))
            .product::<Result<f64>>()?;
        println!(
            "{:>5} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            t.to_string(),
            joint,
            single.powi(3),
            mc_joint.mean,
            mc_prod
        );
    }
    Ok(())
}
