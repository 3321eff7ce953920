//! Sampling balls and rooted half-trees of the random tree, and dumping one
//! as an edge list.

use treepark::rng::seeded;
use treepark::tree_gen::DEFAULT_MAX_VERTICES;
use treepark::{regular_ball, sample_ball, sample_rooted_half_tree, DegreeDistribution, Result};

fn main() -> Result<()> {
    let dist = DegreeDistribution::geometric_shifted(0.5)?;
    let mut rng = seeded(7);

    println!("geometric(0.5) balls, radius 8 (mean size {:.0}):", 1.0 + 3.0 * (2f64.powi(8) - 1.0));
    for _ in 0..5 {
        let ball = sample_ball(&dist, 8, &mut rng, DEFAULT_MAX_VERTICES)?;
        let leaves = (0..ball.len() as u32).filter(|&v| ball.depth(v) == 8).count();
        println!("  {:>6} vertices, root degree {}, {leaves} at the boundary", ball.len(), ball.degree(0));
    }

    let half = sample_rooted_half_tree(&DegreeDistribution::regular(3)?, 2, &mut rng, 100)?;
    println!(
        "\nregular(3) half-tree of radius 2: {} vertices, blocked {:?}",
        half.len(),
        half.blocked().collect::<Vec<_>>()
    );

    let star = regular_ball(3, 1)?;
    println!("\nregular_ball(3, 1) as an edge list:");
    star.write_edge_list(std::io::stdout().lock(), None)?;
    Ok(())
}
