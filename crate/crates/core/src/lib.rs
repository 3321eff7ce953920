//! Blocking random sequential adsorption ("parking") on random trees.
//!
//! Cars arrive at every vertex of a tree at rate one and stick only if the
//! vertex and all of its neighbours are empty. On a random tree whose degrees
//! are i.i.d. with generating function `G`, the averaged root occupancy at
//! time `t` is `(1 - α(1 - e^{-t})²) / 2`, where `∫_α^1 x dx / G(x) = u`
//! defines `α(u)`. This crate computes that curve and checks it two ways.
//!
//! Modules:
//! - [`degree_dist`]: degree laws on `{2, 3, ...}`, their generating functions and samplers.
//! - [`analytic`]: `Φ`, `α(u)`, the occupancy curve, its derivative, regular-tree closed forms.
//! - [`tree_gen`]: truncated balls and rooted half-trees of the random tree.
//! - [`dynamics`]: first-arrival simulation and parallel Monte Carlo estimators.
//! - [`oracle`]: exact forward-equation solver for trees of up to 14 vertices.
//! - [`cli`]: the `analytic | simulate | oracle | verify` front end.
//!
//! Runnable examples live in `examples/`, one per capability:
//!
//! ```bash
//! cargo run --release -p treepark --example parking_constants
//! cargo run --release -p treepark --example occupancy_curve
//! cargo run --release -p treepark --example random_trees
//! cargo run --release -p treepark --example simulate_root
//! cargo run --release -p treepark --example conditional_vacancy
//! cargo run --release -p treepark --example small_tree_oracle
//! cargo run --release -p treepark --example correlation_factorization
//! cargo run --release -p treepark --example verify_battery
//! ```

pub mod analytic;
pub mod cli;
pub mod degree_dist;
pub mod dynamics;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod rng;
pub mod time;
pub mod tree_gen;

pub use analytic::{regular_closed_form, AlphaSolver, CurvePoint};
pub use degree_dist::{DegreeDistribution, DegreeKind};
pub use dynamics::{
    draw_arrivals, estimate_conditional_vacancy, estimate_correlation, estimate_root_occupancy,
    occupancy_at, run_rsa, ArrivalSchedule, Estimate, ParkOutcome, SimConfig, TreeSpec,
};
pub use error::{Error, Result};
pub use oracle::{exact_correlation, exact_transient, MasterEquationSystem};
pub use time::Time;
pub use tree_gen::{regular_ball, sample_ball, sample_rooted_half_tree, TreeInstance};
