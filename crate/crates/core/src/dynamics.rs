//! Stochastic simulation of blocking RSA on a fixed tree.
//!
//! Each vertex gets a single Exp(1) arrival. Because a blocked vertex stays
//! blocked forever, only the first arrival matters: vertex `v` parks at
//! `T_v` exactly when no neighbour that arrived earlier has parked. That rule
//! is resolved by memoized recursion along decreasing arrival times, so a
//! full outcome costs `O(n)` and a single vertex usually touches only a few
//! of its neighbours.
//!
//! Monte Carlo estimators run independent replicates on per-replicate RNG
//! streams (see [`crate::rng`]) and reduce integer counts, so results do not
//! depend on thread count or scheduling.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};
use crate::rng::{replicate_rng, RngState};
use crate::time::Time;
use crate::tree_gen::{sample_ball, sample_rooted_half_tree, TreeInstance, DEFAULT_MAX_VERTICES};

/// Below this sample count no confidence interval is reported.
pub const MIN_SAMPLES_FOR_CI: u64 = 1_000;

const Z_95: f64 = 1.96;

/// First-arrival times, one per vertex; `+∞` for blocked vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalSchedule {
    times: Vec<f64>,
}

impl ArrivalSchedule {
    /// Explicit schedule. Non-blocked vertices need finite positive times and
    /// blocked vertices must be `+∞`.
    pub fn from_times(tree: &TreeInstance, times: Vec<f64>) -> Result<Self> {
        if times.len() != tree.len() {
            return Err(Error::Domain(format!(
                "schedule has {} entries for a tree with {} vertices",
                times.len(),
                tree.len()
            )));
        }
        for (v, &t) in times.iter().enumerate() {
            let ok = if tree.is_blocked(v as u32) {
                t == f64::INFINITY
            } else {
                t.is_finite() && t > 0.0
            };
            if !ok {
                return Err(Error::Domain(format!("invalid arrival time {t} at vertex {v}")));
            }
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    #[inline]
    pub fn time(&self, v: u32) -> f64 {
        self.times[v as usize]
    }
}

/// Independent Exp(1) arrivals for every non-blocked vertex.
pub fn draw_arrivals<R: Rng + ?Sized>(tree: &TreeInstance, rng: &mut R) -> ArrivalSchedule {
    let times = (0..tree.len() as u32)
        .map(|v| {
            if tree.is_blocked(v) {
                f64::INFINITY
            } else {
                loop {
                    let t: f64 = rng.sample(Exp1);
                    if t > 0.0 {
                        break t;
                    }
                }
            }
        })
        .collect();
    ArrivalSchedule { times }
}

/// Park time per vertex: its arrival time if it parked, `+∞` otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct ParkOutcome {
    park_time: Vec<f64>,
}

impl ParkOutcome {
    pub fn park_times(&self) -> &[f64] {
        &self.park_time
    }

    pub fn park_time(&self, v: u32) -> f64 {
        self.park_time[v as usize]
    }

    pub fn occupancy_at(&self, v: u32, t: Time) -> bool {
        t.reached(self.park_time[v as usize])
    }

    pub fn occupied(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.park_time.len() as u32).filter(|&v| self.park_time[v as usize].is_finite())
    }
}

/// `n_v(t)` for an outcome.
pub fn occupancy_at(outcome: &ParkOutcome, v: u32, t: Time) -> bool {
    outcome.occupancy_at(v, t)
}

const UNKNOWN: u8 = 0;
const PARKED: u8 = 1;
const SKIPPED: u8 = 2;

/// Memoized resolution of "does `v` park?".
///
/// Arrival order is `(time, index)` lexicographic, so exact ties go to the
/// lower index.
struct Resolver<'a> {
    tree: &'a TreeInstance,
    times: &'a [f64],
    state: Vec<u8>,
    stack: Vec<(u32, usize)>,
}

impl<'a> Resolver<'a> {
    fn new(tree: &'a TreeInstance, arrivals: &'a ArrivalSchedule) -> Self {
        Self {
            tree,
            times: arrivals.times(),
            state: vec![UNKNOWN; tree.len()],
            stack: Vec::new(),
        }
    }

    #[inline]
    fn earlier(&self, w: u32, v: u32) -> bool {
        let (tw, tv) = (self.times[w as usize], self.times[v as usize]);
        tw < tv || (tw == tv && w < v)
    }

    fn parks(&mut self, v: u32) -> bool {
        if self.state[v as usize] == UNKNOWN {
            self.resolve(v);
        }
        self.state[v as usize] == PARKED
    }

    fn resolve(&mut self, root: u32) {
        self.stack.push((root, 0));
        while let Some(&(v, i)) = self.stack.last() {
            if !self.times[v as usize].is_finite() {
                self.state[v as usize] = SKIPPED;
                self.stack.pop();
                continue;
            }
            let nbrs = self.tree.neighbors(v);
            let mut i = i;
            let mut verdict = PARKED;
            let mut descend = None;
            while i < nbrs.len() {
                let w = nbrs[i];
                if self.earlier(w, v) {
                    match self.state[w as usize] {
                        PARKED => {
                            verdict = SKIPPED;
                            break;
                        }
                        UNKNOWN => {
                            descend = Some(w);
                            break;
                        }
                        _ => {}
                    }
                }
                i += 1;
            }
            if let Some(w) = descend {
                self.stack.last_mut().unwrap().1 = i;
                self.stack.push((w, 0));
            } else {
                self.state[v as usize] = verdict;
                self.stack.pop();
            }
        }
    }

    fn park_time(&mut self, v: u32) -> f64 {
        if self.parks(v) {
            self.times[v as usize]
        } else {
            f64::INFINITY
        }
    }
}

/// Runs the process to jamming: vertices are taken in arrival order and park
/// iff they and all their neighbours are still empty.
pub fn run_rsa(tree: &TreeInstance, arrivals: &ArrivalSchedule) -> ParkOutcome {
    let mut resolver = Resolver::new(tree, arrivals);
    let park_time = (0..tree.len() as u32).map(|v| resolver.park_time(v)).collect();
    ParkOutcome { park_time }
}

/// Park time of the vertices in `which`, without resolving the rest of the
/// tree. Agrees with [`run_rsa`] on those vertices.
pub fn park_times_of(tree: &TreeInstance, arrivals: &ArrivalSchedule, which: &[u32]) -> Vec<f64> {
    let mut resolver = Resolver::new(tree, arrivals);
    which.iter().map(|&v| resolver.park_time(v)).collect()
}

/// Monte Carlo summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub std_err: f64,
    pub n_samples: u64,
    /// `mean ± 1.96 std_err`; only present when `n_samples ≥ 1000`.
    pub ci95: Option<(f64, f64)>,
    pub master_seed: u64,
}

impl Estimate {
    /// Estimate of a probability from `successes` out of `n` trials.
    pub fn from_bernoulli(successes: u64, n: u64, master_seed: u64) -> Self {
        assert!(n > 0, "empty sample");
        let nf = n as f64;
        let mean = successes as f64 / nf;
        let var = if n > 1 {
            (successes as f64 * (1.0 - mean) * (1.0 - mean)
                + (n - successes) as f64 * mean * mean)
                / (nf - 1.0)
        } else {
            0.0
        };
        Self::assemble(mean, var, n, master_seed)
    }

    /// Estimate from arbitrary per-replicate values, reduced in index order
    /// with compensated summation.
    pub fn from_values(values: &[f64], master_seed: u64) -> Self {
        assert!(!values.is_empty(), "empty sample");
        let n = values.len() as u64;
        let mean = neumaier_sum(values.iter().copied()) / values.len() as f64;
        let var = if n > 1 {
            neumaier_sum(values.iter().map(|&x| (x - mean) * (x - mean))) / (n - 1) as f64
        } else {
            0.0
        };
        Self::assemble(mean, var, n, master_seed)
    }

    fn assemble(mean: f64, var: f64, n: u64, master_seed: u64) -> Self {
        let std_err = (var / n as f64).sqrt();
        let ci95 = (n >= MIN_SAMPLES_FOR_CI).then_some((mean - Z_95 * std_err, mean + Z_95 * std_err));
        Self {
            mean,
            std_err,
            n_samples: n,
            ci95,
            master_seed,
        }
    }

    /// `(mean - reference) / std_err`; `0` for an exact match with zero
    /// spread and `±∞` for a mismatch with zero spread.
    pub fn z_score(&self, reference: f64) -> f64 {
        z_score(self.mean - reference, self.std_err)
    }

    /// Like [`z_score`](Self::z_score) against a reference known only to
    /// within `reference_tol`: the gap is shrunk by that amount first.
    pub fn z_score_within(&self, reference: f64, reference_tol: f64) -> f64 {
        let diff = self.mean - reference;
        let shrunk = (diff.abs() - reference_tol).max(0.0);
        z_score(diff.signum() * shrunk, self.std_err)
    }
}

/// Difference over its standard error, with the zero-spread cases handled.
pub fn z_score(diff: f64, std_err: f64) -> f64 {
    if std_err > 0.0 {
        diff / std_err
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

fn neumaier_sum<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Shared knobs for ensemble runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub radius: u32,
    pub n_samples: u64,
    pub master_seed: u64,
    pub max_vertices: usize,
}

impl SimConfig {
    pub fn new(radius: u32, n_samples: u64, master_seed: u64) -> Self {
        Self {
            radius,
            n_samples,
            master_seed,
            max_vertices: DEFAULT_MAX_VERTICES,
        }
    }

    pub fn with_max_vertices(self, max_vertices: usize) -> Self {
        Self { max_vertices, ..self }
    }

    fn check(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Domain("n_samples must be at least 1".into()));
        }
        if self.radius == 0 {
            return Err(Error::Domain("radius must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runs `replicate(index, rng)` for every index in parallel and returns the
/// results in index order. The first failing replicate (by index) wins.
fn replicate_all<T, F>(n_samples: u64, master_seed: u64, replicate: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngState) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = (0..n_samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(master_seed, r);
            replicate(&mut rng).map_err(|e| Error::Replicate {
                replicate: r,
                source: Box::new(e),
            })
        })
        .collect();
    results.into_iter().collect()
}

fn bernoulli_estimates(park_times: &[f64], times: &[Time], master_seed: u64, vacancy: bool) -> Vec<Estimate> {
    let n = park_times.len() as u64;
    times
        .iter()
        .map(|&t| {
            let occupied = park_times.iter().filter(|&&p| t.reached(p)).count() as u64;
            let hits = if vacancy { n - occupied } else { occupied };
            Estimate::from_bernoulli(hits, n, master_seed)
        })
        .collect()
}

/// Root park time of one sampled ball.
pub fn root_park_time_replicate<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    radius: u32,
    max_vertices: usize,
    rng: &mut R,
) -> Result<f64> {
    let tree = sample_ball(dist, radius, rng, max_vertices)?;
    let arrivals = draw_arrivals(&tree, rng);
    Ok(park_times_of(&tree, &arrivals, &[0])[0])
}

/// `Q E n_0(t)` on the radius-`R` ball, one estimate per requested time.
/// All times are read off the same replicates.
pub fn estimate_root_occupancy_curve(
    dist: &DegreeDistribution,
    times: &[Time],
    config: &SimConfig,
) -> Result<Vec<Estimate>> {
    config.check()?;
    let times = times.iter().map(|t| t.check()).collect::<Result<Vec<_>>>()?;
    let park = replicate_all(config.n_samples, config.master_seed, |rng| {
        root_park_time_replicate(dist, config.radius, config.max_vertices, rng)
    })?;
    Ok(bernoulli_estimates(&park, &times, config.master_seed, false))
}

pub fn estimate_root_occupancy(
    dist: &DegreeDistribution,
    t: Time,
    radius: u32,
    n_samples: u64,
    master_seed: u64,
) -> Result<Estimate> {
    let config = SimConfig::new(radius, n_samples, master_seed);
    Ok(estimate_root_occupancy_curve(dist, &[t], &config)?.remove(0))
}

/// `Q C_s(1 | 0)`: vacancy of vertex 1 on a rooted half-tree whose root never
/// receives an arrival. One estimate per requested time.
pub fn estimate_conditional_vacancy_curve(
    dist: &DegreeDistribution,
    times: &[Time],
    config: &SimConfig,
) -> Result<Vec<Estimate>> {
    config.check()?;
    let times = times.iter().map(|t| t.check()).collect::<Result<Vec<_>>>()?;
    let park = replicate_all(config.n_samples, config.master_seed, |rng| {
        let tree = sample_rooted_half_tree(dist, config.radius, rng, config.max_vertices)?;
        let arrivals = draw_arrivals(&tree, rng);
        Ok(park_times_of(&tree, &arrivals, &[1])[0])
    })?;
    Ok(bernoulli_estimates(&park, &times, config.master_seed, true))
}

pub fn estimate_conditional_vacancy(
    dist: &DegreeDistribution,
    s: Time,
    radius: u32,
    n_samples: u64,
    master_seed: u64,
) -> Result<Estimate> {
    let config = SimConfig::new(radius, n_samples, master_seed);
    Ok(estimate_conditional_vacancy_curve(dist, &[s], &config)?.remove(0))
}

/// Where the trees for a correlation estimate come from.
#[derive(Clone, Debug)]
pub enum TreeSpec {
    Fixed(TreeInstance),
    Ball {
        dist: DegreeDistribution,
        radius: u32,
        max_vertices: usize,
    },
    HalfTree {
        dist: DegreeDistribution,
        radius: u32,
        max_vertices: usize,
    },
}

fn check_vertices(tree: &TreeInstance, set: &[u32], name: &str) -> Result<()> {
    match set.iter().find(|&&v| v as usize >= tree.len()) {
        Some(v) => Err(Error::Domain(format!(
            "vertex {v} in {name} is not in a tree with {} vertices",
            tree.len()
        ))),
        None => Ok(()),
    }
}

fn all_vacant(tree: &TreeInstance, a: &[u32], t: Time, rng: &mut RngState) -> bool {
    let arrivals = draw_arrivals(tree, rng);
    park_times_of(tree, &arrivals, a).iter().all(|&p| !t.reached(p))
}

/// `C_t(A | B) = E[∏_{i∈A} (1 - n_i(t)) | T_j > t for j ∈ B]`.
///
/// Conditioning is realized by suppressing arrivals on `B` altogether; by
/// memorylessness this has the same law on `[0, t]` as conditioning on
/// `T_j > t`. `B = ∅` gives the unconditional `C_t(A)`.
pub fn estimate_correlation(
    spec: &TreeSpec,
    a: &[u32],
    b: &[u32],
    t: Time,
    n_samples: u64,
    master_seed: u64,
) -> Result<Estimate> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let t = t.check()?;
    let hits: Vec<bool> = match spec {
        TreeSpec::Fixed(tree) => {
            check_vertices(tree, a, "A")?;
            check_vertices(tree, b, "B")?;
            let tree = tree.with_blocked(b)?;
            replicate_all(n_samples, master_seed, |rng| Ok(all_vacant(&tree, a, t, rng)))?
        }
        TreeSpec::Ball {
            dist,
            radius,
            max_vertices,
        }
        | TreeSpec::HalfTree {
            dist,
            radius,
            max_vertices,
        } => {
            let half = matches!(spec, TreeSpec::HalfTree { .. });
            replicate_all(n_samples, master_seed, |rng| {
                let tree = if half {
                    sample_rooted_half_tree(dist, *radius, rng, *max_vertices)?
                } else {
                    sample_ball(dist, *radius, rng, *max_vertices)?
                };
                check_vertices(&tree, a, "A")?;
                let tree = tree.with_blocked(b)?;
                Ok(all_vacant(&tree, a, t, rng))
            })?
        }
    };
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    Ok(Estimate::from_bernoulli(successes, n_samples, master_seed))
}

/// Per-vertex occupancy estimates on a fixed tree, one row per time
/// (`rows[i][v]`). Replicates are shared across vertices and times.
pub fn estimate_vertex_occupancy(
    tree: &TreeInstance,
    times: &[Time],
    n_samples: u64,
    master_seed: u64,
) -> Result<Vec<Vec<Estimate>>> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    let times = times.iter().map(|t| t.check()).collect::<Result<Vec<_>>>()?;
    let outcomes = replicate_all(n_samples, master_seed, |rng| {
        let arrivals = draw_arrivals(tree, rng);
        Ok(run_rsa(tree, &arrivals).park_time)
    })?;
    Ok(times
        .iter()
        .map(|&t| {
            (0..tree.len())
                .map(|v| {
                    let hits = outcomes.iter().filter(|o| t.reached(o[v])).count() as u64;
                    Estimate::from_bernoulli(hits, n_samples, master_seed)
                })
                .collect()
        })
        .collect())
}
