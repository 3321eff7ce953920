//! Exact transient law of the parking process on a small tree.
//!
//! The state space is every occupancy bit-vector `n ∈ {0,1}^V`. Site `k` is
//! enabled in `n` when `k` and its neighbours are empty (`r_k(n) = 1`) and
//! its arrivals are not suppressed; each enabled site fires at rate 1. The
//! forward equations `dP/dt = P Q` are integrated from the empty state with
//! an adaptive Dormand-Prince 5(4) scheme.

use crate::error::{Error, Result};
use crate::time::Time;
use crate::tree_gen::TreeInstance;

pub const MAX_ORACLE_VERTICES: usize = 14;

/// Default per-step absolute error target.
pub const DEFAULT_STEP_TOL: f64 = 1e-10;

/// `t = ∞` is reached once the probability-weighted enabled rate drops below this.
const ABSORBED_RATE_MASS: f64 = 1e-12;

const T_LIMIT: f64 = 1e4;

/// Forward equations of the generator restricted to one small tree.
#[derive(Clone, Debug)]
pub struct MasterEquationSystem {
    n: usize,
    /// Transition lists in CSR form: state `s` can set bit `sites[k]` for
    /// `k ∈ offsets[s]..offsets[s+1]`.
    offsets: Vec<u32>,
    sites: Vec<u8>,
    step_tol: f64,
}

impl MasterEquationSystem {
    /// Arrivals are suppressed on the tree's blocked set and on `suppressed`.
    pub fn new(tree: &TreeInstance, suppressed: &[u32]) -> Result<Self> {
        let n = tree.len();
        if n > MAX_ORACLE_VERTICES {
            return Err(Error::OracleTooLarge {
                vertices: n,
                max: MAX_ORACLE_VERTICES,
            });
        }
        tree.validate()?;
        let tree = tree.with_blocked(suppressed)?;
        let closed: Vec<u32> = (0..n as u32)
            .map(|k| {
                tree.neighbors(k)
                    .iter()
                    .fold(1u32 << k, |mask, &w| mask | (1u32 << w))
            })
            .collect();
        let states = 1usize << n;
        let mut offsets = Vec::with_capacity(states + 1);
        let mut sites = Vec::new();
        offsets.push(0u32);
        for s in 0..states as u32 {
            for (k, &mask) in closed.iter().enumerate() {
                if !tree.is_blocked(k as u32) && s & mask == 0 {
                    sites.push(k as u8);
                }
            }
            offsets.push(sites.len() as u32);
        }
        Ok(Self {
            n,
            offsets,
            sites,
            step_tol: DEFAULT_STEP_TOL,
        })
    }

    pub fn with_step_tolerance(mut self, step_tol: f64) -> Result<Self> {
        if step_tol.is_nan() || step_tol <= 0.0 {
            return Err(Error::Domain(format!("step tolerance must be positive, got {step_tol}")));
        }
        self.step_tol = step_tol;
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn state_count(&self) -> usize {
        1 << self.n
    }

    #[inline]
    fn enabled(&self, s: usize) -> &[u8] {
        &self.sites[self.offsets[s] as usize..self.offsets[s + 1] as usize]
    }

    fn rhs(&self, p: &[f64], dp: &mut [f64]) {
        dp.fill(0.0);
        for (s, &mass) in p.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let enabled = self.enabled(s);
            dp[s] -= enabled.len() as f64 * mass;
            for &k in enabled {
                dp[s | (1 << k)] += mass;
            }
        }
    }

    /// `Σ_s P_s · (number of enabled sites in s)`.
    fn active_rate(&self, p: &[f64]) -> f64 {
        p.iter()
            .enumerate()
            .map(|(s, &mass)| mass.abs() * self.enabled(s).len() as f64)
            .sum()
    }

    /// State distributions at each requested time, in input order.
    pub fn solve(&self, times: &[Time]) -> Result<Vec<StateDistribution>> {
        let times = times.iter().map(|t| t.check()).collect::<Result<Vec<_>>>()?;
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&i, &j| times[i].as_f64().total_cmp(&times[j].as_f64()));

        let mut out: Vec<Option<StateDistribution>> = vec![None; times.len()];
        let mut integrator = Dopri::new(self);
        for idx in order {
            let p = match times[idx] {
                Time::Finite(t) => integrator.advance_to(t)?,
                Time::Infinity => integrator.advance_to_absorption()?,
            };
            out[idx] = Some(StateDistribution::from_raw(self.n, p));
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    }

    pub fn solve_at(&self, t: Time) -> Result<StateDistribution> {
        Ok(self.solve(&[t])?.remove(0))
    }

    /// Jammed-state law computed from the embedded jump chain instead of the
    /// ODE. Transitions only set bits, so states can be swept in increasing
    /// numeric order, each passing its mass equally to its successors.
    pub fn absorption_distribution(&self) -> StateDistribution {
        let mut p = vec![0.0; self.state_count()];
        p[0] = 1.0;
        for s in 0..p.len() {
            let enabled = self.enabled(s);
            if enabled.is_empty() || p[s] == 0.0 {
                continue;
            }
            let share = p[s] / enabled.len() as f64;
            for &k in enabled {
                p[s | (1 << k)] += share;
            }
            p[s] = 0.0;
        }
        StateDistribution::from_raw(self.n, p)
    }
}

/// Probability of every occupancy configuration at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDistribution {
    n: usize,
    probs: Vec<f64>,
}

impl StateDistribution {
    fn from_raw(n: usize, mut probs: Vec<f64>) -> Self {
        // Round-off can leave entries a few ulps below zero.
        for x in &mut probs {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        Self { n, probs }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `E n_v` for each vertex.
    pub fn occupancy(&self) -> Vec<f64> {
        (0..self.n)
            .map(|v| {
                self.probs
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| s >> v & 1 == 1)
                    .map(|(_, p)| p)
                    .sum()
            })
            .collect()
    }

    /// Probability that every vertex of `set` is empty.
    pub fn vacancy(&self, set: &[u32]) -> f64 {
        let mask = set.iter().fold(0usize, |m, &v| m | (1 << v));
        self.probs
            .iter()
            .enumerate()
            .filter(|(s, _)| s & mask == 0)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Per-vertex `E n_v(t)`.
pub fn exact_transient(tree: &TreeInstance, t: Time) -> Result<Vec<f64>> {
    Ok(MasterEquationSystem::new(tree, &[])?.solve_at(t)?.occupancy())
}

/// `C_t(A | B)`, with `B` realized by zeroing the rates of its vertices.
pub fn exact_correlation(tree: &TreeInstance, a: &[u32], b: &[u32], t: Time) -> Result<f64> {
    if let Some(v) = a.iter().find(|&&v| v as usize >= tree.len()) {
        return Err(Error::Domain(format!(
            "vertex {v} is not in a tree with {} vertices",
            tree.len()
        )));
    }
    Ok(MasterEquationSystem::new(tree, b)?.solve_at(t)?.vacancy(a))
}

// Dormand-Prince 5(4) tableau. The system is autonomous, so the nodes c_i
// are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Dopri<'a> {
    system: &'a MasterEquationSystem,
    t: f64,
    h: f64,
    h_max: f64,
    y: Vec<f64>,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
}

impl<'a> Dopri<'a> {
    fn new(system: &'a MasterEquationSystem) -> Self {
        let dim = system.state_count();
        let mut y = vec![0.0; dim];
        y[0] = 1.0;
        let k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; dim]);
        // Keeping h·λ_max inside the real stability interval makes transient
        // mass decay instead of hovering at the tolerance level.
        let max_rate = (0..dim).map(|s| system.enabled(s).len()).max().unwrap_or(0);
        let mut me = Self {
            system,
            t: 0.0,
            h: 0.01,
            h_max: 2.5 / max_rate.max(1) as f64,
            y,
            k,
            stage: vec![0.0; dim],
        };
        me.system.rhs(&me.y, &mut me.k[0]);
        me
    }

    /// One attempted step of size `h`; returns the error estimate. On
    /// acceptance the caller swaps `stage` into `y`.
    fn attempt(&mut self, h: f64) -> f64 {
        for i in 1..7 {
            for j in 0..self.y.len() {
                let mut acc = self.y[j];
                for (l, &a) in A[i][..i].iter().enumerate() {
                    if a != 0.0 {
                        acc += h * a * self.k[l][j];
                    }
                }
                self.stage[j] = acc;
            }
            let (done, rest) = self.k.split_at_mut(i);
            let _ = done;
            self.system.rhs(&self.stage, &mut rest[0]);
        }
        // Stage 7 is evaluated at the fifth-order solution, which is now in `stage`.
        (0..self.y.len())
            .map(|j| {
                (0..7)
                    .map(|l| E[l] * self.k[l][j])
                    .sum::<f64>()
                    .abs()
                    * h
            })
            .fold(0.0, f64::max)
    }

    fn step_to(&mut self, limit: f64) -> Result<()> {
        let tol = self.system.step_tol;
        loop {
            let h = self.h.min(self.h_max).min(limit - self.t);
            let err = self.attempt(h);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
            };
            if err <= tol {
                std::mem::swap(&mut self.y, &mut self.stage);
                // First-same-as-last: k[6] is f at the new point.
                self.k.swap(0, 6);
                self.t = if h == limit - self.t { limit } else { self.t + h };
                if h == self.h || factor < 1.0 {
                    self.h = h * factor;
                } else {
                    self.h = self.h.max(h * factor);
                }
                return Ok(());
            }
            self.h = h * factor;
            if self.h < 1e-14 {
                return Err(Error::Solver(format!("step size underflow at t = {}", self.t)));
            }
        }
    }

    fn advance_to(&mut self, target: f64) -> Result<Vec<f64>> {
        if target < self.t {
            return Err(Error::Solver("output times must be nondecreasing".into()));
        }
        while self.t < target {
            self.step_to(target)?;
        }
        Ok(self.y.clone())
    }

    fn advance_to_absorption(&mut self) -> Result<Vec<f64>> {
        while self.system.active_rate(&self.y) >= ABSORBED_RATE_MASS {
            if self.t >= T_LIMIT {
                return Err(Error::Solver(format!(
                    "no absorption by t = {T_LIMIT}"
                )));
            }
            self.step_to(T_LIMIT)?;
        }
        Ok(self.y.clone())
    }
}
