//! Exact occupation density of the parking process on the random tree.
//!
//! With `Φ(α) = ∫_α^1 x dx / G(x)` and `α(u)` its inverse, the root of a
//! tree averaged over dynamics and tree law is occupied at time `t` with
//! probability `(1 - α(1 - e^{-t})²) / 2`. The same inverse evaluated at
//! `u = 1 - e^{-s}` gives `y(s)`, the averaged vacancy of a neighbour of a
//! root that has not yet received an arrival.

use std::sync::RwLock;

use serde::Serialize;

use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};
use crate::numeric::{integrate, solve_decreasing};
use crate::time::Time;

pub const DEFAULT_QUAD_TOL: f64 = 1e-12;
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Relative floor on quadrature accuracy. `Φ` grows like `α^{2-D}` near 0,
/// where an absolute target alone would ask for more bits than a double has.
const QUAD_REL_TOL: f64 = 1e-15;

/// `Φ` is tabulated at `x = 2^{-j}`; each table entry is integrated to this
/// fraction of `quad_tol`, leaving room for deep tables.
const PANEL_TOL_FRACTION: f64 = 1.0 / 64.0;

/// Solver for `α(u)` and the quantities derived from it.
///
/// The integral `Φ` is assembled from a lazily grown table of dyadic panels
/// plus one partial panel, so sweeping many `u` values costs one adaptive
/// refinement per panel overall. The table is behind a lock and its entries
/// depend only on the panel index, so concurrent use returns the same values
/// as serial use.
#[derive(Debug)]
pub struct AlphaSolver {
    dist: DegreeDistribution,
    quad_tol: f64,
    root_tol: f64,
    /// `cumulative[j] = Φ(2^{-j})`.
    cumulative: RwLock<Vec<f64>>,
}

/// One row of an occupancy curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: Time,
    pub u: f64,
    pub alpha: f64,
    pub occupancy: f64,
    pub derivative: f64,
}

impl AlphaSolver {
    pub fn new(dist: DegreeDistribution) -> Self {
        Self {
            dist,
            quad_tol: DEFAULT_QUAD_TOL,
            root_tol: DEFAULT_ROOT_TOL,
            cumulative: RwLock::new(vec![0.0]),
        }
    }

    pub fn with_tolerances(dist: DegreeDistribution, quad_tol: f64, root_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0 && root_tol > 0.0) {
            return Err(Error::Domain(format!(
                "tolerances must be positive, got quad_tol={quad_tol}, root_tol={root_tol}"
            )));
        }
        Ok(Self {
            quad_tol,
            root_tol,
            ..Self::new(dist)
        })
    }

    pub fn distribution(&self) -> &DegreeDistribution {
        &self.dist
    }

    fn integrand(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x| x / self.dist.gf_unchecked(x)
    }

    /// `Φ(2^{-k})`, extending the table if needed.
    fn panel_prefix(&self, k: usize) -> Result<f64> {
        {
            let table = self.cumulative.read().unwrap_or_else(|e| e.into_inner());
            if let Some(&v) = table.get(k) {
                return Ok(v);
            }
        }
        let mut table = self.cumulative.write().unwrap_or_else(|e| e.into_inner());
        let panel_tol = self.quad_tol * PANEL_TOL_FRACTION;
        while table.len() <= k {
            let j = table.len();
            let hi = (-((j - 1) as f64)).exp2();
            let lo = 0.5 * hi;
            let piece = integrate(self.integrand(), lo, hi, panel_tol, QUAD_REL_TOL)?;
            let prev = table[j - 1];
            table.push(prev + piece);
        }
        Ok(table[k])
    }

    /// `Φ(α) = ∫_α^1 x / G(x) dx` for `0 < α ≤ 1`.
    pub fn phi(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        // Largest dyadic break 2^{-k} that is still ≥ alpha.
        let mut k = (-alpha.log2()).floor().max(0.0) as usize;
        while k > 0 && (-(k as f64)).exp2() < alpha {
            k -= 1;
        }
        while (-((k + 1) as f64)).exp2() >= alpha {
            k += 1;
        }
        let top = (-(k as f64)).exp2();
        let prefix = self.panel_prefix(k)?;
        let partial = integrate(self.integrand(), alpha, top, 0.5 * self.quad_tol, QUAD_REL_TOL)?;
        Ok(prefix + partial)
    }

    /// `Φ'(α) = -α / G(α)`.
    pub fn phi_derivative(&self, alpha: f64) -> f64 {
        -alpha / self.dist.gf_unchecked(alpha)
    }

    /// The unique `α ∈ (0, 1]` with `Φ(α) = u`.
    pub fn alpha_of_u(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::Domain(format!("u must be finite and nonnegative, got {u}")));
        }
        if u == 0.0 {
            return Ok(1.0);
        }
        // Φ(1) = 0 < u; halve the lower end until Φ exceeds u.
        let mut hi = 1.0;
        let mut lo = 0.5;
        while self.phi(lo)? <= u {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::Solver(format!("no bracket for alpha at u = {u}")));
            }
        }
        solve_decreasing(
            |a| Ok(self.phi(a)? - u),
            |a| self.phi_derivative(a),
            lo,
            hi,
            self.root_tol,
            0.0,
        )
    }

    /// `Q E n_0(t) = (1 - α(1 - e^{-t})²) / 2`.
    pub fn occupancy(&self, t: Time) -> Result<f64> {
        let alpha = self.alpha_of_u(t.check()?.u())?;
        Ok(0.5 * (1.0 - alpha * alpha))
    }

    /// Jammed-state density, `(1 - α(1)²) / 2`.
    pub fn parking_constant(&self) -> Result<f64> {
        self.occupancy(Time::Infinity)
    }

    /// `y(s) = α(1 - e^{-s})`: averaged vacancy of a root neighbour on a
    /// rooted tree, given no arrival at the root by time `s`.
    pub fn conditional_vacancy_y(&self, s: Time) -> Result<f64> {
        self.alpha_of_u(s.check()?.u())
    }

    /// `d/dt` of [`occupancy`](Self::occupancy): `G(y(t)) e^{-t}`.
    pub fn occupancy_derivative(&self, t: Time) -> Result<f64> {
        match t.check()? {
            Time::Infinity => Ok(0.0),
            t @ Time::Finite(_) => {
                let y = self.conditional_vacancy_y(t)?;
                Ok(self.dist.gf_unchecked(y) * t.decay())
            }
        }
    }

    /// Rows `(t, u, α, occupancy, derivative)` for each requested time.
    pub fn curve(&self, times: &[Time]) -> Result<Vec<CurvePoint>> {
        times
            .iter()
            .map(|&t| {
                let t = t.check()?;
                let u = t.u();
                let alpha = self.alpha_of_u(u)?;
                let derivative = match t {
                    Time::Infinity => 0.0,
                    Time::Finite(_) => self.dist.gf_unchecked(alpha) * t.decay(),
                };
                Ok(CurvePoint {
                    t,
                    u,
                    alpha,
                    occupancy: 0.5 * (1.0 - alpha * alpha),
                    derivative,
                })
            })
            .collect()
    }
}

/// Occupancy on the regular tree of degree `D`, straight from the explicit
/// formulas (no quadrature):
/// `D = 2`: `½(1 - e^{-2u})`; `D > 2`: `½(1 - (1 + (D-2)u)^{-2/(D-2)})`,
/// with `u = 1 - e^{-t}`.
pub fn regular_closed_form(degree: u32, t: Time) -> Result<f64> {
    if degree < 2 {
        return Err(Error::Domain(format!("degree must be at least 2, got {degree}")));
    }
    let u = t.check()?.u();
    if degree == 2 {
        Ok(-0.5 * (-2.0 * u).exp_m1())
    } else {
        let m = f64::from(degree - 2);
        Ok(0.5 * (1.0 - (1.0 + m * u).powf(-2.0 / m)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solver(dist: DegreeDistribution) -> AlphaSolver {
        AlphaSolver::new(dist)
    }

    fn regular(d: u32) -> AlphaSolver {
        solver(DegreeDistribution::regular(d).unwrap())
    }

    #[test]
    fn phi_examples() {
        // G = x²: Φ(α) = -ln α
        assert!((regular(2).phi((-1f64).exp()).unwrap() - 1.0).abs() < 1e-12);
        // G = x⁴: Φ(α) = (α^{-2} - 1)/2
        assert!((regular(4).phi(0.5).unwrap() - 1.5).abs() < 1e-12);
        for d in [2, 3, 7] {
            assert_eq!(regular(d).phi(1.0).unwrap(), 0.0);
        }
        assert!(regular(2).phi(0.0).is_err());
        assert!(regular(2).phi(1.0 + 1e-12).is_err());
        assert!(regular(2).phi(f64::NAN).is_err());
    }

    #[test]
    fn phi_at_tiny_alpha() {
        let a = 1e-9;
        assert!((regular(2).phi(a).unwrap() + a.ln()).abs() < 1e-11);
    }

    #[test]
    fn alpha_examples() {
        assert!((regular(2).alpha_of_u(1.0).unwrap() - (-1f64).exp()).abs() < 1e-12);
        assert!((regular(3).alpha_of_u(1.0).unwrap() - 0.5).abs() < 1e-12);
        let g = solver(DegreeDistribution::geometric_shifted(0.4).unwrap());
        assert_eq!(g.alpha_of_u(0.0).unwrap(), 1.0);
        assert!(regular(2).alpha_of_u(-0.1).is_err());
        assert!(regular(2).alpha_of_u(f64::INFINITY).is_err());
    }

    #[test]
    fn alpha_far_out() {
        // α(u) = e^{-u} for D = 2, even deep into the table.
        let s = regular(2);
        assert!((s.alpha_of_u(30.0).unwrap() / (-30f64).exp() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn occupancy_examples() {
        for d in [2, 3, 5] {
            assert_eq!(regular(d).occupancy(Time::Finite(0.0)).unwrap(), 0.0);
        }
        let r2 = regular(2).occupancy(Time::Infinity).unwrap();
        assert!((r2 - 0.432_332_358_381_693_6).abs() < 1e-9);
        assert!((regular(3).occupancy(Time::Infinity).unwrap() - 0.375).abs() < 1e-12);
        assert!(regular(3).occupancy(Time::Finite(-1.0)).is_err());
    }

    #[test]
    fn parking_constant_examples() {
        assert!((regular(4).parking_constant().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let geo1 = solver(DegreeDistribution::geometric_shifted(1.0).unwrap());
        assert!((geo1.parking_constant().unwrap() - regular(2).parking_constant().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn closed_form_examples() {
        let e = regular_closed_form(2, Time::Infinity).unwrap();
        assert!((e - 0.5 * (1.0 - (-2f64).exp())).abs() < 1e-15);
        assert_eq!(regular_closed_form(3, Time::Finite(0.0)).unwrap(), 0.0);
        let cf = regular_closed_form(5, Time::Finite(1.0)).unwrap();
        assert!((cf - regular(5).occupancy(Time::Finite(1.0)).unwrap()).abs() < 1e-9);
        assert!(regular_closed_form(1, Time::Infinity).is_err());
        assert!(regular_closed_form(3, Time::Finite(-0.5)).is_err());
    }

    #[test]
    fn conditional_vacancy_examples() {
        assert_eq!(regular(3).conditional_vacancy_y(Time::Finite(0.0)).unwrap(), 1.0);
        let y = regular(2).conditional_vacancy_y(Time::Infinity).unwrap();
        assert!((y - (-1f64).exp()).abs() < 1e-12);
        let y = regular(3).conditional_vacancy_y(Time::Finite(2f64.ln())).unwrap();
        assert!((y - 2.0 / 3.0).abs() < 1e-12);
        assert!(regular(3).conditional_vacancy_y(Time::Finite(-1.0)).is_err());
    }

    #[test]
    fn derivative_examples() {
        for d in [2, 4] {
            assert!((regular(d).occupancy_derivative(Time::Finite(0.0)).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(regular(d).occupancy_derivative(Time::Infinity).unwrap(), 0.0);
        }
        let s = regular(2);
        let h = 1e-4;
        for t in [0.5, 1.0, 2.0] {
            let fd = (s.occupancy(Time::Finite(t + h)).unwrap() - s.occupancy(Time::Finite(t - h)).unwrap())
                / (2.0 * h);
            let d = s.occupancy_derivative(Time::Finite(t)).unwrap();
            assert!((fd - d).abs() < 1e-6, "t = {t}: {fd} vs {d}");
        }
        assert!(s.occupancy_derivative(Time::Finite(-0.1)).is_err());
    }

    #[test]
    fn curve_rows_match_scalar_calls() {
        let s = solver(DegreeDistribution::custom(&[(2, 0.5), (4, 0.5)]).unwrap());
        let times = [Time::Finite(0.0), Time::Finite(0.7), Time::Infinity];
        let rows = s.curve(&times).unwrap();
        for (row, &t) in rows.iter().zip(&times) {
            assert_eq!(row.occupancy, s.occupancy(t).unwrap());
            assert_eq!(row.derivative, s.occupancy_derivative(t).unwrap());
            assert_eq!(row.alpha, s.conditional_vacancy_y(t).unwrap());
        }
    }

    #[test]
    fn concurrent_calls_match_serial() {
        use rayon::prelude::*;
        let grid: Vec<f64> = (0..200).map(|i| f64::from(i) * 0.05).collect();
        let serial_solver = solver(DegreeDistribution::geometric_shifted(0.3).unwrap());
        let serial: Vec<f64> = grid.iter().map(|&u| serial_solver.alpha_of_u(u).unwrap()).collect();
        let shared = solver(DegreeDistribution::geometric_shifted(0.3).unwrap());
        let parallel: Vec<f64> = grid.par_iter().rev().map(|&u| shared.alpha_of_u(u).unwrap()).collect();
        let parallel: Vec<f64> = parallel.into_iter().rev().collect();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn bad_tolerances_rejected() {
        let d = DegreeDistribution::regular(2).unwrap();
        assert!(AlphaSolver::with_tolerances(d.clone(), 0.0, 1e-12).is_err());
        assert!(AlphaSolver::with_tolerances(d, 1e-10, 1e-10).is_ok());
    }
}
