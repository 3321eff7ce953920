//! Adaptive Gauss-Kronrod quadrature and a safeguarded Newton/bisection
//! root finder for monotone functions.

use crate::error::{Error, Result};

// 15-point Kronrod abscissae on [-1, 1] (positive half, descending) and
// weights; the odd-indexed nodes are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Subdivision limit per call; the integrands here never get close.
const MAX_PANELS: usize = 100_000;

/// One G7/K15 panel. Returns the Kronrod estimate and `|K15 - G7|`.
pub fn gauss_kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]` by adaptive bisection of G7/K15 panels.
///
/// A panel is accepted once its error estimate is within its share of
/// `max(abs_tol, rel_tol · |panel|)`, with `abs_tol` split in proportion to
/// panel width.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let width = b - a;
    let mut total = 0.0;
    let mut compensation = 0.0;
    let mut stack = vec![(a, b, gauss_kronrod15(&f, a, b))];
    let mut panels = 0usize;
    while let Some((lo, hi, (est, err))) = stack.pop() {
        if !(est.is_finite() && err.is_finite()) {
            return Err(Error::Solver(format!("integrand is not finite on [{lo}, {hi}]")));
        }
        let share = abs_tol * ((hi - lo) / width).abs();
        let tol = share.max(rel_tol * est.abs());
        let mid = 0.5 * (lo + hi);
        let unsplittable = mid <= lo.min(hi) || mid >= lo.max(hi);
        if err <= tol || unsplittable {
            // Neumaier summation keeps many small panels from losing bits.
            let t = total + est;
            if total.abs() >= est.abs() {
                compensation += (total - t) + est;
            } else {
                compensation += (est - t) + total;
            }
            total = t;
            continue;
        }
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::Solver(format!(
                "quadrature on [{a}, {b}] did not converge within {MAX_PANELS} subdivisions"
            )));
        }
        stack.push((mid, hi, gauss_kronrod15(&f, mid, hi)));
        stack.push((lo, mid, gauss_kronrod15(&f, lo, mid)));
    }
    let value = total + compensation;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Solver(format!("quadrature on [{a}, {b}] produced {value}")))
    }
}

/// Root of a strictly decreasing `g` inside `[lo, hi]` with `g(lo) > 0 > g(hi)`.
///
/// Newton steps on `dg` are taken when they land inside the current bracket;
/// otherwise the bracket is bisected. Stops when `|g| ≤ f_tol`, when a Newton
/// step moves less than `x_tol · |x|`, or when the bracket is narrower than
/// `x_tol · hi`.
pub fn solve_decreasing<G, D>(
    mut g: G,
    dg: D,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    f_tol: f64,
) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..500 {
        let gx = g(x)?;
        if gx.abs() <= f_tol {
            return Ok(x);
        }
        if gx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= x_tol * hi.abs() {
            return Ok(0.5 * (lo + hi));
        }
        let slope = dg(x);
        let newton = x - gx / slope;
        if slope < 0.0 && newton > lo && newton < hi {
            if (newton - x).abs() <= x_tol * x.abs() {
                return Ok(newton);
            }
            x = newton;
        } else {
            x = 0.5 * (lo + hi);
        }
    }
    Err(Error::Solver(format!(
        "root finding stalled in bracket [{lo}, {hi}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_for_low_degree_polynomials() {
        // K15 integrates degree ≤ 22 exactly.
        let (v, _) = gauss_kronrod15(&|x: f64| x.powi(20), 0.0, 1.0);
        assert!((v - 1.0 / 21.0).abs() < 1e-15);
        let (v, e) = gauss_kronrod15(&|x: f64| 3.0 * x * x, -1.0, 2.0);
        assert!((v - 9.0).abs() < 1e-13);
        assert!(e < 1e-13);
    }

    #[test]
    fn adaptive_reciprocal() {
        // ∫_a^1 dx/x = -ln a
        for a in [0.5, 1e-2, 1e-6] {
            let v = integrate(|x| 1.0 / x, a, 1.0, 1e-12, 0.0).unwrap();
            assert!((v + f64::ln(a)).abs() < 1e-11, "a = {a}: {v}");
        }
    }

    #[test]
    fn adaptive_peaked_integrand() {
        // ∫_0^1 1/(1e-4 + x²) dx = 100 atan(100)
        let v = integrate(|x| 1.0 / (1e-4 + x * x), 0.0, 1.0, 1e-10, 1e-15).unwrap();
        assert!((v - 100.0 * 100f64.atan()).abs() < 1e-9);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 0.3, 0.3, 1e-12, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn decreasing_root() {
        // e^{-x} - 0.25 = 0 at ln 4
        let x = solve_decreasing(
            |x| Ok((-x).exp() - 0.25),
            |x| -(-x).exp(),
            1e-3,
            10.0,
            1e-14,
            1e-15,
        )
        .unwrap();
        assert!((x - 4f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn root_with_useless_derivative_falls_back_to_bisection() {
        let x = solve_decreasing(|x| Ok(0.3 - x), |_| 1.0, 1e-3, 1.0, 1e-13, 0.0).unwrap();
        assert!((x - 0.3).abs() < 1e-12);
    }
}
