//! Degree laws on `{2, 3, ...}` and their generating functions.
//!
//! Three families are supported: a point mass (regular trees), the shifted
//! geometric law `a_k = p (1-p)^{k-2}`, and arbitrary finite-support pmfs.
//! All of them put no mass below 2, so the random tree has no leaves.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input tolerance on `Σ a_k = 1` for custom pmfs.
pub const CUSTOM_SUM_TOLERANCE: f64 = 1e-9;

/// The shape of a [`DegreeDistribution`].
#[derive(Clone, Debug, PartialEq)]
pub enum DegreeKind {
    Regular { degree: u32 },
    GeometricShifted { p: f64 },
    /// Sorted by degree, strictly positive weights, normalized.
    CustomFinite { weights: Vec<(u32, f64)> },
}

/// A validated degree distribution. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistSpec", into = "DistSpec")]
pub struct DegreeDistribution {
    kind: DegreeKind,
    /// Running sums of the custom weights, used for inverse-CDF sampling.
    cumulative: Vec<f64>,
}

/// JSON shape: `{"kind":"regular","D":3}`, `{"kind":"geometric","p":0.5}`,
/// `{"kind":"custom","pmf":[[2,0.5],[4,0.5]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum DistSpec {
    Regular {
        #[serde(rename = "D")]
        degree: u32,
    },
    Geometric {
        p: f64,
    },
    Custom {
        pmf: Vec<(u32, f64)>,
    },
}

impl TryFrom<DistSpec> for DegreeDistribution {
    type Error = Error;

    fn try_from(spec: DistSpec) -> Result<Self> {
        match spec {
            DistSpec::Regular { degree } => Self::regular(degree),
            DistSpec::Geometric { p } => Self::geometric_shifted(p),
            DistSpec::Custom { pmf } => Self::custom(&pmf),
        }
    }
}

impl From<DegreeDistribution> for DistSpec {
    fn from(dist: DegreeDistribution) -> Self {
        match dist.kind {
            DegreeKind::Regular { degree } => DistSpec::Regular { degree },
            DegreeKind::GeometricShifted { p } => DistSpec::Geometric { p },
            DegreeKind::CustomFinite { weights } => DistSpec::Custom { pmf: weights },
        }
    }
}

impl DegreeDistribution {
    /// Point mass at `degree`; `G(s) = s^D`.
    pub fn regular(degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidDistribution(format!(
                "regular degree must be at least 2, got {degree}"
            )));
        }
        Ok(Self {
            kind: DegreeKind::Regular { degree },
            cumulative: Vec::new(),
        })
    }

    /// `a_k = p (1-p)^{k-2}` for `k ≥ 2`, with `0 < p ≤ 1`.
    pub fn geometric_shifted(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "geometric parameter must lie in (0, 1], got {p}"
            )));
        }
        Ok(Self {
            kind: DegreeKind::GeometricShifted { p },
            cumulative: Vec::new(),
        })
    }

    /// Finite-support pmf given as `(k, a_k)` pairs. Repeated degrees are
    /// merged, zero weights dropped, and the result renormalized.
    pub fn custom(weights: &[(u32, f64)]) -> Result<Self> {
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(weights.len());
        for &(k, a) in weights {
            if k < 2 {
                return Err(Error::InvalidDistribution(format!(
                    "degree {k} is below 2 (the tree would have open ends)"
                )));
            }
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "weight for degree {k} must be finite and nonnegative, got {a}"
                )));
            }
            merged.push((k, a));
        }
        merged.sort_by_key(|&(k, _)| k);
        merged.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        merged.retain(|&(_, a)| a > 0.0);

        let total: f64 = merged.iter().map(|&(_, a)| a).sum();
        if (total - 1.0).abs() > CUSTOM_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        for w in &mut merged {
            w.1 /= total;
        }

        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = merged
            .iter()
            .map(|&(_, a)| {
                acc += a;
                acc
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }

        Ok(Self {
            kind: DegreeKind::CustomFinite { weights: merged },
            cumulative,
        })
    }

    pub fn kind(&self) -> &DegreeKind {
        &self.kind
    }

    /// `a_k`.
    pub fn pmf(&self, k: u32) -> f64 {
        match &self.kind {
            DegreeKind::Regular { degree } => {
                if k == *degree {
                    1.0
                } else {
                    0.0
                }
            }
            DegreeKind::GeometricShifted { p } => {
                if k < 2 {
                    0.0
                } else {
                    p * (1.0 - p).powi((k - 2) as i32)
                }
            }
            DegreeKind::CustomFinite { weights } => weights
                .iter()
                .find(|&&(d, _)| d == k)
                .map_or(0.0, |&(_, a)| a),
        }
    }

    /// `Σ k a_k`. Every current family has a finite mean; `+∞` is reserved
    /// for laws without a first moment.
    pub fn mean_degree(&self) -> f64 {
        match &self.kind {
            DegreeKind::Regular { degree } => f64::from(*degree),
            DegreeKind::GeometricShifted { p } => 2.0 + (1.0 - p) / p,
            DegreeKind::CustomFinite { weights } => {
                weights.iter().map(|&(k, a)| f64::from(k) * a).sum()
            }
        }
    }

    /// Smallest degree with positive mass.
    pub fn min_degree(&self) -> u32 {
        match &self.kind {
            DegreeKind::Regular { degree } => *degree,
            DegreeKind::GeometricShifted { .. } => 2,
            DegreeKind::CustomFinite { weights } => weights[0].0,
        }
    }

    /// `G(s) = Σ a_k s^k` for `s ∈ [0, 1]`.
    pub fn gf(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain(format!(
                "generating function argument must lie in [0, 1], got {s}"
            )));
        }
        Ok(self.gf_unchecked(s))
    }

    #[inline]
    pub(crate) fn gf_unchecked(&self, s: f64) -> f64 {
        match &self.kind {
            DegreeKind::Regular { degree } => s.powi(*degree as i32),
            DegreeKind::GeometricShifted { p } => p * s * s / (1.0 - (1.0 - p) * s),
            DegreeKind::CustomFinite { weights } => {
                weights.iter().map(|&(k, a)| a * s.powi(k as i32)).sum()
            }
        }
    }

    /// Draws one degree `k` with probability `a_k`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match &self.kind {
            DegreeKind::Regular { degree } => *degree,
            DegreeKind::GeometricShifted { p } => {
                if *p >= 1.0 {
                    return 2;
                }
                // Inverse CDF: P(k - 2 ≥ j) = (1-p)^j.
                let u = 1.0 - rng.random::<f64>();
                let extra = (u.ln() / (1.0 - p).ln()).floor();
                2u32.saturating_add(extra as u32)
            }
            DegreeKind::CustomFinite { weights } => {
                let u = rng.random::<f64>();
                let idx = self.cumulative.partition_point(|&c| c <= u);
                weights[idx.min(weights.len() - 1)].0
            }
        }
    }

    /// Short label without commas, for CSV columns.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            DegreeKind::Regular { degree } => format!("regular(D={degree})"),
            DegreeKind::GeometricShifted { p } => format!("geometric(p={p})"),
            DegreeKind::CustomFinite { weights } => {
                let parts: Vec<String> = weights.iter().map(|(k, a)| format!("{k}:{a}")).collect();
                format!("custom({})", parts.join(";"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn regular_constructor() {
        let d2 = DegreeDistribution::regular(2).unwrap();
        assert_eq!(d2.gf(0.5).unwrap(), 0.25);
        assert_eq!(d2.gf(0.3).unwrap(), 0.09);
        assert_eq!(DegreeDistribution::regular(3).unwrap().gf(1.0).unwrap(), 1.0);
        assert_eq!(DegreeDistribution::regular(4).unwrap().mean_degree(), 4.0);
        assert!(DegreeDistribution::regular(1).is_err());
        assert!(DegreeDistribution::regular(0).is_err());
    }

    #[test]
    fn geometric_constructor() {
        let g = DegreeDistribution::geometric_shifted(0.5).unwrap();
        assert_eq!(g.pmf(2), 0.5);
        assert_eq!(g.pmf(3), 0.25);
        assert_eq!(g.pmf(1), 0.0);
        assert!((g.gf(1.0).unwrap() - 1.0).abs() < 1e-12);
        // p s² / (1 - (1-p) s) at p = s = 1/2
        assert!((g.gf(0.5).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(g.mean_degree(), 3.0);
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(DegreeDistribution::geometric_shifted(bad).is_err());
        }
    }

    #[test]
    fn geometric_one_is_regular_two() {
        let g = DegreeDistribution::geometric_shifted(1.0).unwrap();
        let r = DegreeDistribution::regular(2).unwrap();
        for k in 0..10 {
            assert_eq!(g.pmf(k), r.pmf(k));
        }
        let mut rng = seeded(1);
        assert!((0..1000).all(|_| g.sample(&mut rng) == 2));
    }

    #[test]
    fn custom_constructor() {
        let c = DegreeDistribution::custom(&[(2, 0.5), (4, 0.5)]).unwrap();
        for s in [0.0f64, 0.2, 0.7, 1.0] {
            let expected = 0.5 * s * s + 0.5 * s.powi(4);
            assert!((c.gf(s).unwrap() - expected).abs() < 1e-15);
        }
        assert_eq!(c.mean_degree(), 3.0);
        assert!(matches!(
            DegreeDistribution::custom(&[(1, 1.0)]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(DegreeDistribution::custom(&[(2, 0.3), (3, 0.3)]).is_err());
        assert!(DegreeDistribution::custom(&[(2, 1.5), (3, -0.5)]).is_err());
        assert!(DegreeDistribution::custom(&[]).is_err());
    }

    #[test]
    fn custom_renormalizes_within_tolerance() {
        let c = DegreeDistribution::custom(&[(3, 0.25), (2, 0.75 + 5e-10), (3, 0.0)]).unwrap();
        let DegreeKind::CustomFinite { weights } = c.kind() else {
            panic!("wrong kind")
        };
        assert_eq!(weights.len(), 2);
        assert_eq!(weights[0].0, 2);
        assert!((weights.iter().map(|w| w.1).sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(c.min_degree(), 2);
    }

    #[test]
    fn gf_rejects_outside_unit_interval() {
        let r = DegreeDistribution::regular(3).unwrap();
        assert!(r.gf(-0.01).is_err());
        assert!(r.gf(1.01).is_err());
        assert_eq!(r.gf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_samplers() {
        let mut rng = seeded(9);
        let r = DegreeDistribution::regular(3).unwrap();
        let c = DegreeDistribution::custom(&[(2, 1.0)]).unwrap();
        for _ in 0..100 {
            assert_eq!(r.sample(&mut rng), 3);
            assert_eq!(c.sample(&mut rng), 2);
        }
    }

    #[test]
    fn geometric_half_frequency_of_two() {
        // Binomial(10^5, 0.5): 3σ = 3·sqrt(0.25/10^5) ≈ 0.0047.
        let g = DegreeDistribution::geometric_shifted(0.5).unwrap();
        let mut rng = seeded(2024);
        let n = 100_000;
        let twos = (0..n).filter(|_| g.sample(&mut rng) == 2).count();
        let freq = twos as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.005, "freq = {freq}");
    }

    #[test]
    fn json_round_trip() {
        let cases = [
            (r#"{"kind":"regular","D":3}"#, DegreeDistribution::regular(3).unwrap()),
            (r#"{"kind":"geometric","p":0.5}"#, DegreeDistribution::geometric_shifted(0.5).unwrap()),
            (
                r#"{"kind":"custom","pmf":[[2,0.5],[4,0.5]]}"#,
                DegreeDistribution::custom(&[(2, 0.5), (4, 0.5)]).unwrap(),
            ),
        ];
        for (json, dist) in cases {
            let parsed: DegreeDistribution = serde_json::from_str(json).unwrap();
            assert_eq!(parsed, dist);
            assert_eq!(serde_json::to_string(&dist).unwrap(), json);
        }
        assert!(serde_json::from_str::<DegreeDistribution>(r#"{"kind":"regular","D":1}"#).is_err());
        assert!(serde_json::from_str::<DegreeDistribution>(r#"{"kind":"custom","pmf":[[1,1.0]]}"#).is_err());
        assert!(serde_json::from_str::<DegreeDistribution>(r#"{"kind":"poisson","lambda":2}"#).is_err());
    }
}
