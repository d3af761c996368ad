//! Variances and Shannon entropies of bin masses and histogram densities.
//!
//! The histogram density of width `eta` differs from its bin masses by two
//! exact corrections: its variance is the discrete variance plus `eta^2 / 12`
//! and its differential entropy is the discrete entropy plus `ln eta`.
//! All entropies are in nats.

use serde::Serialize;

use crate::binning::{DiscreteDistribution, HistogramDensity};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Masses at or below this are treated as exactly zero in `-q ln q`.
pub const ENTROPY_MASS_FLOOR: f64 = 1e-300;

/// Variance and entropy of one marginal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStat {
    pub variance: f64,
    pub entropy: f64,
}

/// Weighted variance of `(point, mass)` pairs, two-pass and compensated.
///
/// Masses are assumed normalized.
pub fn weighted_variance(points: &[(f64, f64)]) -> f64 {
    let mean = compensated_sum(points.iter().map(|&(x, q)| q * x));
    let mut acc = CompensatedSum::default();
    for &(x, q) in points {
        let d = x - mean;
        acc.add(q * d * d);
    }
    acc.value().max(0.0)
}

/// `sum q_k x_k^2 - (sum q_k x_k)^2` with `x_k = k * width`.
pub fn discrete_variance(d: &DiscreteDistribution) -> f64 {
    weighted_variance(&d.iter().collect::<Vec<_>>())
}

/// `-sum q_k ln q_k`, with `0 ln 0 = 0`.
pub fn shannon_entropy(masses: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    for &q in masses {
        if q > ENTROPY_MASS_FLOOR {
            acc.add(-q * q.ln());
        }
    }
    acc.value().max(0.0)
}

pub fn discrete_entropy(d: &DiscreteDistribution) -> f64 {
    shannon_entropy(d.masses())
}

pub fn histogram_variance(h: &HistogramDensity) -> f64 {
    let w = h.width();
    discrete_variance(h.distribution()) + w * w / 12.0
}

pub fn histogram_entropy(h: &HistogramDensity) -> f64 {
    discrete_entropy(h.distribution()) + h.width().ln()
}

pub fn discrete_summary(d: &DiscreteDistribution) -> SummaryStat {
    SummaryStat {
        variance: discrete_variance(d),
        entropy: discrete_entropy(d),
    }
}

pub fn histogram_summary(h: &HistogramDensity) -> SummaryStat {
    SummaryStat {
        variance: histogram_variance(h),
        entropy: histogram_entropy(h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::{coarse_grain, histogram_density, BinGrid, Rebin};
    use crate::numeric::std_normal_mass;
    use proptest::prelude::*;
    use std::f64::consts::{E, LN_2, PI};

    fn dist(width: f64, j_min: i64, masses: Vec<f64>) -> DiscreteDistribution {
        let g = BinGrid::new(width, j_min, j_min + masses.len() as i64 - 1).unwrap();
        DiscreteDistribution::new(g, masses).unwrap()
    }

    fn unit_gaussian(width: f64) -> DiscreteDistribution {
        let g = BinGrid::covering(width, 12.0).unwrap();
        coarse_grain(std_normal_mass, &g, 0.999)
            .unwrap()
            .distribution
    }

    #[test]
    fn discrete_variance_examples() {
        let d = dist(1.0, -1, vec![0.5, 0.0, 0.5]);
        assert_eq!(discrete_variance(&d), 1.0);
        assert_eq!(discrete_variance(&dist(3.7, 5, vec![1.0])), 0.0);
    }

    #[test]
    fn discrete_variance_gaussian_unit_width() {
        // Sum of k^2 q_k over erf-difference masses, mpmath at 30 digits.
        let v = discrete_variance(&unit_gaussian(1.0));
        assert!((v - 1.083_333_322_361_118).abs() < 1e-13, "{v}");
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(discrete_entropy(&dist(1.0, 0, vec![1.0])), 0.0);
        let two = dist(1.0, 0, vec![0.5, 0.5]);
        assert!((discrete_entropy(&two) - LN_2).abs() < 1e-15);
        assert!((histogram_entropy(&histogram_density(&two)) - LN_2).abs() < 1e-15);
        let h = discrete_entropy(&unit_gaussian(1.0));
        assert!((h - 1.458_958_819_793_757_7).abs() < 1e-13, "{h}");
    }

    #[test]
    fn entropy_ignores_denormal_masses() {
        let d = dist(1.0, 0, vec![1.0, 1e-320]);
        assert_eq!(discrete_entropy(&d), 0.0);
    }

    #[test]
    fn histogram_variance_examples() {
        let single = histogram_density(&dist(2.0, 0, vec![1.0]));
        assert!((histogram_variance(&single) - 1.0 / 3.0).abs() < 1e-15);
        let pair = histogram_density(&dist(1.0, -1, vec![0.5, 0.0, 0.5]));
        assert!((histogram_variance(&pair) - (1.0 + 1.0 / 12.0)).abs() < 1e-15);
        let g = histogram_density(&unit_gaussian(1.0));
        assert!((histogram_variance(&g) - 1.166_666_655_694_451).abs() < 1e-13);
    }

    #[test]
    fn histogram_entropy_single_bin_is_log_width() {
        let h = histogram_density(&dist(0.37, 2, vec![1.0]));
        assert!((histogram_entropy(&h) - 0.37f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn histogram_entropy_gaussian_limit() {
        let h = histogram_density(&unit_gaussian(0.01));
        let exact = 0.5 * (2.0 * PI * E).ln();
        assert!((histogram_entropy(&h) - exact).abs() < 1e-4);
    }

    #[test]
    fn variance_floor_and_small_width_convergence() {
        let mut prev = f64::INFINITY;
        for w in [1.0, 0.5, 0.1] {
            let hv = histogram_variance(&histogram_density(&unit_gaussian(w)));
            assert!(hv >= w * w / 12.0);
            let eps = (hv - 1.0).abs() - w * w / 12.0;
            assert!(eps >= 0.0 && eps < prev, "w = {w}, eps = {eps}");
            prev = eps;
        }
        assert!(prev < 1e-3);
    }

    fn arb_distribution() -> impl Strategy<Value = DiscreteDistribution> {
        (1usize..40, 0.01f64..5.0, -20i64..20).prop_flat_map(|(n, w, j0)| {
            prop::collection::vec(0.0f64..1.0, n).prop_filter_map("nonzero", move |ws| {
                let g = BinGrid::new(w, j0, j0 + n as i64 - 1).ok()?;
                DiscreteDistribution::from_weights(g, ws).ok()
            })
        })
    }

    proptest! {
        #[test]
        fn rebinning_never_increases_entropy(d in arb_distribution(), k in 0usize..5) {
            let factor = 2 * k + 1;
            let r = d.rebin(factor).unwrap();
            prop_assert!(discrete_entropy(&r) <= discrete_entropy(&d) + 1e-12);
        }

        #[test]
        fn histogram_variance_floor(d in arb_distribution()) {
            let h = histogram_density(&d);
            let w = d.grid().width();
            prop_assert!(histogram_variance(&h) >= w * w / 12.0 * (1.0 - 1e-12));
        }

        #[test]
        fn variance_is_translation_invariant(d in arb_distribution(), shift in -50i64..50) {
            let g = d.grid();
            let moved = BinGrid::new(g.width(), g.j_min() + shift, g.j_max() + shift).unwrap();
            let m = DiscreteDistribution::new(moved, d.masses().to_vec()).unwrap();
            let (a, b) = (discrete_variance(&d), discrete_variance(&m));
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a));
        }
    }
}
