//! Randomized invariants for the numerical kernels.

use proptest::prelude::*;

use minseq::deviation::{h, h_inverse};
use minseq::expfam::{BoundSide, Family};

fn round_trip(family: Family, mean: f64, n: u64, budget: f64) {
    for side in [BoundSide::Upper, BoundSide::Lower] {
        let q = family.invert_divergence(mean, n, budget, side).unwrap();
        match side {
            BoundSide::Upper => assert!(q >= mean),
            BoundSide::Lower => assert!(q <= mean),
        }
        let attained = n as f64 * family.divergence(mean, q).unwrap_or(f64::INFINITY);
        let (lo, hi) = family.mean_domain();
        // Skip roots pinned to (or hugging) the boundary: the budget is either
        // unattainable or one ulp of q already moves the statistic past the
        // tolerance (near 1, d is steeper than f64 spacing allows).
        if q <= lo + 1e-12 || q >= hi - 1e-9 || !attained.is_finite() {
            continue;
        }
        let rel = (attained - budget).abs() / budget.max(1.0);
        assert!(rel <= 1e-6, "family {family:?} side {side:?}: {attained} vs {budget}");
    }
}

proptest! {
    #[test]
    fn gaussian_inversion_round_trips(
        mean in -5.0f64..5.0,
        n in 1u64..500,
        budget in 1e-3f64..30.0,
    ) {
        round_trip(Family::GaussianUnitVariance, mean, n, budget);
    }

    #[test]
    fn bernoulli_inversion_round_trips(
        mean in 1e-3f64..0.999,
        n in 1u64..500,
        budget in 1e-3f64..30.0,
    ) {
        round_trip(Family::Bernoulli, mean, n, budget);
    }

    #[test]
    fn poisson_inversion_round_trips(
        mean in 1e-2f64..10.0,
        n in 1u64..500,
        budget in 1e-3f64..30.0,
    ) {
        round_trip(Family::Poisson, mean, n, budget);
    }

    #[test]
    fn h_inverse_round_trips(x in 1.0001f64..1e6) {
        let u = h_inverse(x).unwrap();
        prop_assert!((h(u).unwrap() - x).abs() <= 1e-9 * x.max(1.0));
    }

    #[test]
    fn divergence_is_positive_definite(
        mean in -3.0f64..3.0,
        theta in -3.0f64..3.0,
    ) {
        let d = Family::GaussianUnitVariance.divergence(mean, theta).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d == 0.0, mean == theta);
    }
}
