//! One-parameter exponential families in their mean parameterization.
//!
//! Divergences are implemented in closed form per family rather than through
//! the cumulant-generating-function machinery:
//!
//! - Gaussian (unit variance): `d(mu, theta) = (mu - theta)^2 / 2`
//! - Bernoulli: `d(mu, theta) = mu ln(mu/theta) + (1-mu) ln((1-mu)/(1-theta))`
//! - Poisson: `d(mu, theta) = mu ln(mu/theta) + theta - mu`
//!
//! The first argument may sit on the closure of the mean domain (empirical
//! means hit the Bernoulli endpoints and the Poisson zero), the second must
//! stay in the open domain.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which one-parameter exponential family an arm belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GaussianUnitVariance,
    Bernoulli,
    Poisson,
}

/// One-sided divergence selector: `Plus` is `d^+(u,v) = d(u,v) 1(u <= v)`,
/// `Minus` is `d^-(u,v) = d(u,v) 1(u >= v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

/// Which side of the empirical mean a confidence boundary lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Upper,
    Lower,
}

const INVERT_TOL: f64 = 1e-9;
const INVERT_MAX_ITER: u32 = 200;

impl Family {
    /// Open interval of valid means `(inf, sup)`.
    pub fn mean_domain(self) -> (f64, f64) {
        match self {
            Family::GaussianUnitVariance => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Bernoulli => (0.0, 1.0),
            Family::Poisson => (0.0, f64::INFINITY),
        }
    }

    /// Is `x` a valid mean parameter (open domain)?
    pub fn contains(self, x: f64) -> bool {
        let (lo, hi) = self.mean_domain();
        x.is_finite() && x > lo && x < hi
    }

    /// Is `x` in the closure of the mean domain? Empirical means may sit on
    /// the boundary (Bernoulli 0/1, Poisson 0).
    pub fn contains_closure(self, x: f64) -> bool {
        let (lo, hi) = self.mean_domain();
        x.is_finite() && x >= lo && x <= hi
    }

    /// KL divergence `d(mu, theta)` between the distributions with means
    /// `mu` and `theta`.
    ///
    /// `mu` may lie on the closure of the domain (limits by continuity),
    /// `theta` must lie in the open domain.
    pub fn divergence(self, mu: f64, theta: f64) -> Result<f64> {
        if !self.contains_closure(mu) {
            return Err(Error::Domain(format!(
                "mean {mu} outside the closure of the {self:?} domain"
            )));
        }
        if !self.contains(theta) {
            return Err(Error::Domain(format!(
                "reference mean {theta} outside the open {self:?} domain"
            )));
        }
        Ok(self.divergence_unchecked(mu, theta))
    }

    fn divergence_unchecked(self, mu: f64, theta: f64) -> f64 {
        match self {
            Family::GaussianUnitVariance => {
                let d = mu - theta;
                d * d / 2.0
            }
            Family::Bernoulli => xlnxy(mu, theta) + xlnxy(1.0 - mu, 1.0 - theta),
            Family::Poisson => {
                if mu == 0.0 {
                    theta
                } else {
                    mu * (mu / theta).ln() + theta - mu
                }
            }
        }
    }

    /// One-sided divergence `d^+` or `d^-` (see [`Direction`]).
    pub fn divergence_directed(self, mu: f64, theta: f64, direction: Direction) -> Result<f64> {
        let active = match direction {
            Direction::Plus => mu <= theta,
            Direction::Minus => mu >= theta,
        };
        if active {
            self.divergence(mu, theta)
        } else {
            // Still validate the arguments so both branches share a contract.
            self.divergence(mu, theta).map(|_| 0.0)
        }
    }

    /// Solve `n * d(mu_hat, q) = budget` for the boundary `q` on the requested
    /// side of `mu_hat`. Capped at the domain boundary when the budget cannot
    /// be spent (e.g. Bernoulli `q -> 1`).
    pub fn invert_divergence(
        self,
        mu_hat: f64,
        n: u64,
        budget: f64,
        side: BoundSide,
    ) -> Result<f64> {
        if n == 0 {
            return Err(Error::Argument("invert_divergence requires n >= 1".into()));
        }
        if budget.is_nan() || budget < 0.0 {
            return Err(Error::Argument(format!(
                "invert_divergence budget must be nonnegative, got {budget}"
            )));
        }
        if !self.contains_closure(mu_hat) {
            return Err(Error::Domain(format!(
                "mean {mu_hat} outside the closure of the {self:?} domain"
            )));
        }
        if budget == 0.0 {
            return Ok(mu_hat);
        }
        let per_sample = budget / n as f64;
        if let Family::GaussianUnitVariance = self {
            let half_width = (2.0 * per_sample).sqrt();
            return Ok(match side {
                BoundSide::Upper => mu_hat + half_width,
                BoundSide::Lower => mu_hat - half_width,
            });
        }
        let (dom_lo, dom_hi) = self.mean_domain();
        let eval = |q: f64| {
            let theta = match self {
                Family::Bernoulli => q.clamp(1e-300, 1.0 - 1e-16),
                _ => q.max(1e-300),
            };
            self.divergence_unchecked(mu_hat, theta)
        };
        // d(mu_hat, .) is strictly monotone on each side of mu_hat. Bisect in
        // a log coordinate: solutions can hug the boundary exponentially
        // closely (Bernoulli q near 0 or 1, Poisson q near 0), where a linear
        // grid loses all relative precision. `to_q` maps the coordinate back
        // and `grows` says whether the divergence increases with it.
        let (mut u_lo, mut u_hi, to_q, grows): (f64, f64, fn(f64) -> f64, bool) =
            match (self, side) {
                (Family::Bernoulli, BoundSide::Upper) => {
                    if mu_hat >= dom_hi {
                        return Ok(dom_hi);
                    }
                    // Coordinate ln(1 - q); the divergence blows up at q = 1.
                    if eval(1.0 - 1e-16) < per_sample {
                        return Ok(dom_hi);
                    }
                    (1e-16f64.ln(), (1.0 - mu_hat).ln(), |u| 1.0 - u.exp(), false)
                }
                (_, BoundSide::Lower) => {
                    if mu_hat <= dom_lo {
                        return Ok(dom_lo);
                    }
                    if eval(1e-300) < per_sample {
                        return Ok(dom_lo);
                    }
                    (1e-300f64.ln(), mu_hat.ln(), |u| u.exp(), false)
                }
                (_, BoundSide::Upper) => {
                    // Poisson: expand until the budget is bracketed.
                    let mut hi = (mu_hat.max(1.0)) * 2.0;
                    let mut guard = 0;
                    while eval(hi) < per_sample {
                        hi *= 2.0;
                        guard += 1;
                        if guard > 1100 {
                            return Ok(f64::INFINITY);
                        }
                    }
                    (mu_hat.max(1e-300).ln(), hi.ln(), |u| u.exp(), true)
                }
            };
        for _ in 0..INVERT_MAX_ITER {
            let mid = 0.5 * (u_lo + u_hi);
            let over = eval(to_q(mid)) >= per_sample;
            if over == grows {
                u_hi = mid;
            } else {
                u_lo = mid;
            }
            if (u_hi - u_lo).abs() <= INVERT_TOL {
                break;
            }
        }
        Ok(to_q(0.5 * (u_lo + u_hi)))
    }

    /// Draw one observation from the arm distribution with mean `mean`.
    pub fn sample_observation<R: Rng + ?Sized>(self, mean: f64, rng: &mut R) -> f64 {
        match self {
            Family::GaussianUnitVariance => Normal::new(mean, 1.0).unwrap().sample(rng),
            Family::Bernoulli => {
                if rng.gen::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Poisson => Poisson::new(mean).unwrap().sample(rng),
        }
    }
}

/// `x ln(x/y)` with the `0 ln 0 = 0` convention.
fn xlnxy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

/// Family-specific conjugate prior hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PriorParams {
    /// Flat improper prior on the Gaussian mean; the posterior is proper only
    /// once the arm has been observed.
    GaussianFlat,
    Beta { alpha: f64, beta: f64 },
    Gamma { shape: f64, rate: f64 },
}

impl PriorParams {
    /// Standard uninformative conjugate choice for each family:
    /// flat / Beta(1,1) / Gamma(1,1).
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::GaussianUnitVariance => PriorParams::GaussianFlat,
            Family::Bernoulli => PriorParams::Beta {
                alpha: 1.0,
                beta: 1.0,
            },
            Family::Poisson => PriorParams::Gamma {
                shape: 1.0,
                rate: 1.0,
            },
        }
    }
}

/// Conjugate posterior of one arm's mean given its sufficient statistics.
#[derive(Debug, Clone, Copy)]
pub struct ArmPosterior {
    pub family: Family,
    /// Number of observations `N_a`.
    pub count: u64,
    /// Sum of observations `S_a`.
    pub sum: f64,
    pub prior: PriorParams,
}

impl ArmPosterior {
    pub fn new(family: Family, count: u64, sum: f64) -> Self {
        ArmPosterior {
            family,
            count,
            sum,
            prior: PriorParams::default_for(family),
        }
    }

    pub fn with_prior(family: Family, count: u64, sum: f64, prior: PriorParams) -> Self {
        ArmPosterior {
            family,
            count,
            sum,
            prior,
        }
    }

    fn check_proper(&self) -> Result<()> {
        if matches!(self.prior, PriorParams::GaussianFlat) && self.count == 0 {
            return Err(Error::State(
                "Gaussian posterior under the flat prior is improper before the first observation"
                    .into(),
            ));
        }
        Ok(())
    }

    /// One draw from the conjugate posterior of the arm mean.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.check_proper()?;
        let n = self.count as f64;
        Ok(match (self.family, self.prior) {
            (Family::GaussianUnitVariance, _) => {
                let mean = self.sum / n;
                Normal::new(mean, (1.0 / n).sqrt()).unwrap().sample(rng)
            }
            (Family::Bernoulli, PriorParams::Beta { alpha, beta }) => {
                Beta::new(alpha + self.sum, beta + n - self.sum)
                    .unwrap()
                    .sample(rng)
            }
            (Family::Poisson, PriorParams::Gamma { shape, rate }) => {
                // rand_distr parameterizes Gamma by (shape, scale).
                Gamma::new(shape + self.sum, 1.0 / (rate + n))
                    .unwrap()
                    .sample(rng)
            }
            (family, prior) => {
                return Err(Error::State(format!(
                    "prior {prior:?} does not match family {family:?}"
                )))
            }
        })
    }

    /// Posterior CDF at `gamma`: the probability that the arm mean lies
    /// below the threshold.
    pub fn prob_below(&self, gamma: f64) -> Result<f64> {
        self.check_proper()?;
        let n = self.count as f64;
        Ok(match (self.family, self.prior) {
            (Family::GaussianUnitVariance, _) => {
                let mean = self.sum / n;
                normal_cdf((gamma - mean) * n.sqrt())
            }
            (Family::Bernoulli, PriorParams::Beta { alpha, beta }) => {
                if gamma <= 0.0 {
                    0.0
                } else if gamma >= 1.0 {
                    1.0
                } else {
                    statrs::function::beta::beta_reg(alpha + self.sum, beta + n - self.sum, gamma)
                }
            }
            (Family::Poisson, PriorParams::Gamma { shape, rate }) => {
                if gamma <= 0.0 {
                    0.0
                } else {
                    statrs::function::gamma::gamma_lr(shape + self.sum, (rate + n) * gamma)
                }
            }
            (family, prior) => {
                return Err(Error::State(format!(
                    "prior {prior:?} does not match family {family:?}"
                )))
            }
        })
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn gaussian_divergence_closed_form() {
        let d = Family::GaussianUnitVariance.divergence(-1.0, 0.0).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn divergence_zero_at_identity() {
        for family in [
            Family::GaussianUnitVariance,
            Family::Bernoulli,
            Family::Poisson,
        ] {
            let mu = match family {
                Family::GaussianUnitVariance => -0.3,
                _ => 0.3,
            };
            assert_eq!(family.divergence(mu, mu).unwrap(), 0.0);
        }
    }

    #[test]
    fn bernoulli_divergence_value() {
        let d = Family::Bernoulli.divergence(0.1, 0.5).unwrap();
        assert!((d - 0.368064).abs() < 1e-5, "got {d}");
    }

    #[test]
    fn bernoulli_boundary_limits() {
        let d0 = Family::Bernoulli.divergence(0.0, 0.3).unwrap();
        assert!((d0 - (1.0f64 / 0.7).ln()).abs() < 1e-12);
        let d1 = Family::Bernoulli.divergence(1.0, 0.3).unwrap();
        assert!((d1 - (1.0f64 / 0.3).ln()).abs() < 1e-12);
    }

    #[test]
    fn theta_outside_open_domain_is_an_error() {
        assert!(Family::Bernoulli.divergence(0.5, 1.0).is_err());
        assert!(Family::Bernoulli.divergence(0.5, 0.0).is_err());
        assert!(Family::Poisson.divergence(1.0, 0.0).is_err());
    }

    #[test]
    fn directed_divergences() {
        let d = Family::Bernoulli
            .divergence_directed(0.3, 0.5, Direction::Plus)
            .unwrap();
        assert!((d - 0.0822829).abs() < 1e-6, "got {d}");
        let z = Family::Bernoulli
            .divergence_directed(0.7, 0.5, Direction::Plus)
            .unwrap();
        assert_eq!(z, 0.0);
        let g = Family::GaussianUnitVariance
            .divergence_directed(1.0, 0.0, Direction::Minus)
            .unwrap();
        assert!((g - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invert_divergence_gaussian_closed_form() {
        let q = Family::GaussianUnitVariance
            .invert_divergence(0.0, 2, 1.0, BoundSide::Upper)
            .unwrap();
        assert!((q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invert_divergence_zero_budget() {
        for family in [
            Family::GaussianUnitVariance,
            Family::Bernoulli,
            Family::Poisson,
        ] {
            let q = family.invert_divergence(0.4, 5, 0.0, BoundSide::Upper).unwrap();
            assert_eq!(q, 0.4);
        }
    }

    #[test]
    fn invert_divergence_round_trip_bernoulli() {
        let budget = Family::Bernoulli.divergence(0.5, 0.9).unwrap();
        let q = Family::Bernoulli
            .invert_divergence(0.5, 1, budget, BoundSide::Upper)
            .unwrap();
        assert!((q - 0.9).abs() < 1e-6, "got {q}");
    }

    #[test]
    fn invert_divergence_negative_budget_rejected() {
        assert!(Family::Bernoulli
            .invert_divergence(0.5, 1, -0.1, BoundSide::Upper)
            .is_err());
    }

    #[test]
    fn invert_divergence_caps_at_domain_boundary() {
        // Bernoulli lower bound from an empirical mean of 0 is 0.
        let q = Family::Bernoulli
            .invert_divergence(0.0, 3, 1.0, BoundSide::Lower)
            .unwrap();
        assert_eq!(q, 0.0);
        let q = Family::Bernoulli
            .invert_divergence(1.0, 3, 1.0, BoundSide::Upper)
            .unwrap();
        assert_eq!(q, 1.0);
        let q = Family::Poisson
            .invert_divergence(0.0, 3, 1.0, BoundSide::Lower)
            .unwrap();
        assert_eq!(q, 0.0);
    }

    #[test]
    fn divergence_monotone_away_from_mu() {
        for (family, mu) in [
            (Family::GaussianUnitVariance, -0.25),
            (Family::Bernoulli, 0.35),
            (Family::Poisson, 1.5),
        ] {
            let (lo, hi) = match family {
                Family::GaussianUnitVariance => (-3.0, 3.0),
                Family::Bernoulli => (0.001, 0.999),
                Family::Poisson => (0.001, 5.0),
            };
            let mut theta = lo;
            let mut prev_left = f64::INFINITY;
            let mut prev_right = 0.0;
            while theta <= hi {
                let d = family.divergence(mu, theta).unwrap();
                if theta <= mu {
                    assert!(d <= prev_left + 1e-12, "not decreasing at {theta}");
                    prev_left = d;
                } else {
                    assert!(d >= prev_right - 1e-12, "not increasing at {theta}");
                    prev_right = d;
                }
                theta += 1e-3;
            }
        }
    }

    #[test]
    fn posterior_uniform_for_empty_bernoulli() {
        let post = ArmPosterior::new(Family::Bernoulli, 0, 0.0);
        let p = post.prob_below(0.3).unwrap();
        assert!((p - 0.3).abs() < 1e-12);
    }

    #[test]
    fn posterior_gaussian_symmetry() {
        let post = ArmPosterior::new(Family::GaussianUnitVariance, 4, 0.0);
        assert!((post.prob_below(0.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn posterior_gaussian_cdf_value() {
        let post = ArmPosterior::new(Family::GaussianUnitVariance, 1, 1.0);
        let p = post.prob_below(0.0).unwrap();
        assert!((p - 0.158655).abs() < 1e-5, "got {p}");
    }

    #[test]
    fn improper_gaussian_posterior_is_a_state_error() {
        let post = ArmPosterior::new(Family::GaussianUnitVariance, 0, 0.0);
        assert!(post.sample(&mut rng(0)).is_err());
        assert!(post.prob_below(0.0).is_err());
    }

    #[test]
    fn posterior_sample_concentrates() {
        let post = ArmPosterior::new(Family::GaussianUnitVariance, 1_000_000, 0.0);
        let mut r = rng(7);
        for _ in 0..100 {
            let x = post.sample(&mut r).unwrap();
            assert!(x.abs() < 0.01, "draw {x} too far at 10 posterior sds");
        }
    }

    #[test]
    fn posterior_sample_deterministic_under_seed() {
        let post = ArmPosterior::new(Family::Bernoulli, 10, 4.0);
        let a = post.sample(&mut rng(42)).unwrap();
        let b = post.sample(&mut rng(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn posterior_sample_matches_analytic_mean() {
        // Empirical mean over 1e5 draws within 4 standard errors.
        let cases = [
            (ArmPosterior::new(Family::GaussianUnitVariance, 10, 3.0), 0.3, 1.0 / 10.0),
            (
                ArmPosterior::new(Family::Bernoulli, 10, 4.0),
                5.0 / 12.0,
                5.0 / 12.0 * (7.0 / 12.0) / 13.0,
            ),
            (
                ArmPosterior::new(Family::Poisson, 10, 14.0),
                15.0 / 11.0,
                15.0 / 11.0 / 11.0,
            ),
        ];
        let n = 100_000;
        let mut r = rng(11);
        for (post, mean, var) in cases {
            let mut sum = 0.0;
            for _ in 0..n {
                sum += post.sample(&mut r).unwrap();
            }
            let emp = sum / n as f64;
            let se = (var / n as f64).sqrt();
            assert!(
                (emp - mean).abs() < 4.0 * se,
                "{:?}: {} vs {} (se {})",
                post.family,
                emp,
                mean,
                se
            );
        }
    }

    #[test]
    fn prob_below_matches_empirical_fraction() {
        let n = 100_000;
        let mut r = rng(13);
        for (post, gamma) in [
            (ArmPosterior::new(Family::GaussianUnitVariance, 5, 1.0), 0.1),
            (ArmPosterior::new(Family::Bernoulli, 12, 3.0), 0.3),
            (ArmPosterior::new(Family::Poisson, 8, 10.0), 1.2),
        ] {
            let p = post.prob_below(gamma).unwrap();
            let mut below = 0u64;
            for _ in 0..n {
                if post.sample(&mut r).unwrap() < gamma {
                    below += 1;
                }
            }
            let emp = below as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (emp - p).abs() < 4.0 * se,
                "{:?}: {} vs {} (se {})",
                post.family,
                emp,
                p,
                se
            );
        }
    }
}
