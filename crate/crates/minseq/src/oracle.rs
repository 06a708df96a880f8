//! Sample-complexity lower bounds, characteristic times and oracle sampling
//! allocations.
//!
//! The characteristic time `T*` and oracle weights `w*` are closed-form for
//! the minimum-testing problem: when the minimum mean is below the threshold,
//! `T* = 1/d(mu*, gamma)` and all oracle mass sits on the minimizing arms;
//! when it is above, `T* = sum_a 1/d(mu_a, gamma)` with weights proportional
//! to `1/d(mu_a, gamma)`.

use serde::{Deserialize, Serialize};

use crate::expfam::{Direction, Family};
use crate::{Error, Result};

/// A fully specified problem instance: the ground truth for simulation and
/// oracle computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditInstance {
    pub family: Family,
    pub means: Vec<f64>,
    pub gamma: f64,
}

/// Which hypothesis the instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `min_a mu_a < gamma`
    Below,
    /// `min_a mu_a > gamma`
    Above,
}

impl BanditInstance {
    pub fn new(family: Family, means: Vec<f64>, gamma: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::Argument("instance needs at least one arm".into()));
        }
        for &m in &means {
            if !family.contains(m) {
                return Err(Error::Domain(format!(
                    "arm mean {m} outside the open {family:?} domain"
                )));
            }
        }
        if !family.contains(gamma) {
            return Err(Error::Domain(format!(
                "threshold {gamma} outside the open {family:?} domain"
            )));
        }
        Ok(BanditInstance {
            family,
            means,
            gamma,
        })
    }

    pub fn arm_count(&self) -> usize {
        self.means.len()
    }

    pub fn min_mean(&self) -> f64 {
        self.means.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Indices of the arms attaining the minimum mean.
    pub fn minimizers(&self) -> Vec<usize> {
        let min = self.min_mean();
        self.means
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == min)
            .map(|(a, _)| a)
            .collect()
    }

    /// Classify the instance; `mu* = gamma` is degenerate (no test terminates
    /// on it).
    pub fn side(&self) -> Result<Side> {
        let min = self.min_mean();
        if min < self.gamma {
            Ok(Side::Below)
        } else if min > self.gamma {
            Ok(Side::Above)
        } else {
            Err(Error::DegenerateInstance)
        }
    }

    /// True recommendation for this instance.
    pub fn truth(&self) -> Result<Side> {
        self.side()
    }
}

/// Characteristic time and oracle allocation for an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    /// `T*(mu)`.
    pub characteristic_time: f64,
    /// `w*(mu)`: probability vector over arms.
    pub weights: Vec<f64>,
    pub side: Side,
}

/// Characteristic time `T*` and oracle weights `w*`.
///
/// With tied minimizers on the below side the oracle weights are not unique;
/// mass is split uniformly over the minimizing arms.
pub fn oracle_solution(instance: &BanditInstance) -> Result<OracleSolution> {
    let side = instance.side()?;
    let family = instance.family;
    let gamma = instance.gamma;
    match side {
        Side::Below => {
            let minimizers = instance.minimizers();
            let d_star = family.divergence(instance.min_mean(), gamma)?;
            let share = 1.0 / minimizers.len() as f64;
            let mut weights = vec![0.0; instance.arm_count()];
            for a in minimizers {
                weights[a] = share;
            }
            Ok(OracleSolution {
                characteristic_time: 1.0 / d_star,
                weights,
                side,
            })
        }
        Side::Above => {
            let inv: Vec<f64> = instance
                .means
                .iter()
                .map(|&m| family.divergence(m, gamma).map(|d| 1.0 / d))
                .collect::<Result<_>>()?;
            let total: f64 = inv.iter().sum();
            Ok(OracleSolution {
                characteristic_time: total,
                weights: inv.iter().map(|v| v / total).collect(),
                side,
            })
        }
    }
}

/// Binary relative entropy `kl(x, y)` for `x, y` in the open unit interval.
pub fn kl_binary(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!(
            "kl_binary arguments must lie in (0,1), got ({x}, {y})"
        )));
    }
    Ok(x * (x / y).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Argument(format!("risk delta must lie in (0,1), got {delta}")));
    }
    Ok(())
}

/// Instance-independent lower bound `T*(mu) kl(delta, 1-delta)` on the
/// expected sample count of any delta-correct strategy.
pub fn generic_lower_bound(instance: &BanditInstance, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let sol = oracle_solution(instance)?;
    Ok(sol.characteristic_time * kl_binary(delta, 1.0 - delta)?)
}

/// Per-arm draw lower bound `2(1 - 2 delta K^3) / (27 K^2 k)` for symmetric
/// delta-correct tests, clamped at 0 when vacuous.
pub fn min_draws_bound(instance: &BanditInstance, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    instance.side()?;
    let k_arms = instance.arm_count() as f64;
    let mut sorted = instance.means.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let family = instance.family;
    let hardest = family
        .divergence(sorted[0], instance.gamma)?
        .max(family.divergence(*sorted.last().unwrap(), instance.gamma)?);
    let numer = (1.0 - 2.0 * delta * k_arms.powi(3)).max(0.0);
    Ok(2.0 * numer / (27.0 * k_arms * k_arms * hardest))
}

/// Boosted lower bound on the expected sample count for instances with the
/// minimum below the threshold:
/// `kl(delta,1-delta)/d(mu_1,gamma) + min_draws * sum_a (1 - d^+(mu_a,gamma)/d(mu_1,gamma))`.
pub fn boosted_lower_bound(instance: &BanditInstance, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if instance.side()? != Side::Below {
        return Err(Error::Side(
            "the boosted bound is only stated for instances with the minimum below the threshold"
                .into(),
        ));
    }
    let family = instance.family;
    let gamma = instance.gamma;
    let d_min = family.divergence(instance.min_mean(), gamma)?;
    let per_arm = min_draws_bound(instance, delta)?;
    let mut boost = 0.0;
    for &m in &instance.means {
        let d_plus = family.divergence_directed(m, gamma, Direction::Plus)?;
        boost += 1.0 - d_plus / d_min;
    }
    Ok(kl_binary(delta, 1.0 - delta)? / d_min + per_arm * boost)
}

/// Predicted per-arm counts `N_a(tau)/ln(1/delta)` for the LCB sampling rule
/// on a Gaussian instance with a single arm below the threshold:
/// `2/(mu_a + gamma - 2 mu_1)^2` for the suboptimal arms and the
/// `kl(delta,1-delta)/(ln(1/delta) d(mu_1,gamma))` budget-balance entry for
/// the low arm. Used as a test oracle only.
pub fn lcb_predicted_weights(instance: &BanditInstance, delta: f64) -> Result<Vec<f64>> {
    check_delta(delta)?;
    if instance.family != Family::GaussianUnitVariance {
        return Err(Error::Unsupported(
            "LCB predicted weights are only available for unit-variance Gaussian instances".into(),
        ));
    }
    let gamma = instance.gamma;
    let below: Vec<usize> = instance
        .means
        .iter()
        .enumerate()
        .filter(|(_, &m)| m < gamma)
        .map(|(a, _)| a)
        .collect();
    if below.len() != 1 {
        return Err(Error::Unsupported(format!(
            "LCB predicted weights require exactly one arm below the threshold, found {}",
            below.len()
        )));
    }
    let low = below[0];
    let mu_low = instance.means[low];
    let d_low = instance.family.divergence(mu_low, gamma)?;
    let scale = kl_binary(delta, 1.0 - delta)? / (1.0 / delta).ln();
    instance
        .means
        .iter()
        .enumerate()
        .map(|(a, &m)| {
            if a == low {
                Ok(scale / d_low)
            } else {
                let denom = m + gamma - 2.0 * mu_low;
                Ok(2.0 / (denom * denom))
            }
        })
        .collect()
}
