//! Self-normalized deviation thresholds and aggregate confidence bounds.
//!
//! The threshold function `T(x) = 2 h^{-1}(1 + (h^{-1}(1+x) + ln zeta(2))/2)`
//! with `h(u) = u - ln u` controls, uniformly over time, how far the pooled
//! empirical mean of any arm subset can deviate from the extreme mean in the
//! subset: the statistic `N_S d^+(mu_hat_S, min_S mu)` exceeds
//! `3 ln(1 + ln N_S) + T(x)` with probability at most `e^-x`, and likewise
//! for `d^-` against the maximum.

use serde::{Deserialize, Serialize};

use crate::expfam::{BoundSide, Direction};
use crate::rules::RunState;
use crate::{Error, Result};

/// `ln zeta(2) = ln(pi^2/6)`.
const LN_ZETA_2: f64 = 0.497_714_813_361_722_25;

/// `h(u) = u - ln(u)` for `u >= 1`.
pub fn h(u: f64) -> Result<f64> {
    if u.is_nan() || u < 1.0 {
        return Err(Error::Domain(format!("h is defined on [1, inf), got {u}")));
    }
    Ok(u - u.ln())
}

/// Inverse of `h` on `[1, inf)`, computed by Newton iteration seeded at the
/// Lambert-function upper bound `x + ln(x + sqrt(2(x-1)))`.
pub fn h_inverse(x: f64) -> Result<f64> {
    if x.is_nan() || x < 1.0 {
        return Err(Error::Domain(format!(
            "h_inverse is defined on [1, inf), got {x}"
        )));
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    // The seed upper-bounds the root; h is convex so Newton descends
    // monotonically onto it.
    let mut u = x + (x + (2.0 * (x - 1.0)).sqrt()).ln();
    for _ in 0..50 {
        let f = u - u.ln() - x;
        if f.abs() <= 1e-12 {
            break;
        }
        u -= f * u / (u - 1.0);
        if u < 1.0 {
            u = 1.0;
        }
    }
    Ok(u)
}

/// Deviation threshold `T(x)`, defined for `x >= 0.04` (below that the
/// derivation's `T(x) >= 6` requirement fails).
pub fn threshold_t(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.04 {
        return Err(Error::Domain(format!(
            "threshold_t is defined for x >= 0.04, got {x}"
        )));
    }
    let inner = h_inverse(1.0 + x)?;
    Ok(2.0 * h_inverse(1.0 + (inner + LN_ZETA_2) / 2.0)?)
}

/// Composite stopping threshold `3 ln(1 + ln r) + T(budget_arg)` that a
/// pooled statistic with `r` observations must exceed.
pub fn stopping_threshold(r: u64, budget_arg: f64) -> Result<f64> {
    if r == 0 {
        return Err(Error::Argument("stopping_threshold requires r >= 1".into()));
    }
    Ok(3.0 * (1.0 + (r as f64).ln()).ln() + threshold_t(budget_arg)?)
}

/// Weight function over arm subsets used by the aggregated stopping rule and
/// confidence bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SubsetPrior {
    /// `pi(S) = 1/K` on singletons: the Box rule.
    Singletons { arm_count: usize },
    /// `pi(S) = 1/(K binom(K, |S|))`: equal weight on each subset size.
    SizeUniform { arm_count: usize },
    /// Explicit subset weights (must sum to 1 over the listed subsets).
    Custom {
        arm_count: usize,
        weights: Vec<(Vec<usize>, f64)>,
    },
}

impl SubsetPrior {
    pub fn arm_count(&self) -> usize {
        match self {
            SubsetPrior::Singletons { arm_count }
            | SubsetPrior::SizeUniform { arm_count }
            | SubsetPrior::Custom { arm_count, .. } => *arm_count,
        }
    }

    /// Prior weight of a subset (0 when unsupported).
    pub fn weight(&self, subset: &[usize]) -> f64 {
        let k = self.arm_count();
        match self {
            SubsetPrior::Singletons { .. } => {
                if subset.len() == 1 {
                    1.0 / k as f64
                } else {
                    0.0
                }
            }
            SubsetPrior::SizeUniform { .. } => {
                1.0 / (k as f64 * binomial(k, subset.len()))
            }
            SubsetPrior::Custom { weights, .. } => {
                let mut key: Vec<usize> = subset.to_vec();
                key.sort_unstable();
                weights
                    .iter()
                    .find(|(s, _)| {
                        let mut s = s.clone();
                        s.sort_unstable();
                        s == key
                    })
                    .map(|(_, w)| *w)
                    .unwrap_or(0.0)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SubsetPrior::Custom { arm_count, weights } = self {
            let total: f64 = weights.iter().map(|(_, w)| w).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Argument(format!(
                    "custom subset prior weights sum to {total}, expected 1"
                )));
            }
            for (subset, w) in weights {
                if *w <= 0.0 {
                    return Err(Error::Argument("subset prior weights must be positive".into()));
                }
                if subset.is_empty() || subset.iter().any(|&a| a >= *arm_count) {
                    return Err(Error::Argument("invalid subset in custom prior".into()));
                }
            }
        }
        Ok(())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Pooled sufficient statistics of an arm subset.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStat {
    pub subset: Vec<usize>,
    /// `N_S = sum_{a in S} N_a`.
    pub pooled_count: u64,
    /// Count-weighted average of the per-arm empirical means.
    pub pooled_mean: f64,
}

/// Pooled count and mean of a subset; every arm in the subset must have been
/// observed at least once.
pub fn aggregate_stat(state: &RunState, subset: &[usize]) -> Result<AggregateStat> {
    if subset.is_empty() {
        return Err(Error::Argument("aggregate_stat needs a nonempty subset".into()));
    }
    let mut count = 0u64;
    let mut sum = 0.0;
    for &a in subset {
        if a >= state.arm_count() {
            return Err(Error::Argument(format!("arm index {a} out of range")));
        }
        if state.counts[a] == 0 {
            return Err(Error::Argument(format!("arm {a} has no observations")));
        }
        count += state.counts[a];
        sum += state.sums[a];
    }
    Ok(AggregateStat {
        subset: subset.to_vec(),
        pooled_count: count,
        pooled_mean: sum / count as f64,
    })
}

/// How the subset space is explored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Prefixes of the arms sorted by increasing empirical mean among those
    /// whose mean is on the relevant side of the reference point.
    NestedPrefix,
    /// Full powerset enumeration; only feasible for small `K`.
    BruteForce,
}

const BRUTE_FORCE_MAX_ARMS: usize = 12;

/// Best-margin subset for the pooled below-evidence statistic at reference
/// point `q`:
/// `margin(S) = N_S d^+(mu_hat_S, q) - 3 ln(1 + ln N_S) - T(ln(1/(delta pi(S))))`.
///
/// Returns the maximizing subset and its margin, or `None` when the search
/// space is empty.
pub fn scan_pooled_below(
    state: &RunState,
    q: f64,
    delta: f64,
    prior: &SubsetPrior,
    mode: SearchMode,
) -> Result<Option<(Vec<usize>, f64)>> {
    scan_pooled(state, q, delta, prior, mode, Direction::Plus)
}

/// Symmetric scan with the above-evidence statistic `d^-`.
pub fn scan_pooled_above(
    state: &RunState,
    q: f64,
    delta: f64,
    prior: &SubsetPrior,
    mode: SearchMode,
) -> Result<Option<(Vec<usize>, f64)>> {
    scan_pooled(state, q, delta, prior, mode, Direction::Minus)
}

fn scan_pooled(
    state: &RunState,
    q: f64,
    delta: f64,
    prior: &SubsetPrior,
    mode: SearchMode,
    direction: Direction,
) -> Result<Option<(Vec<usize>, f64)>> {
    let k = state.arm_count();
    let family = state.family;
    let margin_of = |subset: &[usize]| -> Result<Option<f64>> {
        let weight = prior.weight(subset);
        if weight <= 0.0 {
            return Ok(None);
        }
        let agg = aggregate_stat(state, subset)?;
        let stat = agg.pooled_count as f64
            * family.divergence_directed(agg.pooled_mean, q, direction)?;
        let threshold = stopping_threshold(agg.pooled_count, (1.0 / (delta * weight)).ln())?;
        Ok(Some(stat - threshold))
    };
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut consider = |subset: Vec<usize>, margin: f64| {
        if best.as_ref().is_none_or(|(_, m)| margin > *m) {
            best = Some((subset, margin));
        }
    };
    match (mode, prior) {
        (_, SubsetPrior::Custom { weights, .. }) => {
            for (subset, _) in weights {
                if let Some(m) = margin_of(subset)? {
                    consider(subset.clone(), m);
                }
            }
        }
        (SearchMode::NestedPrefix, _) => {
            // Arms on the relevant side of q, sorted by how far their mean
            // sits on that side.
            let mut arms: Vec<usize> = (0..k)
                .filter(|&a| match direction {
                    Direction::Plus => state.mean(a) <= q,
                    Direction::Minus => state.mean(a) >= q,
                })
                .collect();
            arms.sort_by(|&a, &b| {
                let (ma, mb) = (state.mean(a), state.mean(b));
                match direction {
                    Direction::Plus => ma.partial_cmp(&mb).unwrap(),
                    Direction::Minus => mb.partial_cmp(&ma).unwrap(),
                }
            });
            for len in 1..=arms.len() {
                let prefix = &arms[..len];
                if let Some(m) = margin_of(prefix)? {
                    consider(prefix.to_vec(), m);
                }
            }
            // Singletons past the first arm are not prefixes, but they carry
            // weight under the singleton prior and their thresholds differ by
            // arm count, so check them explicitly.
            for &a in arms.iter().skip(1) {
                let single = [a];
                if let Some(m) = margin_of(&single)? {
                    consider(single.to_vec(), m);
                }
            }
        }
        (SearchMode::BruteForce, _) => {
            if k > BRUTE_FORCE_MAX_ARMS {
                return Err(Error::Argument(format!(
                    "brute-force subset search is limited to {BRUTE_FORCE_MAX_ARMS} arms, got {k}"
                )));
            }
            for mask in 1u32..(1u32 << k) {
                let subset: Vec<usize> = (0..k).filter(|a| mask & (1 << a) != 0).collect();
                if let Some(m) = margin_of(&subset)? {
                    consider(subset, m);
                }
            }
        }
    }
    Ok(best)
}

/// Which aggregated confidence bound to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiDirection {
    /// Upper confidence bound on the minimum mean.
    MinUpper,
    /// Lower confidence bound on the maximum mean.
    MaxLower,
}

const UCB_TOL: f64 = 1e-6;

/// Aggregated confidence bound on the minimum (or maximum) mean: the extreme
/// `q` such that no subset statistic clears its prior-weighted threshold.
pub fn ucb_min(
    state: &RunState,
    prior: &SubsetPrior,
    delta: f64,
    direction: CiDirection,
) -> Result<f64> {
    ucb_min_searched(state, prior, delta, direction, SearchMode::NestedPrefix)
}

/// [`ucb_min`] with an explicit subset search mode.
pub fn ucb_min_searched(
    state: &RunState,
    prior: &SubsetPrior,
    delta: f64,
    direction: CiDirection,
    mode: SearchMode,
) -> Result<f64> {
    let k = state.arm_count();
    for a in 0..k {
        if state.counts[a] == 0 {
            return Err(Error::Argument(format!("arm {a} has no observations")));
        }
    }
    let family = state.family;
    let (dom_lo, dom_hi) = family.mean_domain();
    let fired = |q: f64| -> Result<bool> {
        let scan = match direction {
            CiDirection::MinUpper => scan_pooled_below(state, q, delta, prior, mode)?,
            CiDirection::MaxLower => scan_pooled_above(state, q, delta, prior, mode)?,
        };
        Ok(scan.is_some_and(|(_, margin)| margin >= 0.0))
    };
    let means: Vec<f64> = (0..k).map(|a| state.mean(a)).collect();
    let min_mean = means.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_mean = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // At the extreme empirical mean all directed divergences vanish, so the
    // bound brackets from there outward.
    let (mut inside, mut outside) = match direction {
        CiDirection::MinUpper => {
            let mut hi = if dom_hi.is_finite() {
                dom_hi
            } else {
                let mut step = 1.0;
                let mut hi = max_mean + step;
                while !fired(hi)? {
                    step *= 2.0;
                    hi = max_mean + step;
                    if step > 1e12 {
                        return Ok(dom_hi);
                    }
                }
                hi
            };
            if dom_hi.is_finite() && !fired(hi - (hi - min_mean) * 1e-12)? {
                return Ok(dom_hi);
            }
            if dom_hi.is_finite() {
                hi -= (hi - min_mean) * 1e-12;
            }
            (min_mean, hi)
        }
        CiDirection::MaxLower => {
            let mut lo = if dom_lo.is_finite() {
                dom_lo + (max_mean - dom_lo) * 1e-12
            } else {
                let mut step = 1.0;
                let mut lo = min_mean - step;
                while !fired(lo)? {
                    step *= 2.0;
                    lo = min_mean - step;
                    if step > 1e12 {
                        return Ok(dom_lo);
                    }
                }
                lo
            };
            if dom_lo.is_finite() && !fired(lo)? {
                return Ok(dom_lo);
            }
            if dom_lo.is_finite() {
                lo = dom_lo + (max_mean - dom_lo) * 1e-12;
            }
            (max_mean, lo)
        }
    };
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if fired(mid)? {
            outside = mid;
        } else {
            inside = mid;
        }
        if (inside - outside).abs() <= UCB_TOL {
            break;
        }
    }
    Ok(0.5 * (inside + outside))
}

/// Per-arm upper confidence bound `U_a(t)` at budget `budget_arg`:
/// `max { q : N_a d^+(mu_hat_a, q) < 3 ln(1 + ln N_a) + T(budget_arg) }`.
pub fn box_upper_bound(state: &RunState, arm: usize, budget_arg: f64) -> Result<f64> {
    let n = state.counts[arm];
    let budget = stopping_threshold(n, budget_arg)?;
    state
        .family
        .invert_divergence(state.mean(arm), n, budget, BoundSide::Upper)
}

/// Per-arm lower confidence bound `L_a(t)` at budget `budget_arg`.
pub fn box_lower_bound(state: &RunState, arm: usize, budget_arg: f64) -> Result<f64> {
    let n = state.counts[arm];
    let budget = stopping_threshold(n, budget_arg)?;
    state
        .family
        .invert_divergence(state.mean(arm), n, budget, BoundSide::Lower)
}
