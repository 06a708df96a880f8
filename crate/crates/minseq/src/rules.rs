//! Sampling rules, stopping rules and the single-episode driver.
//!
//! A run initializes by drawing each arm once in index order, then alternates
//! stopping check, arm selection and observation. The stop-for-above clause
//! `tau_>` fires when every arm's `d^-` statistic clears its threshold; the
//! stop-for-below clause `tau_<` fires when some arm subset's pooled `d^+`
//! statistic clears a prior-weighted threshold (Box: singletons, Aggregate:
//! size-uniform prior with a nested-prefix search) or, for the GLRT variant,
//! when the summed per-arm evidence clears a single collective threshold.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::deviation::{
    box_lower_bound, scan_pooled_below, stopping_threshold, threshold_t, SearchMode, SubsetPrior,
};
use crate::expfam::{ArmPosterior, Direction, Family, PriorParams};
use crate::oracle::{BanditInstance, Side};
use crate::{Error, Result};

/// Sufficient statistics of a run: per-arm counts and sums plus the round
/// index. Everything every rule consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct RunState {
    pub family: Family,
    pub gamma: f64,
    /// Total observations so far.
    pub round: u64,
    /// `N_a` per arm.
    pub counts: Vec<u64>,
    /// `S_a` per arm.
    pub sums: Vec<f64>,
    /// Conjugate prior hyperparameters shared by all arms.
    pub prior: PriorParams,
}

impl RunState {
    pub fn new(family: Family, gamma: f64, arm_count: usize) -> Self {
        RunState {
            family,
            gamma,
            round: 0,
            counts: vec![0; arm_count],
            sums: vec![0.0; arm_count],
            prior: PriorParams::default_for(family),
        }
    }

    pub fn arm_count(&self) -> usize {
        self.counts.len()
    }

    /// Empirical mean of an arm; requires at least one observation.
    pub fn mean(&self, arm: usize) -> f64 {
        debug_assert!(self.counts[arm] > 0);
        self.sums[arm] / self.counts[arm] as f64
    }

    pub fn observe(&mut self, arm: usize, x: f64) {
        self.counts[arm] += 1;
        self.sums[arm] += x;
        self.round += 1;
    }

    pub fn posterior(&self, arm: usize) -> ArmPosterior {
        ArmPosterior::with_prior(self.family, self.counts[arm], self.sums[arm], self.prior)
    }

    fn all_initialized(&self) -> bool {
        self.counts.iter().all(|&n| n > 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingRule {
    Lcb,
    Thompson,
    Murphy,
    RoundRobin,
}

impl SamplingRule {
    pub fn label(self) -> &'static str {
        match self {
            SamplingRule::Lcb => "lcb",
            SamplingRule::Thompson => "thompson",
            SamplingRule::Murphy => "murphy",
            SamplingRule::RoundRobin => "round_robin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    Box,
    Aggregate,
    Glrt,
}

impl StoppingRule {
    pub fn label(self) -> &'static str {
        match self {
            StoppingRule::Box => "box",
            StoppingRule::Aggregate => "aggregate",
            StoppingRule::Glrt => "glrt",
        }
    }
}

/// Per-episode algorithm configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleConfig {
    pub sampling: SamplingRule,
    pub stopping: StoppingRule,
    pub delta: f64,
    /// Maximum total observations before the episode is declared
    /// inconclusive.
    pub horizon_cap: u64,
    /// Maximum posterior redraws per Murphy round before the
    /// probability-proportional fallback.
    pub murphy_rejection_cap: u64,
}

pub const DEFAULT_HORIZON_CAP: u64 = 10_000_000;
pub const DEFAULT_MURPHY_REJECTION_CAP: u64 = 100_000;

impl RuleConfig {
    pub fn new(sampling: SamplingRule, stopping: StoppingRule, delta: f64) -> Self {
        RuleConfig {
            sampling,
            stopping,
            delta,
            horizon_cap: DEFAULT_HORIZON_CAP,
            murphy_rejection_cap: DEFAULT_MURPHY_REJECTION_CAP,
        }
    }

    pub fn validate(&self, arm_count: usize) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0,1), got {}",
                self.delta
            )));
        }
        if self.horizon_cap < arm_count as u64 {
            return Err(Error::Config(format!(
                "horizon cap {} cannot cover the {arm_count}-arm initialization",
                self.horizon_cap
            )));
        }
        if self.stopping == StoppingRule::Glrt {
            let per_arm_budget = (1.0 / self.delta).ln() / arm_count as f64;
            if per_arm_budget < 0.04 {
                return Err(Error::Config(format!(
                    "GLRT budget ln(1/delta)/K = {per_arm_budget:.4} is below the threshold \
                     function's domain (0.04)"
                )));
            }
        }
        Ok(())
    }
}

/// Final outcome of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Stopping time `tau` (total observations including initialization).
    pub stopped_at: u64,
    pub recommendation: Recommendation,
    pub fired_clause: FiredClause,
    /// The subset whose pooled statistic fired `tau_<`, when applicable.
    pub witness_subset: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recommendation {
    Below,
    Above,
    Inconclusive,
}

impl Recommendation {
    pub fn matches(self, side: Side) -> bool {
        matches!(
            (self, side),
            (Recommendation::Below, Side::Below) | (Recommendation::Above, Side::Above)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiredClause {
    TauLess,
    TauGreater,
    Horizon,
}

/// Per-round trace record for diagnostic output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub round: u64,
    pub arm: usize,
    pub observation: f64,
    pub counts: Vec<u64>,
    /// Smallest per-arm `d^-` margin (the binding constraint of `tau_>`).
    pub tau_greater_margin: f64,
    /// Best pooled `d^+` margin over the searched subsets.
    pub tau_less_margin: f64,
}

/// LCB sampling rule: play the arm with the smallest lower confidence bound.
/// Ties break to the lowest index.
pub fn select_lcb(state: &RunState, delta: f64) -> Result<usize> {
    let budget_arg = (1.0 / delta).ln();
    let mut best = 0usize;
    let mut best_bound = f64::INFINITY;
    for a in 0..state.arm_count() {
        let bound = box_lower_bound(state, a, budget_arg)?;
        if bound < best_bound {
            best = a;
            best_bound = bound;
        }
    }
    Ok(best)
}

/// Thompson sampling: one posterior draw per arm, play the argmin.
pub fn select_thompson<R: Rng + ?Sized>(state: &RunState, rng: &mut R) -> Result<usize> {
    let mut best = 0usize;
    let mut best_draw = f64::INFINITY;
    for a in 0..state.arm_count() {
        let draw = state.posterior(a).sample(rng)?;
        if draw < best_draw {
            best = a;
            best_draw = draw;
        }
    }
    Ok(best)
}

/// Murphy sampling: draw joint posterior vectors until the minimum component
/// falls below the threshold, then play the argmin. When `rejection_cap`
/// redraws all fail, fall back to sampling an arm proportionally to its
/// posterior probability of being below the threshold.
pub fn select_murphy<R: Rng + ?Sized>(
    state: &RunState,
    rng: &mut R,
    rejection_cap: u64,
) -> Result<usize> {
    let k = state.arm_count();
    let posteriors: Vec<ArmPosterior> = (0..k).map(|a| state.posterior(a)).collect();
    for _ in 0..rejection_cap {
        let mut best = 0usize;
        let mut best_draw = f64::INFINITY;
        for (a, post) in posteriors.iter().enumerate() {
            let draw = post.sample(rng)?;
            if draw < best_draw {
                best = a;
                best_draw = draw;
            }
        }
        if best_draw < state.gamma {
            return Ok(best);
        }
    }
    // Conditioning probability too small to hit by rejection; the sampling
    // probabilities behave like the normalized per-arm posterior mass below
    // the threshold, so sample from that directly.
    let weights: Vec<f64> = posteriors
        .iter()
        .map(|p| p.prob_below(state.gamma))
        .collect::<Result<_>>()?;
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        let mut u = rng.gen::<f64>() * total;
        for (a, w) in weights.iter().enumerate() {
            u -= w;
            if u <= 0.0 {
                return Ok(a);
            }
        }
        return Ok(k - 1);
    }
    // All posterior mass numerically above the threshold: the lowest
    // empirical mean carries the dominant conditional mass.
    let mut best = 0usize;
    for a in 1..k {
        if state.mean(a) < state.mean(best) {
            best = a;
        }
    }
    Ok(best)
}

/// Round-robin: play the least-sampled arm, lowest index first.
pub fn select_round_robin(state: &RunState) -> usize {
    let mut best = 0usize;
    for a in 1..state.arm_count() {
        if state.counts[a] < state.counts[best] {
            best = a;
        }
    }
    best
}

/// `tau_>` check: every arm's `d^-` statistic clears its threshold.
pub fn check_stop_greater(state: &RunState, delta: f64) -> Result<bool> {
    Ok(tau_greater_min_margin(state, delta)? >= 0.0)
}

fn tau_greater_min_margin(state: &RunState, delta: f64) -> Result<f64> {
    let budget_arg = (1.0 / delta).ln();
    let mut min_margin = f64::INFINITY;
    for a in 0..state.arm_count() {
        let n = state.counts[a];
        let stat = n as f64
            * state
                .family
                .divergence_directed(state.mean(a), state.gamma, Direction::Minus)?;
        let margin = stat - stopping_threshold(n, budget_arg)?;
        min_margin = min_margin.min(margin);
    }
    Ok(min_margin)
}

/// `tau_<` check in the requested mode. Returns the witness subset when the
/// rule fires.
pub fn check_stop_less(
    state: &RunState,
    delta: f64,
    mode: StoppingRule,
) -> Result<Option<Vec<usize>>> {
    Ok(tau_less_best(state, delta, mode)?.and_then(|(witness, margin)| {
        if margin >= 0.0 {
            Some(witness)
        } else {
            None
        }
    }))
}

fn tau_less_best(
    state: &RunState,
    delta: f64,
    mode: StoppingRule,
) -> Result<Option<(Vec<usize>, f64)>> {
    let k = state.arm_count();
    match mode {
        StoppingRule::Box => scan_pooled_below(
            state,
            state.gamma,
            delta,
            &SubsetPrior::Singletons { arm_count: k },
            SearchMode::NestedPrefix,
        ),
        StoppingRule::Aggregate => scan_pooled_below(
            state,
            state.gamma,
            delta,
            &SubsetPrior::SizeUniform { arm_count: k },
            SearchMode::NestedPrefix,
        ),
        StoppingRule::Glrt => {
            let mut evidence = 0.0;
            let mut support = Vec::new();
            for a in 0..k {
                let mean = state.mean(a);
                if mean <= state.gamma {
                    let n = state.counts[a];
                    let stat = n as f64
                        * state
                            .family
                            .divergence_directed(mean, state.gamma, Direction::Plus)?;
                    let term = stat - 3.0 * (1.0 + (n as f64).ln()).ln();
                    if term > 0.0 {
                        evidence += term;
                    }
                    support.push(a);
                }
            }
            if support.is_empty() {
                return Ok(None);
            }
            let threshold = k as f64 * threshold_t((1.0 / delta).ln() / k as f64)?;
            Ok(Some((support, evidence - threshold)))
        }
    }
}

/// Everything produced by one episode: the verdict, the final sufficient
/// statistics and the optional per-round trace.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub verdict: Verdict,
    pub final_state: RunState,
    pub trace: Option<Vec<TraceRecord>>,
}

/// Run one episode of the sequential test on a ground-truth instance.
///
/// Initialization draws each arm once in index order; afterwards the loop is
/// horizon check, stopping check, arm selection, observation. Reaching the
/// horizon cap yields an inconclusive verdict.
pub fn run_episode<R: Rng + ?Sized>(
    instance: &BanditInstance,
    config: &RuleConfig,
    rng: &mut R,
    want_trace: bool,
) -> Result<EpisodeOutcome> {
    config.validate(instance.arm_count())?;
    let k = instance.arm_count();
    let mut state = RunState::new(instance.family, instance.gamma, k);
    let mut trace = if want_trace { Some(Vec::new()) } else { None };
    let record = |state: &RunState, arm: usize, x: f64, trace: &mut Option<Vec<TraceRecord>>| {
        if let Some(t) = trace.as_mut() {
            t.push(TraceRecord {
                round: state.round,
                arm,
                observation: x,
                counts: state.counts.clone(),
                tau_greater_margin: if state.all_initialized() {
                    tau_greater_min_margin(state, config.delta).unwrap_or(f64::NAN)
                } else {
                    f64::NAN
                },
                tau_less_margin: if state.all_initialized() {
                    tau_less_best(state, config.delta, config.stopping)
                        .ok()
                        .flatten()
                        .map_or(f64::NEG_INFINITY, |(_, m)| m)
                } else {
                    f64::NAN
                },
            });
        }
    };
    for arm in 0..k {
        if state.round >= config.horizon_cap {
            break;
        }
        let x = instance.family.sample_observation(instance.means[arm], rng);
        state.observe(arm, x);
        record(&state, arm, x, &mut trace);
    }
    loop {
        if state.round >= config.horizon_cap {
            return Ok(EpisodeOutcome {
                verdict: Verdict {
                    stopped_at: state.round,
                    recommendation: Recommendation::Inconclusive,
                    fired_clause: FiredClause::Horizon,
                    witness_subset: None,
                },
                final_state: state,
                trace,
            });
        }
        if let Some(witness) = check_stop_less(&state, config.delta, config.stopping)? {
            return Ok(EpisodeOutcome {
                verdict: Verdict {
                    stopped_at: state.round,
                    recommendation: Recommendation::Below,
                    fired_clause: FiredClause::TauLess,
                    witness_subset: Some(witness),
                },
                final_state: state,
                trace,
            });
        }
        if check_stop_greater(&state, config.delta)? {
            return Ok(EpisodeOutcome {
                verdict: Verdict {
                    stopped_at: state.round,
                    recommendation: Recommendation::Above,
                    fired_clause: FiredClause::TauGreater,
                    witness_subset: None,
                },
                final_state: state,
                trace,
            });
        }
        let arm = match config.sampling {
            SamplingRule::Lcb => select_lcb(&state, config.delta)?,
            SamplingRule::Thompson => select_thompson(&state, rng)?,
            SamplingRule::Murphy => select_murphy(&state, rng, config.murphy_rejection_cap)?,
            SamplingRule::RoundRobin => select_round_robin(&state),
        };
        let x = instance.family.sample_observation(instance.means[arm], rng);
        state.observe(arm, x);
        record(&state, arm, x, &mut trace);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn gaussian_state(gamma: f64, counts: &[u64], sums: &[f64]) -> RunState {
        let mut state = RunState::new(Family::GaussianUnitVariance, gamma, counts.len());
        state.counts = counts.to_vec();
        state.sums = sums.to_vec();
        state.round = counts.iter().sum();
        state
    }

    #[test]
    fn lcb_tie_breaks_to_lowest_index() {
        let state = gaussian_state(0.0, &[5, 5], &[1.0, 1.0]);
        assert_eq!(select_lcb(&state, 0.05).unwrap(), 0);
    }

    #[test]
    fn lcb_prefers_smaller_mean_at_equal_counts() {
        let state = gaussian_state(0.0, &[5, 5], &[-25.0, 0.0]);
        assert_eq!(select_lcb(&state, 0.05).unwrap(), 0);
    }

    #[test]
    fn lcb_prefers_wider_interval_at_equal_means() {
        let state = gaussian_state(0.0, &[1, 100], &[0.0, 0.0]);
        assert_eq!(select_lcb(&state, 0.05).unwrap(), 0);
    }

    #[test]
    fn thompson_single_arm() {
        let state = gaussian_state(0.0, &[3], &[1.0]);
        assert_eq!(select_thompson(&state, &mut rng(0)).unwrap(), 0);
    }

    #[test]
    fn thompson_separated_posteriors() {
        let state = gaussian_state(0.0, &[1_000_000, 1_000_000], &[-1_000_000.0, 1_000_000.0]);
        let mut r = rng(3);
        let mut first = 0;
        for _ in 0..10_000 {
            if select_thompson(&state, &mut r).unwrap() == 0 {
                first += 1;
            }
        }
        assert!(first >= 9990, "arm 0 frequency {first}/10000");
    }

    #[test]
    fn thompson_deterministic_under_seed() {
        let state = gaussian_state(0.0, &[4, 4], &[0.1, -0.2]);
        assert_eq!(
            select_thompson(&state, &mut rng(9)).unwrap(),
            select_thompson(&state, &mut rng(9)).unwrap()
        );
    }

    #[test]
    fn murphy_accepts_quickly_when_means_are_low() {
        let state = gaussian_state(0.0, &[400, 400], &[-400.0, -800.0]);
        let mut r = rng(5);
        // Every round should accept on the first or second draw; the arm with
        // the lower mean dominates.
        let mut low = 0;
        for _ in 0..1000 {
            if select_murphy(&state, &mut r, 10).unwrap() == 1 {
                low += 1;
            }
        }
        assert!(low >= 990, "low arm picked {low}/1000");
    }

    #[test]
    fn murphy_single_arm() {
        let state = gaussian_state(0.0, &[5], &[-1.0]);
        assert_eq!(select_murphy(&state, &mut rng(1), 100).unwrap(), 0);
    }

    #[test]
    fn murphy_fallback_when_posterior_mass_is_above() {
        // Deep in the above region the rejection cap is exhausted and the
        // fallback samples proportionally to the tiny below-threshold masses.
        let state = gaussian_state(0.0, &[10_000, 10_000], &[5_000.0, 20_000.0]);
        let mut r = rng(7);
        let mut first = 0;
        for _ in 0..200 {
            if select_murphy(&state, &mut r, 5).unwrap() == 0 {
                first += 1;
            }
        }
        // Arm 0 (mean 0.5) has overwhelmingly more posterior mass below 0
        // than arm 1 (mean 2.0).
        assert!(first >= 198, "arm 0 picked {first}/200");
    }

    #[test]
    fn stop_greater_requires_all_arms_above() {
        let state = gaussian_state(0.0, &[1000, 1000], &[-100.0, 1000.0]);
        assert!(!check_stop_greater(&state, 0.05).unwrap());
    }

    #[test]
    fn stop_greater_single_arm_thresholds() {
        // N=100, mean 1, gamma 0: statistic 50 clears ~16.96.
        let state = gaussian_state(0.0, &[100], &[100.0]);
        assert!(check_stop_greater(&state, 0.05).unwrap());
        // N=20: statistic 10 is below ~15.96.
        let state = gaussian_state(0.0, &[20], &[20.0]);
        assert!(!check_stop_greater(&state, 0.05).unwrap());
    }

    #[test]
    fn stop_less_requires_an_arm_below() {
        let state = gaussian_state(0.0, &[50, 50], &[10.0, 20.0]);
        for mode in [StoppingRule::Box, StoppingRule::Aggregate, StoppingRule::Glrt] {
            assert!(check_stop_less(&state, 0.05, mode).unwrap().is_none());
        }
    }

    #[test]
    fn stop_less_box_versus_aggregate_singleton_budgets() {
        // One arm with N=100 and statistic 25, nine arms far above gamma.
        // Box compares 25 to 3 ln(1+ln 100) + T(ln(10/0.05)) ~ 20.12 and
        // fires; Aggregate weights the singleton at 1/100 so its budget is
        // ln(2000) and the comparison is tighter.
        let stat_mean = -(2.0f64 * 25.0 / 100.0).sqrt(); // 100 * d = 25
        let mut counts = vec![100u64; 10];
        let mut sums = vec![500.0; 10];
        counts[0] = 100;
        sums[0] = stat_mean * 100.0;
        let state = gaussian_state(0.0, &counts, &sums);
        let witness = check_stop_less(&state, 0.05, StoppingRule::Box).unwrap();
        assert_eq!(witness, Some(vec![0]));
        let agg_threshold = stopping_threshold(100, (100.0f64 / 0.05).ln()).unwrap();
        let agg_fired = check_stop_less(&state, 0.05, StoppingRule::Aggregate)
            .unwrap()
            .is_some();
        assert_eq!(agg_fired, 25.0 >= agg_threshold);
    }

    #[test]
    fn glrt_budget_validation() {
        let config = RuleConfig::new(SamplingRule::RoundRobin, StoppingRule::Glrt, 0.5);
        assert!(config.validate(20).is_err());
        let config = RuleConfig::new(SamplingRule::RoundRobin, StoppingRule::Glrt, 0.05);
        assert!(config.validate(20).is_ok());
    }

    #[test]
    fn episode_single_low_arm_stops_fast() {
        let instance =
            BanditInstance::new(Family::GaussianUnitVariance, vec![-10.0], 0.0).unwrap();
        let config = RuleConfig::new(SamplingRule::Murphy, StoppingRule::Aggregate, 0.05);
        let mut fast = 0;
        for seed in 0..100 {
            let verdict = run_episode(&instance, &config, &mut rng(seed), false).unwrap().verdict;
            assert_eq!(verdict.recommendation, Recommendation::Below);
            if verdict.stopped_at <= 25 {
                fast += 1;
            }
        }
        assert!(fast >= 99, "only {fast}/100 runs stopped within 25 rounds");
    }

    #[test]
    fn episode_horizon_cap_at_initialization_is_inconclusive() {
        let instance =
            BanditInstance::new(Family::GaussianUnitVariance, vec![-10.0, -10.0], 0.0).unwrap();
        let mut config = RuleConfig::new(SamplingRule::Murphy, StoppingRule::Aggregate, 0.05);
        config.horizon_cap = 2;
        let verdict = run_episode(&instance, &config, &mut rng(0), false).unwrap().verdict;
        assert_eq!(verdict.recommendation, Recommendation::Inconclusive);
        assert_eq!(verdict.fired_clause, FiredClause::Horizon);
        assert_eq!(verdict.stopped_at, 2);
    }

    #[test]
    fn episode_reproducible_under_seed() {
        let instance = BanditInstance::new(
            Family::GaussianUnitVariance,
            vec![-0.5, 0.3, 0.8],
            0.0,
        )
        .unwrap();
        let config = RuleConfig::new(SamplingRule::Murphy, StoppingRule::Aggregate, 0.1);
        let a = run_episode(&instance, &config, &mut rng(99), true).unwrap();
        let b = run_episode(&instance, &config, &mut rng(99), true).unwrap();
        // The first trace rows hold NaN margins, so compare debug renderings.
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn episode_verdict_matches_truth_on_both_sides() {
        let below = BanditInstance::new(
            Family::GaussianUnitVariance,
            vec![-1.0, 0.5, 1.0],
            0.0,
        )
        .unwrap();
        let above =
            BanditInstance::new(Family::GaussianUnitVariance, vec![0.6, 1.2], 0.0).unwrap();
        let config = RuleConfig::new(SamplingRule::Murphy, StoppingRule::Aggregate, 0.05);
        for (instance, expect) in [(below, Recommendation::Below), (above, Recommendation::Above)] {
            for seed in 0..20 {
                let verdict = run_episode(&instance, &config, &mut rng(1000 + seed), false)
                    .unwrap()
                    .verdict;
                assert_eq!(verdict.recommendation, expect, "seed {seed}");
            }
        }
    }

    #[test]
    fn murphy_accepted_vectors_satisfy_the_conditioning() {
        // Direct check of the acceptance predicate: redo the rejection loop
        // by hand and confirm every accepted joint draw has min < gamma.
        let state = gaussian_state(0.0, &[10, 10], &[-2.0, 8.0]);
        let mut r = rng(21);
        let posteriors: Vec<ArmPosterior> = (0..2).map(|a| state.posterior(a)).collect();
        let mut accepted = 0;
        while accepted < 200 {
            let draws: Vec<f64> = posteriors
                .iter()
                .map(|p| p.sample(&mut r).unwrap())
                .collect();
            let min = draws.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < state.gamma {
                accepted += 1;
                assert!(min < 0.0);
            }
        }
    }
}
