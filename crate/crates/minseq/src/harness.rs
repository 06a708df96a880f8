//! Experiment configuration, parallel Monte Carlo execution and file output.
//!
//! Replications are seeded from `(master_seed, rule index, delta index,
//! replication index)`, so parallel and serial execution of the same config
//! produce identical summaries.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deviation::{ucb_min, CiDirection, SubsetPrior};
use crate::expfam::Family;
use crate::oracle::{
    boosted_lower_bound, generic_lower_bound, min_draws_bound, oracle_solution, BanditInstance,
    OracleSolution, Side,
};
use crate::rules::{
    run_episode, FiredClause, Recommendation, RuleConfig, RunState, SamplingRule, StoppingRule,
    DEFAULT_HORIZON_CAP, DEFAULT_MURPHY_REJECTION_CAP,
};
use crate::{Error, Result};

/// One sampling/stopping pair of the rule grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulePair {
    pub sampling: SamplingRule,
    pub stopping: StoppingRule,
}

/// Arm means given explicitly or through a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinspaceSpec {
    pub lo: f64,
    pub hi: f64,
    pub k: usize,
}

/// Experiment configuration, normally parsed from a flat TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linspace: Option<LinspaceSpec>,
    pub gamma: f64,
    pub rules: Vec<RulePair>,
    pub deltas: Vec<f64>,
    pub replications: u64,
    pub master_seed: u64,
    #[serde(default = "default_horizon_cap")]
    pub horizon_cap: u64,
    #[serde(default = "default_murphy_rejection_cap")]
    pub murphy_rejection_cap: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn default_horizon_cap() -> u64 {
    DEFAULT_HORIZON_CAP
}

fn default_murphy_rejection_cap() -> u64 {
    DEFAULT_MURPHY_REJECTION_CAP
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("failed to parse config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        for &d in &self.deltas {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::Config(format!("delta {d} outside (0,1)")));
            }
        }
        let instance = self.instance()?;
        instance.side().map_err(|_| {
            Error::Config("instance is degenerate: the minimum mean equals the threshold".into())
        })?;
        for pair in &self.rules {
            for &delta in &self.deltas {
                self.rule_config(*pair, delta).validate(instance.arm_count())?;
            }
        }
        Ok(())
    }

    /// Materialize the instance from the explicit means or the generator.
    pub fn instance(&self) -> Result<BanditInstance> {
        let means = match (&self.means, &self.linspace) {
            (Some(m), None) => m.clone(),
            (None, Some(spec)) => {
                if spec.k < 1 {
                    return Err(Error::Config("linspace needs k >= 1".into()));
                }
                if spec.k == 1 {
                    vec![spec.lo]
                } else {
                    (0..spec.k)
                        .map(|i| {
                            spec.lo + (spec.hi - spec.lo) * i as f64 / (spec.k - 1) as f64
                        })
                        .collect()
                }
            }
            _ => {
                return Err(Error::Config(
                    "specify exactly one of `means` and `linspace`".into(),
                ))
            }
        };
        BanditInstance::new(self.family, means, self.gamma)
    }

    fn rule_config(&self, pair: RulePair, delta: f64) -> RuleConfig {
        RuleConfig {
            sampling: pair.sampling,
            stopping: pair.stopping,
            delta,
            horizon_cap: self.horizon_cap,
            murphy_rejection_cap: self.murphy_rejection_cap,
        }
    }
}

/// Aggregated metrics for one (rule, delta) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub sampling: SamplingRule,
    pub stopping: StoppingRule,
    pub delta: f64,
    pub mean_tau: f64,
    pub se_tau: f64,
    /// Error fraction among conclusive episodes.
    pub error_rate: f64,
    /// Fraction of episodes that hit the horizon cap.
    pub inconclusive_rate: f64,
    /// Mean per-arm sampling proportions `N_a(tau)/tau`.
    pub proportions: Vec<f64>,
    /// Mean witness-subset size among episodes that fired `tau_<`.
    pub mean_witness_size: f64,
    pub reps: u64,
    pub seed: u64,
}

/// Full experiment output: the config echoed for provenance plus one record
/// per (rule, delta) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub records: Vec<SummaryRecord>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-episode seed derived from the master seed and the cell
/// coordinates; independent of the execution schedule.
pub fn episode_seed(master_seed: u64, rule_idx: usize, delta_idx: usize, rep: u64) -> u64 {
    let mut s = splitmix(master_seed);
    s = splitmix(s ^ (rule_idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    s = splitmix(s ^ (delta_idx as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f));
    splitmix(s ^ rep)
}

/// Run the full rule-by-delta grid of Monte Carlo replications.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    config.validate()?;
    let instance = config.instance()?;
    let truth = instance.side()?;
    let k = instance.arm_count();
    let mut records = Vec::new();
    for (rule_idx, pair) in config.rules.iter().enumerate() {
        for (delta_idx, &delta) in config.deltas.iter().enumerate() {
            let rule_config = config.rule_config(*pair, delta);
            let outcomes: Vec<(u64, Recommendation, FiredClause, usize, Vec<f64>)> = (0
                ..config.replications)
                .into_par_iter()
                .map(|rep| {
                    let seed = episode_seed(config.master_seed, rule_idx, delta_idx, rep);
                    let mut rng = ChaCha12Rng::seed_from_u64(seed);
                    let outcome = run_episode(&instance, &rule_config, &mut rng, false)?;
                    let tau = outcome.verdict.stopped_at;
                    let props = outcome
                        .final_state
                        .counts
                        .iter()
                        .map(|&n| n as f64 / tau as f64)
                        .collect();
                    Ok((
                        tau,
                        outcome.verdict.recommendation,
                        outcome.verdict.fired_clause,
                        outcome.verdict.witness_subset.map_or(0, |w| w.len()),
                        props,
                    ))
                })
                .collect::<Result<_>>()?;
            let reps = config.replications as f64;
            let mean_tau = outcomes.iter().map(|o| o.0 as f64).sum::<f64>() / reps;
            let var_tau = if config.replications > 1 {
                outcomes
                    .iter()
                    .map(|o| (o.0 as f64 - mean_tau).powi(2))
                    .sum::<f64>()
                    / (reps - 1.0)
            } else {
                0.0
            };
            let mut errors = 0u64;
            let mut conclusive = 0u64;
            let mut inconclusive = 0u64;
            let mut witness_total = 0usize;
            let mut witness_count = 0u64;
            let mut proportions = vec![0.0; k];
            for (_, recommendation, fired, witness_len, props) in &outcomes {
                match recommendation {
                    Recommendation::Inconclusive => inconclusive += 1,
                    r => {
                        conclusive += 1;
                        if !r.matches(truth) {
                            errors += 1;
                        }
                    }
                }
                if *fired == FiredClause::TauLess {
                    witness_total += witness_len;
                    witness_count += 1;
                }
                for (acc, p) in proportions.iter_mut().zip(props) {
                    *acc += p / reps;
                }
            }
            records.push(SummaryRecord {
                sampling: pair.sampling,
                stopping: pair.stopping,
                delta,
                mean_tau,
                se_tau: (var_tau / reps).sqrt(),
                error_rate: if conclusive > 0 {
                    errors as f64 / conclusive as f64
                } else {
                    0.0
                },
                inconclusive_rate: inconclusive as f64 / reps,
                proportions,
                mean_witness_size: if witness_count > 0 {
                    witness_total as f64 / witness_count as f64
                } else {
                    0.0
                },
                reps: config.replications,
                seed: config.master_seed,
            });
        }
    }
    Ok(ExperimentSummary {
        config: config.clone(),
        records,
    })
}

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Render the summary as a CSV body with one row per (rule, delta) cell.
pub fn summary_to_csv(summary: &ExperimentSummary) -> String {
    let k = summary
        .records
        .first()
        .map_or(0, |r| r.proportions.len());
    let mut out = String::new();
    out.push_str("sampling,stopping,delta,mean_tau,se_tau,error_rate,inconclusive_rate");
    for a in 1..=k {
        out.push_str(&format!(",prop_{a}"));
    }
    out.push_str(",mean_witness_size,reps,seed\n");
    for r in &summary.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            r.sampling.label(),
            r.stopping.label(),
            r.delta,
            r.mean_tau,
            r.se_tau,
            r.error_rate,
            r.inconclusive_rate
        ));
        for p in &r.proportions {
            out.push_str(&format!(",{p}"));
        }
        out.push_str(&format!(",{},{},{}\n", r.mean_witness_size, r.reps, r.seed));
    }
    out
}

/// Write the summary to `path` in the requested format.
pub fn emit_outputs(summary: &ExperimentSummary, format: OutputFormat, path: &Path) -> Result<()> {
    let body = match format {
        OutputFormat::Csv => summary_to_csv(summary),
        OutputFormat::Json => serde_json::to_string_pretty(summary)
            .map_err(|e| Error::Config(format!("failed to serialize summary: {e}")))?,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    let mut file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(body.as_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Oracle quantities and lower bounds for one instance at one risk level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub side: Side,
    pub characteristic_time: f64,
    pub oracle_weights: Vec<f64>,
    pub delta: f64,
    pub generic_lower_bound: f64,
    /// Only defined when the minimum is below the threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boosted_lower_bound: Option<f64>,
    pub min_draws_bound: f64,
}

/// Characteristic time, oracle weights and all lower bounds in one record.
pub fn summarize_bounds(instance: &BanditInstance, delta: f64) -> Result<BoundsReport> {
    let OracleSolution {
        characteristic_time,
        weights,
        side,
    } = oracle_solution(instance)?;
    let boosted = match side {
        Side::Below => Some(boosted_lower_bound(instance, delta)?),
        Side::Above => None,
    };
    Ok(BoundsReport {
        side,
        characteristic_time,
        oracle_weights: weights,
        delta,
        generic_lower_bound: generic_lower_bound(instance, delta)?,
        boosted_lower_bound: boosted,
        min_draws_bound: min_draws_bound(instance, delta)?,
    })
}

/// Per-round confidence-bound values under uniform (round-robin) sampling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiTraceRow {
    pub round: u64,
    pub u_min_box: f64,
    pub u_min_agg: f64,
    pub per_arm_upper: Vec<f64>,
}

/// Sample the instance round-robin for `rounds` observations and report the
/// Box and Aggregate upper confidence bounds on the minimum after each round.
pub fn ci_trace(
    instance: &BanditInstance,
    delta: f64,
    rounds: u64,
    seed: u64,
) -> Result<Vec<CiTraceRow>> {
    let k = instance.arm_count();
    if rounds < k as u64 {
        return Err(Error::Config(format!(
            "ci-trace needs at least {k} rounds to observe every arm"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut state = RunState::new(instance.family, instance.gamma, k);
    let singles = SubsetPrior::Singletons { arm_count: k };
    let agg = SubsetPrior::SizeUniform { arm_count: k };
    let box_budget = (k as f64 / delta).ln();
    let mut rows = Vec::with_capacity(rounds as usize);
    for t in 0..rounds {
        let arm = (t % k as u64) as usize;
        let x = instance
            .family
            .sample_observation(instance.means[arm], &mut rng);
        state.observe(arm, x);
        if state.counts.contains(&0) {
            continue;
        }
        let per_arm_upper: Vec<f64> = (0..k)
            .map(|a| crate::deviation::box_upper_bound(&state, a, box_budget))
            .collect::<Result<_>>()?;
        rows.push(CiTraceRow {
            round: state.round,
            u_min_box: ucb_min(&state, &singles, delta, CiDirection::MinUpper)?,
            u_min_agg: ucb_min(&state, &agg, delta, CiDirection::MinUpper)?,
            per_arm_upper,
        });
    }
    Ok(rows)
}

/// Render a ci-trace as CSV.
pub fn ci_trace_to_csv(rows: &[CiTraceRow]) -> String {
    let k = rows.first().map_or(0, |r| r.per_arm_upper.len());
    let mut out = String::from("round,u_min_box,u_min_agg");
    for a in 1..=k {
        out.push_str(&format!(",u_{a}"));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{}", r.round, r.u_min_box, r.u_min_agg));
        for u in &r.per_arm_upper {
            out.push_str(&format!(",{u}"));
        }
        out.push('\n');
    }
    out
}
