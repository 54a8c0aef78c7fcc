use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::inference::{
    arm_estimate, ks_test_std_normal, studentized, wald_ci, ArmEstimate, KsOutcome, WaldInterval,
};
use crate::policies::{PolicyMode, PolicyState};
use crate::stability_lab::{lyapunov_v, stability_ratios, stability_target};
use crate::stats_core::RngStream;

use super::config::ExperimentConfig;

/// Reward lanes live at substream `REWARD_SUBSTREAM_BASE + arm`; policy
/// noise lanes at substream `arm`.
pub const REWARD_SUBSTREAM_BASE: u64 = 1 << 32;

/// Environment variable capping the worker count; 0 or unset means automatic.
pub const THREADS_ENV: &str = "OTS_LAB_THREADS";

/// Addresses of every random stream a replication consumed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedLineage {
    pub master_seed: u64,
    /// Stream id; equal to the replication id.
    pub stream_id: u64,
    pub policy_substreams: Vec<u64>,
    pub reward_substreams: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub t: u64,
    pub counts: Vec<u64>,
    pub estimates: Vec<ArmEstimate<f64>>,
    pub intervals: Vec<WaldInterval<f64>>,
    /// Cumulative regret `Σ_s (μ* − μ_{A_s})` over the first `t` rounds.
    pub regret: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub rep: u64,
    pub lineage: SeedLineage,
    pub checkpoints: Vec<CheckpointRecord>,
}

/// Simulates one trajectory. Deterministic in `(config.seed, rep)`.
pub fn run_replication(config: &ExperimentConfig, rep: u64) -> Result<TrajectoryRecord> {
    let instance = config.instance()?;
    let arms = instance.arms();
    let mut policy = PolicyState::<f64>::init(
        config.policy.mode,
        arms,
        config.horizon,
        &config.policy.sigma,
        &config.policy.beta,
    )?;
    let checkpoints = config.resolved_checkpoints();

    let policy_substreams: Vec<u64> = (0..arms as u64).collect();
    let reward_substreams: Vec<u64> = (0..arms as u64)
        .map(|a| REWARD_SUBSTREAM_BASE + a)
        .collect();
    let mut noise: Vec<RngStream> = policy_substreams
        .iter()
        .map(|&s| RngStream::new(config.seed, rep, s))
        .collect();
    let mut reward_lanes: Vec<RngStream> = reward_substreams
        .iter()
        .map(|&s| RngStream::new(config.seed, rep, s))
        .collect();
    let gaps: Vec<f64> = (0..arms).map(|a| instance.gap(a).unwrap_or(0.0)).collect();

    let mut regret = 0.0;
    let mut records = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().copied().peekable();
    for t in 1..=config.horizon {
        let arm = policy.select_arm(&mut noise);
        let reward = instance.pull(arm, &mut reward_lanes[arm])?;
        policy.update(arm, reward)?;
        regret += gaps[arm];
        if next.peek() == Some(&t) {
            next.next();
            records.push(snapshot(&policy, config.alpha, regret)?);
        }
    }

    Ok(TrajectoryRecord {
        rep,
        lineage: SeedLineage {
            master_seed: config.seed,
            stream_id: rep,
            policy_substreams,
            reward_substreams,
        },
        checkpoints: records,
    })
}

fn snapshot(policy: &PolicyState<f64>, alpha: f64, regret: f64) -> Result<CheckpointRecord> {
    let estimates = (0..policy.arms())
        .map(|a| arm_estimate(policy.counts()[a], policy.sums()[a], policy.sumsq()[a]))
        .collect::<Result<Vec<_>>>()?;
    let intervals = estimates
        .iter()
        .map(|e| wald_ci(e, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckpointRecord {
        t: policy.t(),
        counts: policy.counts().to_vec(),
        estimates,
        intervals,
        regret,
    })
}

/// Mean and order statistics of a sample; quantiles interpolate linearly
/// between order statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub mean: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let at = |p: f64| {
            let h = p * (sorted.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        };
        Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            q05: at(0.05),
            q25: at(0.25),
            median: at(0.5),
            q75: at(0.75),
            q95: at(0.95),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub arm: usize,
    pub true_mean: f64,
    pub optimal: bool,
    pub count_mean: f64,
    /// Stability target at this checkpoint, with the tuning scale frozen at T.
    pub target: Option<f64>,
    /// Distribution of `N_a / target`; absent for vanilla sampling.
    pub ratio: Option<Quantiles>,
    pub coverage: f64,
    /// KS test of the studentized statistics against the standard normal.
    pub studentized_ks: KsOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretSummary {
    pub mean: f64,
    /// Standard error of the mean; absent for a single replication.
    pub std_error: Option<f64>,
    pub median: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub t: u64,
    pub arms: Vec<ArmSummary>,
    pub regret: RegretSummary,
    /// Mean squared deviation of optimal-arm proportions from uniform; only
    /// reported with two or more optimal arms.
    pub lyapunov_mean: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config_hash: String,
    pub version: String,
    pub master_seed: u64,
    pub replications: u64,
    pub horizon: u64,
    pub mode: PolicyMode,
    pub sigma: f64,
    pub beta: f64,
    pub alpha: f64,
    pub reward_substream_base: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub metadata: ReportMetadata,
    pub checkpoints: Vec<CheckpointSummary>,
}

impl AggregateReport {
    pub fn final_checkpoint(&self) -> &CheckpointSummary {
        self.checkpoints
            .last()
            .expect("validated configs have checkpoints")
    }

    pub fn checkpoint(&self, t: u64) -> Option<&CheckpointSummary> {
        self.checkpoints.iter().find(|c| c.t == t)
    }
}

/// Records plus their aggregate.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRun {
    pub records: Vec<TrajectoryRecord>,
    pub report: AggregateReport,
}

/// Worker count from [`THREADS_ENV`]; 0 means automatic.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| {
            LabError::InvalidConfig(format!(
                "{THREADS_ENV} = {v:?} is not a non-negative integer"
            ))
        }),
    }
}

/// Runs `job` on a dedicated pool of `threads` workers (0 = automatic).
pub fn with_thread_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs all replications with the worker count from [`THREADS_ENV`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    run_experiment_with_threads(config, threads_from_env()?)
}

/// Runs all replications on `threads` workers and aggregates them in
/// replication order, so the result does not depend on scheduling.
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentRun> {
    config.validate()?;
    let records = with_thread_pool(threads, || {
        (0..config.replications)
            .into_par_iter()
            .map(|rep| run_replication(config, rep))
            .collect::<Result<Vec<_>>>()
    })??;
    let report = aggregate(config, &records)?;
    Ok(ExperimentRun { records, report })
}

/// Summarizes records, which must come from `config`, in the order given.
pub fn aggregate(
    config: &ExperimentConfig,
    records: &[TrajectoryRecord],
) -> Result<AggregateReport> {
    if records.is_empty() {
        return Err(LabError::domain("aggregate", "no records"));
    }
    let instance = config.instance()?;
    let arms = instance.arms();
    let checkpoints = config.resolved_checkpoints();
    let optimal = instance.optimal_set().to_vec();
    let r = records.len() as f64;

    let mut summaries = Vec::with_capacity(checkpoints.len());
    for (c, &t) in checkpoints.iter().enumerate() {
        let cells: Vec<&CheckpointRecord> = records
            .iter()
            .map(|rec| {
                rec.checkpoints
                    .get(c)
                    .filter(|cp| cp.t == t)
                    .ok_or_else(|| {
                        LabError::domain(
                            "aggregate",
                            format!("record {} lacks checkpoint {t}", rec.rep),
                        )
                    })
            })
            .collect::<Result<_>>()?;

        let target = match config.target_scale() {
            Some(scale) if t >= 3 => {
                Some(stability_target(&instance, config.policy.mode, t, scale)?)
            }
            _ => None,
        };
        let ratios: Option<Vec<Vec<f64>>> = target
            .as_ref()
            .map(|tg| {
                cells
                    .iter()
                    .map(|cp| stability_ratios(&cp.counts, tg))
                    .collect()
            })
            .transpose()?;

        let mut arm_summaries = Vec::with_capacity(arms);
        for a in 0..arms {
            let mu = instance.means()[a];
            let covered = cells
                .iter()
                .filter(|cp| cp.intervals[a].contains(mu))
                .count();
            let stats: Vec<f64> = cells
                .iter()
                .map(|cp| studentized(&cp.estimates[a], mu))
                .collect();
            arm_summaries.push(ArmSummary {
                arm: a,
                true_mean: mu,
                optimal: instance.is_optimal(a),
                count_mean: cells.iter().map(|cp| cp.counts[a] as f64).sum::<f64>() / r,
                target: target.as_ref().map(|tg| tg.per_arm[a]),
                ratio: ratios
                    .as_ref()
                    .map(|rs| Quantiles::of(&rs.iter().map(|row| row[a]).collect::<Vec<_>>())),
                coverage: covered as f64 / r,
                studentized_ks: ks_test_std_normal(&stats)?,
            });
        }

        let regrets: Vec<f64> = cells.iter().map(|cp| cp.regret).collect();
        let q = Quantiles::of(&regrets);
        let std_error = (records.len() > 1).then(|| {
            let ss: f64 = regrets.iter().map(|x| (x - q.mean).powi(2)).sum();
            (ss / (r - 1.0) / r).sqrt()
        });

        let lyapunov_mean = if optimal.len() >= 2 {
            let mut total = 0.0;
            for cp in &cells {
                let counts: Vec<u64> = optimal.iter().map(|&a| cp.counts[a]).collect();
                total += lyapunov_v::<f64>(&counts)?;
            }
            Some(total / r)
        } else {
            None
        };

        summaries.push(CheckpointSummary {
            t,
            arms: arm_summaries,
            regret: RegretSummary {
                mean: q.mean,
                std_error,
                median: q.median,
            },
            lyapunov_mean,
        });
    }

    Ok(AggregateReport {
        metadata: ReportMetadata {
            config_hash: config.config_hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.seed,
            replications: records.len() as u64,
            horizon: config.horizon,
            mode: config.policy.mode,
            sigma: config.sigma_value(),
            beta: config.beta_value(),
            alpha: config.alpha,
            reward_substream_base: REWARD_SUBSTREAM_BASE,
        },
        checkpoints: summaries,
    })
}
