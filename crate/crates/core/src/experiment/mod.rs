//! Config-driven replication runner, aggregation, acceptance bands and file
//! outputs.

pub mod bands;
mod config;
mod engine;
mod report;

pub use bands::{
    coverage_bands, lemma_bands, regret_bands, regret_envelope, stability_bands, BandOutcome,
};
pub use config::{ExperimentConfig, OutputConfig, PolicyConfig};
pub use engine::{
    aggregate, run_experiment, run_experiment_with_threads, run_replication, threads_from_env,
    with_thread_pool, AggregateReport, ArmSummary, CheckpointRecord, CheckpointSummary,
    ExperimentRun, Quantiles, RegretSummary, ReportMetadata, SeedLineage, TrajectoryRecord,
    REWARD_SUBSTREAM_BASE, THREADS_ENV,
};
pub use report::{
    read_aggregate, read_trajectories, trajectory_rows, write_atomic, write_lemmas, write_report,
    ReportPaths, TrajectoryRow, AGGREGATE_FILE, LEMMAS_FILE, TRAJECTORIES_FILE,
};
