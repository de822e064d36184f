//! Tabular Q-learning on a bounded-dynamic flag-collection gridworld, with
//! per-episode differential entropy of the Q-table used to pick early
//! stopping points.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod experiment;
pub mod gridworld;
pub mod io;
pub mod qlearn;
pub mod representation;
pub mod setup;
pub mod stats;

pub use entropy::{
    channel_entropies, histogram_entropy, stopping_points, EntropySeries, HistogramSpec,
    StoppingPoints, TestingTime, ValueSource,
};
pub use error::{Error, Result};
pub use experiment::{
    full_workflow, replay_many, replay_to, run_seed, run_tests, train_run, Aggregate,
    ExperimentConfig, Metric, RunRecord, RunReport, TemperatureClock, TestStats, WorkflowReport,
};
pub use gridworld::{
    episode_return, sample_flag_layout, Action, FlagLayout, Position, WorldConfig, WorldState,
};
pub use qlearn::{boltzmann_select, q_update, Dims, LearningParams, QTable, TemperatureSchedule};
pub use representation::{Phase, RepresentationKind, StateIndex};
pub use setup::SetupName;
pub use stats::{summarize, welch_t_test, SampleSummary, TTestResult};
