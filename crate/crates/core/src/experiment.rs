//! Training runs, deterministic replay, and the generalization test phase.
//!
//! A run is fully determined by its config and seed. Training draws from
//! ChaCha stream 0 of the run seed; the test phase for a table extracted at
//! episode `t` draws from stream `1 + t`, so testing never perturbs replay
//! and coinciding testing times give identical statistics.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{
    channel_entropies, stopping_points, EntropySeries, HistogramSpec, StoppingPoints, TestingTime,
    ValueSource,
};
use crate::error::{config, usage, Result};
use crate::gridworld::{episode_return, sample_flag_layout, FlagLayout, WorldConfig, WorldState};
use crate::qlearn::{
    boltzmann_select, q_update, Dims, LearningParams, QTable, TemperatureSchedule,
};
use crate::representation::{Phase, RepresentationKind, StateIndex};
use crate::stats::{summarize, SampleSummary};

/// What one temperature-schedule tick counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureClock {
    #[default]
    Actions,
    Episodes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub world: WorldConfig,
    pub representation: RepresentationKind,
    pub n_train_flags: usize,
    pub params: LearningParams,
    pub schedule: TemperatureSchedule,
    pub temperature_clock: TemperatureClock,
    /// Bootstrap with zero on a timeout's final update as well as on the goal.
    pub timeout_terminal_bootstrap: bool,
    pub episodes: usize,
    pub histogram: HistogramSpec,
    pub value_source: ValueSource,
    pub include_channel_zero: bool,
    pub n_tests: usize,
    pub test_temperature: f64,
    pub n_runs: usize,
    pub master_seed: u64,
    /// Keep an in-run copy of the table every `snapshot_stride` episodes
    /// (0 disables the cache).
    pub snapshot_stride: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            world: WorldConfig::default(),
            representation: RepresentationKind::Global { n_train_flags: 8 },
            n_train_flags: 8,
            params: LearningParams::default(),
            schedule: TemperatureSchedule::default(),
            temperature_clock: TemperatureClock::Actions,
            timeout_terminal_bootstrap: false,
            episodes: 10_000,
            histogram: HistogramSpec::default(),
            value_source: ValueSource::StateAction,
            include_channel_zero: true,
            n_tests: 1000,
            test_temperature: 0.1,
            n_runs: 30,
            master_seed: 0,
            snapshot_stride: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.params.validate()?;
        self.schedule.validate()?;
        let zone = self.world.flag_zone();
        if zone.contains(&self.world.start) {
            return config("start must lie outside the flag zone");
        }
        if self.n_train_flags < 1 || self.n_train_flags > zone.len() {
            return config(format!(
                "n_train_flags must be in 1..={}, got {}",
                zone.len(),
                self.n_train_flags
            ));
        }
        if let RepresentationKind::Global { n_train_flags } = self.representation {
            if n_train_flags != self.n_train_flags {
                return config("global representation flag count must equal n_train_flags");
            }
        }
        if self.episodes < 1 {
            return config("episodes must be at least 1");
        }
        if self.n_tests < 1 {
            return config("n_tests must be at least 1");
        }
        if self.n_runs < 1 {
            return config("n_runs must be at least 1");
        }
        if !(self.test_temperature > 0.0) {
            return config("test_temperature must be positive");
        }
        if self.histogram.n_bins < 1 {
            return config("histogram needs at least one bin");
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        Dims::new(
            self.world.width,
            self.world.height,
            self.representation.channel_count(),
            crate::gridworld::Action::COUNT,
        )
    }
}

/// Seed of run `run_index`: `master_seed XOR run_index`.
pub fn run_seed(master_seed: u64, run_index: usize) -> u64 {
    master_seed ^ run_index as u64
}

fn training_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream used to test the table extracted after `episode`.
pub fn test_rng(seed: u64, episode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + episode as u64);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub steps: u32,
    pub flags_collected: u32,
    pub reached_goal: bool,
    pub reward: f64,
    /// Temperature at the end of the episode.
    pub temperature: f64,
}

/// Sequential Q-learning trainer. Episode `t + 1` depends on the table,
/// schedule and RNG state left by episode `t`.
pub struct Trainer<'a> {
    config: &'a ExperimentConfig,
    table: QTable,
    schedule: TemperatureSchedule,
    rng: ChaCha8Rng,
    episode: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(config: &'a ExperimentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Trainer {
            config,
            table: QTable::new(config.dims(), config.params.q_init)?,
            schedule: config.schedule.restart(),
            rng: training_rng(seed),
            episode: 0,
        })
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn temperature(&self) -> f64 {
        self.schedule.current
    }

    /// Episodes completed so far.
    pub fn episodes_done(&self) -> usize {
        self.episode
    }

    pub fn run_episode(&mut self) -> Result<EpisodeTrace> {
        let cfg = self.config;
        let kind = cfg.representation;
        let layout = sample_flag_layout(&cfg.world, cfg.n_train_flags, &mut self.rng)?;
        let mut state = WorldState::reset(&cfg.world, &layout);
        let mut s = kind.encode(state.agent, state.remaining.len(), false, Phase::Training)?;

        let mut reward = 0.0;
        let mut reached_goal = false;
        while !state.done {
            let action =
                boltzmann_select(self.table.row(s)?, self.schedule.current, &mut self.rng)?;
            let t = state.advance(action, &cfg.world)?;
            let s_next = kind.encode(
                state.agent,
                state.remaining.len(),
                t.picked_flag,
                Phase::Training,
            )?;
            let terminal = t.reached_goal || (t.timed_out && cfg.timeout_terminal_bootstrap);
            q_update(
                &mut self.table,
                s,
                action,
                t.reward,
                s_next,
                terminal,
                &cfg.params,
            )?;
            if cfg.temperature_clock == TemperatureClock::Actions {
                self.schedule.advance(1);
            }
            reward += t.reward;
            reached_goal = t.reached_goal;
            s = s_next;
        }
        if cfg.temperature_clock == TemperatureClock::Episodes {
            self.schedule.advance(1);
        }
        self.episode += 1;

        Ok(EpisodeTrace {
            steps: state.steps,
            flags_collected: state.flags_collected,
            reached_goal,
            reward,
            temperature: self.schedule.current,
        })
    }

    pub fn into_table(self) -> QTable {
        self.table
    }
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub seed: u64,
    pub series: EntropySeries,
    pub points: StoppingPoints,
    pub trace: Vec<EpisodeTrace>,
    pub final_table: QTable,
    /// In-run snapshots keyed by episode index (see `snapshot_stride`).
    pub snapshots: BTreeMap<usize, QTable>,
}

/// Trains one run, recording the entropy series after every episode.
pub fn train_run(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    let mut trainer = Trainer::new(config, seed)?;
    let mut series = EntropySeries::with_capacity(config.dims().channels, config.episodes);
    let mut trace = Vec::with_capacity(config.episodes);
    let mut snapshots = BTreeMap::new();

    for episode in 0..config.episodes {
        trace.push(trainer.run_episode()?);
        series.push(&channel_entropies(
            trainer.table(),
            &config.histogram,
            config.value_source,
        )?)?;
        if config.snapshot_stride > 0 && episode % config.snapshot_stride == 0 {
            snapshots.insert(episode, trainer.table().clone());
        }
    }
    let points = stopping_points(&series, config.include_channel_zero)?;
    Ok(RunRecord {
        seed,
        series,
        points,
        trace,
        final_table: trainer.into_table(),
        snapshots,
    })
}

/// Re-trains with the same seed and returns the table as it stood right
/// after `episode` (0-based).
pub fn replay_to(config: &ExperimentConfig, seed: u64, episode: usize) -> Result<QTable> {
    Ok(replay_many(config, seed, &[episode])?
        .remove(&episode)
        .unwrap())
}

/// Single replay pass collecting the tables after each requested episode.
pub fn replay_many(
    config: &ExperimentConfig,
    seed: u64,
    episodes: &[usize],
) -> Result<BTreeMap<usize, QTable>> {
    if let Some(&bad) = episodes.iter().find(|&&e| e >= config.episodes) {
        return usage(format!(
            "episode {bad} out of range for a {}-episode run",
            config.episodes
        ));
    }
    let mut wanted: Vec<usize> = episodes.to_vec();
    wanted.sort_unstable();
    wanted.dedup();

    let mut trainer = Trainer::new(config, seed)?;
    let mut out = BTreeMap::new();
    for &target in &wanted {
        while trainer.episodes_done() <= target {
            trainer.run_episode()?;
        }
        out.insert(target, trainer.table().clone());
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub steps: u32,
    pub flags_collected: u32,
    pub reached_goal: bool,
    pub success: bool,
    pub discounted_reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestStats {
    pub outcomes: Vec<TestOutcome>,
    pub successes: usize,
    pub discounted_reward: SampleSummary,
    pub flags_collected: SampleSummary,
    pub success_rate: f64,
    /// `None` when no test succeeded.
    pub steps_successful: Option<SampleSummary>,
}

impl TestStats {
    pub fn from_outcomes(outcomes: Vec<TestOutcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return usage("no test outcomes");
        }
        let rewards: Vec<f64> = outcomes.iter().map(|o| o.discounted_reward).collect();
        let flags: Vec<f64> = outcomes.iter().map(|o| o.flags_collected as f64).collect();
        let steps: Vec<f64> = outcomes
            .iter()
            .filter(|o| o.success)
            .map(|o| o.steps as f64)
            .collect();
        let successes = steps.len();
        Ok(TestStats {
            successes,
            discounted_reward: summarize(&rewards)?,
            flags_collected: summarize(&flags)?,
            success_rate: successes as f64 / outcomes.len() as f64,
            steps_successful: if steps.is_empty() {
                None
            } else {
                Some(summarize(&steps)?)
            },
            outcomes,
        })
    }
}

/// Runs one test episode: every flag-zone cell holds a flag, actions follow
/// Boltzmann selection at the test temperature, and the table is read-only.
pub fn run_test_episode<R: rand::Rng + ?Sized>(
    table: &QTable,
    config: &ExperimentConfig,
    layout: &FlagLayout,
    rng: &mut R,
) -> Result<TestOutcome> {
    let kind = config.representation;
    let mut state = WorldState::reset(&config.world, layout);
    let mut s: StateIndex =
        kind.encode(state.agent, state.remaining.len(), false, Phase::Testing)?;
    let mut reached_goal = false;
    while !state.done {
        let action = boltzmann_select(table.row(s)?, config.test_temperature, rng)?;
        let t = state.advance(action, &config.world)?;
        reached_goal = t.reached_goal;
        s = kind.encode(
            state.agent,
            state.remaining.len(),
            t.picked_flag,
            Phase::Testing,
        )?;
    }
    let success = reached_goal && state.remaining.is_empty();
    Ok(TestOutcome {
        steps: state.steps,
        flags_collected: state.flags_collected,
        reached_goal,
        success,
        discounted_reward: episode_return(
            state.steps,
            state.flags_collected,
            reached_goal,
            config.params.gamma,
        ),
    })
}

pub fn run_tests<R: rand::Rng + ?Sized>(
    table: &QTable,
    config: &ExperimentConfig,
    rng: &mut R,
) -> Result<TestStats> {
    if table.dims() != config.dims() {
        return usage(format!(
            "table dims {:?} do not match the representation's {:?}",
            table.dims(),
            config.dims()
        ));
    }
    let layout = FlagLayout::full(&config.world);
    let outcomes = (0..config.n_tests)
        .map(|_| run_test_episode(table, config, &layout, rng))
        .collect::<Result<Vec<_>>>()?;
    TestStats::from_outcomes(outcomes)
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub run_index: usize,
    pub record: RunRecord,
    pub tables: BTreeMap<TestingTime, QTable>,
    pub tests: BTreeMap<TestingTime, TestStats>,
}

/// Extracts the tables at the four testing times of a finished run and tests
/// each of them.
pub fn evaluate_run(
    config: &ExperimentConfig,
    run_index: usize,
    record: RunRecord,
) -> Result<RunReport> {
    let wanted: Vec<usize> = TestingTime::ALL
        .iter()
        .map(|&t| record.points.at(t))
        .collect();
    let missing: Vec<usize> = wanted
        .iter()
        .copied()
        .filter(|e| *e != record.points.t_final && !record.snapshots.contains_key(e))
        .collect();
    let replayed = replay_many(config, record.seed, &missing)?;

    let mut tables = BTreeMap::new();
    let mut tests = BTreeMap::new();
    for time in TestingTime::ALL {
        let episode = record.points.at(time);
        let table = if episode == record.points.t_final {
            record.final_table.clone()
        } else if let Some(t) = record.snapshots.get(&episode) {
            t.clone()
        } else {
            replayed[&episode].clone()
        };
        let stats = run_tests(&table, config, &mut test_rng(record.seed, episode))?;
        tables.insert(time, table);
        tests.insert(time, stats);
    }
    Ok(RunReport {
        run_index,
        record,
        tables,
        tests,
    })
}

/// Reported metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    /// Pooled over every test of every run.
    DiscountedReward,
    FlagsCollected,
    /// Over runs: one rate per run.
    SuccessRate,
    /// Pooled over successful tests.
    StepsSuccessful,
    /// Over runs: one per-run test mean per run.
    DiscountedRewardRun,
    FlagsCollectedRun,
    StepsSuccessfulRun,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::DiscountedReward,
        Metric::FlagsCollected,
        Metric::SuccessRate,
        Metric::StepsSuccessful,
        Metric::DiscountedRewardRun,
        Metric::FlagsCollectedRun,
        Metric::StepsSuccessfulRun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::DiscountedReward => "discounted_reward",
            Metric::FlagsCollected => "flags_collected",
            Metric::SuccessRate => "success_rate",
            Metric::StepsSuccessful => "steps_successful",
            Metric::DiscountedRewardRun => "discounted_reward_run",
            Metric::FlagsCollectedRun => "flags_collected_run",
            Metric::StepsSuccessfulRun => "steps_successful_run",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Steps count against efficiency; everything else is better when higher.
    pub fn higher_is_better(self) -> bool {
        !matches!(self, Metric::StepsSuccessful | Metric::StepsSuccessfulRun)
    }
}

/// Cross-run statistics for one testing time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Aggregate {
    pub metrics: BTreeMap<Metric, SampleSummary>,
}

impl Aggregate {
    pub fn from_runs<'a>(stats: impl IntoIterator<Item = &'a TestStats>) -> Result<Self> {
        let mut rewards = Vec::new();
        let mut flags = Vec::new();
        let mut steps = Vec::new();
        let mut rates = Vec::new();
        let mut run_rewards = Vec::new();
        let mut run_flags = Vec::new();
        let mut run_steps = Vec::new();
        for s in stats {
            for o in &s.outcomes {
                rewards.push(o.discounted_reward);
                flags.push(o.flags_collected as f64);
                if o.success {
                    steps.push(o.steps as f64);
                }
            }
            rates.push(s.success_rate);
            run_rewards.push(s.discounted_reward.mean);
            run_flags.push(s.flags_collected.mean);
            if let Some(st) = s.steps_successful {
                run_steps.push(st.mean);
            }
        }
        let mut metrics = BTreeMap::new();
        for (m, v) in [
            (Metric::DiscountedReward, rewards),
            (Metric::FlagsCollected, flags),
            (Metric::SuccessRate, rates),
            (Metric::StepsSuccessful, steps),
            (Metric::DiscountedRewardRun, run_rewards),
            (Metric::FlagsCollectedRun, run_flags),
            (Metric::StepsSuccessfulRun, run_steps),
        ] {
            if !v.is_empty() {
                metrics.insert(m, summarize(&v)?);
            }
        }
        Ok(Aggregate { metrics })
    }

    pub fn get(&self, m: Metric) -> Option<&SampleSummary> {
        self.metrics.get(&m)
    }
}

#[derive(Clone, Debug)]
pub struct WorkflowReport {
    pub config: ExperimentConfig,
    pub runs: Vec<RunReport>,
    pub aggregate: BTreeMap<TestingTime, Aggregate>,
}

impl WorkflowReport {
    pub fn from_runs(config: ExperimentConfig, runs: Vec<RunReport>) -> Result<Self> {
        let mut aggregate = BTreeMap::new();
        for time in TestingTime::ALL {
            aggregate.insert(
                time,
                Aggregate::from_runs(runs.iter().map(|r| &r.tests[&time]))?,
            );
        }
        Ok(WorkflowReport {
            config,
            runs,
            aggregate,
        })
    }

    /// Per-episode mean of the sum series across runs.
    pub fn mean_sum_series(&self) -> Vec<f64> {
        mean_sum_series(self.runs.iter().map(|r| &r.record.series))
    }
}

pub fn mean_sum_series<'a>(series: impl IntoIterator<Item = &'a EntropySeries>) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for s in series {
        if acc.is_empty() {
            acc = vec![0.0; s.episodes()];
        }
        for (a, v) in acc.iter_mut().zip(&s.sum) {
            *a += v;
        }
        n += 1;
    }
    acc.iter_mut().for_each(|a| *a /= n.max(1) as f64);
    acc
}

/// Trains, extracts and tests every run of `config`, runs in parallel.
pub fn full_workflow(config: &ExperimentConfig) -> Result<WorkflowReport> {
    config.validate()?;
    let runs = (0..config.n_runs)
        .into_par_iter()
        .map(|i| {
            let seed = run_seed(config.master_seed, i);
            let record = train_run(config, seed)?;
            evaluate_run(config, i, record)
        })
        .collect::<Result<Vec<_>>>()?;
    WorkflowReport::from_runs(config.clone(), runs)
}

/// Trains every run without testing.
pub fn entropy_only(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    (0..config.n_runs)
        .into_par_iter()
        .map(|i| train_run(config, run_seed(config.master_seed, i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{Action, Position};

    fn small(episodes: usize) -> ExperimentConfig {
        ExperimentConfig {
            episodes,
            n_tests: 20,
            n_runs: 1,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_checks() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let mismatch = ExperimentConfig {
            n_train_flags: 3,
            ..ExperimentConfig::default()
        };
        assert!(mismatch.validate().is_err());
        let zero = ExperimentConfig {
            episodes: 0,
            ..ExperimentConfig::default()
        };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn seeds_follow_xor_rule() {
        assert_eq!(run_seed(0, 3), 3);
        assert_eq!(run_seed(0b1010, 0b0110), 0b1100);
    }

    #[test]
    fn single_episode_run() {
        let rec = train_run(&small(1), 9).unwrap();
        assert_eq!(rec.series.episodes(), 1);
        let p = rec.points;
        assert_eq!((p.t_earliest, p.t_latest, p.t_max, p.t_final), (0, 0, 0, 0));
        assert_eq!(replay_to(&small(1), 9, 0).unwrap(), rec.final_table);
    }

    #[test]
    fn replay_range() {
        assert!(replay_to(&small(5), 1, 5).is_err());
        assert!(replay_to(&small(5), 1, 4).is_ok());
    }

    #[test]
    fn trace_is_consistent() {
        let rec = train_run(&small(30), 4).unwrap();
        for t in &rec.trace {
            assert!(t.steps >= 1 && t.steps <= 1000);
            if t.reached_goal {
                assert_eq!(t.reward, t.flags_collected as f64);
            } else {
                assert_eq!(t.steps, 1000);
                assert_eq!(t.reward, 0.0);
            }
        }
        // Temperature persists across episodes and only decays.
        assert!(rec
            .trace
            .windows(2)
            .all(|w| w[1].temperature <= w[0].temperature));
        assert!(rec.trace.last().unwrap().temperature < 1000.0);
    }

    #[test]
    fn episode_clock() {
        let cfg = ExperimentConfig {
            temperature_clock: TemperatureClock::Episodes,
            schedule: TemperatureSchedule::new(1000.0, 0.5, 2, 0.1),
            ..small(5)
        };
        let rec = train_run(&cfg, 0).unwrap();
        let temps: Vec<f64> = rec.trace.iter().map(|t| t.temperature).collect();
        assert_eq!(temps, vec![1000.0, 500.0, 500.0, 250.0, 250.0]);
    }

    /// Table that walks the serpentine 0,0 -> 2,0 -> 2,1 -> 0,1 -> 0,2 -> 2,2
    /// on a 3x3 world whose flag zone is every non-goal cell around (2, 2).
    fn sweep_world() -> (ExperimentConfig, QTable) {
        let world = WorldConfig {
            width: 3,
            height: 3,
            start: Position::new(0, 0),
            goal: Position::new(2, 2),
            flag_zone_radius: 1,
            max_steps: 50,
        };
        // Zone: (1,1), (2,1), (1,2). Start stays outside it.
        let cfg = ExperimentConfig {
            world,
            representation: RepresentationKind::Local,
            n_train_flags: 3,
            n_tests: 200,
            test_temperature: 0.1,
            ..ExperimentConfig::default()
        };
        let mut table = QTable::new(cfg.dims(), 0.0).unwrap();
        let path = [
            ((0, 0), Action::Right),
            ((1, 0), Action::Right),
            ((2, 0), Action::Down),
            ((2, 1), Action::Left),
            ((1, 1), Action::Down),
            ((1, 2), Action::Right),
        ];
        for ((x, y), a) in path {
            for channel in 0..2 {
                table.set(StateIndex { x, y, channel }, a, 10.0).unwrap();
            }
        }
        (cfg, table)
    }

    #[test]
    fn hand_built_sweep_succeeds() {
        let (cfg, table) = sweep_world();
        let stats = run_tests(&table, &cfg, &mut test_rng(0, 0)).unwrap();
        // Off-path probability per step is 3e^-100: every test follows the path.
        assert_eq!(stats.success_rate, 1.0);
        let steps = stats.steps_successful.unwrap();
        assert_eq!((steps.mean, steps.std), (6.0, 0.0));
        assert_eq!(stats.flags_collected.mean, 3.0);
        let expect = 0.999f64.powi(6) * 3.0;
        assert!(stats
            .outcomes
            .iter()
            .all(|o| (o.discounted_reward - expect).abs() < 1e-12));
    }

    #[test]
    fn untrained_table_matches_random_walk() {
        // A uniform table is a uniform random walk. An independent 200k-episode
        // simulation of that walk clears all 8 flags and the goal within 1000
        // steps with probability 0.188.
        let cfg = ExperimentConfig {
            n_tests: 2000,
            ..ExperimentConfig::default()
        };
        let table = QTable::new(cfg.dims(), 0.1).unwrap();
        let stats = run_tests(&table, &cfg, &mut test_rng(1, 0)).unwrap();
        let sigma = (0.188f64 * 0.812 / 2000.0).sqrt();
        assert!(
            (stats.success_rate - 0.188).abs() < 4.0 * sigma,
            "{}",
            stats.success_rate
        );
        assert!(stats.success_rate < 0.25);
    }

    #[test]
    fn rate_is_counted() {
        let o = |success| TestOutcome {
            steps: 10,
            flags_collected: if success { 8 } else { 2 },
            reached_goal: success,
            success,
            discounted_reward: 0.0,
        };
        let outcomes: Vec<TestOutcome> = (0..1000).map(|i| o(i < 670)).collect();
        let stats = TestStats::from_outcomes(outcomes).unwrap();
        assert_eq!(stats.success_rate, 0.67);
        assert_eq!(stats.successes, 670);
    }

    #[test]
    fn tests_reject_wrong_dims() {
        let cfg = small(1);
        let table = QTable::new(Dims::new(10, 10, 2, 4), 0.1).unwrap();
        assert!(run_tests(&table, &cfg, &mut test_rng(0, 0)).is_err());
    }

    #[test]
    fn coinciding_times_give_identical_stats() {
        let report = full_workflow(&small(1)).unwrap();
        let run = &report.runs[0];
        let first = &run.tests[&TestingTime::Earliest];
        for t in TestingTime::ALL {
            assert_eq!(&run.tests[&t], first);
        }
    }
}
