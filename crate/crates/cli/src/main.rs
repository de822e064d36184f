//! Command-line driver: train, extract, test and compare.

mod output;
mod overrides;
mod report;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use deqt::{ExperimentConfig, SetupName, TestingTime};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "deqt",
    version,
    about = "Entropy-guided early stopping for tabular Q-learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train, extract and test one setup.
    Run {
        /// Setup name, e.g. Global-8-8, Compact, Local-1-8.
        setup: Option<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run every setup and write a combined table.
    Sweep {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Train only and write entropy curves and stopping points.
    EntropyOnly {
        setup: Option<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Welch t-tests between two stats CSV files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Restrict A to one testing time (t_earliest, t_latest, t_max, t_final).
        #[arg(long)]
        time_a: Option<String>,
        #[arg(long)]
        time_b: Option<String>,
        /// Restrict A to one setup.
        #[arg(long)]
        setup_a: Option<String>,
        #[arg(long)]
        setup_b: Option<String>,
    },
}

#[derive(Args)]
struct RunOpts {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    tests: Option<usize>,
    #[arg(long)]
    snapshot_stride: Option<usize>,
    /// Significance level for the summary marks.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// TOML file of key = value pairs; may name the setup.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl RunOpts {
    fn file(&self) -> Result<(Option<String>, overrides::Pairs)> {
        match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                overrides::read_config_file(&text)
            }
            None => Ok((None, Vec::new())),
        }
    }

    /// Preset, then config file, then flags, then `--set`.
    fn resolve(&self, setup: SetupName, file: &[(String, String)]) -> Result<ExperimentConfig> {
        let mut cfg = setup.config();
        for (k, v) in file {
            overrides::apply(&mut cfg, k, v)?;
        }
        let flags = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("runs", self.runs.map(|v| v.to_string())),
            ("episodes", self.episodes.map(|v| v.to_string())),
            ("bins", self.bins.map(|v| v.to_string())),
            ("tests", self.tests.map(|v| v.to_string())),
            (
                "snapshot_stride",
                self.snapshot_stride.map(|v| v.to_string()),
            ),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                overrides::apply(&mut cfg, k, &v)?;
            }
        }
        for s in &self.set {
            let (k, v) = overrides::parse_assignment(s)?;
            overrides::apply(&mut cfg, &k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn setup_name(arg: Option<String>, file: Option<String>) -> Result<SetupName> {
    let name = arg
        .or(file)
        .ok_or_else(|| anyhow!("no setup given on the command line or in the config file"))?;
    name.parse().map_err(|e| anyhow!("{e}"))
}

fn run(
    setup: SetupName,
    opts: &RunOpts,
    file: &[(String, String)],
    root: &Path,
) -> Result<(String, deqt::WorkflowReport, Vec<deqt::io::StatsRow>)> {
    let cfg = opts.resolve(setup, file)?;
    let echo = overrides::echo(setup, &cfg);
    let report = deqt::full_workflow(&cfg).with_context(|| format!("{setup} failed"))?;
    let summary = report::summary_table(&[(setup.to_string(), &report)], opts.alpha);
    let rows = output::write_workflow(
        &root.join(setup.to_string()),
        setup,
        &echo,
        &report,
        &summary,
    )?;
    Ok((summary, report, rows))
}

fn selection<'a>(
    time: &'a Option<String>,
    setup: &'a Option<String>,
) -> Result<report::Selection<'a>> {
    if let Some(t) = time {
        TestingTime::from_tag(t).ok_or_else(|| anyhow!("unknown testing time '{t}'"))?;
    }
    Ok(report::Selection {
        time: time.as_deref(),
        setup: setup.as_deref(),
    })
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { setup, opts } => {
            let (file_setup, file) = opts.file()?;
            let setup = setup_name(setup, file_setup)?;
            let (summary, ..) = run(setup, &opts, &file, &opts.out)?;
            print!("{summary}");
        }
        Command::EntropyOnly { setup, opts } => {
            let (file_setup, file) = opts.file()?;
            let setup = setup_name(setup, file_setup)?;
            let cfg = opts.resolve(setup, &file)?;
            let records = deqt::experiment::entropy_only(&cfg)?;
            output::write_entropy_only(
                &opts.out.join(setup.to_string()),
                setup,
                &overrides::echo(setup, &cfg),
                &records,
            )?;
            for (i, r) in records.iter().enumerate() {
                let p = r.points;
                println!(
                    "run {i} seed {}: t_earliest {} t_latest {} t_max {} t_final {}",
                    r.seed, p.t_earliest, p.t_latest, p.t_max, p.t_final
                );
            }
        }
        Command::Sweep { opts } => {
            let (_, file) = opts.file()?;
            let setups = SetupName::all();
            // Validate every configuration before any training starts.
            for s in &setups {
                opts.resolve(*s, &file)?;
            }
            let results = setups
                .par_iter()
                .map(|s| {
                    run(*s, &opts, &file, &opts.out)
                        .map(|(_, report, rows)| (s.to_string(), report, rows))
                })
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<_> = results
                .iter()
                .flat_map(|(_, _, rows)| rows.iter().cloned())
                .collect();
            output::write_stats(&opts.out.join("test_stats.csv"), &rows)?;
            let named: Vec<_> = results.iter().map(|(n, r, _)| (n.clone(), r)).collect();
            let summary = report::summary_table(&named, opts.alpha);
            output::write_text(&opts.out.join("summary.txt"), &summary)?;
            print!("{summary}");
        }
        Command::Compare {
            a,
            b,
            alpha,
            time_a,
            time_b,
            setup_a,
            setup_b,
        } => {
            let lines = report::compare(
                output::read_stats(&a)?,
                output::read_stats(&b)?,
                &selection(&time_a, &setup_a)?,
                &selection(&time_b, &setup_b)?,
                alpha,
            )?;
            print!("{}", report::render_comparison(&lines, alpha));
        }
    }
    Ok(())
}
