//! On-disk layout of a run directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use deqt::io::{self, fmt_f64, StatsRow};
use deqt::{RunRecord, SetupName, WorkflowReport};

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn seed_dir(root: &Path, seed: u64) -> Result<PathBuf> {
    let dir = root.join(format!("seed-{seed}"));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_mean_entropy(path: &Path, mean: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "episode,mean_sum")?;
    for (i, v) in mean.iter().enumerate() {
        writeln!(w, "{i},{}", fmt_f64(*v))?;
    }
    w.flush()?;
    Ok(())
}

fn write_record(root: &Path, setup: SetupName, record: &RunRecord) -> Result<PathBuf> {
    let dir = seed_dir(root, record.seed)?;
    let stem = format!("{setup}_seed-{}", record.seed);
    io::write_entropy_csv(
        create(&dir.join(format!("entropy_{stem}.csv")))?,
        &record.series,
    )?;
    io::write_trace_csv(
        create(&dir.join(format!("trace_{stem}.csv")))?,
        &record.trace,
    )?;
    Ok(dir)
}

fn write_points(root: &Path, records: &[&RunRecord]) -> Result<()> {
    let rows: Vec<_> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.points))
        .collect();
    io::write_stopping_points_csv(create(&root.join("stopping_points.csv"))?, &rows)?;
    Ok(())
}

/// Everything produced by a full run of one setup.
pub fn write_workflow(
    root: &Path,
    setup: SetupName,
    echo: &str,
    report: &WorkflowReport,
    summary: &str,
) -> Result<Vec<StatsRow>> {
    fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
    write_text(&root.join("config.toml"), echo)?;
    for run in &report.runs {
        let dir = write_record(root, setup, &run.record)?;
        for (time, table) in &run.tables {
            let name = format!("qtable_{setup}_seed-{}_{}.bin", run.record.seed, time.tag());
            io::save_qtable(&dir.join(name), table)?;
        }
    }
    let records: Vec<_> = report.runs.iter().map(|r| &r.record).collect();
    write_points(root, &records)?;
    write_mean_entropy(&root.join("mean_entropy.csv"), &report.mean_sum_series())?;
    let rows = io::stats_rows(&setup.to_string(), report);
    io::write_stats_csv(create(&root.join("test_stats.csv"))?, &rows)?;
    write_text(&root.join("summary.txt"), summary)?;
    Ok(rows)
}

/// Training outputs only.
pub fn write_entropy_only(
    root: &Path,
    setup: SetupName,
    echo: &str,
    records: &[RunRecord],
) -> Result<()> {
    fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
    write_text(&root.join("config.toml"), echo)?;
    for r in records {
        write_record(root, setup, r)?;
    }
    write_points(root, &records.iter().collect::<Vec<_>>())?;
    let mean = deqt::experiment::mean_sum_series(records.iter().map(|r| &r.series));
    write_mean_entropy(&root.join("mean_entropy.csv"), &mean)?;
    Ok(())
}

pub fn write_stats(path: &Path, rows: &[StatsRow]) -> Result<()> {
    io::write_stats_csv(create(path)?, rows)?;
    Ok(())
}

pub fn read_stats(path: &Path) -> Result<Vec<StatsRow>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    io::read_stats_csv(f).with_context(|| format!("cannot read {}", path.display()))
}
