//! CSV and binary file formats.
//!
//! Every CSV is UTF-8, comma-separated, LF-terminated, with a header row.
//! Floats are written with 17 significant digits so they parse back exactly.
//!
//! Binary Q-table snapshots are little-endian: the magic `DEQT`, a `u32`
//! format version (1), four `u32` dims `(width, height, channels, actions)`,
//! then every value as `f64` in channel-major storage order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, Terminator, WriterBuilder};

use crate::entropy::{EntropySeries, StoppingPoints, TestingTime};
use crate::error::{Error, Result};
use crate::experiment::{EpisodeTrace, Metric, WorkflowReport};
use crate::qlearn::{Dims, QTable};

const MAGIC: &[u8; 4] = b"DEQT";
const VERSION: u32 = 1;

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(w)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: '{s}'")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a count: '{s}'")))
}

/// Columns: `episode, channel_0 .. channel_{F-1}, sum`.
pub fn write_entropy_csv<W: Write>(w: W, series: &EntropySeries) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec!["episode".to_string()];
    header.extend((0..series.n_channels()).map(|c| format!("channel_{c}")));
    header.push("sum".into());
    out.write_record(&header)?;
    for t in 0..series.episodes() {
        let mut row = vec![t.to_string()];
        row.extend(series.channels.iter().map(|ch| fmt_f64(ch[t])));
        row.push(fmt_f64(series.sum[t]));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_entropy_csv<R: Read>(r: R) -> Result<EntropySeries> {
    let mut rdr = ReaderBuilder::new().from_reader(r);
    let headers = rdr.headers()?.clone();
    let n = headers.len();
    if n < 3 || &headers[0] != "episode" || &headers[n - 1] != "sum" {
        return Err(Error::Parse(
            "entropy CSV header must be episode, channel_*, sum".into(),
        ));
    }
    let mut series = EntropySeries::new(n - 2);
    for rec in rdr.records() {
        let rec = rec?;
        let vals = (1..n - 1)
            .map(|i| parse_f64(&rec[i]))
            .collect::<Result<Vec<_>>>()?;
        series.push(&vals)?;
    }
    Ok(series)
}

/// Columns: `episode, steps, flags_collected, reached_goal, reward, temperature`.
pub fn write_trace_csv<W: Write>(w: W, trace: &[EpisodeTrace]) -> Result<()> {
    let mut out = writer(w);
    out.write_record([
        "episode",
        "steps",
        "flags_collected",
        "reached_goal",
        "reward",
        "temperature",
    ])?;
    for (i, t) in trace.iter().enumerate() {
        out.write_record([
            i.to_string(),
            t.steps.to_string(),
            t.flags_collected.to_string(),
            (t.reached_goal as u8).to_string(),
            fmt_f64(t.reward),
            fmt_f64(t.temperature),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns: `run, t_earliest, t_latest, t_max, t_final`.
pub fn write_stopping_points_csv<W: Write>(w: W, rows: &[(usize, StoppingPoints)]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["run", "t_earliest", "t_latest", "t_max", "t_final"])?;
    for (run, p) in rows {
        out.write_record([
            run.to_string(),
            p.t_earliest.to_string(),
            p.t_latest.to_string(),
            p.t_max.to_string(),
            p.t_final.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One row of the test-stats CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsRow {
    pub setup: String,
    pub testing_time: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub const STATS_HEADER: [&str; 6] = ["setup", "testing_time", "metric", "mean", "std", "n"];

pub fn stats_rows(setup: &str, report: &WorkflowReport) -> Vec<StatsRow> {
    let mut rows = Vec::new();
    for time in TestingTime::ALL {
        let agg = &report.aggregate[&time];
        for m in Metric::ALL {
            if let Some(s) = agg.get(m) {
                rows.push(StatsRow {
                    setup: setup.to_string(),
                    testing_time: time.tag().to_string(),
                    metric: m.name().to_string(),
                    mean: s.mean,
                    std: s.std,
                    n: s.n,
                });
            }
        }
    }
    rows
}

/// Columns: `setup, testing_time, metric, mean, std, n`.
pub fn write_stats_csv<W: Write>(w: W, rows: &[StatsRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(STATS_HEADER)?;
    for r in rows {
        out.write_record([
            r.setup.clone(),
            r.testing_time.clone(),
            r.metric.clone(),
            fmt_f64(r.mean),
            fmt_f64(r.std),
            r.n.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_stats_csv<R: Read>(r: R) -> Result<Vec<StatsRow>> {
    let mut rdr = ReaderBuilder::new().from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(STATS_HEADER.iter().copied()) {
        return Err(Error::Usage(format!(
            "stats CSV header must be {}",
            STATS_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != STATS_HEADER.len() {
            return Err(Error::Usage(format!("malformed stats row: {rec:?}")));
        }
        if rec[3].trim().is_empty() || rec[4].trim().is_empty() {
            return Err(Error::Usage(format!(
                "empty value for metric '{}'",
                &rec[2]
            )));
        }
        rows.push(StatsRow {
            setup: rec[0].to_string(),
            testing_time: rec[1].to_string(),
            metric: rec[2].to_string(),
            mean: parse_f64(&rec[3])?,
            std: parse_f64(&rec[4])?,
            n: parse_usize(&rec[5])?,
        });
    }
    Ok(rows)
}

/// Columns: `x, y, channel, action, value`.
pub fn write_qtable_csv<W: Write>(w: W, table: &QTable) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["x", "y", "channel", "action", "value"])?;
    for (x, y, c, a, v) in table.entries() {
        out.write_record([
            x.to_string(),
            y.to_string(),
            c.to_string(),
            a.to_string(),
            fmt_f64(v),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_qtable_csv<R: Read>(r: R) -> Result<QTable> {
    let mut rdr = ReaderBuilder::new().from_reader(r);
    let mut entries = Vec::new();
    let mut dims = Dims::new(0, 0, 0, 0);
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::Parse(format!("malformed Q-table row: {rec:?}")));
        }
        let (x, y, c, a) = (
            parse_usize(&rec[0])?,
            parse_usize(&rec[1])?,
            parse_usize(&rec[2])?,
            parse_usize(&rec[3])?,
        );
        dims.width = dims.width.max(x + 1);
        dims.height = dims.height.max(y + 1);
        dims.channels = dims.channels.max(c + 1);
        dims.actions = dims.actions.max(a + 1);
        entries.push((x, y, c, a, parse_f64(&rec[4])?));
    }
    if entries.len() != dims.len() {
        return Err(Error::Parse(format!(
            "Q-table CSV has {} rows, expected {} for {dims:?}",
            entries.len(),
            dims.len()
        )));
    }
    let mut values = vec![f64::NAN; dims.len()];
    for (x, y, c, a, v) in entries {
        values[((c * dims.width + x) * dims.height + y) * dims.actions + a] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Parse(
            "Q-table CSV has duplicate or missing cells".into(),
        ));
    }
    QTable::from_values(dims, values)
}

pub fn write_qtable_bin<W: Write>(mut w: W, table: &QTable) -> Result<()> {
    let d = table.dims();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in [d.width, d.height, d.channels, d.actions] {
        let n = u32::try_from(n).map_err(|_| Error::Usage("dimension exceeds u32".into()))?;
        w.write_all(&n.to_le_bytes())?;
    }
    for v in table.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_qtable_bin<R: Read>(mut r: R) -> Result<QTable> {
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    if &word != MAGIC {
        return Err(Error::Parse("not a Q-table snapshot".into()));
    }
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(Error::Parse(format!(
            "unsupported snapshot version {version}"
        )));
    }
    let mut dims = [0usize; 4];
    for d in dims.iter_mut() {
        r.read_exact(&mut word)?;
        *d = u32::from_le_bytes(word) as usize;
    }
    let dims = Dims::new(dims[0], dims[1], dims[2], dims[3]);
    let mut values = Vec::with_capacity(dims.len());
    let mut buf = [0u8; 8];
    for _ in 0..dims.len() {
        r.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    QTable::from_values(dims, values)
}

pub fn save_qtable(path: &Path, table: &QTable) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => write_qtable_csv(f, table),
        _ => write_qtable_bin(f, table),
    }
}

pub fn load_qtable(path: &Path) -> Result<QTable> {
    let f = BufReader::new(File::open(path)?);
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_qtable_csv(f),
        _ => read_qtable_bin(f),
    }
}
