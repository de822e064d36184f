//! Human-readable summaries and the `compare` report.

use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::{bail, Result};
use deqt::io::StatsRow;
use deqt::{welch_t_test, Metric, SampleSummary, TestingTime, WorkflowReport};

/// Columns of the summary table: the displayed metric and the per-run metric
/// used for its significance test.
const COLUMNS: [(&str, Metric, Metric); 4] = [
    (
        "Discounted Reward",
        Metric::DiscountedReward,
        Metric::DiscountedRewardRun,
    ),
    (
        "Flags Collected",
        Metric::FlagsCollected,
        Metric::FlagsCollectedRun,
    ),
    ("Success Rate", Metric::SuccessRate, Metric::SuccessRate),
    (
        "Steps (successful)",
        Metric::StepsSuccessful,
        Metric::StepsSuccessfulRun,
    ),
];

fn better(m: Metric, a: &SampleSummary, b: &SampleSummary, alpha: f64) -> bool {
    let Ok(t) = welch_t_test(a, b, alpha) else {
        return false;
    };
    let ahead = if m.higher_is_better() {
        a.mean > b.mean
    } else {
        a.mean < b.mean
    };
    t.significant && ahead
}

fn cell(s: Option<&SampleSummary>, precision: usize, marked: bool) -> String {
    match s {
        Some(s) => format!(
            "{}{:.p$} ± {:.p$}",
            if marked { "*" } else { "" },
            s.mean,
            s.std,
            p = precision
        ),
        None => "-".to_string(),
    }
}

/// Table of μ ± σ per setup and testing time. A leading `*` marks a value
/// significantly better than the same setup's value at the contrasted time
/// (t_max against t_final and vice versa; earliest/latest against t_final).
pub fn summary_table(reports: &[(String, &WorkflowReport)], alpha: f64) -> String {
    let mut out = String::new();
    let name_w = reports
        .iter()
        .map(|(n, _)| n.len())
        .max()
        .unwrap_or(5)
        .max(5);
    for time in [
        TestingTime::Final,
        TestingTime::Max,
        TestingTime::Earliest,
        TestingTime::Latest,
    ] {
        let title = match time {
            TestingTime::Final => "At the final episode (t_final)",
            TestingTime::Max => "Early stopping at the highest entropy sum (t_max)",
            TestingTime::Earliest => "Earliest per-channel entropy peak (t_earliest)",
            TestingTime::Latest => "Latest per-channel entropy peak (t_latest)",
        };
        let other = if time == TestingTime::Final {
            TestingTime::Max
        } else {
            TestingTime::Final
        };
        writeln!(out, "{title}").unwrap();
        write!(out, "{:name_w$}", "Setup").unwrap();
        for (label, ..) in COLUMNS {
            write!(out, " | {label:>20}").unwrap();
        }
        writeln!(out).unwrap();
        for (name, report) in reports {
            let here = &report.aggregate[&time];
            let there = &report.aggregate[&other];
            write!(out, "{name:name_w$}").unwrap();
            for (_, shown, tested) in COLUMNS {
                let marked = match (here.get(tested), there.get(tested)) {
                    (Some(a), Some(b)) => better(tested, a, b, alpha),
                    _ => false,
                };
                let precision = if shown == Metric::StepsSuccessful {
                    2
                } else {
                    3
                };
                write!(out, " | {:>20}", cell(here.get(shown), precision, marked)).unwrap();
            }
            writeln!(out).unwrap();
        }
        writeln!(out).unwrap();
    }
    writeln!(
        out,
        "μ ± σ over all tests of all runs (success rate: over runs). \
         * = significantly better than the contrasted testing time \
         (two-sided Welch t-test on per-run values, alpha = {alpha})."
    )
    .unwrap();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonLine {
    pub key: String,
    pub a: (f64, f64, usize),
    pub b: (f64, f64, usize),
    /// `None` when either side has fewer than two samples.
    pub test: Option<deqt::TTestResult>,
    pub better: Option<char>,
}

#[derive(Default)]
pub struct Selection<'a> {
    pub time: Option<&'a str>,
    pub setup: Option<&'a str>,
}

fn select(rows: Vec<StatsRow>, sel: &Selection) -> Vec<StatsRow> {
    rows.into_iter()
        .filter(|r| sel.time.is_none_or(|t| r.testing_time == t))
        .filter(|r| sel.setup.is_none_or(|s| r.setup == s))
        .collect()
}

/// Joins two stats tables on metric (and on testing time / setup unless a
/// side is pinned to one) and runs a Welch test per joined metric.
pub fn compare(
    a: Vec<StatsRow>,
    b: Vec<StatsRow>,
    sel_a: &Selection,
    sel_b: &Selection,
    alpha: f64,
) -> Result<Vec<ComparisonLine>> {
    let join_time = sel_a.time.is_none() && sel_b.time.is_none();
    let join_setup = sel_a.setup.is_none() && sel_b.setup.is_none();
    let key = |r: &StatsRow| {
        let mut k = r.metric.clone();
        if join_time {
            k = format!("{}/{k}", r.testing_time);
        }
        if join_setup {
            k = format!("{}/{k}", r.setup);
        }
        k
    };
    let index = |rows: Vec<StatsRow>| -> Result<BTreeMap<String, StatsRow>> {
        let mut map = BTreeMap::new();
        for r in rows {
            let k = key(&r);
            if map.insert(k.clone(), r).is_some() {
                bail!("duplicate row for '{k}'; pin a testing time or setup");
            }
        }
        Ok(map)
    };
    let a = index(select(a, sel_a))?;
    let b = index(select(b, sel_b))?;
    if a.is_empty() || b.is_empty() {
        bail!("no rows to compare after selection");
    }
    if a.keys().ne(b.keys()) {
        let only_a: Vec<_> = a.keys().filter(|k| !b.contains_key(*k)).collect();
        let only_b: Vec<_> = b.keys().filter(|k| !a.contains_key(*k)).collect();
        bail!("schema mismatch: only in A {only_a:?}, only in B {only_b:?}");
    }

    let mut lines = Vec::new();
    for (k, ra) in &a {
        let rb = &b[k];
        let sa = SampleSummary::new(ra.n, ra.mean, ra.std)?;
        let sb = SampleSummary::new(rb.n, rb.mean, rb.std)?;
        let test = welch_t_test(&sa, &sb, alpha).ok();
        let better = match (test, Metric::from_name(&ra.metric)) {
            (Some(t), Some(m)) if t.significant => {
                let a_ahead = if m.higher_is_better() {
                    sa.mean > sb.mean
                } else {
                    sa.mean < sb.mean
                };
                Some(if a_ahead { 'A' } else { 'B' })
            }
            _ => None,
        };
        lines.push(ComparisonLine {
            key: k.clone(),
            a: (ra.mean, ra.std, ra.n),
            b: (rb.mean, rb.std, rb.n),
            test,
            better,
        });
    }
    Ok(lines)
}

/// Markdown-style table; the significantly better side is shown in bold.
pub fn render_comparison(lines: &[ComparisonLine], alpha: f64) -> String {
    let mut out = String::new();
    writeln!(out, "| metric | A | B | t | df | p |").unwrap();
    writeln!(out, "|---|---|---|---|---|---|").unwrap();
    for l in lines {
        let fmt = |(m, s, n): (f64, f64, usize), bold: bool| {
            let v = format!("{m:.4} ± {s:.4} (n={n})");
            if bold {
                format!("**{v}**")
            } else {
                v
            }
        };
        let (t, df, p) = match l.test {
            Some(t) => (
                format!("{:.4}", t.t_statistic),
                format!("{:.2}", t.degrees_of_freedom),
                format!("{:.4e}", t.p_value),
            ),
            None => ("n/a".into(), "n/a".into(), "n/a".into()),
        };
        writeln!(
            out,
            "| {} | {} | {} | {t} | {df} | {p} |",
            l.key,
            fmt(l.a, l.better == Some('A')),
            fmt(l.b, l.better == Some('B')),
        )
        .unwrap();
    }
    writeln!(
        out,
        "\nBold: significantly better at alpha = {alpha} (two-sided Welch t-test)."
    )
    .unwrap();
    out
}
