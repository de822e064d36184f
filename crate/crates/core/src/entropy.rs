//! Differential entropy of Q-tables.
//!
//! Each flag channel of a Q-table is treated as a sample of Q-values and its
//! differential entropy is estimated from an equal-width histogram spanning
//! the sample's range. Tracking these values per episode gives one time
//! series per channel; their peaks select the candidate stopping episodes.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::qlearn::QTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub n_bins: usize,
    /// Returned (in nats) for a zero-range sample.
    pub degenerate_floor: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            n_bins: 100,
            degenerate_floor: -20.0,
        }
    }
}

/// Which Q-values of a channel enter its histogram.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSource {
    /// Every state-action value of the channel.
    #[default]
    StateAction,
    /// One value per state: the maximum over actions.
    StateMax,
}

/// Histogram estimate of differential entropy in nats:
/// `-sum_i p_i * ln(p_i / w)` over occupied bins of width `w`.
pub fn histogram_entropy(values: &[f64], spec: &HistogramSpec) -> Result<f64> {
    if values.is_empty() {
        return usage("cannot estimate entropy of an empty sample");
    }
    if spec.n_bins == 0 {
        return usage("histogram needs at least one bin");
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if !v.is_finite() {
            return usage("entropy sample contains a non-finite value");
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let range = hi - lo;
    if range <= 0.0 {
        return Ok(spec.degenerate_floor);
    }

    let n = spec.n_bins;
    let mut counts = vec![0u32; n];
    for &v in values {
        let b = ((v - lo) / range * n as f64) as usize;
        counts[b.min(n - 1)] += 1;
    }

    let total = values.len() as f64;
    let width = range / n as f64;
    Ok(-counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * (p / width).ln()
        })
        .sum::<f64>())
}

/// Entropy of every flag channel of `table`, in channel order.
pub fn channel_entropies(
    table: &QTable,
    spec: &HistogramSpec,
    source: ValueSource,
) -> Result<Vec<f64>> {
    let dims = table.dims();
    (0..dims.channels)
        .map(|c| {
            let slice = table.channel(c);
            match source {
                ValueSource::StateAction => histogram_entropy(slice, spec),
                ValueSource::StateMax => {
                    let maxima: Vec<f64> = slice
                        .chunks_exact(dims.actions)
                        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                        .collect();
                    histogram_entropy(&maxima, spec)
                }
            }
        })
        .collect()
}

/// Per-channel entropy time series and their per-episode sum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EntropySeries {
    pub channels: Vec<Vec<f64>>,
    pub sum: Vec<f64>,
}

impl EntropySeries {
    pub fn new(n_channels: usize) -> Self {
        EntropySeries {
            channels: vec![Vec::new(); n_channels],
            sum: Vec::new(),
        }
    }

    pub fn with_capacity(n_channels: usize, episodes: usize) -> Self {
        EntropySeries {
            channels: vec![Vec::with_capacity(episodes); n_channels],
            sum: Vec::with_capacity(episodes),
        }
    }

    /// Appends one episode's channel entropies.
    pub fn push(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.channels.len() {
            return usage(format!(
                "expected {} channel entropies, got {}",
                self.channels.len(),
                values.len()
            ));
        }
        for (ch, &v) in self.channels.iter_mut().zip(values) {
            ch.push(v);
        }
        self.sum.push(values.iter().sum());
        Ok(())
    }

    pub fn episodes(&self) -> usize {
        self.sum.len()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingPoints {
    pub t_earliest: usize,
    pub t_latest: usize,
    pub t_max: usize,
    pub t_final: usize,
}

/// Testing time labels, in the order they are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestingTime {
    Earliest,
    Latest,
    Max,
    Final,
}

impl TestingTime {
    pub const ALL: [TestingTime; 4] = [
        TestingTime::Earliest,
        TestingTime::Latest,
        TestingTime::Max,
        TestingTime::Final,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TestingTime::Earliest => "t_earliest",
            TestingTime::Latest => "t_latest",
            TestingTime::Max => "t_max",
            TestingTime::Final => "t_final",
        }
    }

    pub fn from_tag(tag: &str) -> Option<TestingTime> {
        TestingTime::ALL.into_iter().find(|t| t.tag() == tag)
    }
}

impl StoppingPoints {
    pub fn at(&self, time: TestingTime) -> usize {
        match time {
            TestingTime::Earliest => self.t_earliest,
            TestingTime::Latest => self.t_latest,
            TestingTime::Max => self.t_max,
            TestingTime::Final => self.t_final,
        }
    }
}

/// Index of the first maximum.
fn first_argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in xs.iter().enumerate().skip(1) {
        if v > xs[best] {
            best = i;
        }
    }
    best
}

/// Derives the stopping episodes from an entropy series.
///
/// `t_earliest`/`t_latest` are the earliest and latest of the per-channel
/// peak episodes; `t_max` is the peak of the sum series. Ties resolve to the
/// first occurrence. When `include_channel_zero` is false, channel 0 does not
/// take part in the per-channel peaks (it still contributes to the sum).
pub fn stopping_points(
    series: &EntropySeries,
    include_channel_zero: bool,
) -> Result<StoppingPoints> {
    let episodes = series.episodes();
    if episodes == 0 {
        return usage("stopping points need at least one episode");
    }
    let skip = usize::from(!include_channel_zero && series.n_channels() > 1);
    let peaks: Vec<usize> = series
        .channels
        .iter()
        .skip(skip)
        .map(|ch| first_argmax(ch))
        .collect();
    let (t_earliest, t_latest) = if peaks.is_empty() {
        (0, 0)
    } else {
        (*peaks.iter().min().unwrap(), *peaks.iter().max().unwrap())
    };
    Ok(StoppingPoints {
        t_earliest,
        t_latest,
        t_max: first_argmax(&series.sum),
        t_final: episodes - 1,
    })
}

/// First episode from which `series` stays within `rel_tol * |steady|` of its
/// steady-state value, where the steady state is the mean of the last `tail`
/// episodes. `None` if the series never settles.
pub fn settling_episode(series: &[f64], tail: usize, rel_tol: f64) -> Option<usize> {
    if series.is_empty() || tail == 0 {
        return None;
    }
    let tail = tail.min(series.len());
    let steady = series[series.len() - tail..].iter().sum::<f64>() / tail as f64;
    let band = rel_tol * steady.abs();
    let last_out = series.iter().rposition(|v| (v - steady).abs() > band);
    match last_out {
        None => Some(0),
        Some(i) if i + 1 < series.len() => Some(i + 1),
        Some(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlearn::Dims;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `per_bin` values at the centre of each of `n` bins over `[0, range]`.
    fn uniform_fill(n: usize, per_bin: usize, range: f64) -> Vec<f64> {
        let mut v = Vec::new();
        for i in 0..n {
            for _ in 0..per_bin {
                v.push((i as f64 + 0.5) * range / n as f64);
            }
        }
        // pin the extremes of the range
        v.push(0.0);
        v.push(range);
        v
    }

    #[test]
    fn uniform_unit_range_is_zero() {
        let spec = HistogramSpec {
            n_bins: 10,
            ..Default::default()
        };
        let mut v: Vec<f64> = (0..10).map(|i| i as f64 / 10.0 + 0.05).collect();
        v[0] = 0.0;
        v[9] = 1.0;
        let h = histogram_entropy(&v, &spec).unwrap();
        assert!(h.abs() < 1e-12, "{h}");

        let v: Vec<f64> = v.iter().map(|x| x * 2.0).collect();
        let h = histogram_entropy(&v, &spec).unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-12, "{h}");
    }

    #[test]
    fn near_uniform_fill() {
        // Two extra endpoint values perturb equal counts slightly.
        let spec = HistogramSpec {
            n_bins: 50,
            ..Default::default()
        };
        let h = histogram_entropy(&uniform_fill(50, 200, 1.0), &spec).unwrap();
        assert!(h.abs() < 1e-3);
    }

    #[test]
    fn degenerate_sample() {
        let spec = HistogramSpec::default();
        assert_eq!(histogram_entropy(&[0.1; 400], &spec).unwrap(), -20.0);
        assert!(histogram_entropy(&[], &spec).is_err());
        assert!(histogram_entropy(&[1.0, f64::NAN], &spec).is_err());
    }

    #[test]
    fn fresh_table_sits_on_floor() {
        let t = QTable::new(Dims::new(10, 10, 4, 4), 0.1).unwrap();
        let e = channel_entropies(&t, &HistogramSpec::default(), ValueSource::StateAction).unwrap();
        assert_eq!(e, vec![-20.0; 4]);
        let e = channel_entropies(&t, &HistogramSpec::default(), ValueSource::StateMax).unwrap();
        assert_eq!(e.len(), 4);
    }

    #[test]
    fn per_channel_values() {
        let dims = Dims::new(5, 2, 2, 4);
        let n = dims.channel_len();
        let mut values = Vec::new();
        for c in 0..2 {
            let scale = (c + 1) as f64;
            values.extend((0..n).map(|i| scale * i as f64 / (n - 1) as f64));
        }
        let t = QTable::from_values(dims, values).unwrap();
        // 40 evenly spaced points, one per bin.
        let spec = HistogramSpec {
            n_bins: 40,
            ..Default::default()
        };
        let e = channel_entropies(&t, &spec, ValueSource::StateAction).unwrap();
        assert!(e[0].abs() < 1e-12);
        assert!((e[1] - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn channel_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dims = Dims::new(10, 10, 2, 4);
        let mut values: Vec<f64> = (0..dims.len())
            .map(|i| ((i * 7919) % 1000) as f64 / 100.0)
            .collect();
        let spec = HistogramSpec::default();
        let a = channel_entropies(
            &QTable::from_values(dims, values.clone()).unwrap(),
            &spec,
            ValueSource::StateAction,
        )
        .unwrap();
        values[..400].shuffle(&mut rng);
        let b = channel_entropies(
            &QTable::from_values(dims, values).unwrap(),
            &spec,
            ValueSource::StateAction,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    fn series(channels: Vec<Vec<f64>>) -> EntropySeries {
        let mut s = EntropySeries::new(channels.len());
        for t in 0..channels[0].len() {
            let row: Vec<f64> = channels.iter().map(|c| c[t]).collect();
            s.push(&row).unwrap();
        }
        s
    }

    #[test]
    fn stopping_point_construction() {
        let a = vec![0.0, 1.0, 2.0, 5.0, 1.0, 1.0, 1.0, 1.0, 0.0];
        let b = vec![0.0, 0.0, 0.0, -3.0, 3.0, 3.5, 3.9, 4.0, 0.0];
        let s = series(vec![a, b]);
        let p = stopping_points(&s, true).unwrap();
        assert_eq!((p.t_earliest, p.t_latest), (3, 7));
        assert_eq!(p.t_max, 7);
        assert_eq!(p.t_final, 8);

        let a = vec![0.0, 0.0, 0.0, 4.0, 0.0, 3.0, 0.0, 0.0];
        let b = vec![0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 5.0];
        let p = stopping_points(&series(vec![a, b]), true).unwrap();
        assert_eq!((p.t_earliest, p.t_latest, p.t_max), (3, 7, 5));
    }

    #[test]
    fn stopping_ties_and_edges() {
        let p = stopping_points(&series(vec![vec![1.0; 6]]), true).unwrap();
        assert_eq!((p.t_earliest, p.t_latest, p.t_max, p.t_final), (0, 0, 0, 5));

        let mut a = vec![0.0; 12];
        let mut b = vec![0.0; 12];
        a[10] = 1.0;
        b[10] = 2.0;
        let p = stopping_points(&series(vec![a, b]), true).unwrap();
        assert_eq!((p.t_earliest, p.t_latest), (10, 10));

        assert!(stopping_points(&EntropySeries::new(2), true).is_err());
    }

    #[test]
    fn channel_zero_exclusion() {
        let a = vec![9.0, 0.0, 0.0, 0.0];
        let b = vec![0.0, 0.0, 1.0, 0.0];
        let s = series(vec![a, b]);
        assert_eq!(stopping_points(&s, true).unwrap().t_earliest, 0);
        assert_eq!(stopping_points(&s, false).unwrap().t_earliest, 2);
    }

    #[test]
    fn settling() {
        let mut s = vec![10.0, 5.0, 2.2, 1.92, 2.05];
        s.extend(vec![2.0; 10]);
        assert_eq!(settling_episode(&s, 10, 0.05), Some(3));
        assert_eq!(settling_episode(&[2.0; 5], 3, 0.05), Some(0));
        assert_eq!(settling_episode(&[], 3, 0.05), None);
        let s = vec![1.0, 1.0, 1.0, 5.0];
        assert_eq!(settling_episode(&s, 1, 0.05), Some(3));
        let s = vec![1.0, 1.0, 1.0, 5.0];
        assert_eq!(settling_episode(&s, 2, 0.05), None);
    }

    proptest! {
        #[test]
        fn permutation_invariance(mut v in proptest::collection::vec(-50.0f64..50.0, 1..300), seed: u64, bins in 1usize..120) {
            let spec = HistogramSpec { n_bins: bins, ..Default::default() };
            let h = histogram_entropy(&v, &spec).unwrap();
            v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(h, histogram_entropy(&v, &spec).unwrap());
        }

        #[test]
        fn scaling_shifts_by_log(v in proptest::collection::vec(-50.0f64..50.0, 2..300), k in -6i32..6, bins in 1usize..120) {
            let spec = HistogramSpec { n_bins: bins, ..Default::default() };
            let c = 2f64.powi(k);
            let h = histogram_entropy(&v, &spec).unwrap();
            prop_assume!(h != spec.degenerate_floor);
            let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
            let hs = histogram_entropy(&scaled, &spec).unwrap();
            prop_assert!((hs - h - c.ln()).abs() < 1e-9);
        }

        #[test]
        fn stopping_points_in_bounds(chans in proptest::collection::vec(proptest::collection::vec(-30.0f64..30.0, 40), 1..6)) {
            let s = series(chans);
            for include in [true, false] {
                let p = stopping_points(&s, include).unwrap();
                prop_assert!(p.t_earliest <= p.t_latest);
                prop_assert!(p.t_latest < 40 && p.t_max < 40);
                prop_assert_eq!(p.t_final, 39);
            }
            for t in 0..s.episodes() {
                let total: f64 = s.channels.iter().map(|c| c[t]).sum();
                prop_assert_eq!(total, s.sum[t]);
            }
        }
    }
}
