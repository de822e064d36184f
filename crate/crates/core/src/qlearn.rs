//! Tabular Q-learning: table storage, Boltzmann selection, the one-step
//! update, and the temperature schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, usage, Result};
use crate::gridworld::Action;
use crate::representation::StateIndex;

/// Table shape `(width, height, channels, actions)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub actions: usize,
}

impl Dims {
    pub fn new(width: usize, height: usize, channels: usize, actions: usize) -> Self {
        Dims {
            width,
            height,
            channels,
            actions,
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height * self.channels * self.actions
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel_len(&self) -> usize {
        self.width * self.height * self.actions
    }
}

/// Q-values stored channel-major so every flag channel is one contiguous
/// slice: `index = ((channel * W + x) * H + y) * A + action`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    dims: Dims,
    values: Vec<f64>,
}

impl QTable {
    pub fn new(dims: Dims, q_init: f64) -> Result<Self> {
        if dims.width == 0 || dims.height == 0 || dims.channels == 0 || dims.actions == 0 {
            return config(format!("Q-table dimensions must be positive, got {dims:?}"));
        }
        if !q_init.is_finite() {
            return config("q_init must be finite");
        }
        Ok(QTable {
            dims,
            values: vec![q_init; dims.len()],
        })
    }

    pub fn from_values(dims: Dims, values: Vec<f64>) -> Result<Self> {
        if values.len() != dims.len() || dims.is_empty() {
            return config(format!(
                "expected {} values for {dims:?}, got {}",
                dims.len(),
                values.len()
            ));
        }
        Ok(QTable { dims, values })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn offset(&self, x: usize, y: usize, channel: usize) -> Result<usize> {
        let d = self.dims;
        if x >= d.width || y >= d.height || channel >= d.channels {
            return usage(format!(
                "state ({x}, {y}, {channel}) outside table {}x{}x{}",
                d.width, d.height, d.channels
            ));
        }
        Ok(((channel * d.width + x) * d.height + y) * d.actions)
    }

    /// Action values for one state.
    pub fn row(&self, s: StateIndex) -> Result<&[f64]> {
        let o = self.offset(s.x, s.y, s.channel)?;
        Ok(&self.values[o..o + self.dims.actions])
    }

    pub fn get(&self, s: StateIndex, a: Action) -> Result<f64> {
        Ok(self.row(s)?[a.index()])
    }

    pub fn set(&mut self, s: StateIndex, a: Action, value: f64) -> Result<()> {
        let o = self.offset(s.x, s.y, s.channel)? + a.index();
        self.values[o] = value;
        Ok(())
    }

    /// All `W * H * A` values of one flag channel.
    pub fn channel(&self, channel: usize) -> &[f64] {
        let n = self.dims.channel_len();
        &self.values[channel * n..(channel + 1) * n]
    }

    /// Iterates `(x, y, channel, action, value)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        let d = self.dims;
        self.values.iter().enumerate().map(move |(i, &v)| {
            let a = i % d.actions;
            let rest = i / d.actions;
            let y = rest % d.height;
            let rest = rest / d.height;
            let x = rest % d.width;
            let c = rest / d.width;
            (x, y, c, a, v)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    pub alpha: f64,
    pub gamma: f64,
    pub q_init: f64,
}

impl Default for LearningParams {
    fn default() -> Self {
        LearningParams {
            alpha: 0.1,
            gamma: 0.999,
            q_init: 0.1,
        }
    }
}

impl LearningParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return config(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return config(format!("gamma must be in [0, 1), got {}", self.gamma));
        }
        if !self.q_init.is_finite() {
            return config("q_init must be finite");
        }
        Ok(())
    }
}

/// Softmax over `qrow / temperature`, computed after subtracting the maximum.
pub fn boltzmann_probabilities(qrow: &[f64], temperature: f64) -> Result<Vec<f64>> {
    if !(temperature > 0.0) {
        return usage(format!("temperature must be positive, got {temperature}"));
    }
    if qrow.is_empty() || qrow.iter().any(|q| !q.is_finite()) {
        return usage("action values must be finite and non-empty");
    }
    let m = qrow.iter().copied().fold(f64::NEG_INFINITY, f64::max) / temperature;
    let mut p: Vec<f64> = qrow.iter().map(|q| (q / temperature - m).exp()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Ok(p)
}

/// Samples an action index with Boltzmann probabilities.
pub fn boltzmann_index<R: Rng + ?Sized>(
    qrow: &[f64],
    temperature: f64,
    rng: &mut R,
) -> Result<usize> {
    if !(temperature > 0.0) {
        return usage(format!("temperature must be positive, got {temperature}"));
    }
    // Unnormalized weights; at most 4 entries so this stays on the stack.
    let m = qrow.iter().copied().fold(f64::NEG_INFINITY, f64::max) / temperature;
    let mut w = [0.0f64; 8];
    if qrow.len() > w.len() {
        let p = boltzmann_probabilities(qrow, temperature)?;
        return Ok(sample_index(&p, 1.0, rng));
    }
    let mut total = 0.0;
    for (wi, q) in w.iter_mut().zip(qrow) {
        if !q.is_finite() {
            return usage("action values must be finite");
        }
        *wi = (q / temperature - m).exp();
        total += *wi;
    }
    Ok(sample_index(&w[..qrow.len()], total, rng))
}

fn sample_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // u can only reach here through rounding in the running sum.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

pub fn boltzmann_select<R: Rng + ?Sized>(
    qrow: &[f64],
    temperature: f64,
    rng: &mut R,
) -> Result<Action> {
    if qrow.len() != Action::COUNT {
        return usage(format!(
            "expected {} action values, got {}",
            Action::COUNT,
            qrow.len()
        ));
    }
    let i = boltzmann_index(qrow, temperature, rng)?;
    Ok(Action::ALL[i])
}

/// One-step Watkins update. Terminal transitions bootstrap with zero.
/// Returns the new value of `Q(s, a)`.
pub fn q_update(
    table: &mut QTable,
    s: StateIndex,
    a: Action,
    reward: f64,
    s_next: StateIndex,
    terminal: bool,
    params: &LearningParams,
) -> Result<f64> {
    let bootstrap = if terminal {
        0.0
    } else {
        table
            .row(s_next)?
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let old = table.get(s, a)?;
    let target = reward + params.gamma * bootstrap;
    let new = old + params.alpha * (target - old);
    table.set(s, a, new)?;
    Ok(new)
}

/// Multiplicative temperature decay applied every `update_every` ticks,
/// floored at `t_min`. A tick is one action or one episode depending on the
/// caller's clock.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSchedule {
    pub t0: f64,
    pub decay: f64,
    pub update_every: u64,
    pub t_min: f64,
    pub current: f64,
    pub since_update: u64,
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        TemperatureSchedule::new(1000.0, 0.99, 1000, 0.1)
    }
}

impl TemperatureSchedule {
    pub fn new(t0: f64, decay: f64, update_every: u64, t_min: f64) -> Self {
        TemperatureSchedule {
            t0,
            decay,
            update_every,
            t_min,
            current: t0.max(t_min),
            since_update: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0) || !(self.t0 > 0.0) {
            return config("temperatures must be positive");
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return config(format!("decay must be in (0, 1], got {}", self.decay));
        }
        if self.update_every == 0 {
            return config("update_every must be at least 1");
        }
        Ok(())
    }

    /// Schedule at its initial temperature.
    pub fn restart(&self) -> Self {
        TemperatureSchedule::new(self.t0, self.decay, self.update_every, self.t_min)
    }

    /// Records `ticks` elapsed ticks, applying one decay per completed block.
    pub fn advance(&mut self, ticks: u64) {
        self.since_update += ticks;
        while self.since_update >= self.update_every {
            self.since_update -= self.update_every;
            self.current = (self.current * self.decay).max(self.t_min);
        }
    }

    pub fn after(mut self, ticks: u64) -> Self {
        self.advance(ticks);
        self
    }
}
