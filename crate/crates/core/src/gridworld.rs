//! Flag-collection gridworld.
//!
//! The agent starts in one corner and must reach the opposite corner. Flags
//! are placed in the cells around the goal (Chebyshev radius, goal excluded).
//! Moving onto a flag collects it; the only reward is paid on reaching the
//! goal and equals the number of flags collected so far.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, usage, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub x: usize,
    pub y: usize,
}

impl Position {
    pub const fn new(x: usize, y: usize) -> Self {
        Position { x, y }
    }

    pub fn chebyshev(self, other: Position) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

/// Movement action. `x` is the column, `y` the row; `Up` decrements `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const COUNT: usize = 4;
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub width: usize,
    pub height: usize,
    pub start: Position,
    pub goal: Position,
    pub flag_zone_radius: usize,
    pub max_steps: u32,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            width: 10,
            height: 10,
            start: Position::new(0, 0),
            goal: Position::new(9, 9),
            flag_zone_radius: 2,
            max_steps: 1000,
        }
    }
}

impl WorldConfig {
    pub fn contains(&self, p: Position) -> bool {
        p.x < self.width && p.y < self.height
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return config("grid dimensions must be positive");
        }
        if !self.contains(self.start) || !self.contains(self.goal) {
            return config("start and goal must lie inside the grid");
        }
        if self.start == self.goal {
            return config("start and goal must differ");
        }
        if self.flag_zone_radius < 1 {
            return config("flag_zone_radius must be at least 1");
        }
        if self.max_steps < 1 {
            return config("max_steps must be at least 1");
        }
        Ok(())
    }

    /// Cells within `flag_zone_radius` (Chebyshev) of the goal, excluding the
    /// goal, in row-major order.
    pub fn flag_zone(&self) -> Vec<Position> {
        let r = self.flag_zone_radius;
        let g = self.goal;
        let mut zone = Vec::new();
        for y in g.y.saturating_sub(r)..=(g.y + r).min(self.height.saturating_sub(1)) {
            for x in g.x.saturating_sub(r)..=(g.x + r).min(self.width.saturating_sub(1)) {
                let p = Position::new(x, y);
                if p != g {
                    zone.push(p);
                }
            }
        }
        zone
    }

    /// Moves one cell in the action's direction, staying put at the border.
    pub fn apply_move(&self, p: Position, action: Action) -> Position {
        match action {
            Action::Up => Position::new(p.x, p.y.saturating_sub(1)),
            Action::Down => Position::new(p.x, (p.y + 1).min(self.height - 1)),
            Action::Left => Position::new(p.x.saturating_sub(1), p.y),
            Action::Right => Position::new((p.x + 1).min(self.width - 1), p.y),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagLayout {
    flags: Vec<Position>,
}

impl FlagLayout {
    /// Builds a layout, checking that every flag is a distinct flag-zone cell.
    pub fn new(config: &WorldConfig, mut flags: Vec<Position>) -> Result<Self> {
        let zone = config.flag_zone();
        flags.sort();
        if flags.windows(2).any(|w| w[0] == w[1]) {
            return config_err("flag positions must be distinct");
        }
        if let Some(p) = flags.iter().find(|p| !zone.contains(p)) {
            return config_err(&format!(
                "flag at ({}, {}) is outside the flag zone",
                p.x, p.y
            ));
        }
        Ok(FlagLayout { flags })
    }

    /// Every flag-zone cell carries a flag.
    pub fn full(config: &WorldConfig) -> Self {
        let mut flags = config.flag_zone();
        flags.sort();
        FlagLayout { flags }
    }

    pub fn positions(&self) -> &[Position] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }
}

fn config_err<T>(msg: &str) -> Result<T> {
    config(msg)
}

/// Draws `n_flags` distinct flag-zone cells uniformly without replacement.
pub fn sample_flag_layout<R: Rng + ?Sized>(
    config: &WorldConfig,
    n_flags: usize,
    rng: &mut R,
) -> Result<FlagLayout> {
    let zone = config.flag_zone();
    if n_flags < 1 || n_flags > zone.len() {
        return config_err(&format!(
            "n_flags must be in 1..={}, got {n_flags}",
            zone.len()
        ));
    }
    let mut flags: Vec<Position> = index::sample(rng, zone.len(), n_flags)
        .into_iter()
        .map(|i| zone[i])
        .collect();
    flags.sort();
    Ok(FlagLayout { flags })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldState {
    pub agent: Position,
    pub remaining: Vec<Position>,
    pub steps: u32,
    pub done: bool,
    pub flags_collected: u32,
}

impl WorldState {
    pub fn reset(config: &WorldConfig, layout: &FlagLayout) -> Self {
        WorldState {
            agent: config.start,
            remaining: layout.positions().to_vec(),
            steps: 0,
            done: false,
            flags_collected: 0,
        }
    }

    pub fn initial_flags(&self) -> usize {
        self.remaining.len() + self.flags_collected as usize
    }

    /// In-place form of [`step`].
    pub fn advance(&mut self, action: Action, config: &WorldConfig) -> Result<Transition> {
        if self.done {
            return usage("cannot step a finished episode");
        }
        let from = self.agent;
        let to = config.apply_move(from, action);
        self.agent = to;
        self.steps += 1;

        let picked_flag = match self.remaining.iter().position(|&p| p == to) {
            Some(i) => {
                self.remaining.swap_remove(i);
                self.flags_collected += 1;
                true
            }
            None => false,
        };

        let reached_goal = to == config.goal;
        let timed_out = !reached_goal && self.steps >= config.max_steps;
        self.done = reached_goal || timed_out;
        let reward = if reached_goal {
            self.flags_collected as f64
        } else {
            0.0
        };

        Ok(Transition {
            from,
            action,
            to,
            picked_flag,
            reached_goal,
            timed_out,
            reward,
        })
    }
}

/// One environment transition `(s, a, s', terminal, r)` plus pickup info.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub from: Position,
    pub action: Action,
    pub to: Position,
    /// A flag sat on `to` when the agent arrived (it is now collected).
    pub picked_flag: bool,
    pub reached_goal: bool,
    pub timed_out: bool,
    pub reward: f64,
}

impl Transition {
    pub fn terminal(&self) -> bool {
        self.reached_goal || self.timed_out
    }
}

pub fn step(
    state: &WorldState,
    action: Action,
    config: &WorldConfig,
) -> Result<(WorldState, Transition)> {
    let mut next = state.clone();
    let t = next.advance(action, config)?;
    Ok((next, t))
}

/// Discounted return of an episode whose only reward is paid on the goal step.
pub fn episode_return(
    steps_to_goal: u32,
    flags_collected: u32,
    reached_goal: bool,
    gamma: f64,
) -> f64 {
    if !reached_goal {
        return 0.0;
    }
    gamma.powi(steps_to_goal as i32) * flags_collected as f64
}
