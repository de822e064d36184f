//! Flat `key=value` configuration on top of the named presets.

use anyhow::{anyhow, bail, Context, Result};
use deqt::entropy::ValueSource;
use deqt::{ExperimentConfig, Position, SetupName, TemperatureClock};

/// Keys accepted by `--set` and config files, in echo order.
pub const KEYS: &[&str] = &[
    "episodes",
    "runs",
    "tests",
    "seed",
    "bins",
    "degenerate_floor",
    "value_source",
    "include_channel_zero",
    "alpha",
    "gamma",
    "q_init",
    "t0",
    "decay",
    "update_every",
    "t_min",
    "temperature_clock",
    "timeout_terminal_bootstrap",
    "test_temperature",
    "snapshot_stride",
    "width",
    "height",
    "flag_zone_radius",
    "max_steps",
];

pub type Pairs = Vec<(String, String)>;

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| anyhow!("invalid value '{value}' for '{key}'"))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => bail!("invalid boolean '{value}' for '{key}'"),
    }
}

pub fn apply(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "episodes" => cfg.episodes = num(key, value)?,
        "runs" => cfg.n_runs = num(key, value)?,
        "tests" => cfg.n_tests = num(key, value)?,
        "seed" => cfg.master_seed = num(key, value)?,
        "bins" => cfg.histogram.n_bins = num(key, value)?,
        "degenerate_floor" => cfg.histogram.degenerate_floor = num(key, value)?,
        "value_source" => {
            cfg.value_source = match value.trim() {
                "state_action" => ValueSource::StateAction,
                "state_max" => ValueSource::StateMax,
                _ => bail!("value_source must be state_action or state_max"),
            }
        }
        "include_channel_zero" => cfg.include_channel_zero = flag(key, value)?,
        "alpha" => cfg.params.alpha = num(key, value)?,
        "gamma" => cfg.params.gamma = num(key, value)?,
        "q_init" => cfg.params.q_init = num(key, value)?,
        "t0" => {
            cfg.schedule.t0 = num(key, value)?;
            cfg.schedule = cfg.schedule.restart();
        }
        "decay" => cfg.schedule.decay = num(key, value)?,
        "update_every" => cfg.schedule.update_every = num(key, value)?,
        "t_min" => {
            cfg.schedule.t_min = num(key, value)?;
            cfg.schedule = cfg.schedule.restart();
        }
        "temperature_clock" => {
            cfg.temperature_clock = match value.trim() {
                "actions" => TemperatureClock::Actions,
                "episodes" => TemperatureClock::Episodes,
                _ => bail!("temperature_clock must be actions or episodes"),
            }
        }
        "timeout_terminal_bootstrap" => cfg.timeout_terminal_bootstrap = flag(key, value)?,
        "test_temperature" => cfg.test_temperature = num(key, value)?,
        "snapshot_stride" => cfg.snapshot_stride = num(key, value)?,
        // Resizing keeps the start/goal on opposite corners.
        "width" => {
            cfg.world.width = num(key, value)?;
            cfg.world.goal = Position::new(cfg.world.width.saturating_sub(1), cfg.world.goal.y);
        }
        "height" => {
            cfg.world.height = num(key, value)?;
            cfg.world.goal = Position::new(cfg.world.goal.x, cfg.world.height.saturating_sub(1));
        }
        "flag_zone_radius" => cfg.world.flag_zone_radius = num(key, value)?,
        "max_steps" => cfg.world.max_steps = num(key, value)?,
        _ => bail!(
            "unknown configuration key '{key}' (known: {})",
            KEYS.join(", ")
        ),
    }
    Ok(())
}

/// Parses `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("expected key=value, got '{s}'"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Reads a flat TOML file of `key = value` pairs. A `setup` key is returned
/// separately when present.
pub fn read_config_file(text: &str) -> Result<(Option<String>, Pairs)> {
    let table: toml::Table = toml::from_str(text).context("config file is not valid TOML")?;
    let mut setup = None;
    let mut pairs = Vec::new();
    for (k, v) in table {
        let value = match v {
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => format!("{f:?}"),
            toml::Value::Boolean(b) => b.to_string(),
            other => bail!("unsupported value for '{k}': {other}"),
        };
        if k == "setup" {
            setup = Some(value);
        } else {
            pairs.push((k, value));
        }
    }
    Ok((setup, pairs))
}

fn get(cfg: &ExperimentConfig, key: &str) -> String {
    let f = |x: f64| format!("{x:?}");
    match key {
        "episodes" => cfg.episodes.to_string(),
        "runs" => cfg.n_runs.to_string(),
        "tests" => cfg.n_tests.to_string(),
        "seed" => cfg.master_seed.to_string(),
        "bins" => cfg.histogram.n_bins.to_string(),
        "degenerate_floor" => f(cfg.histogram.degenerate_floor),
        "value_source" => match cfg.value_source {
            ValueSource::StateAction => "\"state_action\"".into(),
            ValueSource::StateMax => "\"state_max\"".into(),
        },
        "include_channel_zero" => cfg.include_channel_zero.to_string(),
        "alpha" => f(cfg.params.alpha),
        "gamma" => f(cfg.params.gamma),
        "q_init" => f(cfg.params.q_init),
        "t0" => f(cfg.schedule.t0),
        "decay" => f(cfg.schedule.decay),
        "update_every" => cfg.schedule.update_every.to_string(),
        "t_min" => f(cfg.schedule.t_min),
        "temperature_clock" => match cfg.temperature_clock {
            TemperatureClock::Actions => "\"actions\"".into(),
            TemperatureClock::Episodes => "\"episodes\"".into(),
        },
        "timeout_terminal_bootstrap" => cfg.timeout_terminal_bootstrap.to_string(),
        "test_temperature" => f(cfg.test_temperature),
        "snapshot_stride" => cfg.snapshot_stride.to_string(),
        "width" => cfg.world.width.to_string(),
        "height" => cfg.world.height.to_string(),
        "flag_zone_radius" => cfg.world.flag_zone_radius.to_string(),
        "max_steps" => cfg.world.max_steps.to_string(),
        _ => unreachable!("unknown key {key}"),
    }
}

/// Fully resolved configuration as a config file that reproduces the run.
pub fn echo(setup: SetupName, cfg: &ExperimentConfig) -> String {
    let mut out = format!("setup = \"{setup}\"\n");
    for key in KEYS {
        out.push_str(&format!("{key} = {}\n", get(cfg, key)));
    }
    out
}
