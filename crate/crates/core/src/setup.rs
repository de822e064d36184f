//! Named experiment presets.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::experiment::ExperimentConfig;
use crate::representation::RepresentationKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetupName {
    /// `Global-N-8`: global representation trained on `N` flags.
    Global(u8),
    /// Compact global representation trained on 8 flags.
    Compact,
    Local1,
    Local8,
}

impl SetupName {
    pub fn all() -> Vec<SetupName> {
        let mut v: Vec<SetupName> = (1..=8).map(SetupName::Global).collect();
        v.extend([SetupName::Compact, SetupName::Local1, SetupName::Local8]);
        v
    }

    pub fn n_train_flags(self) -> usize {
        match self {
            SetupName::Global(n) => n as usize,
            SetupName::Compact | SetupName::Local8 => 8,
            SetupName::Local1 => 1,
        }
    }

    pub fn representation(self) -> RepresentationKind {
        match self {
            SetupName::Global(n) => RepresentationKind::Global {
                n_train_flags: n as usize,
            },
            SetupName::Compact => RepresentationKind::CompactGlobal,
            SetupName::Local1 | SetupName::Local8 => RepresentationKind::Local,
        }
    }

    /// Preset with default learning, schedule and testing parameters.
    pub fn config(self) -> ExperimentConfig {
        ExperimentConfig {
            representation: self.representation(),
            n_train_flags: self.n_train_flags(),
            ..ExperimentConfig::default()
        }
    }
}

impl fmt::Display for SetupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetupName::Global(n) => write!(f, "Global-{n}-8"),
            SetupName::Compact => f.write_str("Compact"),
            SetupName::Local1 => f.write_str("Local-1-8"),
            SetupName::Local8 => f.write_str("Local-8-8"),
        }
    }
}

impl FromStr for SetupName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "compact" | "compact-global" => return Ok(SetupName::Compact),
            "local-1-8" => return Ok(SetupName::Local1),
            "local-8-8" => return Ok(SetupName::Local8),
            _ => {}
        }
        if let Some(n) = lower
            .strip_prefix("global-")
            .and_then(|rest| rest.strip_suffix("-8"))
            .and_then(|n| n.parse::<u8>().ok())
        {
            if (1..=8).contains(&n) {
                return Ok(SetupName::Global(n));
            }
        }
        Err(Error::Usage(format!("unknown setup '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in SetupName::all() {
            assert_eq!(s.to_string().parse::<SetupName>().unwrap(), s);
            assert!(s.config().validate().is_ok());
        }
        assert_eq!(SetupName::all().len(), 11);
        assert!("Global-9-8".parse::<SetupName>().is_err());
        assert!("Global-0-8".parse::<SetupName>().is_err());
        assert!("nope".parse::<SetupName>().is_err());
    }

    #[test]
    fn presets() {
        let c = SetupName::Compact.config();
        assert_eq!(c.representation.channel_count(), 3);
        assert_eq!(c.n_train_flags, 8);
        let l = SetupName::Local1.config();
        assert_eq!(l.representation.channel_count(), 2);
        assert_eq!(l.n_train_flags, 1);
        let g = SetupName::Global(8).config();
        assert_eq!(g.dims().len(), 3600);
        assert_eq!(
            (g.params.alpha, g.params.gamma, g.params.q_init),
            (0.1, 0.999, 0.1)
        );
        assert_eq!(
            (
                g.schedule.t0,
                g.schedule.decay,
                g.schedule.update_every,
                g.schedule.t_min
            ),
            (1000.0, 0.99, 1000, 0.1)
        );
        assert_eq!(
            (g.episodes, g.n_tests, g.n_runs, g.test_temperature),
            (10_000, 1000, 30, 0.1)
        );
    }
}
