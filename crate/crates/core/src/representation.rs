//! Flag-channel encodings: the third dimension of the tabular state.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::gridworld::Position;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepresentationKind {
    /// One channel per remaining-flag count, `0..=n_train_flags`.
    Global { n_train_flags: usize },
    /// Three channels: none left, one left, more than one left.
    CompactGlobal,
    /// Two channels: whether a flag was found at the current cell.
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Training,
    Testing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StateIndex {
    pub x: usize,
    pub y: usize,
    pub channel: usize,
}

impl RepresentationKind {
    pub fn channel_count(self) -> usize {
        match self {
            RepresentationKind::Global { n_train_flags } => n_train_flags + 1,
            RepresentationKind::CompactGlobal => 3,
            RepresentationKind::Local => 2,
        }
    }

    /// Maps an observation to its state index.
    ///
    /// Global tables are indexed by the remaining-flag count. A table trained
    /// with `N` flags has no channel above `N`, so at test time the channel is
    /// held at `N` until fewer than `N` flags remain.
    pub fn encode(
        self,
        pos: Position,
        remaining: usize,
        flag_at_pos: bool,
        phase: Phase,
    ) -> Result<StateIndex> {
        let channel = match (self, phase) {
            (RepresentationKind::Global { n_train_flags }, Phase::Training) => {
                if remaining > n_train_flags {
                    return usage(format!(
                        "{remaining} remaining flags exceeds the {n_train_flags} training flags"
                    ));
                }
                remaining
            }
            (RepresentationKind::Global { n_train_flags }, Phase::Testing) => {
                remaining.min(n_train_flags)
            }
            (RepresentationKind::CompactGlobal, _) => remaining.min(2),
            (RepresentationKind::Local, _) => flag_at_pos as usize,
        };
        Ok(StateIndex {
            x: pos.x,
            y: pos.y,
            channel,
        })
    }
}
