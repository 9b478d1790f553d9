use thiserror::Error;

use crate::dynamics::{MoveMode, ParticleKind};
use crate::world::{Cell, WorldError};

/// Failure modes shared by the collectors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollectError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("expected {expected} particles, got {got}")]
    WrongKind {
        expected: ParticleKind,
        got: ParticleKind,
    },
    #[error("{0} moves are not supported by this collector")]
    UnsupportedMode(MoveMode),
    #[error("configuration has no particles")]
    NoParticles,
    #[error("need at least two distinct positions, have {0}")]
    TooFewPositions(usize),
    #[error("workspace has no target cells")]
    NoTarget,
    #[error("{to} is unreachable from {from}")]
    Unreachable { from: Cell, to: Cell },
    #[error("no command sequence collects the swarm ({nodes_expanded} configurations explored)")]
    Infeasible { nodes_expanded: u64 },
    #[error("search exceeded its node budget of {budget}")]
    NodeBudgetExhausted { budget: u64 },
    #[error("used {used} commands, over the budget of {budget} (bound factor {factor})")]
    CommandBudgetExceeded { used: u64, budget: u64, factor: f64 },
}

impl CollectError {
    /// True for the budget-exceeded family (node or command budget).
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            CollectError::NodeBudgetExhausted { .. } | CollectError::CommandBudgetExceeded { .. }
        )
    }
}

pub(crate) fn require_kind(got: ParticleKind, expected: ParticleKind) -> Result<(), CollectError> {
    if got == expected {
        Ok(())
    } else {
        Err(CollectError::WrongKind { expected, got })
    }
}

/// `factor * base`, saturating, rounded down.
pub(crate) fn scaled_budget(factor: f64, base: u128) -> u64 {
    let v = factor * base as f64;
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v.max(0.0) as u64
    }
}
