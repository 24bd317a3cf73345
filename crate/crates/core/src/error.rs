use thiserror::Error;

use crate::model::{CoalitionStructure, Player};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{structure}: {player} is not environmentally sustainable (adjoint margin {margin:.6})")]
    NotSustainable {
        structure: CoalitionStructure,
        player: Player,
        margin: f64,
    },

    #[error("cycles have different period or split ({0})")]
    CycleMismatch(String),

    #[error("forcing rate {rate} resonates with decay on phase {phase}")]
    Resonance { phase: usize, rate: f64 },

    #[error("periodic boundary problem is singular (net decay over a period is zero)")]
    SingularPeriodicProblem,

    #[error("sustainably-cooperative principle is empty at eps={eps} (surplus {surplus:.6e})")]
    EmptyPrinciple { eps: f64, surplus: f64 },

    #[error("invalid allocation weights: {0}")]
    InvalidWeights(String),

    #[error("characteristic value of a {0}-player coalition is not defined here")]
    UnsupportedCoalition(usize),

    #[error("fixed-point iteration did not converge after {0} iterations")]
    NoConvergence(usize),
}

pub type Result<T, E = GameError> = std::result::Result<T, E>;
