//! Three-player pollution control on a periodically switching environment.
//!
//! Players choose emissions, the stock decays at a rate that alternates
//! between two values every period, and two farsighted players pay a tax on
//! the stock while the third is myopic. The crate solves every coalition
//! structure in closed form and builds the cooperative allocations on top.

pub mod adjoint;
pub mod allocation;
pub mod cycle;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod model;
pub mod oracle;
pub mod payoffs;
pub mod stability;
pub mod strategies;

pub use allocation::{AllocationWeights, Imputation, StrongTcWitness, TimeConsistencyReport};
pub use adjoint::{AdjointCycle, PlayerSustainability, SustainabilityReport};
pub use cycle::{Phase, PhaseCycle, Term};
pub use dynamics::{LimitCycle, Trajectory};
pub use error::{GameError, Result};
pub use game::{Game, Scenario};
pub use model::{CoalitionStructure, GameParams, Player, PlayerParams, ShadowWeights};
pub use payoffs::SubgameContext;
pub use stability::{MbarCycle, StabilityReport, ZsetBounds};
pub use strategies::StrategyProfile;
