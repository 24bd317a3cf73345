//! A solved game: validated parameters, the adjoint cycle, and the strategy
//! profile plus stock limit cycle of every coalition structure.

use crate::adjoint::{check_sustainable, shadow_cycle, AdjointCycle, SustainabilityReport};
use crate::dynamics::{limit_cycle_state, trajectory, LimitCycle, Trajectory};
use crate::error::{GameError, Result};
use crate::model::{punishing_weights, CoalitionStructure, GameParams, Player};
use crate::strategies::{build_profile, production_flow, profile_for_weights, StrategyProfile};
use crate::cycle::PhaseCycle;

/// Strategies, production flows and stock limit cycle of one profile.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub profile: StrategyProfile,
    pub limit: LimitCycle,
    production: [PhaseCycle; 3],
}

impl Scenario {
    fn new(params: &GameParams, profile: StrategyProfile) -> Result<Scenario> {
        let limit = limit_cycle_state(params, &profile.inflow)?;
        let production = Player::ALL.map(|p| production_flow(params, p, profile.emission(p)));
        Ok(Scenario {
            profile,
            limit,
            production,
        })
    }

    /// `aᵢvᵢ(bᵢ − vᵢ/2)` for player `p`.
    pub fn production(&self, p: Player) -> &PhaseCycle {
        &self.production[p.index()]
    }

    pub fn zbar(&self) -> &PhaseCycle {
        &self.limit.zbar
    }

    pub fn trajectory(&self, params: &GameParams, z_start: f64, eps: f64) -> Trajectory {
        trajectory(params, self.profile.structure, &self.limit, z_start, eps)
    }
}

#[derive(Debug, Clone)]
pub struct Game {
    params: GameParams,
    adjoint: AdjointCycle,
    scenarios: Vec<Result<Scenario>>,
    punishing: Vec<Result<Scenario>>,
}

impl Game {
    /// Validates `params` and solves every scenario. Scenarios that fail the
    /// sustainability gate are kept as errors and reported on access.
    pub fn new(params: GameParams) -> Result<Game> {
        let params = params.validate()?;
        let adjoint = shadow_cycle(&params);
        let scenarios = CoalitionStructure::ALL
            .iter()
            .map(|&s| Scenario::new(&params, build_profile(&params, &adjoint, s)?))
            .collect();
        // The punished player keeps its Nash weight, exactly as in the
        // all-singleton structure, so that structure's gate applies.
        let nash_gate = check_sustainable(&params, &adjoint, CoalitionStructure::Pi2);
        let punishing = Player::ALL
            .iter()
            .map(|&p| {
                let ps = nash_gate.players[p.index()];
                if !ps.sustainable {
                    return Err(GameError::NotSustainable {
                        structure: CoalitionStructure::Pi2,
                        player: p,
                        margin: ps.margin,
                    });
                }
                let profile = profile_for_weights(&params, &adjoint, punishing_weights(p, &params));
                Scenario::new(&params, profile)
            })
            .collect();
        Ok(Game {
            params,
            adjoint,
            scenarios,
            punishing,
        })
    }

    pub fn params(&self) -> &GameParams {
        &self.params
    }

    pub fn adjoint(&self) -> &AdjointCycle {
        &self.adjoint
    }

    pub fn sustainability(&self, structure: CoalitionStructure) -> SustainabilityReport {
        check_sustainable(&self.params, &self.adjoint, structure)
    }

    pub fn scenario(&self, structure: CoalitionStructure) -> Result<&Scenario> {
        let idx = CoalitionStructure::ALL
            .iter()
            .position(|&s| s == structure)
            .expect("listed");
        self.scenarios[idx].as_ref().map_err(Clone::clone)
    }

    /// Player `p` at its Nash strategy, both opponents at maximum emissions.
    pub fn punishing(&self, p: Player) -> Result<&Scenario> {
        self.punishing[p.index()].as_ref().map_err(Clone::clone)
    }

    /// Stock on the cooperative trajectory from `z₀` at time 0.
    pub fn cooperative_state(&self, eps: f64) -> Result<f64> {
        let grand = self.scenario(CoalitionStructure::Pi1)?;
        Ok(grand.trajectory(&self.params, self.params.z0, 0.0).value(eps))
    }

    /// `δ(t)`.
    pub fn delta(&self, t: f64) -> f64 {
        self.params.delta_at(t)
    }
}
