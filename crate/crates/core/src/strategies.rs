//! Open-loop emission strategies.
//!
//! In the interior regime every player's control is
//! `vᵢ(t) = bᵢ + (ξᵢ/aᵢ)·μᵢ·L(t)`, so the five coalition structures only
//! differ through their shadow weights. A myopic singleton has `μ₃ = 0` and
//! emits at its maximum rate.

use serde::Serialize;

use crate::adjoint::{check_sustainable, AdjointCycle};
use crate::cycle::PhaseCycle;
use crate::error::{GameError, Result};
use crate::model::{shadow_weights, CoalitionStructure, GameParams, Player, ShadowWeights};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyProfile {
    /// `None` for profiles that are not one of the five structures (e.g. the
    /// punishing profiles behind singleton characteristic values).
    pub structure: Option<CoalitionStructure>,
    pub weights: ShadowWeights,
    /// Emission paths of players 1, 2, 3.
    pub v: [PhaseCycle; 3],
    /// Pollution inflow `Σ ξᵢ vᵢ`.
    pub inflow: PhaseCycle,
}

impl StrategyProfile {
    pub fn emission(&self, p: Player) -> &PhaseCycle {
        &self.v[p.index()]
    }
}

/// Profile for arbitrary weights, without the sustainability gate.
pub fn profile_for_weights(
    params: &GameParams,
    adjoint: &AdjointCycle,
    weights: ShadowWeights,
) -> StrategyProfile {
    let v = Player::ALL.map(|p| {
        let pp = params.player(p);
        adjoint
            .cycle
            .scale(pp.xi / pp.a * weights.of(p))
            .add_constant(pp.b)
    });
    let mut inflow = PhaseCycle::zero(params.period, params.tau);
    for p in Player::ALL {
        inflow = inflow
            .add(&v[p.index()].scale(params.player(p).xi))
            .expect("same geometry");
    }
    StrategyProfile {
        structure: None,
        weights,
        v,
        inflow,
    }
}

/// Interior strategies of every player under `structure`. Refuses parameter
/// sets that push any player's control onto its bounds.
pub fn build_profile(
    params: &GameParams,
    adjoint: &AdjointCycle,
    structure: CoalitionStructure,
) -> Result<StrategyProfile> {
    let report = check_sustainable(params, adjoint, structure);
    if !report.all_sustainable() {
        let worst = report.worst();
        return Err(GameError::NotSustainable {
            structure,
            player: worst.player,
            margin: worst.margin,
        });
    }
    let mut profile = profile_for_weights(params, adjoint, shadow_weights(structure, params));
    profile.structure = Some(structure);
    Ok(profile)
}

/// Instantaneous production payoff `aᵢvᵢ(bᵢ − vᵢ/2)` as a cycle.
pub fn production_flow(params: &GameParams, p: Player, v: &PhaseCycle) -> PhaseCycle {
    let pp = params.player(p);
    let sq = v.mul(v).expect("same geometry");
    v.scale(pp.a * pp.b).add(&sq.scale(-pp.a / 2.0)).expect("same geometry")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjoint::shadow_cycle;

    fn reference() -> (GameParams, AdjointCycle) {
        let p = GameParams::reference();
        let l = shadow_cycle(&p);
        (p, l)
    }

    #[test]
    fn myopic_singleton_emits_maximum() {
        let (p, l) = reference();
        for s in [CoalitionStructure::Pi2, CoalitionStructure::Pi3] {
            let prof = build_profile(&p, &l, s).unwrap();
            assert!(prof.emission(Player::Three).is_piecewise_constant());
            assert_eq!(prof.emission(Player::Three).eval(0.37), 10.0);
        }
    }

    #[test]
    fn cooperative_initial_emission() {
        let (p, l) = reference();
        let prof = build_profile(&p, &l, CoalitionStructure::Pi1).unwrap();
        let v1 = prof.emission(Player::One).eval(0.0);
        assert!((v1 - (10.0 + 0.06 * l.lambda_hlc(9.0))).abs() < 1e-12);
        assert!((v1 - 9.414_433_432_682_655).abs() < 1e-10);
    }

    #[test]
    fn farsighted_coalition_matches_grand_for_players_one_and_two() {
        let (p, l) = reference();
        let grand = build_profile(&p, &l, CoalitionStructure::Pi1).unwrap();
        let pi3 = build_profile(&p, &l, CoalitionStructure::Pi3).unwrap();
        for t in [0.0, 0.2, 0.55, 0.9] {
            assert_eq!(grand.v[0].eval(t), pi3.v[0].eval(t));
            assert_eq!(grand.v[1].eval(t), pi3.v[1].eval(t));
        }
    }

    #[test]
    fn myopic_follows_partner_in_mixed_coalitions() {
        let (p, l) = reference();
        for s in [CoalitionStructure::Pi41, CoalitionStructure::Pi42] {
            let prof = build_profile(&p, &l, s).unwrap();
            assert!(!prof.emission(Player::Three).is_piecewise_constant());
        }
    }

    #[test]
    fn inflow_structure() {
        let (p, l) = reference();
        let prof = build_profile(&p, &l, CoalitionStructure::Pi1).unwrap();
        let base: f64 = p.players.iter().map(|pp| pp.xi * pp.b).sum();
        let two_k_mu: f64 = p.players.iter().map(|pp| 2.0 * pp.k() * 9.0).sum();
        for t in [0.0, 0.3, 0.8] {
            assert!((prof.inflow.eval(t) - (base + two_k_mu * l.eval(t))).abs() < 1e-12);
        }
    }

    #[test]
    fn grand_coalition_is_most_conservative() {
        let (p, l) = reference();
        let grand = build_profile(&p, &l, CoalitionStructure::Pi1).unwrap();
        for s in CoalitionStructure::ALL {
            let prof = build_profile(&p, &l, s).unwrap();
            for k in 0..200 {
                let t = k as f64 / 200.0;
                for i in 0..3 {
                    assert!(grand.v[i].eval(t) <= prof.v[i].eval(t) + 1e-12);
                }
                assert!(grand.inflow.eval(t) <= prof.inflow.eval(t) + 1e-12);
            }
        }
    }

    #[test]
    fn gate_rejects_heavy_tax() {
        let mut p = GameParams::reference();
        p.players[1].q = 400.0;
        let l = shadow_cycle(&p);
        let err = build_profile(&p, &l, CoalitionStructure::Pi1).unwrap_err();
        assert!(matches!(err, GameError::NotSustainable { .. }));
    }

    #[test]
    fn production_flow_identity() {
        let (p, l) = reference();
        let prof = build_profile(&p, &l, CoalitionStructure::Pi41).unwrap();
        for pl in Player::ALL {
            let pp = p.player(pl);
            let f = production_flow(&p, pl, prof.emission(pl));
            for t in [0.1, 0.6] {
                let v = prof.emission(pl).eval(t);
                assert!((f.eval(t) - pp.a * v * (pp.b - v / 2.0)).abs() < 1e-10);
            }
        }
    }
}
