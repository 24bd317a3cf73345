//! The periodic adjoint `L(t)` and the environmental-sustainability gate.
//!
//! Every scenario's adjoint is `λᵢ(t) = μᵢ·L(t)`, where `L` is the unique
//! T-periodic solution of `L̇ = 1 + (ρ + δ(t))·L`. On the first subperiod
//! `L = m₁e^{s₁u} − 1/s₁`, on the second `L = m₂e^{s₂u} − 1/s₂`, with `u`
//! measured from the start of the period.

use serde::Serialize;

use crate::cycle::{PhaseCycle, Term};
use crate::model::{shadow_weights, CoalitionStructure, GameParams, Player, ShadowWeights};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointCycle {
    /// `L(t)` as a cycle.
    pub cycle: PhaseCycle,
    pub m1: f64,
    pub m2: f64,
    pub s1: f64,
    pub s2: f64,
}

impl AdjointCycle {
    pub fn eval(&self, t: f64) -> f64 {
        self.cycle.eval(t)
    }

    /// `L(0)`, the per-unit-weight equilibrium initial value `m₁ − 1/s₁`.
    pub fn initial_value(&self) -> f64 {
        self.m1 - 1.0 / self.s1
    }

    /// Equilibrium initial value of an adjoint with tax weight `weight`.
    pub fn lambda_hlc(&self, weight: f64) -> f64 {
        weight * self.initial_value()
    }

    /// `L` at the switching instant.
    pub fn at_switch(&self) -> f64 {
        let split = self.cycle.switch_time();
        self.m1 * (self.s1 * split).exp() - 1.0 / self.s1
    }

    /// `(min L, max L)` over a period. `L` is monotone on each subperiod, so
    /// the extrema sit at `0` and `τT`.
    pub fn range(&self) -> (f64, f64) {
        let (a, b) = (self.initial_value(), self.at_switch());
        (a.min(b), a.max(b))
    }
}

/// Builds `L(t)` from its closed-form coefficients.
pub fn shadow_cycle(params: &GameParams) -> AdjointCycle {
    let (s1, s2) = (params.s1(), params.s2());
    let (t, tau) = (params.period, params.tau);
    let back = (s2 * t * (tau - 1.0)).exp();
    // m₁ vanishes identically when s₁ = s₂; the denominator stays positive.
    let m1 = (s2 - s1) * (1.0 - back) / (s1 * s2 * ((s1 * tau * t).exp() - back));
    let m2 = (-s2 * t).exp() * (m1 - 1.0 / s1 + 1.0 / s2);
    let cycle = PhaseCycle::new(
        t,
        tau,
        vec![Term::new(m1, s1), Term::constant(-1.0 / s1)],
        vec![Term::new(m2, s2), Term::constant(-1.0 / s2)],
    );
    AdjointCycle { cycle, m1, m2, s1, s2 }
}

/// Sustainability of one player's interior control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlayerSustainability {
    pub player: Player,
    pub weight: f64,
    /// Lowest value of `μᵢL(t)` over a period.
    pub min_adjoint: f64,
    /// Highest value of `μᵢL(t)` over a period.
    pub max_adjoint: f64,
    /// `−aᵢbᵢ/ξᵢ`.
    pub floor: f64,
    /// Distance to the nearer edge of `[floor, 0]`; negative when outside.
    pub margin: f64,
    pub sustainable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SustainabilityReport {
    pub structure: CoalitionStructure,
    pub players: [PlayerSustainability; 3],
}

impl SustainabilityReport {
    pub fn all_sustainable(&self) -> bool {
        self.players.iter().all(|p| p.sustainable)
    }

    /// The player with the smallest margin.
    pub fn worst(&self) -> &PlayerSustainability {
        self.players
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
            .expect("three players")
    }
}

pub(crate) fn check_weights(
    params: &GameParams,
    adjoint: &AdjointCycle,
    weights: &ShadowWeights,
) -> [PlayerSustainability; 3] {
    let (lo, hi) = adjoint.range();
    Player::ALL.map(|p| {
        let mu = weights.of(p);
        let (min_adjoint, max_adjoint) = if mu >= 0.0 { (mu * lo, mu * hi) } else { (mu * hi, mu * lo) };
        let floor = params.player(p).adjoint_floor();
        let margin = (min_adjoint - floor).min(-max_adjoint);
        PlayerSustainability {
            player: p,
            weight: mu,
            min_adjoint,
            max_adjoint,
            floor,
            margin,
            sustainable: margin >= 0.0,
        }
    })
}

/// Whether every player's control stays inside `[−aᵢbᵢ/ξᵢ, 0]` under `structure`.
pub fn check_sustainable(
    params: &GameParams,
    adjoint: &AdjointCycle,
    structure: CoalitionStructure,
) -> SustainabilityReport {
    let weights = shadow_weights(structure, params);
    SustainabilityReport {
        structure,
        players: check_weights(params, adjoint, &weights),
    }
}
