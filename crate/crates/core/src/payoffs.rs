//! Discounted subgame payoffs, characteristic values and the cooperation
//! surplus.
//!
//! A subgame starts at `eps` from stock `z_eps`. Player `i`'s payoff under a
//! profile splits into a periodic production part and a tax on the stock,
//! and the stock itself splits into its limit cycle plus a decaying
//! transient, so
//!
//! `Kᵢ = ∫_ε^∞ e^{−ρ(t−ε)}pᵢ(t)dt − qᵢ[(z_eps − z̄(ε))·h(ε) + ∫_ε^∞ e^{−ρ(t−ε)}z̄(t)dt]`
//!
//! with `h` the discount kernel below. Every integral is exact.

use serde::Serialize;

use crate::cycle::{reduce, Phase};
use crate::error::{GameError, Result};
use crate::game::{Game, Scenario};
use crate::model::{CoalitionStructure, GameParams, Player};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubgameContext {
    pub eps: f64,
    pub z_eps: f64,
}

impl SubgameContext {
    pub fn new(eps: f64, z_eps: f64) -> Result<SubgameContext> {
        if !(eps >= 0.0 && z_eps >= 0.0) {
            return Err(GameError::InvalidParams(format!(
                "subgame needs eps >= 0 and z_eps >= 0 (got {eps}, {z_eps})"
            )));
        }
        Ok(SubgameContext { eps, z_eps })
    }

    /// Subgame at `eps` on the cooperative trajectory.
    pub fn cooperative(game: &Game, eps: f64) -> Result<SubgameContext> {
        SubgameContext::new(eps, game.cooperative_state(eps)?)
    }
}

struct KernelConstants {
    s1: f64,
    s2: f64,
    split: f64,
    /// `e^{(s₁τ + s₂(1−τ))T}`
    big: f64,
    o: f64,
}

fn kernel_constants(params: &GameParams) -> KernelConstants {
    let (s1, s2) = (params.s1(), params.s2());
    let (t, split) = (params.period, params.switch_time());
    let big = ((s1 * params.tau + s2 * (1.0 - params.tau)) * t).exp();
    let o = (1.0 - (-s1 * split).exp()) / s1
        - ((s2 - s1) * split).exp() * ((-s2 * t).exp() - (-s2 * split).exp()) / s2;
    KernelConstants { s1, s2, split, big, o }
}

/// `h(ε) = ∫_ε^∞ e^{−ρ(t−ε) − ∫_ε^t δ(s)ds} dt`, the present value of a unit
/// stock perturbation at `ε`. T-periodic in `ε`.
pub fn discount_kernel_h(params: &GameParams, eps: f64) -> f64 {
    let KernelConstants { s1, s2, split, big, o } = kernel_constants(params);
    let u = reduce(eps, params.period);
    let lead = big / (big - 1.0) * o;
    match Phase::at(u, params.period, params.tau) {
        Phase::First => {
            let g = (s1 * u).exp();
            lead * g - (g - 1.0) / s1
        }
        Phase::Second => {
            let w = ((u - split) * s2).exp();
            let g = (s1 * split).exp() * w;
            lead * g - (g - w) / s1 + (1.0 - w) / s2
        }
    }
}

/// `dh/dε` (one-sided at the switching instants).
pub fn discount_kernel_slope(params: &GameParams, eps: f64) -> f64 {
    let KernelConstants { s1, s2, split, big, .. } = kernel_constants(params);
    let u = reduce(eps, params.period);
    let t = params.period;
    match Phase::at(u, params.period, params.tau) {
        Phase::First => {
            (s1 * u).exp() * (s2 - s1) * (1.0 - (s2 * (1.0 - params.tau) * t).exp())
                / (s2 * (big - 1.0))
        }
        Phase::Second => {
            (s2 * (u - split)).exp() * (s2 - s1) * ((s1 * split).exp() - 1.0) / (s1 * (big - 1.0))
        }
    }
}

/// Payoff of `p` in the subgame `ctx` when everyone follows `scenario`.
pub fn scenario_payoff(game: &Game, scenario: &Scenario, p: Player, ctx: &SubgameContext) -> f64 {
    let params = game.params();
    let rho = params.rho;
    let production = scenario.production(p).discounted_tail_integral(rho, ctx.eps);
    let q = params.player(p).q;
    if q == 0.0 {
        return production;
    }
    let zbar = scenario.zbar();
    let transient = (ctx.z_eps - zbar.eval(ctx.eps)) * discount_kernel_h(params, ctx.eps);
    production - q * (transient + zbar.discounted_tail_integral(rho, ctx.eps))
}

/// `Kᵢ^π` in the subgame `ctx`.
pub fn payoff(
    game: &Game,
    structure: CoalitionStructure,
    p: Player,
    ctx: &SubgameContext,
) -> Result<f64> {
    Ok(scenario_payoff(game, game.scenario(structure)?, p, ctx))
}

/// Payoff each player secures by leaving the grand coalition alone:
/// `(K₁^{π₄₂}, K₂^{π₄₁}, K₃^{π₃})`.
pub fn deviation_payoffs(game: &Game, ctx: &SubgameContext) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for p in Player::ALL {
        out[p.index()] = payoff(game, CoalitionStructure::deviation_of(p), p, ctx)?;
    }
    Ok(out)
}

/// Grand-coalition value `v(N)`.
pub fn grand_value(game: &Game, ctx: &SubgameContext) -> Result<f64> {
    let grand = game.scenario(CoalitionStructure::Pi1)?;
    Ok(Player::ALL
        .iter()
        .map(|&p| scenario_payoff(game, grand, p, ctx))
        .sum())
}

/// Max-min value of coalition `members` (empty, a singleton or all three).
/// A singleton plays its Nash strategy against opponents at full emissions.
pub fn characteristic_value(game: &Game, members: &[Player], ctx: &SubgameContext) -> Result<f64> {
    let mut sorted = members.to_vec();
    sorted.sort();
    sorted.dedup();
    match sorted.as_slice() {
        [] => Ok(0.0),
        [p] => Ok(scenario_payoff(game, game.punishing(*p)?, *p, ctx)),
        [_, _, _] => grand_value(game, ctx),
        other => Err(GameError::UnsupportedCoalition(other.len())),
    }
}

/// `SC(ε) = v(N) − K₁^{π₄₂} − K₂^{π₄₁} − K₃^{π₃}` on the cooperative trajectory.
pub fn cooperation_surplus(game: &Game, eps: f64) -> Result<f64> {
    let ctx = SubgameContext::cooperative(game, eps)?;
    surplus_at(game, &ctx)
}

pub fn surplus_at(game: &Game, ctx: &SubgameContext) -> Result<f64> {
    let dev = deviation_payoffs(game, ctx)?;
    Ok(grand_value(game, ctx)? - dev.iter().sum::<f64>())
}
