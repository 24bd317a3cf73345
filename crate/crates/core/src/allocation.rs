//! Imputations in the sustainably-cooperative principle and their payment
//! schedules.
//!
//! `ζᵢ(ε) = Kᵢ^{dev}(ε) + αᵢ·SC(ε)`, where `Kᵢ^{dev}` is player i's payoff
//! when it leaves the grand coalition and the others stay together. The
//! payment flow `wᵢ = ρζᵢ − dζᵢ/dε` along the cooperative trajectory makes
//! the allocation time-consistent.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::switch_aligned_pieces;
use crate::error::{GameError, Result};
use crate::game::Game;
use crate::model::{CoalitionStructure, Player};
use crate::payoffs::{deviation_payoffs, discount_kernel_h, surplus_at, SubgameContext};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationWeights([f64; 3]);

impl AllocationWeights {
    pub fn new(alpha: [f64; 3]) -> Result<AllocationWeights> {
        if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(GameError::InvalidWeights(format!("{alpha:?} has an entry outside [0,1]")));
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(GameError::InvalidWeights(format!("{alpha:?} sums to {sum}, not 1")));
        }
        Ok(AllocationWeights(alpha))
    }

    pub fn equal() -> AllocationWeights {
        AllocationWeights([1.0 / 3.0; 3])
    }

    pub fn of(&self, p: Player) -> f64 {
        self.0[p.index()]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }
}

impl fmt::Display for AllocationWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.0[0], self.0[1], self.0[2])
    }
}

impl FromStr for AllocationWeights {
    type Err = GameError;

    fn from_str(s: &str) -> Result<AllocationWeights> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(GameError::InvalidWeights(format!("expected a1,a2,a3, got {s:?}")));
        }
        let mut alpha = [0.0; 3];
        for (slot, part) in alpha.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| GameError::InvalidWeights(format!("{part:?} is not a number")))?;
        }
        AllocationWeights::new(alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Imputation {
    pub eps: f64,
    pub zeta: [f64; 3],
    /// Deviation payoffs, the lower bounds of the principle.
    pub lower: [f64; 3],
    pub surplus: f64,
}

impl Imputation {
    pub fn total(&self) -> f64 {
        self.zeta.iter().sum()
    }
}

fn checked_surplus(game: &Game, ctx: &SubgameContext) -> Result<f64> {
    let surplus = surplus_at(game, ctx)?;
    if surplus < 0.0 {
        return Err(GameError::EmptyPrinciple { eps: ctx.eps, surplus });
    }
    Ok(surplus)
}

/// `ζ(ε)` on the cooperative trajectory.
pub fn zeta(game: &Game, alpha: &AllocationWeights, eps: f64) -> Result<Imputation> {
    let ctx = SubgameContext::cooperative(game, eps)?;
    let surplus = checked_surplus(game, &ctx)?;
    let lower = deviation_payoffs(game, &ctx)?;
    Ok(Imputation {
        eps,
        zeta: [0, 1, 2].map(|i| lower[i] + alpha.0[i] * surplus),
        lower,
        surplus,
    })
}

struct FlowTerms {
    /// `aᵢvᵢ(bᵢ − vᵢ/2)` of player i in its own deviation structure.
    dev_production: [f64; 3],
    co_production: [f64; 3],
    /// Deviation inflow minus cooperative inflow.
    inflow_gap: [f64; 3],
    z: f64,
    h: f64,
}

fn flow_terms(game: &Game, eps: f64) -> Result<FlowTerms> {
    let grand = game.scenario(CoalitionStructure::Pi1)?;
    let mut t = FlowTerms {
        dev_production: [0.0; 3],
        co_production: [0.0; 3],
        inflow_gap: [0.0; 3],
        z: game.cooperative_state(eps)?,
        h: discount_kernel_h(game.params(), eps),
    };
    for p in Player::ALL {
        let dev = game.scenario(CoalitionStructure::deviation_of(p))?;
        let i = p.index();
        t.dev_production[i] = dev.production(p).eval(eps);
        t.co_production[i] = grand.production(p).eval(eps);
        t.inflow_gap[i] = dev.profile.inflow.eval(eps) - grand.profile.inflow.eval(eps);
    }
    Ok(t)
}

/// Payment flow `w(ε) = ρζ(ε) − ζ'(ε)`.
///
/// A deviation payoff starts from the cooperative stock, so besides the
/// production and tax flows it carries `−qᵢh(ε)Δᵢ(ε)`, the value of the
/// stock gap that opens between the two inflows.
pub fn idp(game: &Game, alpha: &AllocationWeights, eps: f64) -> Result<[f64; 3]> {
    checked_surplus(game, &SubgameContext::cooperative(game, eps)?)?;
    let t = flow_terms(game, eps)?;
    let params = game.params();
    let q = |i: usize| params.players[i].q;
    let surplus_flow: f64 = (0..3)
        .map(|j| t.co_production[j] - t.dev_production[j] + t.h * q(j) * t.inflow_gap[j])
        .sum();
    Ok([0, 1, 2].map(|i| {
        t.dev_production[i] - q(i) * t.z - q(i) * t.h * t.inflow_gap[i] + alpha.0[i] * surplus_flow
    }))
}

/// The payment flow without the stock-gap terms. Its budget still balances
/// but its discounted sum does not reproduce `ζ`.
pub fn idp_flow_only(game: &Game, alpha: &AllocationWeights, eps: f64) -> Result<[f64; 3]> {
    let t = flow_terms(game, eps)?;
    let params = game.params();
    let surplus_flow: f64 = (0..3).map(|j| t.co_production[j] - t.dev_production[j]).sum();
    Ok([0, 1, 2].map(|i| t.dev_production[i] - params.players[i].q * t.z + alpha.0[i] * surplus_flow))
}

/// Instantaneous grand-coalition payoff `Σᵢpᵢ^{co}(ε) − q·z(ε)`.
pub fn grand_flow(game: &Game, eps: f64) -> Result<f64> {
    let t = flow_terms(game, eps)?;
    Ok(t.co_production.iter().sum::<f64>() - game.params().q() * t.z)
}

/// Composite Simpson rule with `n` (even) panels per piece.
pub(crate) fn simpson_pieces<const N: usize>(
    pieces: &[(f64, f64)],
    n: usize,
    f: impl Fn(f64) -> Result<[f64; N]>,
) -> Result<[f64; N]> {
    let n = n + n % 2;
    let mut acc = [0.0; N];
    for &(a, b) in pieces {
        let h = (b - a) / n as f64;
        for k in 0..=n {
            // one-sided evaluation at the right end of a piece
            let x = if k == n { b - 1e-12 * h } else { a + k as f64 * h };
            let wgt = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let y = f(x)?;
            for i in 0..N {
                acc[i] += wgt * y[i] * h / 3.0;
            }
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub eps: f64,
    /// `∫₀^ε e^{−ρs}wᵢ ds + e^{−ρε}ζᵢ(ε) − ζᵢ(0)`.
    pub residual: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeConsistencyReport {
    pub alpha: AllocationWeights,
    pub rows: Vec<ResidualRow>,
    pub max_abs_residual: f64,
}

/// Panels per subperiod piece in [`verify_time_consistency`].
pub const TC_PANELS: usize = 400;

pub fn verify_time_consistency(
    game: &Game,
    alpha: &AllocationWeights,
    grid: &[f64],
) -> Result<TimeConsistencyReport> {
    let rho = game.params().rho;
    let start = zeta(game, alpha, 0.0)?.zeta;
    let mut rows = Vec::with_capacity(grid.len());
    for &eps in grid {
        if !(eps >= 0.0) {
            return Err(GameError::InvalidParams(format!("grid point {eps} is negative")));
        }
        let paid = simpson_pieces(&switch_aligned_pieces(game.params(), 0.0, eps), TC_PANELS, |s| {
            let w = idp(game, alpha, s)?;
            Ok(w.map(|x| (-rho * s).exp() * x))
        })?;
        let later = zeta(game, alpha, eps)?.zeta;
        let disc = (-rho * eps).exp();
        rows.push(ResidualRow {
            eps,
            residual: [0, 1, 2].map(|i| paid[i] + disc * later[i] - start[i]),
        });
    }
    let max_abs_residual = rows
        .iter()
        .flat_map(|r| r.residual)
        .fold(0.0, |m: f64, x| m.max(x.abs()));
    Ok(TimeConsistencyReport {
        alpha: *alpha,
        rows,
        max_abs_residual,
    })
}

/// `SC(0) − e^{−ρt}SC(t)`: what the surplus promised at the start exceeds
/// the discounted surplus of the subgame at `t`.
pub fn discounted_surplus_gap(game: &Game, t: f64) -> Result<f64> {
    let rho = game.params().rho;
    let at = |e| surplus_at(game, &SubgameContext::cooperative(game, e)?);
    Ok(at(0.0)? - (-rho * t).exp() * at(t)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrongTcWitness {
    pub t_prime: f64,
    /// `SC(0) − e^{−ρt′}SC(t′)`, negative.
    pub gap: f64,
    pub alpha: AllocationWeights,
    pub alpha_prime: AllocationWeights,
    /// `Kᵢ^{dev}(0) + αᵢ·gap + α′ᵢe^{−ρt′}SC(t′)`.
    pub combined: [f64; 3],
    pub lower: [f64; 3],
    pub violators: Vec<Player>,
}

/// Grid resolution of the counterexample search.
pub const STRONG_TC_GRID: usize = 256;

/// Looks for a switching instant `t′ ∈ (0, T]` at which a player who moves
/// from the imputation with weights `alpha` to `alpha_prime` ends up with
/// less than its lower bound. Returns `None` when the discounted surplus gap
/// stays non-negative on the grid.
pub fn strong_tc_counterexample(
    game: &Game,
    alpha: &AllocationWeights,
    alpha_prime: &AllocationWeights,
) -> Result<Option<StrongTcWitness>> {
    let period = game.params().period;
    let gap = |t: f64| discounted_surplus_gap(game, t);
    let mut prev = 0.0;
    let mut found = None;
    for k in 1..=STRONG_TC_GRID {
        let t = period * k as f64 / STRONG_TC_GRID as f64;
        if gap(t)? < 0.0 {
            found = Some((prev, t));
            break;
        }
        prev = t;
    }
    let Some((mut lo, mut hi)) = found else {
        return Ok(None);
    };
    while hi - lo >= 1e-8 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t_prime = hi;
    let g = gap(t_prime)?;
    let ctx0 = SubgameContext::cooperative(game, 0.0)?;
    let lower = deviation_payoffs(game, &ctx0)?;
    let later = (-game.params().rho * t_prime).exp()
        * surplus_at(game, &SubgameContext::cooperative(game, t_prime)?)?;
    let combined = [0, 1, 2].map(|i| lower[i] + alpha.0[i] * g + alpha_prime.0[i] * later);
    let violators = Player::ALL
        .into_iter()
        .filter(|p| combined[p.index()] < lower[p.index()])
        .collect();
    Ok(Some(StrongTcWitness {
        t_prime,
        gap: g,
        alpha: *alpha,
        alpha_prime: *alpha_prime,
        combined,
        lower,
        violators,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GameParams;

    fn game() -> Game {
        Game::new(GameParams::reference()).unwrap()
    }

    #[test]
    fn weights_validation() {
        assert!(AllocationWeights::new([0.5, 0.5, 0.0]).is_ok());
        assert!(AllocationWeights::new([0.5, 0.6, -0.1]).is_err());
        assert!(AllocationWeights::new([0.5, 0.4, 0.0]).is_err());
        let w: AllocationWeights = "0.2, 0.3,0.5".parse().unwrap();
        assert_eq!(w.of(Player::Three), 0.5);
        assert!("0.2,0.8".parse::<AllocationWeights>().is_err());
        assert!("a,b,c".parse::<AllocationWeights>().is_err());
    }

    #[test]
    fn zeta_splits_the_grand_value() {
        let g = game();
        let ctx = SubgameContext::cooperative(&g, 0.7).unwrap();
        let total = crate::payoffs::grand_value(&g, &ctx).unwrap();
        for a in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5], [0.0, 0.0, 1.0]] {
            let z = zeta(&g, &AllocationWeights::new(a).unwrap(), 0.7).unwrap();
            assert!((z.total() - total).abs() < 1e-10 * total.abs());
        }
        let z = zeta(&g, &AllocationWeights::new([1.0, 0.0, 0.0]).unwrap(), 0.7).unwrap();
        assert_eq!(z.zeta[1], z.lower[1]);
        assert_eq!(z.zeta[2], z.lower[2]);
    }

    #[test]
    fn budget_balances() {
        let g = game();
        let alpha = AllocationWeights::new([0.2, 0.5, 0.3]).unwrap();
        for eps in [0.0, 0.25, 0.5, 0.9, 4.2] {
            let flow = grand_flow(&g, eps).unwrap();
            let w: f64 = idp(&g, &alpha, eps).unwrap().iter().sum();
            let w0: f64 = idp_flow_only(&g, &alpha, eps).unwrap().iter().sum();
            assert!((w - flow).abs() < 1e-10 * flow.abs().max(1.0));
            assert!((w0 - flow).abs() < 1e-10 * flow.abs().max(1.0));
        }
    }

    #[test]
    fn idp_is_rho_zeta_minus_slope() {
        let g = game();
        let alpha = AllocationWeights::equal();
        let (rho, h) = (g.params().rho, 1e-4);
        for eps in [0.1, 0.3, 0.7, 2.2] {
            let w = idp(&g, &alpha, eps).unwrap();
            let z = zeta(&g, &alpha, eps).unwrap().zeta;
            let zp = zeta(&g, &alpha, eps + h).unwrap().zeta;
            let zm = zeta(&g, &alpha, eps - h).unwrap().zeta;
            for i in 0..3 {
                let fd = rho * z[i] - (zp[i] - zm[i]) / (2.0 * h);
                assert!((fd - w[i]).abs() < 1e-5, "eps={eps} i={i}: {fd} vs {}", w[i]);
            }
        }
    }

    #[test]
    fn residual_at_start_is_zero() {
        let g = game();
        let r = verify_time_consistency(&g, &AllocationWeights::equal(), &[0.0]).unwrap();
        assert_eq!(r.max_abs_residual, 0.0);
    }

    #[test]
    fn no_switch_no_violation() {
        let g = game();
        let a = AllocationWeights::equal();
        assert!(strong_tc_counterexample(&g, &a, &a).unwrap().is_none());
    }
}
