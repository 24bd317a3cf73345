//! Non-emptiness of the sustainably-cooperative optimality principle.
//!
//! The principle at `ε` is non-empty iff the cooperation surplus is
//! non-negative. Writing `M̄ = q₁f̄₂ + q₂f̄₁` for the tax-weighted gap between
//! the deviation limit cycles and the cooperative one, the surplus is
//!
//! `SC(ε) = −Y·∫_ε^∞e^{−ρ(t−ε)}L² + ∫_ε^∞e^{−ρ(t−ε)}M̄ − M̄(ε)h(ε)`
//!
//! and the check compares `Y` with `(I + E)/G₀`, where `I = −M̄(ε*)h(ε*)`
//! at the switching-dependent candidate `ε*`, `E = ∫₀^∞e^{−ρt}M̄` and
//! `G₀ = ∫₀^∞e^{−ρt}L²`.

use serde::Serialize;

use crate::cycle::{Phase, PhaseCycle, Term};
use crate::error::Result;
use crate::game::Game;
use crate::model::{shadow_weights, CoalitionStructure, GameParams, Player};
use crate::payoffs::{
    characteristic_value, deviation_payoffs, discount_kernel_h, grand_value, SubgameContext,
};

/// Coefficients of `M̄` on each subperiod: `A + B·e^{−δu} + C·e^{su}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MbarCoefficients {
    pub a_m1: f64,
    pub a_m2: f64,
    pub b_m1: f64,
    pub b_m2: f64,
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MbarCycle {
    pub mbar: PhaseCycle,
    /// `M̄(0)`, pinned by periodicity.
    pub m0: f64,
    /// Driver coefficient in `dM̄/dt = o_m·L(t) − δ(t)·M̄`.
    pub om: f64,
    pub coefficients: MbarCoefficients,
}

/// `Y = k₃q² + k₁(q² − q₁²) + k₂(q² − q₂²)`.
pub fn y_value(params: &GameParams) -> f64 {
    let q = params.q();
    let [p1, p2, p3] = params.players;
    p3.k() * q * q + p1.k() * (q * q - p1.q * p1.q) + p2.k() * (q * q - p2.q * p2.q)
}

/// `o_m` from the strategy differences: the deviation inflows exceed the
/// cooperative one by `2Σᵢkᵢ(μᵢ^π − μᵢ^{π₁})·L`, weighted by the tax of the
/// player who stays.
pub fn driver_coefficient(params: &GameParams) -> f64 {
    let w1 = shadow_weights(CoalitionStructure::Pi1, params);
    let w41 = shadow_weights(CoalitionStructure::Pi41, params);
    let w42 = shadow_weights(CoalitionStructure::Pi42, params);
    let (q1, q2) = (params.players[0].q, params.players[1].q);
    Player::ALL
        .iter()
        .map(|&p| {
            let k = params.player(p).k();
            2.0 * k * (q1 * (w42.of(p) - w1.of(p)) + q2 * (w41.of(p) - w1.of(p)))
        })
        .sum()
}

/// Closed-form `M̄` with `M̄(0)` solved from continuity at `τT`.
pub fn mbar_cycle(game: &Game) -> Result<MbarCycle> {
    for s in [CoalitionStructure::Pi1, CoalitionStructure::Pi41, CoalitionStructure::Pi42] {
        game.scenario(s)?;
    }
    let params = game.params();
    let adj = game.adjoint();
    let (s1, s2, m1, m2) = (adj.s1, adj.s2, adj.m1, adj.m2);
    let (d1, d2) = (params.delta1, params.delta2);
    let (t, split) = (params.period, params.switch_time());
    let om = driver_coefficient(params);

    let (a_m1, a_m2) = (om * m1, om * m2);
    let (b_m1, b_m2) = (om / s1, om / s2);
    let (a1, a2) = (-b_m1 / d1, -b_m2 / d2);
    let (c1, c2) = (a_m1 / (s1 + d1), a_m2 / (s2 + d2));

    // B₁ = M̄₀ − A₁ − C₁ and B₂ = e^{δ₂T}(M̄₀ − A₂ − C₂e^{s₂T}); continuity
    // at τT is linear in M̄₀.
    let e1 = (-d1 * split).exp();
    let f2 = (d2 * (t - split)).exp();
    let g1 = (s1 * split).exp();
    let g2 = (s2 * split).exp();
    let m0 = (a2 * (1.0 - f2) + c2 * (g2 - f2 * (s2 * t).exp()) - a1 * (1.0 - e1)
        + c1 * (e1 - g1))
        / (e1 - f2);

    let b1 = (d1 * (b_m1 - a_m1 + s1 * m0) + b_m1 * s1 + m0 * d1 * d1) / (d1 * (s1 + d1));
    let b2 = (d2 * t).exp()
        * (d2 * (b_m2 - a_m2 * (s2 * t).exp() + s2 * m0) + b_m2 * s2 + m0 * d2 * d2)
        / (d2 * (s2 + d2));

    let mbar = PhaseCycle::new(
        t,
        params.tau,
        vec![Term::constant(a1), Term::new(b1, -d1), Term::new(c1, s1)],
        vec![Term::constant(a2), Term::new(b2, -d2), Term::new(c2, s2)],
    );
    Ok(MbarCycle {
        mbar,
        m0,
        om,
        coefficients: MbarCoefficients {
            a_m1,
            a_m2,
            b_m1,
            b_m2,
            a1,
            b1,
            c1,
            a2,
            b2,
            c2,
        },
    })
}

/// `E = ∫₀^∞ e^{−ρt} M̄(t) dt`, term by term.
pub fn e_integral(params: &GameParams, mb: &MbarCycle) -> f64 {
    let MbarCoefficients { a1, b1, c1, a2, b2, c2, .. } = mb.coefficients;
    let (rho, t, split) = (params.rho, params.period, params.switch_time());
    let (d1, d2, s1, s2) = (params.delta1, params.delta2, params.s1(), params.s2());
    let bracket = c1 * ((d1 * split).exp() - 1.0) / d1
        + c2 * ((d2 * t).exp() - (d2 * split).exp()) / d2
        + (a1 * (1.0 - (-rho * split).exp()) + a2 * ((-rho * split).exp() - (-rho * t).exp())) / rho
        + b1 * (1.0 - (-s1 * split).exp()) / s1
        + b2 * ((-s2 * split).exp() - (-s2 * t).exp()) / s2;
    (rho * t).exp() / (rho * t).exp_m1() * bracket
}

/// `G₀ = ∫₀^∞ e^{−ρt} L²(t) dt`, term by term.
pub fn g0_integral(game: &Game) -> f64 {
    let params = game.params();
    let adj = game.adjoint();
    let (m1, m2, s1, s2) = (adj.m1, adj.m2, adj.s1, adj.s2);
    let (rho, t, split) = (params.rho, params.period, params.switch_time());
    let (d1, d2) = (params.delta1, params.delta2);
    let bracket = -2.0 * m1 * ((d1 * split).exp() - 1.0) / (s1 * d1)
        + m1 * m1 * (((2.0 * s1 - rho) * split).exp() - 1.0) / (2.0 * s1 - rho)
        + 2.0 * m2 * ((d2 * split).exp() - (d2 * t).exp()) / (s2 * d2)
        + m2 * m2 * (((2.0 * s2 - rho) * t).exp() - ((2.0 * s2 - rho) * split).exp())
            / (2.0 * s2 - rho)
        + ((-rho * split).exp() * (s1 * s1 - s2 * s2) + s2 * s2 - s1 * s1 * (-rho * t).exp())
            / (s1 * s1 * s2 * s2 * rho);
    (rho * t).exp() / (rho * t).exp_m1() * bracket
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    S1GtS2,
    S1LtS2,
    Equal,
}

impl Branch {
    pub fn of(params: &GameParams) -> Branch {
        let (s1, s2) = (params.s1(), params.s2());
        if s1 > s2 {
            Branch::S1GtS2
        } else if s1 < s2 {
            Branch::S1LtS2
        } else {
            Branch::Equal
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    #[serde(rename = "Y")]
    pub y: f64,
    pub rhs: f64,
    pub branch: Branch,
    pub satisfied: bool,
    /// Candidate subgame start used for the `I` term.
    pub eps_star: f64,
    /// `−M̄(ε*)h(ε*)`.
    pub i_term: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "G0")]
    pub g0: f64,
    pub om: f64,
    /// `(I + E)/G₀` with `ε* = 0` and with `ε* = τT`.
    pub rhs_candidates: [f64; 2],
    /// Minimum of the per-subgame deviation ratio over a 200-point grid.
    pub grid_rhs: f64,
    /// `−(Y + o_m)`; the surplus equals this times `∫_ε^∞e^{−ρ(t−ε)}L²`.
    pub surplus_coefficient: f64,
}

/// Number of grid points used for `grid_rhs`.
pub const RHS_GRID: usize = 200;

fn i_term(game: &Game, mb: &MbarCycle, eps: f64) -> f64 {
    -mb.mbar.eval(eps) * discount_kernel_h(game.params(), eps)
}

/// Runs the closed-form non-emptiness check.
pub fn nonemptiness_check(game: &Game) -> Result<StabilityReport> {
    game.scenario(CoalitionStructure::Pi3)?;
    let mb = mbar_cycle(game)?;
    let params = game.params();
    let y = y_value(params);
    let e = e_integral(params, &mb);
    let g0 = g0_integral(game);
    let branch = Branch::of(params);
    let split = params.switch_time();
    let candidates: Vec<f64> = match branch {
        Branch::S1GtS2 => vec![split],
        Branch::S1LtS2 => vec![0.0],
        Branch::Equal => vec![0.0, split],
    };
    let (eps_star, i) = candidates
        .into_iter()
        .map(|eps| (eps, i_term(game, &mb, eps)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    let rhs = (i + e) / g0;
    let rhs_candidates = [0.0, split].map(|eps| (i_term(game, &mb, eps) + e) / g0);
    Ok(StabilityReport {
        y,
        rhs,
        branch,
        satisfied: y <= rhs,
        eps_star,
        i_term: i,
        e,
        g0,
        om: mb.om,
        rhs_candidates,
        grid_rhs: grid_rhs(game, &mb, RHS_GRID),
        surplus_coefficient: -(y + mb.om),
    })
}

/// The ratio `Y` must not exceed for the subgame at `ε`:
/// `[∫_ε^∞e^{−ρ(t−ε)}M̄ − M̄(ε)h(ε)] / ∫_ε^∞e^{−ρ(t−ε)}L²`.
pub fn deviation_ratio(game: &Game, mb: &MbarCycle, eps: f64) -> f64 {
    let rho = game.params().rho;
    let l2 = l_squared(game);
    (mb.mbar.discounted_tail_integral(rho, eps) + i_term(game, mb, eps))
        / l2.discounted_tail_integral(rho, eps)
}

/// `[E − M̄(ε)h(ε)]/G₀`: the ratio with the tail integrals frozen at their
/// values for `ε = 0`. Agrees with [`deviation_ratio`] only at multiples of T.
pub fn frozen_tail_ratio(game: &Game, mb: &MbarCycle, eps: f64) -> f64 {
    let e = e_integral(game.params(), mb);
    (e + i_term(game, mb, eps)) / g0_integral(game)
}

/// Minimum of [`deviation_ratio`] over `n` equally spaced starts in one period.
pub fn grid_rhs(game: &Game, mb: &MbarCycle, n: usize) -> f64 {
    let t = game.params().period;
    (0..n)
        .map(|k| deviation_ratio(game, mb, t * k as f64 / n as f64))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn l_squared(game: &Game) -> PhaseCycle {
    let l = &game.adjoint().cycle;
    l.mul(l).expect("same geometry")
}

/// `∫_ε^∞ e^{−ρ(t−ε)} L²(t) dt`.
pub fn l_squared_tail(game: &Game, eps: f64) -> f64 {
    l_squared(game).discounted_tail_integral(game.params().rho, eps)
}

/// Surplus through the `L²`/`M̄` integral form (independent of payoffs).
pub fn surplus_integral_form(game: &Game, mb: &MbarCycle, eps: f64) -> f64 {
    let rho = game.params().rho;
    let y = y_value(game.params());
    -y * l_squared(game).discounted_tail_integral(rho, eps)
        + mb.mbar.discounted_tail_integral(rho, eps)
        + i_term(game, mb, eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZsetBounds {
    pub eps: f64,
    pub z_eps: f64,
    /// `(K₁^{π₄₂}, K₂^{π₄₁}, K₃^{π₃})`.
    pub lower: [f64; 3],
    /// `v(N)`.
    pub total: f64,
    pub surplus: f64,
    pub nonempty: bool,
    /// `v({i})`.
    pub singleton_values: [f64; 3],
    /// `lowerᵢ − v({i})`; non-negative margins put the set inside the imputations.
    pub bound_margins: [f64; 3],
}

/// Lower bounds of the principle in the subgame at `eps` on the cooperative path.
pub fn zset_bounds(game: &Game, eps: f64) -> Result<ZsetBounds> {
    let ctx = SubgameContext::cooperative(game, eps)?;
    let lower = deviation_payoffs(game, &ctx)?;
    let total = grand_value(game, &ctx)?;
    let mut singleton_values = [0.0; 3];
    for p in Player::ALL {
        singleton_values[p.index()] = characteristic_value(game, &[p], &ctx)?;
    }
    let surplus = total - lower.iter().sum::<f64>();
    Ok(ZsetBounds {
        eps,
        z_eps: ctx.z_eps,
        lower,
        total,
        surplus,
        nonempty: surplus >= 0.0,
        singleton_values,
        bound_margins: [0, 1, 2].map(|i| lower[i] - singleton_values[i]),
    })
}

/// Commonly quoted forms of two coefficients. They disagree with the
/// dynamics of `M̄` and are kept so tests can show by how much.
pub mod printed {
    use crate::model::GameParams;

    /// `−2[(k₁+k₂)q₁q₂ + (k₁+k₃)q₁² + (k₁+k₃)q₂²]`.
    pub fn om(params: &GameParams) -> f64 {
        let [p1, p2, p3] = params.players;
        let (k1, k2, k3) = (p1.k(), p2.k(), p3.k());
        -2.0 * ((k1 + k2) * p1.q * p2.q + (k1 + k3) * p1.q * p1.q + (k1 + k3) * p2.q * p2.q)
    }

    /// `A₁ = −b₁/δ₁` read with `b₁` as player 1's emission cap.
    pub fn a1(params: &GameParams) -> f64 {
        -params.players[0].b / params.delta1
    }
}

/// One-sided value of `M̄` at the start of `phase`.
pub fn mbar_at_phase_start(mb: &MbarCycle, phase: Phase) -> f64 {
    match phase {
        Phase::First => mb.mbar.eval_phase(Phase::First, 0.0),
        Phase::Second => mb.mbar.eval_phase(Phase::Second, mb.mbar.switch_time()),
    }
}
