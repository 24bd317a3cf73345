//! Pollution stock trajectories and their hybrid limit cycles.
//!
//! With a periodic inflow `f(t) = Σ ξᵢvᵢ(t)` the stock obeys
//! `ż = f(t) − δ(t)z`. The limit cycle `z̄` is materialised in closed form
//! (variation of constants on each subperiod, chained by continuity and
//! periodicity), and any trajectory decomposes as
//! `z(t) = (z_start − z̄(ε))·e^{−∫_ε^t δ} + z̄(t)`.

use serde::Serialize;

use crate::cycle::{exp_integral, reduce, Phase, PhaseCycle};
use crate::error::Result;
use crate::model::{CoalitionStructure, GameParams};

/// `∫₀ᵗ δ(s) ds`, accumulated exactly.
pub fn accumulated_decay(params: &GameParams, t: f64) -> f64 {
    let u = reduce(t, params.period);
    // derived from u so both agree when t sits on a period boundary
    let periods = ((t - u) / params.period).round();
    let split = params.switch_time();
    let partial = if u < split {
        params.delta1 * u
    } else {
        params.delta1 * split + params.delta2 * (u - split)
    };
    periods * params.period_decay() + partial
}

/// `∫_{t0}^{t1} δ(s) ds`.
pub fn decay_between(params: &GameParams, t0: f64, t1: f64) -> f64 {
    accumulated_decay(params, t1) - accumulated_decay(params, t0)
}

/// Subintervals of `[lo, hi]` cut at every switching instant, so that `δ`
/// is constant on each.
pub fn switch_aligned_pieces(params: &GameParams, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let (t, split) = (params.period, params.switch_time());
    let mut cuts = vec![lo];
    let mut k = (lo / t).floor();
    while k * t < hi {
        for c in [k * t, k * t + split] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
        k += 1.0;
    }
    cuts.push(hi);
    cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCycle {
    pub zbar: PhaseCycle,
    /// `z̄(0)`, the fixed point of the one-period map.
    pub zbar_hlc: f64,
}

/// The periodic stock driven by `inflow`.
pub fn limit_cycle_state(params: &GameParams, inflow: &PhaseCycle) -> Result<LimitCycle> {
    let zbar = inflow.periodic_response([params.delta1, params.delta2])?;
    let zbar_hlc = zbar.eval(0.0);
    Ok(LimitCycle { zbar, zbar_hlc })
}

/// Fixed point of the period map from the explicit solution formula:
/// `e^{−D}∫₀ᵀ f(u)e^{∫₀ᵘδ}du / (1 − e^{−D})`.
pub fn fixed_point_formula(params: &GameParams, inflow: &PhaseCycle) -> f64 {
    let (split, t_end) = (params.switch_time(), params.period);
    let (d1, d2) = (params.delta1, params.delta2);
    let first: f64 = inflow
        .terms(Phase::First)
        .iter()
        .map(|t| t.coef * exp_integral(t.rate + d1, 0.0, split))
        .sum();
    // on the second subperiod ∫₀ᵘδ = (δ₁ − δ₂)τT + δ₂u
    let shift = ((d1 - d2) * split).exp();
    let second: f64 = inflow
        .terms(Phase::Second)
        .iter()
        .map(|t| t.coef * shift * exp_integral(t.rate + d2, split, t_end))
        .sum();
    let d = params.period_decay();
    (-d).exp() * (first + second) / -(-d).exp_m1()
}

/// `z̄*(t) = f(t)/δ(t)`, the instantaneous steady state that attracts the stock.
pub fn steady_state_cycle(params: &GameParams, inflow: &PhaseCycle) -> PhaseCycle {
    inflow.scale_phases([1.0 / params.delta1, 1.0 / params.delta2])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub structure: Option<CoalitionStructure>,
    pub z_start: f64,
    pub eps: f64,
    /// `z_start − z̄(eps)`.
    pub transient_coef: f64,
    pub cycle: PhaseCycle,
    #[serde(skip)]
    params: GameParams,
}

impl Trajectory {
    /// Stock at `t ≥ eps`.
    pub fn value(&self, t: f64) -> f64 {
        if t == self.eps {
            return self.z_start;
        }
        self.transient(t) + self.cycle.eval(t)
    }

    /// Deviation from the limit cycle at `t`.
    pub fn transient(&self, t: f64) -> f64 {
        self.transient_coef * (-decay_between(&self.params, self.eps, t)).exp()
    }
}

pub fn trajectory(
    params: &GameParams,
    structure: Option<CoalitionStructure>,
    limit: &LimitCycle,
    z_start: f64,
    eps: f64,
) -> Trajectory {
    Trajectory {
        structure,
        z_start,
        eps,
        transient_coef: z_start - limit.zbar.eval(eps),
        cycle: limit.zbar.clone(),
        params: *params,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_inflow_without_switching() {
        let mut p = GameParams::reference();
        p.delta2 = p.delta1;
        let inflow = PhaseCycle::constant(p.period, p.tau, 13.0);
        let lc = limit_cycle_state(&p, &inflow).unwrap();
        assert!((lc.zbar_hlc - 13.0 / 0.45).abs() < 1e-12);
        assert!((lc.zbar_hlc - 28.8889).abs() < 1e-4);
        let star = steady_state_cycle(&p, &inflow);
        for t in [0.1, 0.7] {
            assert!((lc.zbar.eval(t) - star.eval(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn formula_agrees_with_periodic_solution() {
        let p = GameParams::reference();
        let inflow = PhaseCycle::new(
            p.period,
            p.tau,
            vec![crate::cycle::Term::constant(13.0), crate::cycle::Term::new(-0.5, 0.75)],
            vec![crate::cycle::Term::constant(13.0), crate::cycle::Term::new(0.2, 1.2)],
        );
        let lc = limit_cycle_state(&p, &inflow).unwrap();
        assert!((fixed_point_formula(&p, &inflow) - lc.zbar_hlc).abs() < 1e-11);
    }

    #[test]
    fn accumulated_decay_is_piecewise_linear() {
        let p = GameParams::reference();
        assert!((accumulated_decay(&p, 0.25) - 0.45 * 0.25).abs() < 1e-15);
        assert!((accumulated_decay(&p, 0.75) - (0.225 + 0.9 * 0.25)).abs() < 1e-15);
        assert!((accumulated_decay(&p, 3.0) - 3.0 * 0.675).abs() < 1e-12);
        assert!((decay_between(&p, 0.25, 1.25) - 0.675).abs() < 1e-12);
    }

    #[test]
    fn decay_is_continuous_across_period_boundaries() {
        let mut p = GameParams::reference();
        p.period = 1.03958992832754;
        for k in 1..200 {
            let t = k as f64 * p.period;
            assert!((accumulated_decay(&p, t) - k as f64 * p.period_decay()).abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn pieces_split_at_switches() {
        let p = GameParams::reference();
        assert_eq!(switch_aligned_pieces(&p, 0.0, 1.25), vec![(0.0, 0.5), (0.5, 1.0), (1.0, 1.25)]);
        assert_eq!(switch_aligned_pieces(&p, 0.0, 0.0), vec![]);
        assert_eq!(switch_aligned_pieces(&p, 0.3, 0.4), vec![(0.3, 0.4)]);
        assert_eq!(switch_aligned_pieces(&p, 0.5, 1.5), vec![(0.5, 1.0), (1.0, 1.5)]);
    }

    #[test]
    fn trajectory_starts_at_start_and_decays() {
        let p = GameParams::reference();
        let inflow = PhaseCycle::constant(p.period, p.tau, 13.0);
        let lc = limit_cycle_state(&p, &inflow).unwrap();
        let tr = trajectory(&p, None, &lc, 0.0, 0.0);
        assert_eq!(tr.value(0.0), 0.0);
        for k in 1..=10 {
            let kk = k as f64;
            let gap = (tr.value(kk) - lc.zbar_hlc).abs();
            let expect = lc.zbar_hlc * (-kk * p.period_decay()).exp();
            assert!((gap - expect).abs() < 1e-10 * lc.zbar_hlc);
        }
        let on = trajectory(&p, None, &lc, lc.zbar_hlc, 0.0);
        assert!(on.transient_coef.abs() < 1e-12);
    }
}
