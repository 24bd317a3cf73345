//! Exact arithmetic on T-periodic piecewise-exponential functions.
//!
//! A [`PhaseCycle`] holds two lists of exponential terms, one per subperiod.
//! A term `(c, r)` contributes `c·e^{r·(t−kT)}` where `kT` is the start of the
//! period containing `t`; the exponent is measured from the period start on
//! both subperiods. Constants are terms with rate 0.
//!
//! Subperiods are left-closed: `[kT, (k+τ)T)` is the first, `[(k+τ)T, (k+1)T)`
//! the second.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// Rates closer than this are merged into one term.
pub const RATE_MERGE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    First,
    Second,
}

impl Phase {
    pub const BOTH: [Phase; 2] = [Phase::First, Phase::Second];

    /// Phase in force at absolute time `t`.
    pub fn at(t: f64, period: f64, tau: f64) -> Phase {
        if reduce(t, period) < tau * period {
            Phase::First
        } else {
            Phase::Second
        }
    }

    pub fn index(self) -> usize {
        match self {
            Phase::First => 0,
            Phase::Second => 1,
        }
    }
}

/// `t mod period`, in `[0, period)`.
pub fn reduce(t: f64, period: f64) -> f64 {
    let u = t.rem_euclid(period);
    if u >= period {
        0.0
    } else {
        u
    }
}

/// `(e^x − 1)/x`, continuous at 0.
pub(crate) fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + x / 2.0 + x * x / 6.0
    } else {
        x.exp_m1() / x
    }
}

/// `∫_lo^hi e^{x·u} du` without cancellation when `x` is near 0.
pub(crate) fn exp_integral(x: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    (x * lo).exp() * w * exprel(x * w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub rate: f64,
}

impl Term {
    pub fn new(coef: f64, rate: f64) -> Term {
        Term { coef, rate }
    }

    pub fn constant(coef: f64) -> Term {
        Term { coef, rate: 0.0 }
    }

    fn eval(&self, u: f64) -> f64 {
        if self.rate == 0.0 {
            self.coef
        } else {
            self.coef * (self.rate * u).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCycle {
    period: f64,
    tau: f64,
    phases: [Vec<Term>; 2],
}

fn canonical(mut terms: Vec<Term>) -> Vec<Term> {
    terms.retain(|t| t.coef != 0.0);
    terms.sort_by(|a, b| a.rate.total_cmp(&b.rate));
    let mut out: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match out.last_mut() {
            Some(last) if (last.rate - t.rate).abs() <= RATE_MERGE_TOL => last.coef += t.coef,
            _ => out.push(t),
        }
    }
    out.retain(|t| t.coef != 0.0);
    out
}

impl PhaseCycle {
    pub fn new(period: f64, tau: f64, first: Vec<Term>, second: Vec<Term>) -> PhaseCycle {
        assert!(period > 0.0 && tau > 0.0 && tau < 1.0, "bad cycle geometry");
        PhaseCycle {
            period,
            tau,
            phases: [canonical(first), canonical(second)],
        }
    }

    pub fn constant(period: f64, tau: f64, c: f64) -> PhaseCycle {
        Self::piecewise_constant(period, tau, [c, c])
    }

    pub fn piecewise_constant(period: f64, tau: f64, c: [f64; 2]) -> PhaseCycle {
        PhaseCycle::new(
            period,
            tau,
            vec![Term::constant(c[0])],
            vec![Term::constant(c[1])],
        )
    }

    pub fn zero(period: f64, tau: f64) -> PhaseCycle {
        PhaseCycle::new(period, tau, vec![], vec![])
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn switch_time(&self) -> f64 {
        self.tau * self.period
    }

    pub fn terms(&self, phase: Phase) -> &[Term] {
        &self.phases[phase.index()]
    }

    /// Coefficient of the term with the given rate on `phase` (0 if absent).
    pub fn coef(&self, phase: Phase, rate: f64) -> f64 {
        self.terms(phase)
            .iter()
            .find(|t| (t.rate - rate).abs() <= RATE_MERGE_TOL)
            .map_or(0.0, |t| t.coef)
    }

    pub fn is_zero(&self) -> bool {
        self.phases.iter().all(Vec::is_empty)
    }

    /// True when both phases carry only a constant term.
    pub fn is_piecewise_constant(&self) -> bool {
        self.phases.iter().flatten().all(|t| t.rate == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let u = reduce(t, self.period);
        self.eval_in_period(u)
    }

    /// Evaluates at period coordinate `u ∈ [0, T]`; `u = T` uses the second
    /// phase (the left limit at the end of the period).
    pub fn eval_in_period(&self, u: f64) -> f64 {
        let phase = if u < self.switch_time() { 0 } else { 1 };
        self.phases[phase].iter().map(|t| t.eval(u)).sum()
    }

    /// Value at `u` using the terms of a specific phase (one-sided limits at
    /// the switching instants).
    pub fn eval_phase(&self, phase: Phase, u: f64) -> f64 {
        self.terms(phase).iter().map(|t| t.eval(u)).sum()
    }

    fn check_compatible(&self, other: &PhaseCycle) -> Result<()> {
        if self.period != other.period || self.tau != other.tau {
            return Err(GameError::CycleMismatch(format!(
                "(T={}, tau={}) vs (T={}, tau={})",
                self.period, self.tau, other.period, other.tau
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &PhaseCycle) -> Result<PhaseCycle> {
        self.check_compatible(other)?;
        let join = |i: usize| {
            let mut v = self.phases[i].clone();
            v.extend_from_slice(&other.phases[i]);
            v
        };
        Ok(PhaseCycle::new(self.period, self.tau, join(0), join(1)))
    }

    pub fn sub(&self, other: &PhaseCycle) -> Result<PhaseCycle> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> PhaseCycle {
        self.scale_phases([k, k])
    }

    /// Multiplies the first phase by `k[0]` and the second by `k[1]`.
    pub fn scale_phases(&self, k: [f64; 2]) -> PhaseCycle {
        let s = |i: usize| {
            self.phases[i]
                .iter()
                .map(|t| Term::new(t.coef * k[i], t.rate))
                .collect()
        };
        PhaseCycle::new(self.period, self.tau, s(0), s(1))
    }

    pub fn add_constant(&self, c: f64) -> PhaseCycle {
        let mut first = self.phases[0].clone();
        let mut second = self.phases[1].clone();
        first.push(Term::constant(c));
        second.push(Term::constant(c));
        PhaseCycle::new(self.period, self.tau, first, second)
    }

    /// Pointwise product: `(c₁, r₁)·(c₂, r₂) = (c₁c₂, r₁+r₂)`.
    pub fn mul(&self, other: &PhaseCycle) -> Result<PhaseCycle> {
        self.check_compatible(other)?;
        let prod = |i: usize| {
            let mut v = Vec::with_capacity(self.phases[i].len() * other.phases[i].len());
            for a in &self.phases[i] {
                for b in &other.phases[i] {
                    v.push(Term::new(a.coef * b.coef, a.rate + b.rate));
                }
            }
            v
        };
        Ok(PhaseCycle::new(self.period, self.tau, prod(0), prod(1)))
    }

    /// Time derivative inside each subperiod.
    pub fn derivative(&self) -> PhaseCycle {
        let d = |i: usize| {
            self.phases[i]
                .iter()
                .map(|t| Term::new(t.coef * t.rate, t.rate))
                .collect()
        };
        PhaseCycle::new(self.period, self.tau, d(0), d(1))
    }

    /// `∫_lo^hi e^{−ρu} f(u) du` for `0 ≤ lo ≤ hi ≤ T` in period coordinates.
    pub fn discounted_integral_within(&self, rho: f64, lo: f64, hi: f64) -> f64 {
        let split = self.switch_time();
        let windows = [(lo.max(0.0), hi.min(split)), (lo.max(split), hi.min(self.period))];
        let mut total = 0.0;
        for (i, (a, b)) in windows.into_iter().enumerate() {
            if b <= a {
                continue;
            }
            total += self.phases[i]
                .iter()
                .map(|t| t.coef * exp_integral(t.rate - rho, a, b))
                .sum::<f64>();
        }
        total
    }

    /// `∫₀ᵀ e^{−ρt} f(t) dt`, exact per exponential term.
    pub fn discounted_period_integral(&self, rho: f64) -> f64 {
        self.discounted_integral_within(rho, 0.0, self.period)
    }

    /// `∫_ε^∞ e^{−ρ(t−ε)} f(t) dt`: the remainder of the current period plus a
    /// geometric tail of whole periods.
    pub fn discounted_tail_integral(&self, rho: f64, eps: f64) -> f64 {
        let u0 = reduce(eps, self.period);
        let whole = self.discounted_period_integral(rho);
        let decay = (-rho * self.period).exp();
        let geometric = -(-rho * self.period).exp_m1();
        let head = self.discounted_integral_within(rho, u0, self.period);
        (rho * u0).exp() * (head + decay * whole / geometric)
    }

    /// The periodic solution `y` of `ẏ = f(t) − d(t)·y`, where `f` is `self`
    /// and `d` equals `decay[0]` on the first subperiod and `decay[1]` on the
    /// second. Decay rates may be negative as long as their period average is
    /// not zero.
    pub fn periodic_response(&self, decay: [f64; 2]) -> Result<PhaseCycle> {
        let (t_end, split) = (self.period, self.switch_time());
        let mut particular: [Vec<Term>; 2] = [Vec::new(), Vec::new()];
        for i in 0..2 {
            for t in &self.phases[i] {
                let denom = t.rate + decay[i];
                if denom.abs() <= 1e-12 * (1.0 + t.rate.abs()) {
                    return Err(GameError::Resonance { phase: i, rate: t.rate });
                }
                particular[i].push(Term::new(t.coef / denom, t.rate));
            }
        }
        let p = |i: usize, u: f64| particular[i].iter().map(|t| t.eval(u)).sum::<f64>();
        // y = P_j(u) + B_j e^{−d_j u}; continuity at τT and y(0) = y(T).
        let e0 = (-decay[0] * split).exp();
        let e1 = (-decay[1] * split).exp();
        let et = (-decay[1] * t_end).exp();
        let rhs_switch = p(1, split) - p(0, split);
        let rhs_wrap = p(1, t_end) - p(0, 0.0);
        let det = et * e0 - e1;
        if det.abs() <= 1e-14 * e1.abs().max(et * e0) {
            return Err(GameError::SingularPeriodicProblem);
        }
        let b1 = (rhs_switch - rhs_wrap * e0) / det;
        let b0 = rhs_wrap + b1 * et;
        let [mut first, mut second] = particular;
        first.push(Term::new(b0, -decay[0]));
        second.push(Term::new(b1, -decay[1]));
        Ok(PhaseCycle::new(self.period, self.tau, first, second))
    }

    /// Minimum and maximum over one period. Monotone phases are handled
    /// exactly; otherwise the extrema are located on a dense grid refined by
    /// golden-section search.
    pub fn range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let split = self.switch_time();
        for (i, (a, b)) in [(0.0, split), (split, self.period)].into_iter().enumerate() {
            let phase = Phase::BOTH[i];
            let mut consider = |u: f64| {
                let v = self.eval_phase(phase, u);
                lo = lo.min(v);
                hi = hi.max(v);
            };
            consider(a);
            consider(b);
            if self.phases[i].iter().filter(|t| t.rate != 0.0).count() > 1 {
                let n = 256;
                for k in 1..n {
                    consider(a + (b - a) * k as f64 / n as f64);
                }
                let deriv = self.derivative();
                for k in 0..n {
                    let (x0, x1) = (a + (b - a) * k as f64 / n as f64, a + (b - a) * (k + 1) as f64 / n as f64);
                    let (d0, d1) = (deriv.eval_phase(phase, x0), deriv.eval_phase(phase, x1));
                    if d0 * d1 < 0.0 {
                        consider(bisect(|x| deriv.eval_phase(phase, x), x0, x1));
                    }
                }
            }
        }
        (lo, hi)
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= 1e-15 * (1.0 + m.abs()) {
            break;
        }
        if f(m) * fa > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
