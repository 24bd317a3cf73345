use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use pollgame::allocation::{
    discounted_surplus_gap, idp, idp_flow_only, strong_tc_counterexample, verify_time_consistency, zeta,
    STRONG_TC_GRID,
};
use pollgame::dynamics::steady_state_cycle;
use pollgame::model::shadow_weights;
use pollgame::oracle::{
    discount_kernel_quad, discounted_integral_quad, integrate_ode, Field, OracleAdjoint, OracleConfig, OracleProfile,
};
use pollgame::payoffs::{discount_kernel_h, scenario_payoff};
use pollgame::stability::{e_integral, g0_integral, mbar_cycle, nonemptiness_check, zset_bounds};
use pollgame::{
    AllocationWeights, CoalitionStructure, Game, GameError, GameParams, Player, StrongTcWitness, SubgameContext,
};

use crate::args::{parse_alpha, Common, SweepSpec};
use crate::error::CliError;
use crate::table::{Artifact, Cell, Table};

/// What a command produced, plus the failure that decides the exit code
/// once everything that could be written has been.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub notes: Vec<String>,
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(artifacts: Vec<Artifact>) -> Outcome {
        Outcome { artifacts, notes: Vec::new(), failure: None }
    }
}

struct Oracle {
    cfg: OracleConfig,
    adjoint: OracleAdjoint,
}

impl Oracle {
    fn new(params: &GameParams) -> Result<Oracle, CliError> {
        let cfg = OracleConfig::coarse();
        let cfg = OracleConfig { horizon_periods: cfg.horizon_for(params), ..cfg }.validate(params)?;
        let adjoint = OracleAdjoint::solve(params, &cfg)?;
        Ok(Oracle { cfg, adjoint })
    }

    fn profile<'a>(&'a self, params: &'a GameParams, s: CoalitionStructure) -> OracleProfile<'a> {
        OracleProfile::new(params, &self.adjoint, shadow_weights(s, params))
    }

    /// `v(N) − Σ Kᵢ^{dev}` by simulation.
    fn surplus(&self, params: &GameParams, eps: f64, z_eps: f64) -> f64 {
        let grand: f64 = self.profile(params, CoalitionStructure::Pi1).payoffs(&self.cfg, eps, z_eps).iter().sum();
        let dev: f64 = Player::ALL
            .iter()
            .map(|&p| self.profile(params, CoalitionStructure::deviation_of(p)).payoff(&self.cfg, p, eps, z_eps))
            .sum();
        grand - dev
    }
}

fn sustainability_table(game: &Game) -> Table {
    let mut t = Table::new([
        "structure", "player", "weight", "min_adjoint", "max_adjoint", "floor", "margin", "sustainable",
    ]);
    for s in CoalitionStructure::ALL {
        for ps in game.sustainability(s).players {
            t.push(vec![
                s.name().into(),
                (ps.player.index() + 1).into(),
                ps.weight.into(),
                ps.min_adjoint.into(),
                ps.max_adjoint.into(),
                ps.floor.into(),
                ps.margin.into(),
                ps.sustainable.into(),
            ]);
        }
    }
    t
}

pub fn simulate(common: &Common) -> Result<Outcome, CliError> {
    let game = Game::new(common.game_params()?)?;
    let params = *game.params();
    let grid = common.time_grid()?;
    let oracle = if common.oracle { Some(Oracle::new(&params)?) } else { None };
    let mut out = Outcome::ok(vec![Artifact::table("sustainability", sustainability_table(&game))]);
    let mut failed = 0;

    for s in common.structure.structures() {
        let scenario = match game.scenario(s) {
            Ok(sc) => sc,
            Err(e) => {
                out.notes.push(e.to_string());
                failed += 1;
                continue;
            }
        };
        let traj = scenario.trajectory(&params, params.z0, 0.0);
        let star = steady_state_cycle(&params, &scenario.profile.inflow);
        let mut cols = vec!["t", "v1", "v2", "v3", "z", "zbar", "zstar"];
        if oracle.is_some() {
            cols.push("z_oracle");
        }
        let mut table = Table::new(cols);
        let mut z_num = params.z0;
        let mut prev = 0.0;
        for &t in &grid {
            let v = scenario.profile.v.each_ref().map(|c| c.eval(t));
            let mut row: Vec<Cell> = vec![
                t.into(),
                v[0].into(),
                v[1].into(),
                v[2].into(),
                traj.value(t).into(),
                scenario.zbar().eval(t).into(),
                star.eval(t).into(),
            ];
            if let Some(o) = &oracle {
                let prof = o.profile(&params, s);
                let inflow = |u: f64| prof.inflow(u);
                if t > prev {
                    let field = Field::State { inflow: &inflow };
                    z_num = integrate_ode(&params, &field, z_num, prev, t, o.cfg.ode_steps_per_period);
                }
                row.push(z_num.into());
            }
            prev = t;
            table.push(row);
        }
        out.artifacts.push(Artifact::table(format!("simulate_{}", s.name()), table));
    }
    if failed > 0 {
        out.failure = Some(CliError::CheckFailed(format!("{failed} structure(s) not sustainable")));
    }
    Ok(out)
}

pub fn stability(common: &Common) -> Result<Outcome, CliError> {
    let game = Game::new(common.game_params()?)?;
    let params = *game.params();
    let alpha = common.alpha()?;
    let report = nonemptiness_check(&game)?;
    let oracle = if common.oracle { Some(Oracle::new(&params)?) } else { None };

    let mut cols = vec![
        "eps", "z", "lower1", "lower2", "lower3", "v_n", "surplus", "nonempty", "zeta1", "zeta2", "zeta3",
    ];
    if oracle.is_some() {
        cols.push("surplus_oracle");
    }
    let mut table = Table::new(cols);
    let mut empty_at = None;
    for eps in common.time_grid()? {
        let b = zset_bounds(&game, eps)?;
        let z = if b.nonempty { zeta(&game, &alpha, eps)?.zeta } else { [f64::NAN; 3] };
        if !b.nonempty && empty_at.is_none() {
            empty_at = Some((eps, b.surplus));
        }
        let mut row: Vec<Cell> = vec![
            eps.into(),
            b.z_eps.into(),
            b.lower[0].into(),
            b.lower[1].into(),
            b.lower[2].into(),
            b.total.into(),
            b.surplus.into(),
            b.nonempty.into(),
            z[0].into(),
            z[1].into(),
            z[2].into(),
        ];
        if let Some(o) = &oracle {
            row.push(o.surplus(&params, eps, b.z_eps).into());
        }
        table.push(row);
    }

    let mut out = Outcome::ok(vec![Artifact::report("stability", &report)?, Artifact::table("zset", table)]);
    if !report.satisfied {
        out.failure = Some(CliError::CheckFailed(format!(
            "non-emptiness condition violated: Y = {:.6} exceeds {:.6}",
            report.y, report.rhs
        )));
    } else if let Some((eps, surplus)) = empty_at {
        out.failure = Some(GameError::EmptyPrinciple { eps, surplus }.into());
    }
    Ok(out)
}

#[derive(Serialize)]
struct StrongTcSummary {
    found: bool,
    witness: Option<StrongTcWitness>,
    /// Smallest `SC(0) − e^{−ρt}SC(t)` on the search grid and where it occurs.
    min_gap: f64,
    min_gap_at: f64,
}

#[derive(Serialize)]
struct AllocationSummary {
    alpha: AllocationWeights,
    residual_points: usize,
    max_abs_residual: f64,
    strong_tc: Option<StrongTcSummary>,
}

/// Residual check points: the allocation grid thinned to at most 21 points.
fn residual_grid(grid: &[f64]) -> Vec<f64> {
    let stride = grid.len().div_ceil(20).max(1);
    let mut g: Vec<f64> = grid.iter().copied().step_by(stride).collect();
    if g.last() != grid.last() {
        g.extend(grid.last());
    }
    g
}

pub fn allocate(common: &Common, strong_tc: bool, alpha_prime: &str) -> Result<Outcome, CliError> {
    let game = Game::new(common.game_params()?)?;
    let alpha = common.alpha()?;
    let alpha_prime = parse_alpha(alpha_prime)?;
    let grid = common.time_grid()?;

    let mut table = Table::new([
        "eps", "z", "zeta1", "zeta2", "zeta3", "lower1", "lower2", "lower3", "surplus", "w1", "w2", "w3", "w_flow1",
        "w_flow2", "w_flow3",
    ]);
    for &eps in &grid {
        let imp = zeta(&game, &alpha, eps)?;
        let w = idp(&game, &alpha, eps)?;
        let wf = idp_flow_only(&game, &alpha, eps)?;
        let mut row: Vec<Cell> = vec![eps.into(), game.cooperative_state(eps)?.into()];
        row.extend(imp.zeta.map(Cell::from));
        row.extend(imp.lower.map(Cell::from));
        row.push(imp.surplus.into());
        row.extend(w.map(Cell::from));
        row.extend(wf.map(Cell::from));
        table.push(row);
    }

    let tc = verify_time_consistency(&game, &alpha, &residual_grid(&grid))?;
    let mut residuals = Table::new(["eps", "r1", "r2", "r3"]);
    for r in &tc.rows {
        residuals.push(vec![r.eps.into(), r.residual[0].into(), r.residual[1].into(), r.residual[2].into()]);
    }

    let mut notes = vec![format!(
        "time consistency: max |residual| = {:.3e} over {} points",
        tc.max_abs_residual,
        tc.rows.len()
    )];
    let strong = if strong_tc {
        let witness = strong_tc_counterexample(&game, &alpha, &alpha_prime)?;
        let period = game.params().period;
        let (mut min_gap, mut min_gap_at) = (f64::INFINITY, 0.0);
        for k in 1..=STRONG_TC_GRID {
            let t = period * k as f64 / STRONG_TC_GRID as f64;
            let g = discounted_surplus_gap(&game, t)?;
            if g < min_gap {
                (min_gap, min_gap_at) = (g, t);
            }
        }
        notes.push(match &witness {
            Some(w) => format!(
                "strong time consistency fails: switching at t' = {:.9} leaves players {:?} below their bounds",
                w.t_prime,
                w.violators.iter().map(|p| p.index() + 1).collect::<Vec<_>>()
            ),
            None => format!(
                "no switching instant in (0, T] breaks strong time consistency; smallest discounted surplus gap {min_gap:.6e} at t' = {min_gap_at:.6}"
            ),
        });
        Some(StrongTcSummary { found: witness.is_some(), witness, min_gap, min_gap_at })
    } else {
        None
    };

    let summary = AllocationSummary {
        alpha,
        residual_points: tc.rows.len(),
        max_abs_residual: tc.max_abs_residual,
        strong_tc: strong,
    };
    Ok(Outcome {
        artifacts: vec![
            Artifact::table("allocation", table),
            Artifact::table("time_consistency", residuals),
            Artifact::report("allocation_summary", &summary)?,
        ],
        notes,
        failure: None,
    })
}

struct SweepPoint {
    status: &'static str,
    y: f64,
    rhs: f64,
    satisfied: bool,
    surplus_coefficient: f64,
    worst_structure: String,
    worst_player: usize,
    worst_margin: f64,
    detail: String,
}

fn sweep_point(base: &GameParams, key: &str, value: f64) -> SweepPoint {
    let mut p = SweepPoint {
        status: "ok",
        y: f64::NAN,
        rhs: f64::NAN,
        satisfied: false,
        surplus_coefficient: f64::NAN,
        worst_structure: String::new(),
        worst_player: 0,
        worst_margin: f64::NAN,
        detail: String::new(),
    };
    let mut params = *base;
    let game = match params.set(key, value).and_then(|_| Game::new(params)) {
        Ok(g) => g,
        Err(e) => {
            p.status = "invalid";
            p.detail = e.to_string();
            return p;
        }
    };
    let mut worst = f64::INFINITY;
    // zero-weight players are sustainable with margin 0 and say nothing
    for s in CoalitionStructure::ALL {
        for w in game.sustainability(s).players.iter().filter(|w| w.weight != 0.0) {
            if w.margin < worst {
                worst = w.margin;
                p.worst_structure = s.name().to_string();
                p.worst_player = w.player.index() + 1;
                p.worst_margin = w.margin;
            }
        }
    }
    match nonemptiness_check(&game) {
        Ok(r) => {
            p.y = r.y;
            p.rhs = r.rhs;
            p.satisfied = r.satisfied;
            p.surplus_coefficient = r.surplus_coefficient;
        }
        Err(e @ GameError::NotSustainable { .. }) => {
            p.status = "not_sustainable";
            p.detail = e.to_string();
        }
        Err(e) => {
            p.status = "error";
            p.detail = e.to_string();
        }
    }
    p
}

pub fn sweep(common: &Common) -> Result<Outcome, CliError> {
    let spec: SweepSpec = common
        .sweep
        .as_deref()
        .ok_or_else(|| CliError::Input("sweep needs --sweep KEY=lo:hi:n".into()))?
        .parse()?;
    let base = common.game_params()?;
    let values: Vec<f64> = match common.seed {
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<f64> = (0..spec.n).map(|_| rng.gen_range(spec.lo..=spec.hi)).collect();
            v.sort_by(f64::total_cmp);
            v
        }
        None if spec.n == 1 => vec![spec.lo],
        None => (0..spec.n)
            .map(|k| spec.lo + (spec.hi - spec.lo) * k as f64 / (spec.n - 1) as f64)
            .collect(),
    };
    let points: Vec<SweepPoint> = values.par_iter().map(|&v| sweep_point(&base, &spec.key, v)).collect();

    let mut table = Table::new([
        spec.key.as_str(),
        "status",
        "satisfied",
        "y",
        "rhs",
        "rhs_minus_y",
        "surplus_coefficient",
        "worst_structure",
        "worst_player",
        "worst_margin",
        "detail",
    ]);
    let mut flips = 0;
    for (k, (v, p)) in values.iter().zip(&points).enumerate() {
        if k > 0 && p.satisfied != points[k - 1].satisfied {
            flips += 1;
        }
        table.push(vec![
            (*v).into(),
            p.status.into(),
            p.satisfied.into(),
            p.y.into(),
            p.rhs.into(),
            (p.rhs - p.y).into(),
            p.surplus_coefficient.into(),
            p.worst_structure.clone().into(),
            p.worst_player.into(),
            p.worst_margin.into(),
            p.detail.clone().into(),
        ]);
    }
    let satisfied = points.iter().filter(|p| p.satisfied).count();
    let mut out = Outcome::ok(vec![Artifact::table("sweep", table)]);
    out.notes.push(format!(
        "sweep {}: {satisfied}/{} points satisfied, {flips} frontier crossings",
        spec.key,
        points.len()
    ));
    Ok(out)
}

struct Check {
    name: String,
    closed_form: f64,
    oracle: f64,
    tolerance: f64,
}

impl Check {
    fn error(&self) -> f64 {
        (self.closed_form - self.oracle).abs() / self.closed_form.abs().max(1.0)
    }
}

pub fn verify(common: &Common) -> Result<Outcome, CliError> {
    let game = Game::new(common.game_params()?)?;
    let params = *game.params();
    let o = Oracle::new(&params)?;
    let alpha = common.alpha()?;
    let mut checks = Vec::new();
    let mut push = |name: String, closed_form: f64, oracle: f64, tolerance: f64| {
        checks.push(Check { name, closed_form, oracle, tolerance });
    };

    let l = game.adjoint();
    push("adjoint L(0)".into(), l.initial_value(), o.adjoint.eval(0.0), 1e-9);
    push("adjoint L(tau T)".into(), l.at_switch(), o.adjoint.eval(params.switch_time()), 1e-9);
    for eps in [0.0, 0.5 * params.switch_time(), params.period + 0.25] {
        push(
            format!("kernel h({eps})"),
            discount_kernel_h(&params, eps),
            discount_kernel_quad(&params, &o.cfg, eps),
            1e-8,
        );
    }

    let ctx = SubgameContext::new(0.0, params.z0)?;
    for s in common.structure.structures() {
        let Ok(scenario) = game.scenario(s) else {
            continue;
        };
        let prof = o.profile(&params, s);
        push(
            format!("{} limit cycle zbar(0)", s.name()),
            scenario.zbar().eval(0.0),
            prof.limit_cycle_start(&o.cfg)?,
            1e-9,
        );
        let sim = prof.payoffs(&o.cfg, 0.0, params.z0);
        for p in Player::ALL {
            push(
                format!("{} payoff K{}", s.name(), p.index() + 1),
                scenario_payoff(&game, scenario, p, &ctx),
                sim[p.index()],
                1e-7,
            );
        }
    }

    if let Ok(mb) = mbar_cycle(&game) {
        let m = |t: f64| mb.mbar.eval(t);
        let l2 = |t: f64| o.adjoint.eval(t).powi(2);
        push("stability E".into(), e_integral(&params, &mb), discounted_integral_quad(&params, &o.cfg, &m, 0.0), 1e-8);
        push("stability G0".into(), g0_integral(&game), discounted_integral_quad(&params, &o.cfg, &l2, 0.0), 1e-8);
        let z1 = game.cooperative_state(1.0)?;
        push("surplus SC(1)".into(), zset_bounds(&game, 1.0)?.surplus, o.surplus(&params, 1.0, z1), 1e-7);
    }

    let tc = verify_time_consistency(&game, &alpha, &[0.0, 0.3, params.period, 2.5 * params.period])?;
    push("time consistency max |residual|".into(), tc.max_abs_residual, 0.0, 1e-8);

    let mut table = Table::new(["check", "closed_form", "oracle", "rel_error", "tolerance", "pass"]);
    let mut failed = Vec::new();
    for c in &checks {
        let pass = c.error() <= c.tolerance;
        if !pass {
            failed.push(c.name.clone());
        }
        table.push(vec![
            c.name.clone().into(),
            c.closed_form.into(),
            c.oracle.into(),
            c.error().into(),
            c.tolerance.into(),
            pass.into(),
        ]);
    }
    let mut out = Outcome::ok(vec![Artifact::table("verify", table)]);
    out.notes.push(format!("{}/{} checks passed", checks.len() - failed.len(), checks.len()));
    if !failed.is_empty() {
        out.failure = Some(CliError::CheckFailed(format!("oracle mismatch: {}", failed.join("; "))));
    }
    Ok(out)
}
