//! Model constants, coalition structures and the shadow-cost weight map.
//!
//! Every scenario of the game differs only in how strongly each player prices
//! the pollution stock. A player's adjoint is `μᵢ·L(t)` where `μᵢ` is the
//! aggregate tax coefficient of the coalition that player belongs to, so the
//! five coalition structures collapse to five weight vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// One of the three players. Players 1 and 2 are farsighted, player 3 is myopic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
    Three,
}

impl Player {
    pub const ALL: [Player; 3] = [Player::One, Player::Two, Player::Three];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
            Player::Three => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Player> {
        Player::ALL.get(i).copied()
    }

    pub fn is_myopic(self) -> bool {
        self == Player::Three
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player {}", self.index() + 1)
    }
}

/// Per-player economics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayerParams {
    /// Profit conversion coefficient.
    pub a: f64,
    /// Maximum emission rate.
    pub b: f64,
    /// Marginal influence of emissions on the stock.
    pub xi: f64,
    /// Tax (vulnerability) coefficient on the stock. Zero for the myopic player.
    pub q: f64,
}

impl PlayerParams {
    /// `ξ²/(2a)`, the coefficient of `μ²L²` lost from production when the
    /// player abates.
    pub fn k(&self) -> f64 {
        self.xi * self.xi / (2.0 * self.a)
    }

    /// Lower end of the interior band for the player's adjoint, `−a·b/ξ`.
    pub fn adjoint_floor(&self) -> f64 {
        -self.a * self.b / self.xi
    }
}

/// All model constants.
///
/// Construct through [`GameParams::validate`] (or [`GameParams::reference`]);
/// the solver assumes the invariants it checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Self-purification rate on the first subperiod.
    pub delta1: f64,
    /// Self-purification rate on the second subperiod.
    pub delta2: f64,
    /// Switching period.
    #[serde(rename = "T")]
    pub period: f64,
    /// Fraction of the period spent in the first regime.
    pub tau: f64,
    /// Discount rate.
    pub rho: f64,
    /// Farsighted 1, farsighted 2, myopic 3.
    pub players: [PlayerParams; 3],
    /// Initial pollution stock.
    pub z0: f64,
}

impl GameParams {
    /// The parameter set of the numerical illustration.
    pub fn reference() -> GameParams {
        GameParams {
            delta1: 0.45,
            delta2: 0.9,
            period: 1.0,
            tau: 0.5,
            rho: 0.3,
            players: [
                PlayerParams { a: 5.0, b: 10.0, xi: 0.3, q: 4.0 },
                PlayerParams { a: 4.0, b: 10.0, xi: 0.4, q: 5.0 },
                PlayerParams { a: 3.0, b: 10.0, xi: 0.6, q: 0.0 },
            ],
            z0: 0.0,
        }
    }

    /// Checks every sign and range assumption and returns the parameters
    /// unchanged when they hold. The error names the first violated invariant.
    pub fn validate(self) -> Result<GameParams> {
        let bad = |msg: &str| Err(GameError::InvalidParams(msg.to_string()));
        let scalars = [
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("T", self.period),
            ("tau", self.tau),
            ("rho", self.rho),
            ("z0", self.z0),
        ];
        for (name, v) in scalars {
            if !v.is_finite() {
                return bad(&format!("{name} is not a finite number"));
            }
        }
        if self.delta1 <= 0.0 {
            return bad("delta1 must be > 0");
        }
        if self.delta2 <= 0.0 {
            return bad("delta2 must be > 0");
        }
        if self.period <= 0.0 {
            return bad("T must be > 0");
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad("tau out of (0,1)");
        }
        if self.rho <= 0.0 {
            return bad("rho must be > 0");
        }
        if self.z0 < 0.0 {
            return bad("z0 must be >= 0");
        }
        for p in Player::ALL {
            let pp = &self.players[p.index()];
            let n = p.index() + 1;
            for (name, v) in [("a", pp.a), ("b", pp.b), ("xi", pp.xi), ("q", pp.q)] {
                if !v.is_finite() {
                    return bad(&format!("{name}{n} is not a finite number"));
                }
            }
            if pp.a <= 0.0 {
                return bad(&format!("a{n} must be > 0"));
            }
            if pp.b <= 0.0 {
                return bad(&format!("b{n} must be > 0"));
            }
            if pp.xi <= 0.0 {
                return bad(&format!("xi{n} must be > 0"));
            }
            if p.is_myopic() {
                if pp.q != 0.0 {
                    return bad("myopic player must have q=0");
                }
            } else if pp.q <= 0.0 {
                return bad(&format!("farsighted player {n} must have q>0"));
            }
        }
        Ok(self)
    }

    pub fn s1(&self) -> f64 {
        self.delta1 + self.rho
    }

    pub fn s2(&self) -> f64 {
        self.delta2 + self.rho
    }

    /// Aggregate tax `q₁ + q₂`.
    pub fn q(&self) -> f64 {
        self.players[0].q + self.players[1].q
    }

    pub fn player(&self, p: Player) -> &PlayerParams {
        &self.players[p.index()]
    }

    /// Length of the first subperiod, `τT`.
    pub fn switch_time(&self) -> f64 {
        self.tau * self.period
    }

    /// Total decay over one period, `(δ₁τ + δ₂(1−τ))T`.
    pub fn period_decay(&self) -> f64 {
        (self.delta1 * self.tau + self.delta2 * (1.0 - self.tau)) * self.period
    }

    pub fn delta_min(&self) -> f64 {
        self.delta1.min(self.delta2)
    }

    /// Self-purification rate in force at time `t`.
    pub fn delta_at(&self, t: f64) -> f64 {
        match crate::cycle::Phase::at(t, self.period, self.tau) {
            crate::cycle::Phase::First => self.delta1,
            crate::cycle::Phase::Second => self.delta2,
        }
    }

    /// Parameter keys accepted by config files and `set`, in canonical order.
    pub const KEYS: [&'static str; 17] = [
        "delta1", "delta2", "T", "tau", "rho", "a1", "a2", "a3", "b1", "b2", "b3", "xi1", "xi2",
        "xi3", "q1", "q2", "z0",
    ];

    /// Assigns a single named constant. `q3` is accepted so that a config
    /// file may state it explicitly; validation still requires it to be 0.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = self
            .slot_mut(key)
            .ok_or_else(|| GameError::InvalidParams(format!("unknown parameter key `{key}`")))?;
        *slot = value;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot_mut(key).map(|v| *v)
    }

    fn slot_mut(&mut self, key: &str) -> Option<&mut f64> {
        let player_field = |key: &str, prefix: &str| -> Option<usize> {
            let idx = key.strip_prefix(prefix)?.parse::<usize>().ok()?;
            (1..=3).contains(&idx).then(|| idx - 1)
        };
        Some(match key {
            "delta1" => &mut self.delta1,
            "delta2" => &mut self.delta2,
            "T" => &mut self.period,
            "tau" => &mut self.tau,
            "rho" => &mut self.rho,
            "z0" => &mut self.z0,
            _ => {
                if let Some(i) = player_field(key, "xi") {
                    &mut self.players[i].xi
                } else if let Some(i) = player_field(key, "a") {
                    &mut self.players[i].a
                } else if let Some(i) = player_field(key, "b") {
                    &mut self.players[i].b
                } else if let Some(i) = player_field(key, "q") {
                    &mut self.players[i].q
                } else {
                    return None;
                }
            }
        })
    }

    /// Parses a flat `key = value` config on top of `self`. Blank lines and
    /// `#` comments are ignored; unknown keys and malformed numbers are errors.
    pub fn apply_config(mut self, text: &str) -> Result<GameParams> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                GameError::InvalidParams(format!("line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let v: f64 = value.parse().map_err(|_| {
                GameError::InvalidParams(format!(
                    "line {}: `{value}` is not a number for {key}",
                    lineno + 1
                ))
            })?;
            self.set(key, v)?;
        }
        Ok(self)
    }

    /// Renders the parameters in the config-file format.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            out.push_str(&format!("{key} = {}\n", self.get(key).unwrap_or(f64::NAN)));
        }
        out
    }
}

/// The five feasible partitions of {1, 2, 3}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoalitionStructure {
    /// Grand coalition {1,2,3}.
    Pi1,
    /// All singletons.
    Pi2,
    /// {1,2}, {3}.
    Pi3,
    /// {1,3}, {2}.
    Pi41,
    /// {2,3}, {1}.
    Pi42,
}

impl CoalitionStructure {
    pub const ALL: [CoalitionStructure; 5] = [
        CoalitionStructure::Pi1,
        CoalitionStructure::Pi2,
        CoalitionStructure::Pi3,
        CoalitionStructure::Pi41,
        CoalitionStructure::Pi42,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoalitionStructure::Pi1 => "pi1",
            CoalitionStructure::Pi2 => "pi2",
            CoalitionStructure::Pi3 => "pi3",
            CoalitionStructure::Pi41 => "pi41",
            CoalitionStructure::Pi42 => "pi42",
        }
    }

    /// Structure reached when `p` leaves the grand coalition.
    pub fn deviation_of(p: Player) -> CoalitionStructure {
        match p {
            Player::One => CoalitionStructure::Pi42,
            Player::Two => CoalitionStructure::Pi41,
            Player::Three => CoalitionStructure::Pi3,
        }
    }

    /// Blocks of the partition, each sorted.
    pub fn blocks(self) -> Vec<Vec<Player>> {
        use Player::*;
        match self {
            CoalitionStructure::Pi1 => vec![vec![One, Two, Three]],
            CoalitionStructure::Pi2 => vec![vec![One], vec![Two], vec![Three]],
            CoalitionStructure::Pi3 => vec![vec![One, Two], vec![Three]],
            CoalitionStructure::Pi41 => vec![vec![One, Three], vec![Two]],
            CoalitionStructure::Pi42 => vec![vec![Two, Three], vec![One]],
        }
    }
}

impl fmt::Display for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoalitionStructure {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self> {
        CoalitionStructure::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| GameError::InvalidParams(format!("unknown coalition structure `{s}`")))
    }
}

/// Per-player shadow-cost weights `μᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowWeights(pub [f64; 3]);

impl ShadowWeights {
    pub fn of(&self, p: Player) -> f64 {
        self.0[p.index()]
    }
}

/// The aggregate tax coefficient of each player's coalition.
pub fn shadow_weights(structure: CoalitionStructure, params: &GameParams) -> ShadowWeights {
    // A coalition prices the stock at the sum of its members' taxes.
    let q = [params.players[0].q, params.players[1].q, params.players[2].q];
    let mut mu = [0.0; 3];
    for block in structure.blocks() {
        let total: f64 = block.iter().map(|p| q[p.index()]).sum();
        for p in block {
            mu[p.index()] = total;
        }
    }
    ShadowWeights(mu)
}

/// Weights of the profile in which `p` plays its Nash strategy and both
/// opponents emit at their maximum rate (weight 0).
pub fn punishing_weights(p: Player, params: &GameParams) -> ShadowWeights {
    let mut mu = [0.0; 3];
    mu[p.index()] = params.player(p).q;
    ShadowWeights(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_set_is_valid() {
        let p = GameParams::reference().validate().unwrap();
        assert_eq!(p.q(), 9.0);
        assert!((p.s1() - 0.75).abs() < 1e-15);
        assert!((p.s2() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn tau_boundary_rejected() {
        let mut p = GameParams::reference();
        p.tau = 1.0;
        let err = p.validate().unwrap_err();
        assert_eq!(err.to_string(), "invalid parameters: tau out of (0,1)");
    }

    #[test]
    fn myopic_tax_rejected() {
        let mut p = GameParams::reference();
        p.players[2].q = 1.0;
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("myopic player must have q=0"));
    }

    #[test]
    fn farsighted_needs_tax() {
        let mut p = GameParams::reference();
        p.players[1].q = 0.0;
        assert!(p.validate().unwrap_err().to_string().contains("farsighted player 2"));
    }

    #[test]
    fn weights_for_every_structure() {
        let p = GameParams::reference();
        let w = |s| shadow_weights(s, &p).0;
        assert_eq!(w(CoalitionStructure::Pi1), [9.0, 9.0, 9.0]);
        assert_eq!(w(CoalitionStructure::Pi2), [4.0, 5.0, 0.0]);
        assert_eq!(w(CoalitionStructure::Pi3), [9.0, 9.0, 0.0]);
        assert_eq!(w(CoalitionStructure::Pi41), [4.0, 5.0, 4.0]);
        assert_eq!(w(CoalitionStructure::Pi42), [4.0, 5.0, 5.0]);
    }

    #[test]
    fn myopic_weight_zero_iff_singleton() {
        let p = GameParams::reference();
        for s in CoalitionStructure::ALL {
            let singleton = s.blocks().iter().any(|b| b == &vec![Player::Three]);
            assert_eq!(shadow_weights(s, &p).of(Player::Three) == 0.0, singleton, "{s}");
            for f in [Player::One, Player::Two] {
                let mu = shadow_weights(s, &p).of(f);
                assert!([4.0, 5.0, 9.0].contains(&mu));
                if s.blocks().iter().any(|b| b == &vec![f]) {
                    assert_eq!(mu, p.player(f).q);
                }
            }
        }
    }

    #[test]
    fn config_round_trip_and_overrides() {
        let text = "# reference\ndelta1 = 0.45\ndelta2=0.9\nT = 2\n\nq2 = 6 # comment\n";
        let p = GameParams::reference().apply_config(text).unwrap();
        assert_eq!(p.period, 2.0);
        assert_eq!(p.players[1].q, 6.0);
        let again = GameParams::reference().apply_config(&p.to_config()).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn config_errors_are_named() {
        let err = GameParams::reference().apply_config("gamma = 1").unwrap_err();
        assert!(err.to_string().contains("gamma"));
        let err = GameParams::reference().apply_config("rho = abc").unwrap_err();
        assert!(err.to_string().contains("rho"));
        let err = GameParams::reference().apply_config("rho 0.3").unwrap_err();
        assert!(err.to_string().contains("key=value"));
    }

    #[test]
    fn structure_parsing() {
        assert_eq!("PI41".parse::<CoalitionStructure>().unwrap(), CoalitionStructure::Pi41);
        assert!("pi5".parse::<CoalitionStructure>().is_err());
    }
}
