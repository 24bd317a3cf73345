#![allow(dead_code)]

use pollgame::{CoalitionStructure, Game, GameParams, Player, PlayerParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Whether every structure and every punishing profile is sustainable.
pub fn fully_sustainable(game: &Game) -> bool {
    CoalitionStructure::ALL.iter().all(|&s| game.scenario(s).is_ok())
        && Player::ALL.iter().all(|&p| game.punishing(p).is_ok())
}

fn draw(rng: &mut ChaCha8Rng) -> GameParams {
    let (q1, q2) = (rng.gen_range(0.5..6.0), rng.gen_range(0.5..6.0));
    let players = {
        let mut player = |q: f64| PlayerParams {
            a: rng.gen_range(2.0..6.0),
            b: rng.gen_range(6.0..14.0),
            xi: rng.gen_range(0.1..0.6),
            q,
        };
        [player(q1), player(q2), player(0.0)]
    };
    GameParams {
        delta1: rng.gen_range(0.3..1.2),
        delta2: rng.gen_range(0.3..1.2),
        period: rng.gen_range(0.8..2.0),
        tau: rng.gen_range(0.2..0.8),
        rho: rng.gen_range(0.15..0.5),
        players,
        z0: rng.gen_range(0.0..50.0),
    }
}

/// `n` parameter sets drawn from `seed`, keeping only fully sustainable ones.
pub fn random_sustainable(seed: u64, n: usize) -> Vec<Game> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if let Ok(game) = Game::new(draw(&mut rng)) {
            if fully_sustainable(&game) {
                out.push(game);
            }
        }
    }
    out
}

/// Proptest strategy over fully sustainable games.
pub fn sustainable_game() -> impl Strategy<Value = Game> {
    any::<u64>().prop_map(|seed| random_sustainable(seed, 1).remove(0))
}
