//! Fixtures shared by the benchmarks.

use pollgame::{Game, GameParams};

/// Parameter sets of increasing stiffness: the reference set, a slow-decay
/// set with a long period, and a fast-decay set with an early switch.
pub fn fixtures() -> Vec<(&'static str, GameParams)> {
    let reference = GameParams::reference();
    let mut slow = reference;
    slow.delta1 = 0.05;
    slow.delta2 = 0.2;
    slow.period = 4.0;
    let mut fast = reference;
    fast.delta1 = 3.0;
    fast.delta2 = 5.0;
    fast.tau = 0.1;
    vec![("reference", reference), ("slow", slow), ("fast", fast)]
}

pub fn solved(params: GameParams) -> Game {
    Game::new(params).expect("fixture games are sustainable")
}
