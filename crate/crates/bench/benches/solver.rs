use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use pollgame::allocation::{idp, verify_time_consistency, zeta};
use pollgame::oracle::{OracleAdjoint, OracleConfig};
use pollgame::stability::{nonemptiness_check, zset_bounds};
use pollgame::{AllocationWeights, Game};
use pollgame_bench::{fixtures, solved};

fn closed_forms(c: &mut Criterion) {
    let alpha = AllocationWeights::equal();
    for (name, params) in fixtures() {
        let game = solved(params);
        let mut g = c.benchmark_group(name);
        g.bench_function("solve_game", |b| b.iter(|| Game::new(black_box(params)).unwrap()));
        g.bench_function("nonemptiness_check", |b| b.iter(|| nonemptiness_check(black_box(&game)).unwrap()));
        g.bench_function("zset_bounds", |b| b.iter(|| zset_bounds(&game, black_box(1.3)).unwrap()));
        g.bench_function("zeta", |b| b.iter(|| zeta(&game, &alpha, black_box(1.3)).unwrap()));
        g.bench_function("idp", |b| b.iter(|| idp(&game, &alpha, black_box(1.3)).unwrap()));
        g.finish();
    }
}

fn checks(c: &mut Criterion) {
    let alpha = AllocationWeights::equal();
    let mut g = c.benchmark_group("checks");
    g.sample_size(10);
    for (name, params) in fixtures() {
        let game = solved(params);
        let grid: Vec<f64> = (0..=4).map(|k| k as f64 * params.period).collect();
        g.bench_with_input(BenchmarkId::new("time_consistency", name), &grid, |b, grid| {
            b.iter(|| verify_time_consistency(&game, &alpha, grid).unwrap())
        });
        let cfg = OracleConfig::coarse();
        g.bench_with_input(BenchmarkId::new("oracle_adjoint", name), &cfg, |b, cfg| {
            b.iter(|| OracleAdjoint::solve(&params, cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, closed_forms, checks);
criterion_main!(benches);
