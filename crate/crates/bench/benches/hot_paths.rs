//! Hot-path benchmarks: the matching solver (memoized vs brute force) and
//! one full shadow-engine slot on the grid.

use bp_core::engine::{ShadowEngine, ShadowParams, TieBreak};
use bp_core::solver::{brute_force_max_weight, LinkWeights};
use bp_core::{max_weight_schedule, scenarios};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pseudorandom but fixed weights on the grid's 24 links.
fn grid_weights(rng: &mut ChaCha8Rng, num_links: usize) -> LinkWeights {
    LinkWeights::new(
        (0..num_links)
            .map(|_| {
                let w: f64 = rng.gen_range(-5.0..50.0);
                (w > 0.0).then_some((w, 0u32))
            })
            .collect(),
    )
}

fn bench_solver(c: &mut Criterion) {
    let (net, _) = scenarios::grid16();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let weights: Vec<LinkWeights> =
        (0..64).map(|_| grid_weights(&mut rng, net.num_links())).collect();

    let mut group = c.benchmark_group("solver");
    let mut i = 0;
    group.bench_function("grid16_matching", |b| {
        b.iter(|| {
            i = (i + 1) % weights.len();
            max_weight_schedule(&net, &weights[i])
        })
    });
    i = 0;
    group.bench_function("grid16_brute_force", |b| {
        b.iter(|| {
            i = (i + 1) % weights.len();
            brute_force_max_weight(&net, &weights[i]).unwrap()
        })
    });
    group.finish();
}

fn bench_shadow_step(c: &mut Criterion) {
    let (network, flows) = scenarios::grid16();
    let mut engine = ShadowEngine::new(
        network,
        flows,
        ShadowParams { m: 1000.0, beta: 0.99 },
        TieBreak::LowestId,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    // Warm the queues so the benchmarked slot is a loaded, typical one.
    for slot in 0..5_000 {
        engine.step(slot, &mut rng);
    }
    let mut slot = 5_000;
    c.bench_function("shadow_step_grid16", |b| {
        b.iter(|| {
            slot += 1;
            engine.step(slot, &mut rng)
        })
    });
}

criterion_group!(benches, bench_solver, bench_shadow_step);
criterion_main!(benches);
