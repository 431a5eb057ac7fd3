use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use depthrl_core::agent::{train_step, Experience};
use depthrl_core::disparity::generate_scene;
use depthrl_core::oracle::{grid_search, value_iteration, RatioGridMDP};
use depthrl_core::{EnvConfig, QNetwork, SceneSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn features(c: &mut Criterion) {
    let env = EnvConfig::default();
    let ex = env.extractor().unwrap();
    let scene = generate_scene(&SceneSpec::default(), 0).unwrap();
    c.bench_function("extract_features 64x48", |b| {
        b.iter(|| ex.compute(black_box(&scene)).unwrap())
    });
    c.bench_function("generate_scene 64x48", |b| {
        b.iter(|| generate_scene(black_box(&SceneSpec::default()), 7).unwrap())
    });
}

fn network(c: &mut Criterion) {
    let env = EnvConfig::default();
    let n_in = env.encoded_len();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let net = QNetwork::new(&[n_in, 64, 64, 3], &mut rng).unwrap();
    let x: Vec<f64> = (0..n_in).map(|_| rng.random_range(0.0..1.0)).collect();
    c.bench_function("forward", |b| b.iter(|| net.forward(black_box(&x)).unwrap()));
    c.bench_function("backward", |b| b.iter(|| net.backward(black_box(&x), 1, 0.5).unwrap()));

    let batch: Vec<Experience> = (0..32)
        .map(|i| Experience {
            state: x.clone(),
            action: i % 3,
            reward: 0.1,
            next_state: x.clone(),
            done: i % 5 == 0,
        })
        .collect();
    let refs: Vec<&Experience> = batch.iter().collect();
    let target = net.clone();
    c.bench_function("train_step batch 32", |b| {
        let mut online = net.clone();
        b.iter(|| train_step(&mut online, &target, black_box(&refs), 0.9, 1e-3).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let env = EnvConfig::default();
    let scene = generate_scene(&SceneSpec::default(), 1).unwrap();
    let mdp = RatioGridMDP::build(&scene, &env).unwrap();
    c.bench_function("value_iteration 37 ratios x 20 steps", |b| {
        b.iter(|| value_iteration(black_box(&mdp), 0.9))
    });
    c.bench_function("grid_search", |b| {
        b.iter(|| grid_search(black_box(&scene), &env).unwrap())
    });
}

criterion_group!(benches, features, network, oracle);
criterion_main!(benches);
