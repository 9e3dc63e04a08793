use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use sada_core::augment::{apply_draw, weak_shift, AugDraw};
use sada_core::envs::DistributionSpec;
use sada_core::evalmetrics::collect_observations;
use sada_core::networks::obs_batch;
use sada_core::rng::stream;
use sada_core::{Agent, AugKind, AugParams, AugmentationSpec, DistractorBank, EnvConfig, NetConfig, ReplayBuffer, TrainConfig, Trainer};

fn augmentations(c: &mut Criterion) {
    let env = EnvConfig::default();
    let obs = collect_observations(&env, DistributionSpec::train(), 1, 0).unwrap().remove(0);
    let bank = DistractorBank::procedural(8, env.image_size, env.image_size, 1);
    let mut g = c.benchmark_group("augment_84px");
    g.bench_function("weak_shift", |b| b.iter(|| weak_shift(black_box(&obs), 3, -2, 4).unwrap()));
    for kind in AugKind::STRONG {
        let draw = AugDraw::from_seed(AugmentationSpec { kind, params: AugParams::default() }, 7, bank.len()).unwrap();
        g.bench_function(kind.name(), |b| b.iter(|| apply_draw(black_box(&obs), &draw, &bank).unwrap()));
    }
    g.finish();
}

fn encoder(c: &mut Criterion) {
    let env = EnvConfig::default();
    let obs = collect_observations(&env, DistributionSpec::train(), 32, 0).unwrap();
    let refs: Vec<_> = obs.iter().collect();
    let batch = obs_batch::<f32>(&refs).unwrap();
    let agent = Agent::<f32>::new(NetConfig::default(), &mut stream(0, 0)).unwrap();
    c.bench_function("encoder_forward_b32_84px", |b| b.iter(|| agent.encoder.encode(black_box(batch.view())).unwrap()));
}

fn replay(c: &mut Criterion) {
    let cfg = TrainConfig { image_size: 42, total_steps: 2_000, seed_frames: 2_000, batch_size: 256, ..TrainConfig::default() };
    let mut t = Trainer::new(cfg, None).unwrap();
    let mut rows = Vec::new();
    while t.step() < 2_000 {
        t.tick(&mut rows).unwrap();
    }
    let buf: &ReplayBuffer = &t.buffer;
    let mut rng = stream(0, 1);
    c.bench_function("replay_sample_256_of_2000", |b| b.iter(|| buf.sample(256, &mut rng).unwrap()));
}

fn update(c: &mut Criterion) {
    let cfg = TrainConfig {
        image_size: 42,
        hidden_dim: 256,
        batch_size: 32,
        seed_frames: 64,
        exploration_steps: 64,
        eval_interval: 0,
        checkpoint_interval: 0,
        ..TrainConfig::default()
    };
    let mut t = Trainer::new(cfg, None).unwrap();
    let mut rows = Vec::new();
    while t.step() < 64 {
        t.tick(&mut rows).unwrap();
    }
    let mut g = c.benchmark_group("sada_update_b32_42px");
    g.sample_size(10);
    g.bench_function("update", |b| b.iter_batched(|| (), |_| t.update().unwrap(), BatchSize::SmallInput));
    g.finish();
}

criterion_group!(benches, augmentations, encoder, replay, update);
criterion_main!(benches);
