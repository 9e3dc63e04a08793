use approx::assert_relative_eq;
use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::augment::RawObservation;
use crate::networks::NetConfig;

const SIZE: usize = 15;

fn cfg() -> NetConfig {
    NetConfig {
        obs_channels: 9,
        image_size: SIZE,
        action_dim: 2,
        features_dim: 4,
        hidden_dim: 16,
        num_filters: 2,
        num_conv_layers: 4,
        ..NetConfig::default()
    }
}

fn agent(seed: u64) -> Agent<f64> {
    Agent::new(cfg(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn bank() -> DistractorBank {
    DistractorBank::procedural(4, SIZE, SIZE, 3)
}

fn recipe(r: Recipe, pool: AugPool) -> RecipeConfig {
    let params = AugParams {
        max_shift_px: 4,
        pad_px: 2,
        ..AugParams::default()
    };
    RecipeConfig::preset(r, pool, params)
}

fn random_raw(rng: &mut ChaCha8Rng) -> RawObservation {
    RawObservation {
        frames: 3,
        height: SIZE,
        width: SIZE,
        data: (0..9 * SIZE * SIZE).map(|_| rng.random()).collect(),
    }
}

fn batch(n: usize, seed: u64) -> Batch<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts: Vec<Transition> = (0..n)
        .map(|i| Transition {
            obs: random_raw(&mut rng),
            action: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            reward: rng.random(),
            next_obs: random_raw(&mut rng),
            discount: if i == 0 { 0.0 } else { 0.99 },
        })
        .collect();
    Batch::from_transitions(&ts, 2, &mut ChaCha8Rng::seed_from_u64(seed + 1)).unwrap()
}

fn max_rel_diff(a: &Params<f64>, b: &Params<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.numel() {
        let (x, y) = (a.flat_get(i), b.flat_get(i));
        worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1e-8));
    }
    worst
}

#[test]
fn recipe_matrix() {
    use AugMode::*;
    assert_eq!(Recipe::Drq.modes(), (None, None, TargetAug::None));
    assert_eq!(Recipe::DrqAug.modes(), (Naive, Naive, TargetAug::Naive));
    assert_eq!(Recipe::Svea.modes(), (None, Selective, TargetAug::None));
    assert_eq!(Recipe::Sada.modes(), (Selective, Selective, TargetAug::None));
    assert_eq!(Recipe::SadaNaiveActor.modes(), (Naive, Selective, TargetAug::None));
    assert_eq!(Recipe::SadaNaiveCritic.modes(), (Selective, Naive, TargetAug::Naive));
    assert_eq!(Recipe::SadaNoCriticAug.modes(), (Selective, None, TargetAug::None));
    for r in Recipe::ALL {
        assert_eq!(r.name().parse::<Recipe>().unwrap(), r);
        recipe(r, AugPool::All).validate().unwrap();
    }
    assert!("sac".parse::<Recipe>().is_err());
    let mut bad = recipe(Recipe::Sada, AugPool::All);
    bad.critic_target_aug = TargetAug::Naive;
    assert!(matches!(bad.validate(), Err(Error::InvalidSpec(_))));
}

#[test]
fn identity_pool_packing() {
    let b = batch(3, 1);
    let cfg = recipe(Recipe::Sada, AugPool::None);
    let mut s = StrongStream::new(0, 5);
    let (p, m) = pack_actor_streams(&b.obs, &mut s, &cfg, &bank()).unwrap();
    let (p0, p1) = p.unpack().unwrap();
    assert_eq!(p0, p1);
    assert_eq!(p.rows(), m.rows());
    assert_eq!(s.draws(), 3);
}

#[test]
fn packing_row_order_and_clean_twin() {
    let b = batch(2, 2);
    let cfg = recipe(Recipe::Sada, AugPool::All);
    let mut s = StrongStream::new(9, 5);
    let mut replay = s.clone();
    let (p, m) = pack_actor_streams(&b.obs, &mut s, &cfg, &bank()).unwrap();
    let aug = replay.augment(&b.obs, &cfg.strong_pool, &bank()).unwrap();
    assert_eq!(p.rows(), &[b.obs[0].clone(), b.obs[1].clone(), aug[0].clone(), aug[1].clone()]);
    let (m0, m1) = m.unpack().unwrap();
    assert_eq!(m0, m1);
    assert_eq!(m0, &b.obs[..]);
    assert_eq!(p.layout(), Some(PackLayout { half: 2, second: Stream::Augmented }));
}

#[test]
fn untagged_batches_rejected() {
    let a = agent(1);
    let b = batch(2, 3);
    let mut grads = Grads::zeros(&a);
    let p = PackedBatch::untagged([b.obs.clone(), b.obs.clone()].concat());
    assert!(matches!(p.unpack(), Err(Error::Contract(_))));
    let m = PackedBatch::pack(&b.obs, b.obs.clone(), Stream::Clean).unwrap();
    let r = actor_loss_sada(&a, &p, &m, &mut stream(0, 8), &mut grads);
    assert!(matches!(r, Err(Error::Contract(_))));
    assert!(PackedBatch::pack(&b.obs, vec![], Stream::Clean).is_err());
}

#[test]
fn selective_actor_with_identity_equals_plain_on_doubled_batch() {
    let a = agent(3);
    let b = batch(4, 4);
    let cfg = recipe(Recipe::Sada, AugPool::None);
    let mut rngs = UpdateRngs::new(7);
    let mut g1 = Grads::zeros(&a);
    let out1 = actor_update_variant(&a, &b.obs, &mut rngs, &cfg, &bank(), &mut g1).unwrap();
    let doubled = [b.obs.clone(), b.obs.clone()].concat();
    let mut g2 = Grads::zeros(&a);
    let out2 = actor_loss_plain(&a, &doubled, &mut UpdateRngs::new(7).policy, &mut g2).unwrap();
    assert_relative_eq!(out1.loss, out2.loss, max_relative = 1e-12);
    assert!(max_rel_diff(&g1.actor, &g2.actor) < 1e-10);
}

#[test]
fn actor_update_leaves_critic_and_encoder_gradients_zero() {
    let a = agent(4);
    let b = batch(3, 5);
    for r in [Recipe::Drq, Recipe::Sada, Recipe::SadaNaiveActor] {
        let mut g = Grads::zeros(&a);
        let cfg = recipe(r, AugPool::All);
        actor_update_variant(&a, &b.obs, &mut UpdateRngs::new(1), &cfg, &bank(), &mut g).unwrap();
        assert_eq!(g.encoder.sq_norm(), 0.0);
        assert_eq!(g.critic.sq_norm(), 0.0);
        assert_eq!(g.temperature.sq_norm(), 0.0);
        assert!(g.actor.sq_norm() > 0.0);
    }
}

#[test]
fn svea_actor_consumes_no_strong_draws() {
    let a = agent(5);
    let b = batch(3, 6);
    let cfg = recipe(Recipe::Svea, AugPool::All);
    let mut rngs = UpdateRngs::new(2);
    let mut g = Grads::zeros(&a);
    actor_update_variant(&a, &b.obs, &mut rngs, &cfg, &bank(), &mut g).unwrap();
    assert_eq!(rngs.strong_actor.draws(), 0);
    critic_update(&a, &b, &mut rngs, &cfg, &bank(), &mut g).unwrap();
    assert_eq!(rngs.strong_critic.draws(), 3);
    assert_eq!(rngs.strong_target.draws(), 0);
    assert_eq!(rngs.strong_actor.draws(), 0);
}

#[test]
fn naive_actor_with_identity_equals_none() {
    let a = agent(6);
    let b = batch(3, 7);
    let mut g1 = Grads::zeros(&a);
    let mut g2 = Grads::zeros(&a);
    let o1 = actor_update_variant(&a, &b.obs, &mut UpdateRngs::new(3), &recipe(Recipe::DrqAug, AugPool::None), &bank(), &mut g1).unwrap();
    let o2 = actor_update_variant(&a, &b.obs, &mut UpdateRngs::new(3), &recipe(Recipe::Drq, AugPool::None), &bank(), &mut g2).unwrap();
    assert_eq!(o1.loss, o2.loss);
    assert_eq!(g1.actor, g2.actor);
}

#[test]
fn temperature_gradient() {
    let a = agent(7);
    let h = a.temperature.target_entropy;
    let mut g = Grads::zeros(&a);
    let l = temperature_loss(&Array1::from_elem(5, -h), &a, &mut g);
    assert_eq!(l, 0.0);
    assert_eq!(g.temperature.sq_norm(), 0.0);
    let mut g = Grads::zeros(&a);
    let lp = Array1::from(vec![-h - 1.0, -h - 2.0, -h - 0.5]);
    temperature_loss(&lp, &a, &mut g);
    let alpha = a.temperature.alpha();
    let d_alpha = lp.iter().map(|l| -l - h).sum::<f64>() / 3.0;
    let d_log_alpha = g.temperature.flat_get(0);
    assert_relative_eq!(d_log_alpha, alpha * d_alpha, max_relative = 1e-12);
    assert!(d_log_alpha > 0.0);
    let mut a = a;
    for _ in 0..50 {
        let mut g = Grads::zeros(&a);
        temperature_loss(&Array1::from_elem(3, -100.0), &a, &mut g);
        step_temperature(&mut a, &g);
    }
    assert!(a.temperature.alpha() > 0.0);
}

#[test]
fn bootstrap_arithmetic() {
    let y = bootstrap(&Array1::from(vec![1.0, 1.0]), &Array1::from(vec![0.99, 0.0]), &Array1::from(vec![2.0, 2.0]));
    assert_relative_eq!(y[0], 2.98, epsilon = 1e-12);
    assert_eq!(y[1], 1.0);
}

#[test]
fn terminal_target_is_reward() {
    let a = agent(8);
    let b = batch(3, 8);
    let cfg = recipe(Recipe::Drq, AugPool::None);
    let y = critic_targets(&a, &b.next_obs, &b.rewards, &b.discounts, &cfg, &mut stream(0, 8)).unwrap();
    assert_eq!(y[0], b.rewards[0]);
    assert_ne!(y[1], b.rewards[1]);
    let mut greedy = cfg.clone();
    greedy.target_form = TargetForm::GreedyMax;
    let y = critic_targets(&a, &b.next_obs, &b.rewards, &b.discounts, &greedy, &mut stream(0, 8)).unwrap();
    assert_eq!(y[0], b.rewards[0]);
}

#[test]
fn targets_are_duplicated() {
    let y = Array1::from(vec![0.5, -1.0, 3.0]);
    let d = duplicate_targets(&y);
    assert_eq!(d.len(), 6);
    for i in 0..3 {
        assert_eq!(d[i], d[i + 3]);
    }
}

#[test]
fn selective_critic_with_identity_equals_plain() {
    let a = agent(9);
    let b = batch(4, 9);
    let cfg = recipe(Recipe::Svea, AugPool::None);
    let q = Array1::from(vec![0.1, 0.4, -0.3, 1.0]);
    let mut g1 = Grads::zeros(&a);
    let l1 = critic_loss_sada(&a, &b, &q, &mut StrongStream::new(1, 6), &cfg, &bank(), &mut g1).unwrap();
    let mut g2 = Grads::zeros(&a);
    let l2 = critic_loss_plain(&a, &b, &q, &mut g2).unwrap();
    assert_relative_eq!(l1, l2, max_relative = 1e-12);
    assert!(max_rel_diff(&g1.encoder, &g2.encoder) < 1e-10);
    assert!(max_rel_diff(&g1.critic, &g2.critic) < 1e-10);
    assert!(critic_loss_sada(&a, &b, &q.slice(ndarray::s![..2]).to_owned(), &mut StrongStream::new(1, 6), &cfg, &bank(), &mut g1).is_err());
}

#[test]
fn naive_critic_uses_independent_streams_at_batch_size() {
    let a = agent(10);
    let b = batch(5, 10);
    let cfg = recipe(Recipe::DrqAug, AugPool::All);
    let mut rngs = UpdateRngs::new(4);
    let mut g = Grads::zeros(&a);
    critic_update(&a, &b, &mut rngs, &cfg, &bank(), &mut g).unwrap();
    assert_eq!(rngs.strong_critic.draws(), 5);
    assert_eq!(rngs.strong_target.draws(), 5);
    assert!(g.encoder.sq_norm() > 0.0);
    assert_eq!(g.actor.sq_norm(), 0.0);
}

#[test]
fn selective_modes_never_augment_targets() {
    let a = agent(11);
    let b = batch(3, 11);
    for r in [Recipe::Svea, Recipe::Sada, Recipe::SadaNaiveActor, Recipe::SadaNoCriticAug] {
        let mut rngs = UpdateRngs::new(5);
        let mut g = Grads::zeros(&a);
        critic_update(&a, &b, &mut rngs, &recipe(r, AugPool::All), &bank(), &mut g).unwrap();
        assert_eq!(rngs.strong_target.draws(), 0, "{r}");
    }
}

/// Gradients of one critic + actor + temperature step for a recipe.
fn full_grads(a: &Agent<f64>, b: &Batch<f64>, r: Recipe) -> (f64, f64, Grads<f64>) {
    let cfg = recipe(r, AugPool::None);
    let mut rngs = UpdateRngs::new(6);
    let mut g = Grads::zeros(a);
    let lc = critic_update(a, b, &mut rngs, &cfg, &bank(), &mut g).unwrap();
    let out = actor_update_variant(a, &b.obs, &mut rngs, &cfg, &bank(), &mut g).unwrap();
    temperature_loss(&out.log_prob, a, &mut g);
    (lc, out.loss, g)
}

#[test]
fn recipes_reduce_to_drq_under_identity_pool() {
    let a = agent(12);
    let b = batch(4, 12);
    let (lc0, _, g0) = full_grads(&a, &b, Recipe::Drq);
    for r in Recipe::ALL {
        let (lc, _, g) = full_grads(&a, &b, r);
        assert_relative_eq!(lc, lc0, max_relative = 1e-6);
        assert!(max_rel_diff(&g.encoder, &g0.encoder) < 1e-6, "{r}");
        assert!(max_rel_diff(&g.critic, &g0.critic) < 1e-6, "{r}");
        if r.modes().0 != AugMode::Selective {
            assert!(max_rel_diff(&g.actor, &g0.actor) < 1e-6, "{r}");
        }
    }
}

#[test]
fn update_steps_touch_only_their_parameters() {
    let mut a = agent(13);
    let b = batch(3, 13);
    let cfg = recipe(Recipe::Sada, AugPool::All);
    let mut rngs = UpdateRngs::new(8);
    let target = a.critic_target.params().fingerprint();
    let (enc, cri, act, tmp) = (
        a.encoder.params.fingerprint(),
        a.critic.params.fingerprint(),
        a.actor.params.fingerprint(),
        a.temperature.params.fingerprint(),
    );
    let mut g = Grads::zeros(&a);
    critic_update(&a, &b, &mut rngs, &cfg, &bank(), &mut g).unwrap();
    assert!(g.encoder.sq_norm() > 0.0);
    step_critic(&mut a, &g);
    assert_ne!(a.encoder.params.fingerprint(), enc);
    assert_ne!(a.critic.params.fingerprint(), cri);
    assert_eq!(a.actor.params.fingerprint(), act);
    let mut g = Grads::zeros(&a);
    let out = actor_update_variant(&a, &b.obs, &mut rngs, &cfg, &bank(), &mut g).unwrap();
    assert_eq!(out.log_prob.len(), 6);
    let (enc, cri) = (a.encoder.params.fingerprint(), a.critic.params.fingerprint());
    step_actor(&mut a, &g);
    assert_eq!(g.encoder.sq_norm(), 0.0);
    assert_eq!(a.encoder.params.fingerprint(), enc);
    assert_eq!(a.critic.params.fingerprint(), cri);
    assert_ne!(a.actor.params.fingerprint(), act);
    let mut g = Grads::zeros(&a);
    temperature_loss(&out.log_prob, &a, &mut g);
    step_temperature(&mut a, &g);
    assert_ne!(a.temperature.params.fingerprint(), tmp);
    assert_eq!(a.critic_target.params().fingerprint(), target);
}

#[test]
fn weak_batch_shapes() {
    let b = batch(3, 14);
    assert_eq!(b.len(), 3);
    assert_eq!(b.actions.dim(), (3, 2));
    assert_eq!(b.discounts[0], 0.0);
}
