use approx::assert_relative_eq;
use ndarray::{Array1, Array2, Array4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::augment::Observation;

fn tiny_cfg() -> NetConfig {
    NetConfig {
        obs_channels: 3,
        image_size: 15,
        action_dim: 2,
        features_dim: 4,
        hidden_dim: 8,
        num_filters: 2,
        num_conv_layers: 4,
        ..NetConfig::default()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_batch(n: usize, c: usize, s: usize, seed: u64) -> Array4<f64> {
    let mut r = rng(seed);
    Array4::from_shape_simple_fn((n, c, s, s), || r.random::<f64>())
}

fn random_mat(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut r = rng(seed);
    Array2::from_shape_simple_fn((n, d), || r.random_range(-1.0..1.0))
}

/// Checks analytic gradients against central differences on every
/// `stride`-th parameter.
fn fd_check(params: &Params<f64>, grads: &Params<f64>, stride: usize, mut loss: impl FnMut(&Params<f64>) -> f64) {
    let h = 1e-6;
    let mut p = params.clone();
    let mut checked = 0;
    for i in (0..params.numel()).step_by(stride) {
        let x = params.flat_get(i);
        p.flat_set(i, x + h);
        let lp = loss(&p);
        p.flat_set(i, x - h);
        let lm = loss(&p);
        p.flat_set(i, x);
        let numeric = (lp - lm) / (2.0 * h);
        let analytic = grads.flat_get(i);
        let scale = numeric.abs().max(analytic.abs());
        if scale > 1e-6 {
            assert!(
                (numeric - analytic).abs() / scale < 1e-4,
                "param {i}: analytic {analytic} numeric {numeric}"
            );
            checked += 1;
        } else {
            assert!((numeric - analytic).abs() < 1e-9, "param {i}: analytic {analytic} numeric {numeric}");
        }
    }
    assert!(checked > 0);
}

#[test]
fn identical_inputs_identical_embeddings() {
    let agent = Agent::<f64>::new(tiny_cfg(), &mut rng(1)).unwrap();
    let one = random_batch(1, 3, 15, 7);
    let two = ndarray::concatenate(ndarray::Axis(0), &[one.view(), one.view()]).unwrap();
    let f = agent.encoder.encode(two.view()).unwrap();
    assert_eq!(f.row(0), f.row(1));
    assert_eq!(f.dim(), (2, 4));
    assert_eq!(agent.encoder.encode(one.view()).unwrap().row(0), f.row(0));
}

#[test]
fn encode_rejects_bad_shape() {
    let agent = Agent::<f64>::new(tiny_cfg(), &mut rng(1)).unwrap();
    assert!(matches!(
        agent.encoder.encode(random_batch(1, 4, 15, 1).view()),
        Err(Error::Contract(_))
    ));
    assert!(matches!(
        agent.encoder.encode(Array4::zeros((0, 3, 15, 15)).view()),
        Err(Error::Contract(_))
    ));
}

#[test]
fn rotation_changes_embedding() {
    let cfg = NetConfig {
        obs_channels: 9,
        image_size: 21,
        ..tiny_cfg()
    };
    let agent = Agent::<f32>::new(cfg, &mut rng(2)).unwrap();
    let mut r = rng(3);
    let obs = Observation::new(3, 21, 21, (0..9 * 21 * 21).map(|_| r.random::<f32>()).collect()).unwrap();
    let rot = obs.rotated(90.0);
    let a = agent.encoder.encode(obs_batch(&[&obs]).unwrap().view()).unwrap();
    let b = agent.encoder.encode(obs_batch(&[&rot]).unwrap().view()).unwrap();
    assert_ne!(a, b);
}

#[test]
fn encoder_gradient_matches_finite_difference() {
    let agent = Agent::<f64>::new(tiny_cfg(), &mut rng(4)).unwrap();
    let x = random_batch(3, 3, 15, 5);
    let w = random_mat(3, 4, 6);
    let (f, trace) = agent.encoder.encode_tracked(x.view()).unwrap();
    assert_eq!(f, agent.encoder.encode(x.view()).unwrap());
    let mut grads = agent.encoder.params.zeros_like();
    agent.encoder.backward(&trace, w.view(), &mut grads);
    let mut enc = agent.encoder.clone();
    fd_check(&agent.encoder.params, &grads, 3, |p| {
        enc.params.copy_from(p);
        (&enc.encode(x.view()).unwrap() * &w).sum()
    });
}

#[test]
fn actor_gradient_matches_finite_difference() {
    let agent = Agent::<f64>::new(tiny_cfg(), &mut rng(8)).unwrap();
    let feats = random_mat(4, 4, 9);
    let eps = random_mat(4, 2, 10);
    let ca = random_mat(4, 2, 11);
    let cl = Array1::from(vec![0.3, -0.7, 1.1, 0.5]);
    let (_, trace) = agent.actor.forward_with_noise(feats.view(), eps.clone());
    let mut grads = agent.actor.params.zeros_like();
    agent.actor.backward(&trace, ca.view(), cl.view(), &mut grads);
    let mut actor = agent.actor.clone();
    fd_check(&agent.actor.params, &grads, 1, |p| {
        actor.params.copy_from(p);
        let (out, _) = actor.forward_with_noise(feats.view(), eps.clone());
        (&out.action * &ca).sum() + (&out.log_prob * &cl).sum()
    });
}

#[test]
fn critic_gradient_matches_finite_difference() {
    let agent = Agent::<f64>::new(tiny_cfg(), &mut rng(12)).unwrap();
    let feats = random_mat(3, 4, 13);
    let acts = random_mat(3, 2, 14);
    let w1 = Array1::from(vec![0.5, -1.0, 2.0]);
    let w2 = Array1::from(vec![-0.25, 0.75, 1.5]);
    let (_, trace) = agent.critic.forward(feats.view(), acts.view()).unwrap();
    let mut grads = agent.critic.params.zeros_like();
    let (df, da) = agent.critic.backward(&trace, w1.view(), w2.view(), Some(&mut grads));
    let loss = |c: &Critic<f64>, f: &Array2<f64>, a: &Array2<f64>| {
        let (q1, q2) = c.q_values(f.view(), a.view()).unwrap();
        (&q1 * &w1).sum() + (&q2 * &w2).sum()
    };
    let mut critic = agent.critic.clone();
    fd_check(&agent.critic.params, &grads, 1, |p| {
        critic.params.copy_from(p);
        loss(&critic, &feats, &acts)
    });
    let h = 1e-6;
    for (input, analytic, is_feat) in [(&feats, &df, true), (&acts, &da, false)] {
        for idx in ndarray::indices(input.raw_dim()) {
            let mut plus = input.clone();
            plus[idx] += h;
            let mut minus = input.clone();
            minus[idx] -= h;
            let (lp, lm) = if is_feat {
                (loss(&agent.critic, &plus, &acts), loss(&agent.critic, &minus, &acts))
            } else {
                (loss(&agent.critic, &feats, &plus), loss(&agent.critic, &feats, &minus))
            };
            assert_relative_eq!((lp - lm) / (2.0 * h), analytic[idx], max_relative = 1e-4, epsilon = 1e-9);
        }
    }
}

#[test]
fn mean_mode_deterministic_and_bounded() {
    let agent = Agent::<f32>::new(tiny_cfg(), &mut rng(15)).unwrap();
    let feats = Array2::from_shape_fn((5, 4), |(i, j)| (i as f32 - 2.0) * 3.0 + j as f32);
    let (a, _) = agent.actor.act(feats.view(), ActMode::Mean, &mut rng(0)).unwrap();
    let (b, _) = agent.actor.act(feats.view(), ActMode::Mean, &mut rng(99)).unwrap();
    assert_eq!(a.action, b.action);
    let (s, _) = agent.actor.act(feats.view(), ActMode::Sample, &mut rng(1)).unwrap();
    for out in [&a, &s] {
        assert!(out.action.iter().all(|v| v.abs() < 1.0));
        assert!(out.log_prob.iter().all(|v| v.is_finite()));
    }
}

#[test]
fn act_rejects_non_finite_features() {
    let agent = Agent::<f32>::new(tiny_cfg(), &mut rng(15)).unwrap();
    let mut feats = Array2::zeros((1, 4));
    feats[[0, 1]] = f32::NAN;
    assert!(matches!(
        agent.actor.act(feats.view(), ActMode::Sample, &mut rng(0)),
        Err(Error::Contract(_))
    ));
}

#[test]
fn squashed_density_integrates_to_one() {
    let actor = Actor::<f64>::new(3, 8, 1, (-10.0, 2.0), &mut rng(16));
    let feats = Array2::from_shape_vec((1, 3), vec![0.4, -0.2, 0.9]).unwrap();
    // Trapezoid rule over the action axis on a fine grid of pre-squash values.
    let n = 200_001;
    let eps = Array2::from_shape_fn((n, 1), |(i, _)| -12.0 + 24.0 * i as f64 / (n - 1) as f64);
    let rows = Array2::from_shape_fn((n, 3), |(_, j)| feats[[0, j]]);
    let (out, _) = actor.forward_with_noise(rows.view(), eps);
    let mut total = 0.0;
    for i in 1..n {
        let da = out.action[[i, 0]] - out.action[[i - 1, 0]];
        total += 0.5 * (out.log_prob[i].exp() + out.log_prob[i - 1].exp()) * da;
    }
    assert!((total - 1.0).abs() < 1e-3, "integral {total}");
}

#[test]
fn duplicated_rows_duplicate_q() {
    let agent = Agent::<f64>::new(tiny_cfg(), &mut rng(17)).unwrap();
    let f = Array2::from_shape_fn((2, 4), |(_, j)| j as f64 * 0.1);
    let a = Array2::from_shape_fn((2, 2), |(_, j)| 0.5 - j as f64);
    let (q1, q2) = agent.critic.q_values(f.view(), a.view()).unwrap();
    assert_eq!(q1[0], q1[1]);
    assert_eq!(q2[0], q2[1]);
    assert!(matches!(
        agent.critic.q_values(f.view(), Array2::zeros((3, 2)).view()),
        Err(Error::Contract(_))
    ));
}

#[test]
fn zero_final_layer_gives_zero_q() {
    let mut agent = Agent::<f64>::new(tiny_cfg(), &mut rng(18)).unwrap();
    agent.critic.zero_output_layers();
    let (q1, q2) = agent
        .critic
        .q_values(random_mat(4, 4, 1).view(), random_mat(4, 2, 2).view())
        .unwrap();
    assert!(q1.iter().chain(q2.iter()).all(|&v| v == 0.0));
}

#[test]
fn ema_examples() {
    let mut agent = Agent::<f64>::new(tiny_cfg(), &mut rng(19)).unwrap();
    agent.critic_target.params_mut().fill_zero();
    for t in agent.critic.params.tensors_mut() {
        t.data.iter_mut().for_each(|v| *v = 1.0);
    }
    ema_update(&mut agent.critic_target, &agent.critic, 0.01).unwrap();
    assert!(agent.critic_target.params().tensors().iter().all(|t| t.data.iter().all(|&v| (v - 0.01).abs() < 1e-15)));
    for k in 2..=50 {
        ema_update(&mut agent.critic_target, &agent.critic, 0.01).unwrap();
        let expected = 1.0 - 0.99f64.powi(k);
        assert_relative_eq!(agent.critic_target.params().flat_get(0), expected, max_relative = 1e-12);
    }
    ema_update(&mut agent.critic_target, &agent.critic, 1.0).unwrap();
    assert_eq!(agent.critic_target.params(), &agent.critic.params);
    for bad in [0.0, -0.1, 1.5, f64::NAN] {
        assert!(matches!(ema_update(&mut agent.critic_target, &agent.critic, bad), Err(Error::Range(_))));
    }
}

#[test]
fn temperature_positive() {
    let t = Temperature::<f64>::new(0.1, -2.0).unwrap();
    assert_relative_eq!(t.alpha(), 0.1, max_relative = 1e-12);
    assert!(Temperature::<f64>::new(0.0, -2.0).is_err());
}

#[test]
fn adam_first_step_is_lr_sign() {
    let mut p = Params::<f64>::new();
    p.push("w", vec![3], vec![1.0, 2.0, 3.0]);
    let mut g = p.zeros_like();
    g.tensors_mut()[0].data = vec![0.5, -2.0, 0.0];
    let mut opt = Adam::new(&p, 0.1);
    opt.step(&mut p, &g);
    let d = &p.tensors()[0].data;
    assert_relative_eq!(d[0], 0.9, epsilon = 1e-6);
    assert_relative_eq!(d[1], 2.1, epsilon = 1e-6);
    assert_eq!(d[2], 3.0);
}

#[test]
fn default_config_matches_defaults() {
    let cfg = NetConfig::default();
    assert_eq!((cfg.features_dim, cfg.hidden_dim), (50, 1024));
    assert_eq!((cfg.log_std_min, cfg.log_std_max), (-10.0, 2.0));
    assert_eq!(cfg.encoder().conv_output_size(), Some(35));
    assert_eq!(cfg.init_temperature, 0.1);
}
