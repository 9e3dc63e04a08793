use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::layers::{relu_backward, relu_inplace, Linear};
use super::params::Params;
use super::Real;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActMode {
    Sample,
    Mean,
}

/// Squashed-Gaussian policy head over encoder features.
#[derive(Clone, Debug)]
pub struct Actor<R> {
    pub params: Params<R>,
    l1: Linear,
    l2: Linear,
    l3: Linear,
    pub action_dim: usize,
    pub log_std_min: f64,
    pub log_std_max: f64,
}

#[derive(Clone, Debug)]
pub struct PolicyOutput<R> {
    pub action: Array2<R>,
    pub log_prob: Array1<R>,
}

pub struct ActorTrace<R> {
    features: Array2<R>,
    h1: Array2<R>,
    h2: Array2<R>,
    raw_log_std: Array2<R>,
    std: Array2<R>,
    eps: Array2<R>,
    u: Array2<R>,
    action: Array2<R>,
}

/// `log(1 - tanh(u)^2)` computed without cancellation.
fn log1m_tanh_sq<R: Real>(u: R) -> R {
    let two = R::lit(2.0);
    let z = -two * u;
    let softplus = z.max(R::zero()) + (R::one() + (-z.abs()).exp()).ln();
    two * (R::lit(std::f64::consts::LN_2) - u - softplus)
}

impl<R: Real> Actor<R> {
    pub fn new<G: Rng + ?Sized>(
        features_dim: usize,
        hidden_dim: usize,
        action_dim: usize,
        log_std_bounds: (f64, f64),
        rng: &mut G,
    ) -> Self {
        let mut params = Params::new();
        let l1 = Linear::new(&mut params, "fc1", features_dim, hidden_dim, rng);
        let l2 = Linear::new(&mut params, "fc2", hidden_dim, hidden_dim, rng);
        let l3 = Linear::new(&mut params, "fc3", hidden_dim, 2 * action_dim, rng);
        Self {
            params,
            l1,
            l2,
            l3,
            action_dim,
            log_std_min: log_std_bounds.0,
            log_std_max: log_std_bounds.1,
        }
    }

    /// Runs the policy with explicit standard-normal noise `eps` (zeros give
    /// the mean action).
    pub fn forward_with_noise(&self, features: ArrayView2<R>, eps: Array2<R>) -> (PolicyOutput<R>, ActorTrace<R>) {
        let a = self.action_dim;
        let mut h1 = self.l1.forward(&self.params, features);
        relu_inplace(&mut h1);
        let mut h2 = self.l2.forward(&self.params, h1.view());
        relu_inplace(&mut h2);
        let out = self.l3.forward(&self.params, h2.view());
        let mu = out.slice(s![.., ..a]).to_owned();
        let raw_log_std = out.slice(s![.., a..]).to_owned();
        let (lo, hi) = (R::lit(self.log_std_min), R::lit(self.log_std_max));
        let half = R::lit(0.5);
        let log_std = raw_log_std.mapv(|r| lo + half * (hi - lo) * (r.tanh() + R::one()));
        let std = log_std.mapv(|v| v.exp());
        let u = &mu + &(&std * &eps);
        let action = u.mapv(|v| v.tanh());
        let half_log_2pi = R::lit(0.5 * (2.0 * std::f64::consts::PI).ln());
        let n = features.nrows();
        let mut log_prob = Array1::<R>::zeros(n);
        for i in 0..n {
            let mut lp = R::zero();
            for d in 0..a {
                let e = eps[[i, d]];
                lp += -half * e * e - log_std[[i, d]] - half_log_2pi - log1m_tanh_sq(u[[i, d]]);
            }
            log_prob[i] = lp;
        }
        let trace = ActorTrace {
            features: features.to_owned(),
            h1,
            h2,
            raw_log_std,
            std,
            eps,
            u,
            action: action.clone(),
        };
        (PolicyOutput { action, log_prob }, trace)
    }

    pub fn sample_noise<G: Rng + ?Sized>(&self, n: usize, rng: &mut G) -> Array2<R> {
        Array2::from_shape_simple_fn((n, self.action_dim), || {
            let z: f64 = rng.sample(StandardNormal);
            R::lit(z)
        })
    }

    /// Sampled or mean actions and their log-probabilities.
    pub fn act<G: Rng + ?Sized>(
        &self,
        features: ArrayView2<R>,
        mode: ActMode,
        rng: &mut G,
    ) -> Result<(PolicyOutput<R>, ActorTrace<R>)> {
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("non-finite features passed to the actor".into()));
        }
        let n = features.nrows();
        let eps = match mode {
            ActMode::Sample => self.sample_noise(n, rng),
            ActMode::Mean => Array2::zeros((n, self.action_dim)),
        };
        Ok(self.forward_with_noise(features, eps))
    }

    /// Deterministic mean action.
    pub fn mean_action(&self, features: ArrayView2<R>) -> Array2<R> {
        let eps = Array2::zeros((features.nrows(), self.action_dim));
        self.forward_with_noise(features, eps).0.action
    }

    /// Backpropagates `dL/daction` and `dL/dlog_prob` (noise held fixed) into
    /// the actor parameters.
    pub fn backward(&self, trace: &ActorTrace<R>, d_action: ArrayView2<R>, d_log_prob: ArrayView1<R>, grads: &mut Params<R>) {
        let a = self.action_dim;
        let n = trace.action.nrows();
        let two = R::lit(2.0);
        let half = R::lit(0.5);
        let span = R::lit(self.log_std_max - self.log_std_min);
        let mut d_out = Array2::<R>::zeros((n, 2 * a));
        for i in 0..n {
            let glp = d_log_prob[i];
            for d in 0..a {
                let act = trace.action[[i, d]];
                let th = trace.u[[i, d]].tanh();
                let du = d_action[[i, d]] * (R::one() - act * act) + glp * two * th;
                let dlog_std = du * trace.std[[i, d]] * trace.eps[[i, d]] - glp;
                let t = trace.raw_log_std[[i, d]].tanh();
                d_out[[i, d]] = du;
                d_out[[i, a + d]] = dlog_std * half * span * (R::one() - t * t);
            }
        }
        let mut dh2 = self.l3.backward(&self.params, trace.h2.view(), d_out.view(), Some(grads));
        relu_backward(&trace.h2, &mut dh2);
        let mut dh1 = self.l2.backward(&self.params, trace.h1.view(), dh2.view(), Some(grads));
        relu_backward(&trace.h1, &mut dh1);
        self.l1.backward(&self.params, trace.features.view(), dh1.view(), Some(grads));
    }
}
