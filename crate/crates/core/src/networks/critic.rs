use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use super::layers::{relu_backward, relu_inplace, Linear};
use super::params::Params;
use super::Real;
use crate::{Error, Result};

#[derive(Clone, Debug)]
struct QHead {
    l1: Linear,
    l2: Linear,
    l3: Linear,
}

/// Twin Q-heads over `(features, action)`.
#[derive(Clone, Debug)]
pub struct Critic<R> {
    pub params: Params<R>,
    heads: [QHead; 2],
    pub features_dim: usize,
    pub action_dim: usize,
}

pub struct CriticTrace<R> {
    input: Array2<R>,
    hidden: [(Array2<R>, Array2<R>); 2],
}

impl<R: Real> Critic<R> {
    pub fn new<G: Rng + ?Sized>(features_dim: usize, hidden_dim: usize, action_dim: usize, rng: &mut G) -> Self {
        let mut params = Params::new();
        let mut head = |name: &str| QHead {
            l1: Linear::new(&mut params, &format!("{name}.fc1"), features_dim + action_dim, hidden_dim, rng),
            l2: Linear::new(&mut params, &format!("{name}.fc2"), hidden_dim, hidden_dim, rng),
            l3: Linear::new(&mut params, &format!("{name}.fc3"), hidden_dim, 1, rng),
        };
        let heads = [head("q1"), head("q2")];
        Self {
            params,
            heads,
            features_dim,
            action_dim,
        }
    }

    fn check(&self, features: &ArrayView2<R>, actions: &ArrayView2<R>) -> Result<()> {
        if features.nrows() != actions.nrows() {
            return Err(Error::Contract(format!(
                "{} feature rows but {} action rows",
                features.nrows(),
                actions.nrows()
            )));
        }
        if features.ncols() != self.features_dim || actions.ncols() != self.action_dim {
            return Err(Error::Contract("feature or action width mismatch".into()));
        }
        Ok(())
    }

    pub fn forward(&self, features: ArrayView2<R>, actions: ArrayView2<R>) -> Result<((Array1<R>, Array1<R>), CriticTrace<R>)> {
        self.check(&features, &actions)?;
        let input = concatenate(Axis(1), &[features, actions]).expect("matching rows");
        let run = |h: &QHead| {
            let mut h1 = h.l1.forward(&self.params, input.view());
            relu_inplace(&mut h1);
            let mut h2 = h.l2.forward(&self.params, h1.view());
            relu_inplace(&mut h2);
            let q = h.l3.forward(&self.params, h2.view()).column(0).to_owned();
            (q, (h1, h2))
        };
        let (q1, hid1) = run(&self.heads[0]);
        let (q2, hid2) = run(&self.heads[1]);
        Ok((
            (q1, q2),
            CriticTrace {
                input,
                hidden: [hid1, hid2],
            },
        ))
    }

    pub fn q_values(&self, features: ArrayView2<R>, actions: ArrayView2<R>) -> Result<(Array1<R>, Array1<R>)> {
        Ok(self.forward(features, actions)?.0)
    }

    /// Returns `(dL/dfeatures, dL/dactions)`; parameter gradients are
    /// accumulated only when `grads` is given.
    pub fn backward(
        &self,
        trace: &CriticTrace<R>,
        dq1: ArrayView1<R>,
        dq2: ArrayView1<R>,
        mut grads: Option<&mut Params<R>>,
    ) -> (Array2<R>, Array2<R>) {
        let mut d_input = Array2::<R>::zeros(trace.input.raw_dim());
        for (k, dq) in [dq1, dq2].into_iter().enumerate() {
            let head = &self.heads[k];
            let (h1, h2) = &trace.hidden[k];
            let d_out = dq.insert_axis(Axis(1));
            let mut dh2 = head.l3.backward(&self.params, h2.view(), d_out, grads.as_deref_mut());
            relu_backward(h2, &mut dh2);
            let mut dh1 = head.l2.backward(&self.params, h1.view(), dh2.view(), grads.as_deref_mut());
            relu_backward(h1, &mut dh1);
            d_input += &head.l1.backward(&self.params, trace.input.view(), dh1.view(), grads.as_deref_mut());
        }
        let f = self.features_dim;
        (d_input.slice(s![.., ..f]).to_owned(), d_input.slice(s![.., f..]).to_owned())
    }

    /// Zeroes the output layer of both heads.
    pub fn zero_output_layers(&mut self) {
        for h in &self.heads {
            self.params.get_mut(h.l3.weight).iter_mut().for_each(|v| *v = R::zero());
            self.params.get_mut(h.l3.bias).iter_mut().for_each(|v| *v = R::zero());
        }
    }
}
