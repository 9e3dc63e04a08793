use super::params::Params;
use super::Real;

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam<R> {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Params<R>,
    pub v: Params<R>,
}

impl<R: Real> Adam<R> {
    pub fn new(params: &Params<R>, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn step(&mut self, params: &mut Params<R>, grads: &Params<R>) {
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (R::lit(self.beta1), R::lit(self.beta2));
        let c1 = R::lit(1.0 - self.beta1.powi(t));
        let c2 = R::lit(1.0 - self.beta2.powi(t));
        let lr = R::lit(self.lr);
        let eps = R::lit(self.eps);
        for (((p, g), m), v) in params
            .tensors_mut()
            .iter_mut()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut().iter_mut())
            .zip(self.v.tensors_mut().iter_mut())
        {
            for (((x, &gi), mi), vi) in p.data.iter_mut().zip(g.data.iter()).zip(m.data.iter_mut()).zip(v.data.iter_mut()) {
                *mi = b1 * *mi + (R::one() - b1) * gi;
                *vi = b2 * *vi + (R::one() - b2) * gi * gi;
                let mhat = *mi / c1;
                let vhat = *vi / c2;
                *x -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}
