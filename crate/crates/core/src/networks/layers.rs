//! Dense, convolution and layer-norm layers with hand-written backward passes.
//! Layers hold only [`ParamId`]s; values and gradients live in [`Params`].

use ndarray::{linalg::general_mat_mul, s, Array1, Array2, Array4, ArrayView2, ArrayView4, ArrayViewMut2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::{ParamId, Params};
use super::Real;

fn uniform_init<R: Real, G: Rng + ?Sized>(n: usize, fan_in: usize, rng: &mut G) -> Vec<R> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    (0..n).map(|_| R::lit(rng.random_range(-bound..bound))).collect()
}

/// `y = x W + b` with `W` stored as `[in, out]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub fan_in: usize,
    pub fan_out: usize,
}

impl Linear {
    pub fn new<R: Real, G: Rng + ?Sized>(
        params: &mut Params<R>,
        name: &str,
        fan_in: usize,
        fan_out: usize,
        rng: &mut G,
    ) -> Self {
        let weight = params.push(
            format!("{name}.weight"),
            vec![fan_in, fan_out],
            uniform_init(fan_in * fan_out, fan_in, rng),
        );
        let bias = params.push(format!("{name}.bias"), vec![fan_out], uniform_init(fan_out, fan_in, rng));
        Self {
            weight,
            bias,
            fan_in,
            fan_out,
        }
    }

    fn w<'a, R: Real>(&self, p: &'a Params<R>) -> ArrayView2<'a, R> {
        ArrayView2::from_shape((self.fan_in, self.fan_out), p.get(self.weight)).expect("weight shape")
    }

    pub fn forward<R: Real>(&self, p: &Params<R>, x: ArrayView2<R>) -> Array2<R> {
        let mut y = x.dot(&self.w(p));
        let b = ndarray::ArrayView1::from(p.get(self.bias));
        y += &b;
        y
    }

    /// Accumulates parameter gradients into `grads` (when given) and returns
    /// the gradient with respect to `x`.
    pub fn backward<R: Real>(
        &self,
        p: &Params<R>,
        x: ArrayView2<R>,
        dy: ArrayView2<R>,
        grads: Option<&mut Params<R>>,
    ) -> Array2<R> {
        if let Some(g) = grads {
            {
                let mut dw =
                    ArrayViewMut2::from_shape((self.fan_in, self.fan_out), g.get_mut(self.weight)).expect("weight shape");
                general_mat_mul(R::one(), &x.t(), &dy, R::one(), &mut dw);
            }
            let db = g.get_mut(self.bias);
            for row in dy.rows() {
                for (d, &v) in db.iter_mut().zip(row.iter()) {
                    *d += v;
                }
            }
        }
        dy.dot(&self.w(p).t())
    }
}

pub fn relu_inplace<R: Real>(x: &mut Array2<R>) {
    x.mapv_inplace(|v| if v > R::zero() { v } else { R::zero() });
}

/// Zeroes `dy` where the post-activation output was not positive.
pub fn relu_backward<R: Real>(out: &Array2<R>, dy: &mut Array2<R>) {
    ndarray::Zip::from(dy).and(out).for_each(|d, &o| {
        if o <= R::zero() {
            *d = R::zero();
        }
    });
}

/// Valid (unpadded) 2-D convolution over NCHW batches, weights `[out, in, k, k]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Conv2d {
    pub weight: ParamId,
    pub bias: ParamId,
    pub in_ch: usize,
    pub out_ch: usize,
    pub kernel: usize,
    pub stride: usize,
}

impl Conv2d {
    pub fn new<R: Real, G: Rng + ?Sized>(
        params: &mut Params<R>,
        name: &str,
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        stride: usize,
        rng: &mut G,
    ) -> Self {
        let fan_in = in_ch * kernel * kernel;
        let weight = params.push(
            format!("{name}.weight"),
            vec![out_ch, in_ch, kernel, kernel],
            uniform_init(out_ch * fan_in, fan_in, rng),
        );
        let bias = params.push(format!("{name}.bias"), vec![out_ch], uniform_init(out_ch, fan_in, rng));
        Self {
            weight,
            bias,
            in_ch,
            out_ch,
            kernel,
            stride,
        }
    }

    pub fn out_size(&self, size: usize) -> usize {
        (size - self.kernel) / self.stride + 1
    }

    fn w<'a, R: Real>(&self, p: &'a Params<R>) -> ArrayView2<'a, R> {
        ArrayView2::from_shape((self.out_ch, self.in_ch * self.kernel * self.kernel), p.get(self.weight))
            .expect("conv weight shape")
    }

    fn im2col<R: Real>(&self, x: ArrayView2<R>, h: usize, w: usize, col: &mut Array2<R>) {
        // x: [in_ch, h*w] for one sample; col: [in*k*k, oh*ow]
        let (k, s) = (self.kernel, self.stride);
        let (oh, ow) = (self.out_size(h), self.out_size(w));
        for c in 0..self.in_ch {
            let plane = x.row(c);
            let plane = plane.as_slice().expect("contiguous plane");
            for ky in 0..k {
                for kx in 0..k {
                    let mut row = col.row_mut((c * k + ky) * k + kx);
                    let row = row.as_slice_mut().expect("contiguous col row");
                    for oy in 0..oh {
                        let src = &plane[(oy * s + ky) * w..];
                        let dst = &mut row[oy * ow..(oy + 1) * ow];
                        if s == 1 {
                            dst.copy_from_slice(&src[kx..kx + ow]);
                        } else {
                            for (ox, d) in dst.iter_mut().enumerate() {
                                *d = src[ox * s + kx];
                            }
                        }
                    }
                }
            }
        }
    }

    fn col2im<R: Real>(&self, col: &Array2<R>, h: usize, w: usize, dx: &mut [R]) {
        let (k, s) = (self.kernel, self.stride);
        let (oh, ow) = (self.out_size(h), self.out_size(w));
        for c in 0..self.in_ch {
            let plane = &mut dx[c * h * w..(c + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = col.row((c * k + ky) * k + kx);
                    let row = row.as_slice().expect("contiguous col row");
                    for oy in 0..oh {
                        let base = (oy * s + ky) * w + kx;
                        for ox in 0..ow {
                            plane[base + ox * s] += row[oy * ow + ox];
                        }
                    }
                }
            }
        }
    }

    pub fn forward<R: Real>(&self, p: &Params<R>, x: ArrayView4<R>) -> Array4<R> {
        let (n, c, h, w) = x.dim();
        debug_assert_eq!(c, self.in_ch);
        let (oh, ow) = (self.out_size(h), self.out_size(w));
        let wmat = self.w(p);
        let bias = p.get(self.bias);
        let mut out = Array4::<R>::zeros((n, self.out_ch, oh, ow));
        let mut col = Array2::<R>::zeros((c * self.kernel * self.kernel, oh * ow));
        for i in 0..n {
            let xi = x.slice(s![i, .., .., ..]).into_shape_with_order((c, h * w)).expect("contiguous sample");
            self.im2col(xi, h, w, &mut col);
            let mut yi = out
                .slice_mut(s![i, .., .., ..])
                .into_shape_with_order((self.out_ch, oh * ow))
                .expect("contiguous output");
            for (o, mut row) in yi.rows_mut().into_iter().enumerate() {
                row.fill(bias[o]);
            }
            general_mat_mul(R::one(), &wmat, &col, R::one(), &mut yi);
        }
        out
    }

    /// Accumulates weight/bias gradients and, if `need_dx`, returns the input
    /// gradient.
    pub fn backward<R: Real>(
        &self,
        p: &Params<R>,
        x: ArrayView4<R>,
        dy: ArrayView4<R>,
        grads: &mut Params<R>,
        need_dx: bool,
    ) -> Option<Array4<R>> {
        let (n, c, h, w) = x.dim();
        let (oh, ow) = (self.out_size(h), self.out_size(w));
        let ckk = c * self.kernel * self.kernel;
        let wmat = self.w(p);
        let mut col = Array2::<R>::zeros((ckk, oh * ow));
        let mut dcol = Array2::<R>::zeros((ckk, oh * ow));
        let mut dx = need_dx.then(|| Array4::<R>::zeros((n, c, h, w)));
        let mut dw = Array2::<R>::zeros((self.out_ch, ckk));
        let mut db = Array1::<R>::zeros(self.out_ch);
        for i in 0..n {
            let xi = x.slice(s![i, .., .., ..]).into_shape_with_order((c, h * w)).expect("contiguous sample");
            self.im2col(xi, h, w, &mut col);
            let dyi = dy
                .slice(s![i, .., .., ..])
                .into_shape_with_order((self.out_ch, oh * ow))
                .expect("contiguous grad");
            general_mat_mul(R::one(), &dyi, &col.t(), R::one(), &mut dw);
            db += &dyi.sum_axis(Axis(1));
            if let Some(dx) = dx.as_mut() {
                general_mat_mul(R::one(), &wmat.t(), &dyi, R::zero(), &mut dcol);
                let mut dxi = dx.slice_mut(s![i, .., .., ..]);
                let dxi = dxi.as_slice_mut().expect("contiguous dx");
                self.col2im(&dcol, h, w, dxi);
            }
        }
        for (g, v) in grads.get_mut(self.weight).iter_mut().zip(dw.iter()) {
            *g += *v;
        }
        for (g, v) in grads.get_mut(self.bias).iter_mut().zip(db.iter()) {
            *g += *v;
        }
        dx
    }
}

/// Layer normalisation over the feature axis with learned gain and bias.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerNorm {
    pub gain: ParamId,
    pub bias: ParamId,
    pub dim: usize,
    pub eps: f64,
}

pub struct LayerNormCache<R> {
    pub normalized: Array2<R>,
    pub inv_std: Array1<R>,
}

impl LayerNorm {
    pub fn new<R: Real>(params: &mut Params<R>, name: &str, dim: usize) -> Self {
        let gain = params.push(format!("{name}.weight"), vec![dim], vec![R::one(); dim]);
        let bias = params.push(format!("{name}.bias"), vec![dim], vec![R::zero(); dim]);
        Self {
            gain,
            bias,
            dim,
            eps: 1e-5,
        }
    }

    pub fn forward<R: Real>(&self, p: &Params<R>, x: ArrayView2<R>) -> (Array2<R>, LayerNormCache<R>) {
        let n = x.nrows();
        let d = R::lit(self.dim as f64);
        let eps = R::lit(self.eps);
        let mut normalized = x.to_owned();
        let mut inv_std = Array1::<R>::zeros(n);
        for (mut row, is) in normalized.rows_mut().into_iter().zip(inv_std.iter_mut()) {
            let mean = row.iter().copied().sum::<R>() / d;
            row.mapv_inplace(|v| v - mean);
            let var = row.iter().map(|&v| v * v).sum::<R>() / d;
            *is = R::one() / (var + eps).sqrt();
            let s = *is;
            row.mapv_inplace(|v| v * s);
        }
        let g = ndarray::ArrayView1::from(p.get(self.gain));
        let b = ndarray::ArrayView1::from(p.get(self.bias));
        let y = &normalized * &g + &b;
        (y, LayerNormCache { normalized, inv_std })
    }

    pub fn backward<R: Real>(
        &self,
        p: &Params<R>,
        cache: &LayerNormCache<R>,
        dy: ArrayView2<R>,
        grads: &mut Params<R>,
    ) -> Array2<R> {
        let d = R::lit(self.dim as f64);
        {
            let dg = grads.get_mut(self.gain);
            for (dyr, xr) in dy.rows().into_iter().zip(cache.normalized.rows()) {
                for ((g, &a), &b) in dg.iter_mut().zip(dyr.iter()).zip(xr.iter()) {
                    *g += a * b;
                }
            }
        }
        {
            let db = grads.get_mut(self.bias);
            for dyr in dy.rows() {
                for (g, &a) in db.iter_mut().zip(dyr.iter()) {
                    *g += a;
                }
            }
        }
        let gain = ndarray::ArrayView1::from(p.get(self.gain));
        let mut dx = &dy * &gain;
        for ((mut row, xr), &is) in dx.rows_mut().into_iter().zip(cache.normalized.rows()).zip(cache.inv_std.iter()) {
            let mean_d = row.iter().copied().sum::<R>() / d;
            let mean_dx = row.iter().zip(xr.iter()).map(|(&a, &b)| a * b).sum::<R>() / d;
            for (v, &xh) in row.iter_mut().zip(xr.iter()) {
                *v = is * (*v - mean_d - xh * mean_dx);
            }
        }
        dx
    }
}
