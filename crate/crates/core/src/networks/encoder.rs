use ndarray::{Array2, Array4, ArrayView2, ArrayView4};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{Conv2d, LayerNorm, LayerNormCache, Linear};
use super::params::Params;
use super::Real;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub in_channels: usize,
    pub image_size: usize,
    pub num_filters: usize,
    pub num_layers: usize,
    pub features_dim: usize,
}

impl EncoderConfig {
    /// Spatial size after the conv stack (first layer stride 2, rest stride 1).
    pub fn conv_output_size(&self) -> Option<usize> {
        let mut s = self.image_size.checked_sub(3)? / 2 + 1;
        for _ in 1..self.num_layers {
            s = s.checked_sub(3)? + 1;
            if s == 0 {
                return None;
            }
        }
        Some(s)
    }
}

/// Shared convolutional encoder: conv stack with ReLU, linear projection,
/// layer norm and tanh.
#[derive(Clone, Debug)]
pub struct Encoder<R> {
    pub cfg: EncoderConfig,
    pub params: Params<R>,
    convs: Vec<Conv2d>,
    proj: Linear,
    norm: LayerNorm,
}

/// Activations kept from a tracked forward pass.
pub struct EncoderTrace<R> {
    activations: Vec<Array4<R>>,
    norm_cache: LayerNormCache<R>,
    output: Array2<R>,
}

impl<R: Real> Encoder<R> {
    pub fn new<G: Rng + ?Sized>(cfg: EncoderConfig, rng: &mut G) -> Result<Self> {
        if cfg.num_layers == 0 || cfg.in_channels == 0 || cfg.features_dim == 0 || cfg.num_filters == 0 {
            return Err(Error::validation("encoder", "layer counts and widths must be positive"));
        }
        let out = cfg.conv_output_size().ok_or_else(|| {
            Error::validation(
                "image_size",
                format!("{} is too small for {} conv layers", cfg.image_size, cfg.num_layers),
            )
        })?;
        let mut params = Params::new();
        let mut convs = Vec::with_capacity(cfg.num_layers);
        for i in 0..cfg.num_layers {
            let (cin, stride) = if i == 0 { (cfg.in_channels, 2) } else { (cfg.num_filters, 1) };
            convs.push(Conv2d::new(&mut params, &format!("conv{i}"), cin, cfg.num_filters, 3, stride, rng));
        }
        let flat = cfg.num_filters * out * out;
        let proj = Linear::new(&mut params, "proj", flat, cfg.features_dim, rng);
        let norm = LayerNorm::new(&mut params, "norm", cfg.features_dim);
        Ok(Self {
            cfg,
            params,
            convs,
            proj,
            norm,
        })
    }

    fn check_input(&self, obs: &ArrayView4<R>) -> Result<()> {
        let (n, c, h, w) = obs.dim();
        if n == 0 {
            return Err(Error::Contract("empty observation batch".into()));
        }
        if c != self.cfg.in_channels || h != self.cfg.image_size || w != self.cfg.image_size {
            return Err(Error::Contract(format!(
                "observation batch {c}x{h}x{w} does not match encoder input {}x{}x{}",
                self.cfg.in_channels, self.cfg.image_size, self.cfg.image_size
            )));
        }
        Ok(())
    }

    fn run(&self, obs: ArrayView4<R>, keep: bool) -> (Array2<R>, Option<EncoderTrace<R>>) {
        let half = R::lit(0.5);
        let mut x = obs.mapv(|v| v - half);
        let mut activations = Vec::new();
        for conv in &self.convs {
            let mut y = conv.forward(&self.params, x.view());
            y.mapv_inplace(|v| if v > R::zero() { v } else { R::zero() });
            if keep {
                activations.push(std::mem::replace(&mut x, y));
            } else {
                x = y;
            }
        }
        let n = x.dim().0;
        let flat_len = x.len() / n;
        let flat = x.view().into_shape_with_order((n, flat_len)).expect("contiguous conv output");
        let h = self.proj.forward(&self.params, flat);
        let (y, norm_cache) = self.norm.forward(&self.params, h.view());
        let output = y.mapv(|v| v.tanh());
        if keep {
            activations.push(x);
            let trace = EncoderTrace {
                activations,
                norm_cache,
                output: output.clone(),
            };
            (output, Some(trace))
        } else {
            (output, None)
        }
    }

    /// Features with no gradient path back into the encoder.
    pub fn encode(&self, obs: ArrayView4<R>) -> Result<Array2<R>> {
        self.check_input(&obs)?;
        Ok(self.run(obs, false).0)
    }

    /// Features plus the activations needed for [`Encoder::backward`].
    pub fn encode_tracked(&self, obs: ArrayView4<R>) -> Result<(Array2<R>, EncoderTrace<R>)> {
        self.check_input(&obs)?;
        let (out, trace) = self.run(obs, true);
        Ok((out, trace.expect("tracked pass keeps activations")))
    }

    /// Accumulates encoder parameter gradients given `dfeat = dL/dfeatures`.
    pub fn backward(&self, trace: &EncoderTrace<R>, dfeat: ArrayView2<R>, grads: &mut Params<R>) {
        let mut d = dfeat.to_owned();
        ndarray::Zip::from(&mut d)
            .and(&trace.output)
            .for_each(|g, &y| *g = *g * (R::one() - y * y));
        let d = self.norm.backward(&self.params, &trace.norm_cache, d.view(), grads);
        let last = trace.activations.last().expect("non-empty trace");
        let n = last.dim().0;
        let flat = last.view().into_shape_with_order((n, last.len() / n)).expect("contiguous");
        let dflat = self.proj.backward(&self.params, flat, d.view(), Some(grads));
        let mut dy = dflat.into_shape_with_order(last.raw_dim()).expect("conv output shape");
        for (i, conv) in self.convs.iter().enumerate().rev() {
            let out = &trace.activations[i + 1];
            ndarray::Zip::from(&mut dy).and(out).for_each(|g, &o| {
                if o <= R::zero() {
                    *g = R::zero();
                }
            });
            let input = &trace.activations[i];
            match conv.backward(&self.params, input.view(), dy.view(), grads, i > 0) {
                Some(dx) => dy = dx,
                None => break,
            }
        }
    }

    pub fn features_dim(&self) -> usize {
        self.cfg.features_dim
    }
}
