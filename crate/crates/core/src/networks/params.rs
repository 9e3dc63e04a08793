use serde::{Deserialize, Serialize};

use super::Real;
use crate::{Error, Result};

/// Index of a tensor inside a [`Params`] set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamId(pub(crate) usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<R> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<R>,
}

impl<R: Real> Tensor<R> {
    pub fn numel(&self) -> usize {
        self.data.len()
    }
}

/// An ordered set of named parameter tensors. Gradients and optimizer
/// moments use a second `Params` with the same layout.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Params<R> {
    tensors: Vec<Tensor<R>>,
}

impl<R: Real> Params<R> {
    pub fn new() -> Self {
        Self { tensors: Vec::new() }
    }

    pub fn push(&mut self, name: impl Into<String>, shape: Vec<usize>, data: Vec<R>) -> ParamId {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.tensors.push(Tensor {
            name: name.into(),
            shape,
            data,
        });
        ParamId(self.tensors.len() - 1)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            tensors: self
                .tensors
                .iter()
                .map(|t| Tensor {
                    name: t.name.clone(),
                    shape: t.shape.clone(),
                    data: vec![R::zero(); t.data.len()],
                })
                .collect(),
        }
    }

    #[inline]
    pub fn get(&self, id: ParamId) -> &[R] {
        &self.tensors[id.0].data
    }

    #[inline]
    pub fn get_mut(&mut self, id: ParamId) -> &mut [R] {
        &mut self.tensors[id.0].data
    }

    pub fn tensors(&self) -> &[Tensor<R>] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor<R>] {
        &mut self.tensors
    }

    pub fn find(&self, name: &str) -> Option<&Tensor<R>> {
        self.tensors.iter().find(|t| t.name == name)
    }

    pub fn numel(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn fill_zero(&mut self) {
        for t in &mut self.tensors {
            t.data.iter_mut().for_each(|v| *v = R::zero());
        }
    }

    pub fn sq_norm(&self) -> f64 {
        self.tensors
            .iter()
            .flat_map(|t| t.data.iter())
            .map(|v| {
                let x = v.as_f64();
                x * x
            })
            .sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.tensors.iter().all(|t| t.data.iter().all(|v| *v == R::zero()))
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    /// Flat element `i` across all tensors in order.
    pub fn flat_get(&self, mut i: usize) -> R {
        for t in &self.tensors {
            if i < t.data.len() {
                return t.data[i];
            }
            i -= t.data.len();
        }
        panic!("flat index out of range")
    }

    pub fn flat_set(&mut self, mut i: usize, v: R) {
        for t in &mut self.tensors {
            if i < t.data.len() {
                t.data[i] = v;
                return;
            }
            i -= t.data.len();
        }
        panic!("flat index out of range")
    }

    pub fn same_layout(&self, other: &Params<R>) -> bool {
        self.tensors.len() == other.tensors.len()
            && self
                .tensors
                .iter()
                .zip(other.tensors.iter())
                .all(|(a, b)| a.name == b.name && a.shape == b.shape)
    }

    /// `self <- (1 - tau) * self + tau * other`, elementwise.
    pub fn lerp_towards(&mut self, other: &Params<R>, tau: R) {
        debug_assert!(self.same_layout(other));
        let keep = R::one() - tau;
        for (a, b) in self.tensors.iter_mut().zip(other.tensors.iter()) {
            for (x, &y) in a.data.iter_mut().zip(b.data.iter()) {
                *x = keep * *x + tau * y;
            }
        }
    }

    pub fn copy_from(&mut self, other: &Params<R>) {
        debug_assert!(self.same_layout(other));
        for (a, b) in self.tensors.iter_mut().zip(other.tensors.iter()) {
            a.data.copy_from_slice(&b.data);
        }
    }

    /// Replaces values from `other`, matching tensors by name and shape.
    pub fn load_from(&mut self, other: &[Tensor<R>], prefix: &str) -> Result<()> {
        for t in &mut self.tensors {
            let key = format!("{prefix}{}", t.name);
            let src = other
                .iter()
                .find(|s| s.name == key)
                .ok_or_else(|| Error::Contract(format!("missing tensor `{key}`")))?;
            if src.shape != t.shape {
                return Err(Error::Contract(format!(
                    "tensor `{key}` has shape {:?}, expected {:?}",
                    src.shape, t.shape
                )));
            }
            t.data.copy_from_slice(&src.data);
        }
        Ok(())
    }

    /// FNV-1a over the raw bits of every value; used to detect any change.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for t in &self.tensors {
            for v in &t.data {
                for b in v.as_f64().to_bits().to_le_bytes() {
                    h ^= u64::from(b);
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        h
    }
}
