//! Forward pass and exact gradients for the bag-of-ngrams classifier.
//!
//! The model is `E` (embedding, `V x d`) -> mean pooling -> `W1 (d x h), b1`
//! -> tanh -> `W2 (h x 2), b2` -> softmax. All matrices are row-major; the
//! embedding row for id `k` is `E[k*d .. (k+1)*d]`.
//!
//! Everything is generic over the float type. Models are stored and trained
//! in `f32`; gradient checks run the same code in `f64`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{SplitMix64, STREAM_INIT};
use crate::vocab::FeatureBag;

pub const DEFAULT_EMBED_DIM: usize = 32;
pub const DEFAULT_HIDDEN_DIM: usize = 32;
pub const NUM_CLASSES: usize = 2;

/// Clamp applied to the true-class probability before taking the log.
pub const LOSS_EPS: f64 = 1e-12;

pub trait Real: Float + Debug + Default + Send + Sync + 'static {}
impl<T: Float + Debug + Default + Send + Sync + 'static> Real for T {}

#[inline]
pub(crate) fn lit<F: Real>(x: f64) -> F {
    F::from(x).expect("float literal representable")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelDims {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
}

impl ModelDims {
    pub fn new(vocab_size: usize, embed_dim: usize, hidden_dim: usize) -> Self {
        ModelDims {
            vocab_size,
            embed_dim,
            hidden_dim,
        }
    }

    /// Element counts of `E, W1, b1, W2, b2`, in storage order.
    pub fn tensor_lens(&self) -> [usize; 5] {
        [
            self.vocab_size * self.embed_dim,
            self.embed_dim * self.hidden_dim,
            self.hidden_dim,
            self.hidden_dim * NUM_CLASSES,
            NUM_CLASSES,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.tensor_lens().iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub dims: ModelDims,
    pub embedding: Vec<F>,
    pub w1: Vec<F>,
    pub b1: Vec<F>,
    pub w2: Vec<F>,
    pub b2: Vec<F>,
}

pub const TENSOR_NAMES: [&str; 5] = ["E", "W1", "b1", "W2", "b2"];

impl<F: Real> ModelParams<F> {
    pub fn zeros(dims: ModelDims) -> Self {
        let [e, w1, b1, w2, b2] = dims.tensor_lens();
        ModelParams {
            dims,
            embedding: vec![F::zero(); e],
            w1: vec![F::zero(); w1],
            b1: vec![F::zero(); b1],
            w2: vec![F::zero(); w2],
            b2: vec![F::zero(); b2],
        }
    }

    pub fn embedding_row(&self, id: u32) -> &[F] {
        let d = self.dims.embed_dim;
        let start = id as usize * d;
        &self.embedding[start..start + d]
    }

    pub fn tensors(&self) -> [&[F]; 5] {
        [&self.embedding, &self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<F>; 5] {
        [&mut self.embedding, &mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    /// Checks tensor lengths against `dims`.
    pub fn check_shapes(&self) -> Result<()> {
        let expected = self.dims.tensor_lens();
        for ((name, t), want) in TENSOR_NAMES.iter().zip(self.tensors()).zip(expected) {
            if t.len() != want {
                return Err(Error::Shape(format!("tensor {name} has {} elements, expected {want}", t.len())));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    /// Element-wise conversion to another float type.
    pub fn cast<G: Real>(&self) -> ModelParams<G> {
        let conv = |v: &[F]| v.iter().map(|&x| G::from(x).expect("finite")).collect();
        ModelParams {
            dims: self.dims,
            embedding: conv(&self.embedding),
            w1: conv(&self.w1),
            b1: conv(&self.b1),
            w2: conv(&self.w2),
            b2: conv(&self.b2),
        }
    }
}

/// Glorot-uniform weights from the seed's init stream, zero biases.
///
/// Tensors are filled in the order `E, W1, W2`, each row-major, with
/// `U(-l, l)`, `l = sqrt(6 / (fan_in + fan_out))`.
pub fn init_params<F: Real>(dims: ModelDims, seed: u64) -> ModelParams<F> {
    let mut rng = SplitMix64::derive(seed, STREAM_INIT);
    let mut params = ModelParams::zeros(dims);
    let mut fill = |t: &mut [F], fan_in: usize, fan_out: usize| {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for x in t.iter_mut() {
            *x = lit((2.0 * rng.next_f64() - 1.0) * limit);
        }
    };
    fill(&mut params.embedding, dims.vocab_size, dims.embed_dim);
    fill(&mut params.w1, dims.embed_dim, dims.hidden_dim);
    fill(&mut params.w2, dims.hidden_dim, NUM_CLASSES);
    params
}

/// Shift-stabilized two-way softmax.
pub fn softmax<F: Real>(z: [F; 2]) -> [F; 2] {
    let m = z[0].max(z[1]);
    let e0 = (z[0] - m).exp();
    let e1 = (z[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

/// `-ln(max(p[class], 1e-12))`.
pub fn cross_entropy<F: Real>(p: [F; 2], class: usize) -> F {
    -p[class].max(lit(LOSS_EPS)).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache<F> {
    pub bag: FeatureBag,
    /// Mean-pooled embedding.
    pub x: Vec<F>,
    /// Hidden pre-activation.
    pub a1: Vec<F>,
    pub h1: Vec<F>,
    pub z: [F; 2],
    pub p: [F; 2],
}

pub fn forward<F: Real>(params: &ModelParams<F>, bag: &FeatureBag) -> Result<ForwardCache<F>> {
    let ModelDims {
        vocab_size,
        embed_dim: d,
        hidden_dim: h,
    } = params.dims;

    let mut x = vec![F::zero(); d];
    for &id in &bag.ids {
        if id as usize >= vocab_size {
            return Err(Error::FeatureOutOfRange { id, vocab_size });
        }
        for (xi, &e) in x.iter_mut().zip(params.embedding_row(id)) {
            *xi = *xi + e;
        }
    }
    if !bag.is_empty() {
        let n: F = lit(bag.len() as f64);
        x.iter_mut().for_each(|xi| *xi = *xi / n);
    }

    let mut a1 = params.b1.clone();
    for (i, &xi) in x.iter().enumerate() {
        let row = &params.w1[i * h..(i + 1) * h];
        for (a, &w) in a1.iter_mut().zip(row) {
            *a = *a + w * xi;
        }
    }
    let h1: Vec<F> = a1.iter().map(|a| a.tanh()).collect();

    let mut z = [params.b2[0], params.b2[1]];
    for (j, &hj) in h1.iter().enumerate() {
        z[0] = z[0] + params.w2[j * 2] * hj;
        z[1] = z[1] + params.w2[j * 2 + 1] * hj;
    }
    let p = softmax(z);

    Ok(ForwardCache {
        bag: bag.clone(),
        x,
        a1,
        h1,
        z,
        p,
    })
}

/// Gradients of the loss with respect to every parameter. Embedding gradients
/// are sparse: one row per distinct id that appeared in the bag(s).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<F> {
    pub d_embedding: BTreeMap<u32, Vec<F>>,
    pub dw1: Vec<F>,
    pub db1: Vec<F>,
    pub dw2: Vec<F>,
    pub db2: Vec<F>,
}

impl<F: Real> Gradients<F> {
    pub fn zeros(dims: ModelDims) -> Self {
        let [_, w1, b1, w2, b2] = dims.tensor_lens();
        Gradients {
            d_embedding: BTreeMap::new(),
            dw1: vec![F::zero(); w1],
            db1: vec![F::zero(); b1],
            dw2: vec![F::zero(); w2],
            db2: vec![F::zero(); b2],
        }
    }

    pub fn clear(&mut self) {
        self.d_embedding.clear();
        for t in [&mut self.dw1, &mut self.db1, &mut self.dw2, &mut self.db2] {
            t.iter_mut().for_each(|g| *g = F::zero());
        }
    }

    /// Multiply every gradient entry by `s`.
    pub fn scale(&mut self, s: F) {
        for row in self.d_embedding.values_mut() {
            row.iter_mut().for_each(|g| *g = *g * s);
        }
        for t in [&mut self.dw1, &mut self.db1, &mut self.dw2, &mut self.db2] {
            t.iter_mut().for_each(|g| *g = *g * s);
        }
    }

    /// Dense `V x d` view of the embedding gradient.
    pub fn dense_embedding(&self, dims: ModelDims) -> Vec<F> {
        let d = dims.embed_dim;
        let mut dense = vec![F::zero(); dims.vocab_size * d];
        for (&id, row) in &self.d_embedding {
            dense[id as usize * d..(id as usize + 1) * d].copy_from_slice(row);
        }
        dense
    }
}

pub fn backward<F: Real>(params: &ModelParams<F>, cache: &ForwardCache<F>, class: usize) -> Gradients<F> {
    let mut grads = Gradients::zeros(params.dims);
    accumulate_backward(params, cache, class, &mut grads);
    grads
}

/// Adds this example's gradients into `grads`.
pub fn accumulate_backward<F: Real>(
    params: &ModelParams<F>,
    cache: &ForwardCache<F>,
    class: usize,
    grads: &mut Gradients<F>,
) {
    let d = params.dims.embed_dim;
    let h = params.dims.hidden_dim;

    let mut dz = cache.p;
    dz[class] = dz[class] - F::one();

    grads.db2[0] = grads.db2[0] + dz[0];
    grads.db2[1] = grads.db2[1] + dz[1];

    let mut da1 = vec![F::zero(); h];
    for j in 0..h {
        let hj = cache.h1[j];
        grads.dw2[j * 2] = grads.dw2[j * 2] + hj * dz[0];
        grads.dw2[j * 2 + 1] = grads.dw2[j * 2 + 1] + hj * dz[1];
        let dh = params.w2[j * 2] * dz[0] + params.w2[j * 2 + 1] * dz[1];
        da1[j] = dh * (F::one() - hj * hj);
        grads.db1[j] = grads.db1[j] + da1[j];
    }

    let mut dx = vec![F::zero(); d];
    for i in 0..d {
        let xi = cache.x[i];
        let row = &params.w1[i * h..(i + 1) * h];
        let grow = &mut grads.dw1[i * h..(i + 1) * h];
        let mut acc = F::zero();
        for j in 0..h {
            grow[j] = grow[j] + xi * da1[j];
            acc = acc + row[j] * da1[j];
        }
        dx[i] = acc;
    }

    if cache.bag.is_empty() {
        return;
    }
    let mut multiplicity: BTreeMap<u32, usize> = BTreeMap::new();
    for &id in &cache.bag.ids {
        *multiplicity.entry(id).or_insert(0) += 1;
    }
    let n: F = lit(cache.bag.len() as f64);
    for (id, mult) in multiplicity {
        let w = lit::<F>(mult as f64) / n;
        let row = grads.d_embedding.entry(id).or_insert_with(|| vec![F::zero(); d]);
        for (g, &dxi) in row.iter_mut().zip(&dx) {
            *g = *g + w * dxi;
        }
    }
}
