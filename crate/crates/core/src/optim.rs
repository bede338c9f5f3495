//! Adam with bias correction. Dense tensors are updated every step; embedding
//! rows are updated lazily, only when they received a gradient.

use crate::error::{Error, Result};
use crate::nncore::{lit, Gradients, ModelParams, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moments shaped like the model, plus the step count.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<F> {
    pub m: ModelParams<F>,
    pub v: ModelParams<F>,
    pub t: u64,
}

impl<F: Real> AdamState<F> {
    pub fn new(params: &ModelParams<F>) -> Self {
        AdamState {
            m: ModelParams::zeros(params.dims),
            v: ModelParams::zeros(params.dims),
            t: 0,
        }
    }
}

/// Per-step constants shared by every element update.
#[derive(Debug, Clone, Copy)]
pub struct StepCoefficients<F> {
    beta1: F,
    beta2: F,
    one_minus_beta1: F,
    one_minus_beta2: F,
    bias1: F,
    bias2: F,
    alpha: F,
    eps: F,
}

impl<F: Real> StepCoefficients<F> {
    /// Coefficients for step number `t` (1-based).
    pub fn new(hyper: &AdamHyper, t: u64) -> Self {
        let tf = t as f64;
        StepCoefficients {
            beta1: lit(hyper.beta1),
            beta2: lit(hyper.beta2),
            one_minus_beta1: lit(1.0 - hyper.beta1),
            one_minus_beta2: lit(1.0 - hyper.beta2),
            bias1: lit(1.0 - hyper.beta1.powf(tf)),
            bias2: lit(1.0 - hyper.beta2.powf(tf)),
            alpha: lit(hyper.alpha),
            eps: lit(hyper.eps),
        }
    }
}

/// Element-wise Adam update of one slice. All four slices must have equal length.
pub fn adam_update_slice<F: Real>(theta: &mut [F], grad: &[F], m: &mut [F], v: &mut [F], c: &StepCoefficients<F>) {
    debug_assert!(theta.len() == grad.len() && m.len() == grad.len() && v.len() == grad.len());
    for i in 0..theta.len() {
        let g = grad[i];
        m[i] = c.beta1 * m[i] + c.one_minus_beta1 * g;
        v[i] = c.beta2 * v[i] + c.one_minus_beta2 * g * g;
        let m_hat = m[i] / c.bias1;
        let v_hat = v[i] / c.bias2;
        theta[i] = theta[i] - c.alpha * m_hat / (v_hat.sqrt() + c.eps);
    }
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Shape(format!("{name}: {got} elements, expected {want}")));
    }
    Ok(())
}

/// One Adam step: increments `state.t`, then updates the dense tensors and
/// every embedding row present in `grads.d_embedding`.
pub fn adam_step<F: Real>(
    params: &mut ModelParams<F>,
    grads: &Gradients<F>,
    state: &mut AdamState<F>,
    hyper: &AdamHyper,
) -> Result<()> {
    let dims = params.dims;
    params.check_shapes()?;
    if state.m.dims != dims || state.v.dims != dims {
        return Err(Error::Shape("optimizer state dims differ from model dims".into()));
    }
    let [_, w1, b1, w2, b2] = dims.tensor_lens();
    check_len("dW1", grads.dw1.len(), w1)?;
    check_len("db1", grads.db1.len(), b1)?;
    check_len("dW2", grads.dw2.len(), w2)?;
    check_len("db2", grads.db2.len(), b2)?;
    for (&id, row) in &grads.d_embedding {
        if id as usize >= dims.vocab_size {
            return Err(Error::FeatureOutOfRange {
                id,
                vocab_size: dims.vocab_size,
            });
        }
        check_len("dE row", row.len(), dims.embed_dim)?;
    }

    state.t += 1;
    let c = StepCoefficients::new(hyper, state.t);

    adam_update_slice(&mut params.w1, &grads.dw1, &mut state.m.w1, &mut state.v.w1, &c);
    adam_update_slice(&mut params.b1, &grads.db1, &mut state.m.b1, &mut state.v.b1, &c);
    adam_update_slice(&mut params.w2, &grads.dw2, &mut state.m.w2, &mut state.v.w2, &c);
    adam_update_slice(&mut params.b2, &grads.db2, &mut state.m.b2, &mut state.v.b2, &c);

    let d = dims.embed_dim;
    for (&id, row) in &grads.d_embedding {
        let r = id as usize * d..(id as usize + 1) * d;
        adam_update_slice(
            &mut params.embedding[r.clone()],
            row,
            &mut state.m.embedding[r.clone()],
            &mut state.v.embedding[r],
            &c,
        );
    }
    Ok(())
}
