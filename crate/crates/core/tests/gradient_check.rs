//! Analytic gradients against central finite differences of an
//! independently written loss.

use ngsent_core::nncore::{backward, forward, init_params, ModelDims, ModelParams};
use ngsent_core::rng::SplitMix64;
use ngsent_core::vocab::FeatureBag;

const STEP: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;
/// Central differences at this step carry ~1e-11 absolute rounding noise, so
/// relative error is measured against at least this magnitude.
const REL_FLOOR: f64 = 1e-6;

/// Straight-line loss: mean pooling, tanh layer, softmax, clamped NLL.
fn reference_loss(p: &ModelParams<f64>, bag: &[u32], class: usize) -> f64 {
    let (d, h) = (p.dims.embed_dim, p.dims.hidden_dim);
    let mut x = vec![0.0; d];
    for &id in bag {
        for i in 0..d {
            x[i] += p.embedding[id as usize * d + i];
        }
    }
    if !bag.is_empty() {
        for xi in &mut x {
            *xi /= bag.len() as f64;
        }
    }
    let mut z = p.b2.clone();
    for j in 0..h {
        let mut a = p.b1[j];
        for i in 0..d {
            a += p.w1[i * h + j] * x[i];
        }
        let hj = a.tanh();
        for (c, zc) in z.iter_mut().enumerate() {
            *zc += p.w2[j * 2 + c] * hj;
        }
    }
    let log_norm = (z[0].exp() + z[1].exp()).ln();
    let prob = (z[class] - log_norm).exp();
    -prob.max(1e-12).ln()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_FLOOR)
}

fn check_one(seed: u64) -> Vec<String> {
    let dims = ModelDims::new(50, 8, 4);
    let mut rng = SplitMix64::new(seed);
    let mut params: ModelParams<f64> = init_params(dims, seed);
    // Non-zero biases so their gradients are exercised away from the init point.
    for b in params.b1.iter_mut().chain(params.b2.iter_mut()) {
        *b = rng.next_f64() - 0.5;
    }
    let len = rng.next_below(11) as usize;
    let bag: Vec<u32> = (0..len).map(|_| rng.next_below(50) as u32).collect();
    let class = rng.next_below(2) as usize;

    let cache = forward(&params, &FeatureBag::new(bag.clone())).unwrap();
    let grads = backward(&params, &cache, class);
    let analytic = [
        grads.dense_embedding(dims),
        grads.dw1.clone(),
        grads.db1.clone(),
        grads.dw2.clone(),
        grads.db2.clone(),
    ];

    let mut failures = Vec::new();
    for (t, name) in ["E", "W1", "b1", "W2", "b2"].iter().enumerate() {
        for k in 0..analytic[t].len() {
            let mut plus = params.clone();
            plus.tensors_mut()[t][k] += STEP;
            let mut minus = params.clone();
            minus.tensors_mut()[t][k] -= STEP;
            let numeric = (reference_loss(&plus, &bag, class) - reference_loss(&minus, &bag, class)) / (2.0 * STEP);
            let err = rel_err(analytic[t][k], numeric);
            if err >= REL_TOL {
                failures.push(format!(
                    "seed {seed} {name}[{k}]: analytic {} numeric {numeric} rel {err:e}",
                    analytic[t][k]
                ));
            }
        }
    }
    failures
}

#[test]
fn reference_loss_agrees_with_forward() {
    let dims = ModelDims::new(50, 8, 4);
    let params: ModelParams<f64> = init_params(dims, 3);
    let bag = vec![1, 2, 2, 40];
    let p = forward(&params, &FeatureBag::new(bag.clone())).unwrap().p;
    assert!((reference_loss(&params, &bag, 1) + p[1].ln()).abs() < 1e-12);
}

#[test]
fn gradients_match_finite_differences() {
    let failures: Vec<String> = (0..100).flat_map(check_one).collect();
    assert!(failures.is_empty(), "{} mismatches:\n{}", failures.len(), failures.join("\n"));
}
