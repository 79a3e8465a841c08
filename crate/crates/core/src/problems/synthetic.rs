use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Gaussian regression data `b = A x_true + σ ε`. Returns the dataset and
/// `x_true`. Draw order: features (row-major), then `x_true`, then noise.
pub fn gen_linear_synthetic(
    samples: usize,
    dim: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<(Dataset, Vec<f64>)> {
    if dim == 0 || samples < dim {
        return Err(Error::InvalidParameter(format!(
            "need samples >= dim >= 1, got samples={samples}, dim={dim}"
        )));
    }
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise sigma {noise_sigma} < 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::from_fn(samples, dim, |_, _| rng.sample(StandardNormal));
    let x_true: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let mut b = a.matvec(&x_true);
    for v in &mut b {
        let e: f64 = rng.sample(StandardNormal);
        *v += noise_sigma * e;
    }
    Ok((Dataset::new(a, b)?, x_true))
}

/// Binary classification data with labels `1{a_jᵀx_true + σ ε_j > 0}`.
/// Same draw order as [`gen_linear_synthetic`].
pub fn gen_logistic_synthetic(
    samples: usize,
    dim: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<(Dataset, Vec<f64>)> {
    let (linear, x_true) = gen_linear_synthetic(samples, dim, noise_sigma, seed)?;
    let labels = linear.labels().iter().map(|&b| if b > 0.0 { 1.0 } else { 0.0 }).collect();
    Ok((Dataset::new(linear.features().clone(), labels)?, x_true))
}

/// Seeded shuffle of `0..samples` cut into `nodes` contiguous blocks; the
/// first `samples % nodes` blocks get one extra index.
pub fn partition_uniform(samples: usize, nodes: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if nodes == 0 || samples < nodes {
        return Err(Error::InvalidParameter(format!(
            "cannot split {samples} samples across {nodes} nodes"
        )));
    }
    let mut idx: Vec<usize> = (0..samples).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (samples / nodes, samples % nodes);
    let mut out = Vec::with_capacity(nodes);
    let mut start = 0;
    for b in 0..nodes {
        let len = base + usize::from(b < extra);
        out.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(out)
}
