//! Seeded random models for testing and benchmarking without trained
//! weights.
//!
//! Distributions: dense matrices and sparse block values are Gaussian with
//! standard deviation `1/sqrt(fan_in)` (for sparse matrices the expected
//! number of stored blocks per row), embeddings are standard Gaussian,
//! biases are Gaussian with standard deviation 0.1. The output layer uses
//! `a1 = a2 = 2` and a first-branch bias peaking at the centre code so that
//! sampled excitations stay moderate.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::tensor::{BlockSparse, Matrix, BLOCK_ROWS};
use crate::model::{GruARecurrent, ModelDims, ModelWeights, CONV_TAPS};

/// Fraction of 16×1 blocks kept in each GRU_A recurrent matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySpec {
    pub update: f64,
    pub reset: f64,
    pub candidate: f64,
}

impl Default for DensitySpec {
    fn default() -> Self {
        Self { update: 0.05, reset: 0.05, candidate: 0.20 }
    }
}

impl DensitySpec {
    pub fn uniform(d: f64) -> Self {
        Self { update: d, reset: d, candidate: d }
    }

    /// Mean of the three densities.
    pub fn average(&self) -> f64 {
        (self.update + self.reset + self.candidate) / 3.0
    }
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn gaussian(&mut self, n: usize, std: f64) -> Vec<f32> {
        let normal = Normal::new(0.0, std).unwrap();
        (0..n).map(|_| normal.sample(&mut self.rng) as f32).collect()
    }

    fn dense(&mut self, rows: usize, cols: usize) -> Matrix {
        let data = self.gaussian(rows * cols, 1.0 / (cols.max(1) as f64).sqrt());
        Matrix::new(rows, cols, data).unwrap()
    }

    fn bias(&mut self, n: usize) -> Vec<f32> {
        self.gaussian(n, 0.1)
    }

    /// Exactly `round(density · total)` blocks at uniformly chosen positions.
    fn sparse(&mut self, n: usize, density: f64) -> BlockSparse {
        let block_rows = n / BLOCK_ROWS;
        let total = block_rows * n;
        let count = ((density * total as f64).round() as usize).min(total);
        let mut picked = sample(&mut self.rng, total, count).into_vec();
        picked.sort_unstable();
        let mut lists = vec![Vec::new(); block_rows];
        for p in picked {
            lists[p / n].push((p % n) as u32);
        }
        let std = 1.0 / (density * n as f64).max(1.0).sqrt();
        let values = self.gaussian(count * BLOCK_ROWS, std);
        BlockSparse::from_parts(n, n, lists, values).unwrap()
    }
}

pub fn generate_random_model(seed: u64, dims: ModelDims, density: DensitySpec) -> Result<ModelWeights> {
    dims.validate()?;
    for d in [density.update, density.reset, density.candidate] {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::InvalidDims(format!("density {d} outside [0, 1]")));
        }
    }
    let d = dims;
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed) };
    let mut w = ModelWeights::zeros(dims)?;
    w.conv1 = g.dense(d.frame_hidden, CONV_TAPS * d.feature_dim);
    w.conv1_bias = g.bias(d.frame_hidden);
    w.conv2 = g.dense(d.frame_hidden, CONV_TAPS * d.frame_hidden);
    w.conv2_bias = g.bias(d.frame_hidden);
    w.fc1 = g.dense(d.cond_dim, d.frame_hidden);
    w.fc1_bias = g.bias(d.cond_dim);
    w.fc2 = g.dense(d.cond_dim, d.cond_dim);
    w.fc2_bias = g.bias(d.cond_dim);
    w.cond_a = g.dense(3 * d.n_a, d.cond_dim);
    w.cond_a_bias = g.bias(3 * d.n_a);
    w.cond_b = g.dense(3 * d.n_b, d.cond_dim);
    w.cond_b_bias = g.bias(3 * d.n_b);
    w.embed_sig = Matrix::new(d.q, d.embed_dim, g.gaussian(d.q * d.embed_dim, 1.0))?;
    w.embed_exc = Matrix::new(d.q, d.embed_dim, g.gaussian(d.q * d.embed_dim, 1.0))?;
    w.gru_a_input = g.dense(3 * d.n_a, 3 * d.embed_dim);
    w.gru_a_rec = GruARecurrent {
        w_u: g.sparse(d.n_a, density.update),
        w_r: g.sparse(d.n_a, density.reset),
        w_h: g.sparse(d.n_a, density.candidate),
    };
    w.gru_a_rec_bias = g.bias(3 * d.n_a);
    w.gru_b_input = g.dense(3 * d.n_b, d.n_a);
    w.gru_b_rec = g.dense(3 * d.n_b, d.n_b);
    w.gru_b_rec_bias = g.bias(3 * d.n_b);
    w.dual_w1 = g.dense(d.q, d.n_b);
    w.dual_w2 = g.dense(d.q, d.n_b);
    let half = d.q as f32 / 2.0;
    w.dual_b1 = (0..d.q).map(|i| 2.0 - 4.0 * (i as f32 - half).abs() / half).collect();
    w.dual_b2 = vec![0.0; d.q];
    w.dual_a1 = vec![2.0; d.q];
    w.dual_a2 = vec![2.0; d.q];
    w.validate()?;
    Ok(w)
}
