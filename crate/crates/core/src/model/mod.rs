//! Network weights: container, validation, file format, random generation,
//! embedding lookup tables and weight accounting.

pub mod accounting;
pub mod generate;
pub mod io;
pub mod lookup;
pub mod tensor;

pub use accounting::{count_weights, count_weights_exact, gflops};
pub use generate::{generate_random_model, DensitySpec};
pub use lookup::{build_lookup_tables, LookupTables};
pub use tensor::{BlockSparse, Matrix, BLOCK_ROWS};

use crate::error::{Error, Result};
use crate::features::FEATURE_VALUES;

/// Number of μ-law levels.
pub const Q: usize = 256;
/// Frame-rate network convolution width.
pub const CONV_TAPS: usize = 3;

/// Sizes stored in the weight file header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelDims {
    /// GRU_A units.
    pub n_a: usize,
    /// GRU_B units.
    pub n_b: usize,
    /// Output levels.
    pub q: usize,
    /// Embedding width.
    pub embed_dim: usize,
    /// Per-frame network input.
    pub feature_dim: usize,
    /// Convolution channels.
    pub frame_hidden: usize,
    /// Conditioning vector g.
    pub cond_dim: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self { n_a: 384, n_b: 16, q: Q, embed_dim: 128, feature_dim: FEATURE_VALUES, frame_hidden: 128, cond_dim: 128 }
    }
}

impl ModelDims {
    pub fn validate(&self) -> Result<()> {
        if self.n_a == 0 || self.n_a % BLOCK_ROWS != 0 {
            return Err(Error::InvalidDims(format!("n_a = {} must be a positive multiple of {BLOCK_ROWS}", self.n_a)));
        }
        if self.q != Q {
            return Err(Error::InvalidDims(format!("q = {} (only {Q} is supported)", self.q)));
        }
        if self.feature_dim != FEATURE_VALUES {
            return Err(Error::InvalidDims(format!("feature_dim = {} (expected {FEATURE_VALUES})", self.feature_dim)));
        }
        for (name, v) in [
            ("n_b", self.n_b),
            ("embed_dim", self.embed_dim),
            ("frame_hidden", self.frame_hidden),
            ("cond_dim", self.cond_dim),
        ] {
            if v == 0 || v > 1 << 16 {
                return Err(Error::InvalidDims(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// The three GRU_A recurrent matrices, gate order u, r, h.
#[derive(Debug, Clone, PartialEq)]
pub struct GruARecurrent {
    pub w_u: BlockSparse,
    pub w_r: BlockSparse,
    pub w_h: BlockSparse,
}

impl GruARecurrent {
    pub fn gates(&self) -> [&BlockSparse; 3] {
        [&self.w_u, &self.w_r, &self.w_h]
    }
}

/// All weights of both networks. Stacked gate matrices use the order
/// u, r, h.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub dims: ModelDims,
    /// `frame_hidden × 3·feature_dim`, taps ordered past, current, future.
    pub conv1: Matrix,
    pub conv1_bias: Vec<f32>,
    /// `frame_hidden × 3·frame_hidden`
    pub conv2: Matrix,
    pub conv2_bias: Vec<f32>,
    /// `cond_dim × frame_hidden`
    pub fc1: Matrix,
    pub fc1_bias: Vec<f32>,
    /// `cond_dim × cond_dim`
    pub fc2: Matrix,
    pub fc2_bias: Vec<f32>,
    /// `3·n_a × cond_dim`: per-gate frame contributions to GRU_A.
    pub cond_a: Matrix,
    pub cond_a_bias: Vec<f32>,
    /// `3·n_b × cond_dim`: g part of the GRU_B input.
    pub cond_b: Matrix,
    pub cond_b_bias: Vec<f32>,
    /// `q × embed_dim`, used for the signal and prediction inputs.
    pub embed_sig: Matrix,
    /// `q × embed_dim`, used for the excitation input.
    pub embed_exc: Matrix,
    /// `3·n_a × 3·embed_dim`, input columns ordered s, p, e.
    pub gru_a_input: Matrix,
    pub gru_a_rec: GruARecurrent,
    pub gru_a_rec_bias: Vec<f32>,
    /// `3·n_b × n_a`
    pub gru_b_input: Matrix,
    /// `3·n_b × n_b`
    pub gru_b_rec: Matrix,
    pub gru_b_rec_bias: Vec<f32>,
    /// `q × n_b`
    pub dual_w1: Matrix,
    pub dual_w2: Matrix,
    pub dual_b1: Vec<f32>,
    pub dual_b2: Vec<f32>,
    pub dual_a1: Vec<f32>,
    pub dual_a2: Vec<f32>,
}

/// A tensor reference for shape checks and serialization.
pub enum TensorRef<'a> {
    Dense(&'a Matrix),
    Vector(&'a [f32]),
    Sparse(&'a BlockSparse),
}

/// Tensor names in file order.
pub const TENSOR_NAMES: [&str; 28] = [
    "conv1", "conv1_bias", "conv2", "conv2_bias", "fc1", "fc1_bias", "fc2", "fc2_bias",
    "cond_to_gru_a", "cond_to_gru_a_bias", "cond_to_gru_b", "cond_to_gru_b_bias",
    "embed_sig", "embed_exc", "gru_a_input", "gru_a_wu", "gru_a_wr", "gru_a_wh", "gru_a_rec_bias",
    "gru_b_input", "gru_b_recurrent", "gru_b_rec_bias",
    "dual_fc_w1", "dual_fc_w2", "dual_fc_b1", "dual_fc_b2", "dual_fc_a1", "dual_fc_a2",
];

impl ModelWeights {
    /// Expected `(rows, cols)` of each tensor; vectors have `cols == 1`.
    pub fn expected_shape(dims: &ModelDims, name: &str) -> Option<(usize, usize)> {
        let d = dims;
        Some(match name {
            "conv1" => (d.frame_hidden, CONV_TAPS * d.feature_dim),
            "conv2" => (d.frame_hidden, CONV_TAPS * d.frame_hidden),
            "conv1_bias" | "conv2_bias" => (d.frame_hidden, 1),
            "fc1" => (d.cond_dim, d.frame_hidden),
            "fc2" => (d.cond_dim, d.cond_dim),
            "fc1_bias" | "fc2_bias" => (d.cond_dim, 1),
            "cond_to_gru_a" => (3 * d.n_a, d.cond_dim),
            "cond_to_gru_a_bias" | "gru_a_rec_bias" => (3 * d.n_a, 1),
            "cond_to_gru_b" => (3 * d.n_b, d.cond_dim),
            "cond_to_gru_b_bias" | "gru_b_rec_bias" => (3 * d.n_b, 1),
            "embed_sig" | "embed_exc" => (d.q, d.embed_dim),
            "gru_a_input" => (3 * d.n_a, 3 * d.embed_dim),
            "gru_a_wu" | "gru_a_wr" | "gru_a_wh" => (d.n_a, d.n_a),
            "gru_b_input" => (3 * d.n_b, d.n_a),
            "gru_b_recurrent" => (3 * d.n_b, d.n_b),
            "dual_fc_w1" | "dual_fc_w2" => (d.q, d.n_b),
            "dual_fc_b1" | "dual_fc_b2" | "dual_fc_a1" | "dual_fc_a2" => (d.q, 1),
            _ => return None,
        })
    }

    /// Every tensor paired with its name, in file order (without `end`).
    pub fn tensors(&self) -> Vec<(&'static str, TensorRef<'_>)> {
        use TensorRef::*;
        vec![
            ("conv1", Dense(&self.conv1)),
            ("conv1_bias", Vector(&self.conv1_bias)),
            ("conv2", Dense(&self.conv2)),
            ("conv2_bias", Vector(&self.conv2_bias)),
            ("fc1", Dense(&self.fc1)),
            ("fc1_bias", Vector(&self.fc1_bias)),
            ("fc2", Dense(&self.fc2)),
            ("fc2_bias", Vector(&self.fc2_bias)),
            ("cond_to_gru_a", Dense(&self.cond_a)),
            ("cond_to_gru_a_bias", Vector(&self.cond_a_bias)),
            ("cond_to_gru_b", Dense(&self.cond_b)),
            ("cond_to_gru_b_bias", Vector(&self.cond_b_bias)),
            ("embed_sig", Dense(&self.embed_sig)),
            ("embed_exc", Dense(&self.embed_exc)),
            ("gru_a_input", Dense(&self.gru_a_input)),
            ("gru_a_wu", Sparse(&self.gru_a_rec.w_u)),
            ("gru_a_wr", Sparse(&self.gru_a_rec.w_r)),
            ("gru_a_wh", Sparse(&self.gru_a_rec.w_h)),
            ("gru_a_rec_bias", Vector(&self.gru_a_rec_bias)),
            ("gru_b_input", Dense(&self.gru_b_input)),
            ("gru_b_recurrent", Dense(&self.gru_b_rec)),
            ("gru_b_rec_bias", Vector(&self.gru_b_rec_bias)),
            ("dual_fc_w1", Dense(&self.dual_w1)),
            ("dual_fc_w2", Dense(&self.dual_w2)),
            ("dual_fc_b1", Vector(&self.dual_b1)),
            ("dual_fc_b2", Vector(&self.dual_b2)),
            ("dual_fc_a1", Vector(&self.dual_a1)),
            ("dual_fc_a2", Vector(&self.dual_a2)),
        ]
    }

    /// Checks dims, every tensor shape and finiteness. The error names the
    /// first offending tensor.
    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        for (name, t) in self.tensors() {
            let expected = Self::expected_shape(&self.dims, name).expect("known tensor");
            let (shape, finite) = match t {
                TensorRef::Dense(m) => (m.shape(), m.is_finite()),
                TensorRef::Vector(v) => ((v.len(), 1), v.iter().all(|x| x.is_finite())),
                TensorRef::Sparse(s) => ((s.rows(), s.cols()), s.is_finite()),
            };
            if shape != expected {
                return Err(Error::Tensor {
                    name: name.into(),
                    reason: format!("shape {}x{}, expected {}x{}", shape.0, shape.1, expected.0, expected.1),
                });
            }
            if !finite {
                return Err(Error::Tensor { name: name.into(), reason: "contains NaN or infinite values".into() });
            }
        }
        Ok(())
    }

    /// All-zero weights of the given size.
    pub fn zeros(dims: ModelDims) -> Result<Self> {
        dims.validate()?;
        let d = dims;
        let empty_sparse = || {
            BlockSparse::from_parts(d.n_a, d.n_a, vec![Vec::new(); d.n_a / BLOCK_ROWS], Vec::new())
                .expect("valid empty layout")
        };
        Ok(Self {
            dims,
            conv1: Matrix::zeros(d.frame_hidden, CONV_TAPS * d.feature_dim),
            conv1_bias: vec![0.0; d.frame_hidden],
            conv2: Matrix::zeros(d.frame_hidden, CONV_TAPS * d.frame_hidden),
            conv2_bias: vec![0.0; d.frame_hidden],
            fc1: Matrix::zeros(d.cond_dim, d.frame_hidden),
            fc1_bias: vec![0.0; d.cond_dim],
            fc2: Matrix::zeros(d.cond_dim, d.cond_dim),
            fc2_bias: vec![0.0; d.cond_dim],
            cond_a: Matrix::zeros(3 * d.n_a, d.cond_dim),
            cond_a_bias: vec![0.0; 3 * d.n_a],
            cond_b: Matrix::zeros(3 * d.n_b, d.cond_dim),
            cond_b_bias: vec![0.0; 3 * d.n_b],
            embed_sig: Matrix::zeros(d.q, d.embed_dim),
            embed_exc: Matrix::zeros(d.q, d.embed_dim),
            gru_a_input: Matrix::zeros(3 * d.n_a, 3 * d.embed_dim),
            gru_a_rec: GruARecurrent { w_u: empty_sparse(), w_r: empty_sparse(), w_h: empty_sparse() },
            gru_a_rec_bias: vec![0.0; 3 * d.n_a],
            gru_b_input: Matrix::zeros(3 * d.n_b, d.n_a),
            gru_b_rec: Matrix::zeros(3 * d.n_b, d.n_b),
            gru_b_rec_bias: vec![0.0; 3 * d.n_b],
            dual_w1: Matrix::zeros(d.q, d.n_b),
            dual_w2: Matrix::zeros(d.q, d.n_b),
            dual_b1: vec![0.0; d.q],
            dual_b2: vec![0.0; d.q],
            dual_a1: vec![0.0; d.q],
            dual_a2: vec![0.0; d.q],
        })
    }

    /// Stored sample-rate network weights: GRU_A recurrent non-zeros, the
    /// GRU_B input and recurrent matrices, and the two dual_fc matrices.
    pub fn count_weights_actual(&self) -> usize {
        self.gru_a_rec.gates().iter().map(|s| s.nonzero_weights()).sum::<usize>()
            + self.gru_b_input.data().len()
            + self.gru_b_rec.data().len()
            + self.dual_w1.data().len()
            + self.dual_w2.data().len()
    }
}
