//! Precomputed GRU_A input contributions: for each input stream and μ-law
//! code, the product of the input matrix with that code's embedding.

use crate::error::{Error, Result};
use crate::model::tensor::Matrix;

/// GRU_A input streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Input {
    /// Previous output sample `s[t-1]`.
    Signal = 0,
    /// Current prediction `p[t]`.
    Prediction = 1,
    /// Previous excitation `e[t-1]`.
    Excitation = 2,
}

impl Input {
    pub const ALL: [Input; 3] = [Input::Signal, Input::Prediction, Input::Excitation];
}

/// Gates in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Update = 0,
    Reset = 1,
    Candidate = 2,
}

impl Gate {
    pub const ALL: [Gate; 3] = [Gate::Update, Gate::Reset, Gate::Candidate];
}

#[derive(Debug, Clone, PartialEq)]
pub struct LookupTables {
    n_a: usize,
    /// Per input: `q` rows of `3·n_a` values (u, r, h).
    tables: [Vec<f32>; 3],
}

impl LookupTables {
    pub fn n_a(&self) -> usize {
        self.n_a
    }

    /// All three gate contributions of `code` on `input`.
    #[inline]
    pub fn row(&self, input: Input, code: usize) -> &[f32] {
        let w = 3 * self.n_a;
        &self.tables[input as usize][code * w..(code + 1) * w]
    }

    #[inline]
    pub fn gate(&self, input: Input, gate: Gate, code: usize) -> &[f32] {
        let off = gate as usize * self.n_a;
        &self.row(input, code)[off..off + self.n_a]
    }
}

/// Builds the tables with `f64` accumulation. `input_matrix` is
/// `3·n_a × 3·embed_dim` with columns for the s, p and e streams; s and p
/// share `embed_sig`, e uses `embed_exc`.
pub fn build_lookup_tables(embed_sig: &Matrix, embed_exc: &Matrix, input_matrix: &Matrix) -> Result<LookupTables> {
    let e = embed_sig.cols();
    if embed_exc.shape() != embed_sig.shape() || input_matrix.cols() != 3 * e || input_matrix.rows() % 3 != 0 {
        return Err(Error::InvalidDims(format!(
            "embeddings {:?}/{:?} incompatible with input matrix {:?}",
            embed_sig.shape(),
            embed_exc.shape(),
            input_matrix.shape()
        )));
    }
    let rows = input_matrix.rows();
    let tables = Input::ALL.map(|input| {
        let emb = if input == Input::Excitation { embed_exc } else { embed_sig };
        let off = input as usize * e;
        let mut table = Vec::with_capacity(emb.rows() * rows);
        for code in 0..emb.rows() {
            let x = emb.row(code);
            for r in 0..rows {
                let w = &input_matrix.row(r)[off..off + e];
                let acc: f64 = w.iter().zip(x).map(|(&a, &b)| a as f64 * b as f64).sum();
                table.push(acc as f32);
            }
        }
        table
    });
    Ok(LookupTables { n_a: rows / 3, tables })
}
