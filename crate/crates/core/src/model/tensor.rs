//! Dense and 16×1 block-sparse `f32` matrices.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidDims(format!("matrix data has {} values, expected {rows}x{cols}", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f32) {
        self.data[r * self.cols + c] = v;
    }

    /// `out += W x`
    pub fn matvec_add(&self, x: &[f32], out: &mut [f32]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols.max(1))) {
            *o += row.iter().zip(x).map(|(w, v)| w * v).sum::<f32>();
        }
    }

    /// `W x + b`
    pub fn affine(&self, x: &[f32], bias: &[f32]) -> Vec<f32> {
        let mut out = bias.to_vec();
        self.matvec_add(x, &mut out);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Rows per sparse block; blocks are one column wide.
pub const BLOCK_ROWS: usize = 16;

/// Matrix stored as 16×1 non-zero blocks, grouped by block row.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSparse {
    rows: usize,
    cols: usize,
    /// Offsets into `block_cols` per block row, `rows / 16 + 1` entries.
    row_ptr: Vec<usize>,
    block_cols: Vec<u32>,
    /// 16 values per block, top to bottom.
    values: Vec<f32>,
}

impl BlockSparse {
    /// Builds from per-block-row column lists and block values.
    pub fn from_parts(rows: usize, cols: usize, block_rows: Vec<Vec<u32>>, values: Vec<f32>) -> Result<Self> {
        if rows % BLOCK_ROWS != 0 {
            return Err(Error::InvalidDims(format!("sparse rows {rows} not a multiple of {BLOCK_ROWS}")));
        }
        if block_rows.len() != rows / BLOCK_ROWS {
            return Err(Error::InvalidDims(format!("{} block rows for {rows} rows", block_rows.len())));
        }
        let mut row_ptr = vec![0];
        let mut block_cols = Vec::new();
        for list in &block_rows {
            if list.windows(2).any(|w| w[0] >= w[1]) || list.iter().any(|&c| c as usize >= cols) {
                return Err(Error::InvalidDims("sparse column indices must be increasing and in range".into()));
            }
            block_cols.extend_from_slice(list);
            row_ptr.push(block_cols.len());
        }
        if values.len() != block_cols.len() * BLOCK_ROWS {
            return Err(Error::InvalidDims(format!(
                "{} sparse values for {} blocks",
                values.len(),
                block_cols.len()
            )));
        }
        Ok(Self { rows, cols, row_ptr, block_cols, values })
    }

    /// Keeps every block that has a non-zero entry.
    pub fn from_dense(m: &Matrix) -> Result<Self> {
        let mut lists = Vec::new();
        let mut values = Vec::new();
        if m.rows % BLOCK_ROWS != 0 {
            return Err(Error::InvalidDims(format!("sparse rows {} not a multiple of {BLOCK_ROWS}", m.rows)));
        }
        for br in 0..m.rows / BLOCK_ROWS {
            let mut list = Vec::new();
            for c in 0..m.cols {
                let block: Vec<f32> = (0..BLOCK_ROWS).map(|k| m.get(br * BLOCK_ROWS + k, c)).collect();
                if block.iter().any(|&v| v != 0.0) {
                    list.push(c as u32);
                    values.extend(block);
                }
            }
            lists.push(list);
        }
        Self::from_parts(m.rows, m.cols, lists, values)
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for br in 0..self.block_row_count() {
            for (b, &c) in self.block_row(br).iter().enumerate() {
                let blk = self.block_values(self.row_ptr[br] + b);
                for (k, &v) in blk.iter().enumerate() {
                    m.set(br * BLOCK_ROWS + k, c as usize, v);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn block_row_count(&self) -> usize {
        self.rows / BLOCK_ROWS
    }

    /// Column indices of the blocks in block row `br`.
    pub fn block_row(&self, br: usize) -> &[u32] {
        &self.block_cols[self.row_ptr[br]..self.row_ptr[br + 1]]
    }

    fn block_values(&self, block: usize) -> &[f32] {
        &self.values[block * BLOCK_ROWS..(block + 1) * BLOCK_ROWS]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn block_count(&self) -> usize {
        self.block_cols.len()
    }

    pub fn total_blocks(&self) -> usize {
        self.block_row_count() * self.cols
    }

    /// Fraction of blocks stored.
    pub fn density(&self) -> f64 {
        self.block_count() as f64 / self.total_blocks().max(1) as f64
    }

    pub fn nonzero_weights(&self) -> usize {
        self.values.len()
    }

    /// `out += W x`
    pub fn matvec_add(&self, x: &[f32], out: &mut [f32]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for br in 0..self.block_row_count() {
            let acc: &mut [f32; BLOCK_ROWS] =
                (&mut out[br * BLOCK_ROWS..(br + 1) * BLOCK_ROWS]).try_into().unwrap();
            let (start, end) = (self.row_ptr[br], self.row_ptr[br + 1]);
            for (&c, blk) in self.block_cols[start..end].iter().zip(self.values[start * BLOCK_ROWS..end * BLOCK_ROWS].chunks_exact(BLOCK_ROWS)) {
                let xv = x[c as usize];
                for (a, &w) in acc.iter_mut().zip(blk) {
                    *a += w * xv;
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
