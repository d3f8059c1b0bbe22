//! Weight file reader and writer.
//!
//! Layout, integers little-endian u32, values little-endian f32:
//!
//! ```text
//! "LPCW" version
//! n_a n_b q embed_dim feature_dim frame_hidden cond_dim
//! tensor_count
//! per tensor:
//!   name_len name kind(u8: 0 dense, 1 block-sparse) rows cols
//!   dense:  rows*cols values, row-major (vectors have cols = 1)
//!   sparse: per block row of 16 rows: block_count, column indices;
//!           then 16 values per block in the same order
//! crc32 of all preceding bytes
//! ```

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::tensor::{BlockSparse, Matrix, BLOCK_ROWS};
use crate::model::{GruARecurrent, ModelDims, ModelWeights, TensorRef, TENSOR_NAMES};

pub const MAGIC: [u8; 4] = *b"LPCW";
pub const VERSION: u32 = 1;

const KIND_DENSE: u8 = 0;
const KIND_SPARSE: u8 = 1;

fn put_u32(buf: &mut Vec<u8>, v: usize) {
    buf.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f32s(buf: &mut Vec<u8>, v: &[f32]) {
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
}

pub fn to_bytes(w: &ModelWeights) -> Result<Vec<u8>> {
    w.validate()?;
    let mut buf = Vec::new();
    buf.extend_from_slice(&MAGIC);
    put_u32(&mut buf, VERSION as usize);
    let d = &w.dims;
    for v in [d.n_a, d.n_b, d.q, d.embed_dim, d.feature_dim, d.frame_hidden, d.cond_dim] {
        put_u32(&mut buf, v);
    }
    let tensors = w.tensors();
    put_u32(&mut buf, tensors.len());
    for (name, t) in tensors {
        put_u32(&mut buf, name.len());
        buf.extend_from_slice(name.as_bytes());
        match t {
            TensorRef::Dense(m) => {
                buf.push(KIND_DENSE);
                put_u32(&mut buf, m.rows());
                put_u32(&mut buf, m.cols());
                put_f32s(&mut buf, m.data());
            }
            TensorRef::Vector(v) => {
                buf.push(KIND_DENSE);
                put_u32(&mut buf, v.len());
                put_u32(&mut buf, 1);
                put_f32s(&mut buf, v);
            }
            TensorRef::Sparse(s) => {
                buf.push(KIND_SPARSE);
                put_u32(&mut buf, s.rows());
                put_u32(&mut buf, s.cols());
                for br in 0..s.block_row_count() {
                    let cols = s.block_row(br);
                    put_u32(&mut buf, cols.len());
                    for &c in cols {
                        put_u32(&mut buf, c as usize);
                    }
                }
                put_f32s(&mut buf, s.values());
            }
        }
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    Ok(buf)
}

pub fn save_model<P: AsRef<Path>>(w: &ModelWeights, path: P) -> Result<()> {
    let bytes = to_bytes(w)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn load_model<P: AsRef<Path>>(path: P) -> Result<ModelWeights> {
    from_bytes(&std::fs::read(path)?)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u32(&mut self) -> Option<usize> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }

    fn f32s(&mut self, n: usize) -> Option<Vec<f32>> {
        let raw = self.take(n.checked_mul(4)?)?;
        Some(raw.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect())
    }
}

enum Raw {
    Dense(Matrix),
    Sparse(BlockSparse),
}

fn read_tensor(c: &mut Cursor, dims: &ModelDims) -> Option<std::result::Result<(String, Raw), Error>> {
    let len = c.u32()?;
    if len > 256 {
        return Some(Err(Error::Tensor { name: "?".into(), reason: format!("name length {len}") }));
    }
    let name = String::from_utf8_lossy(c.take(len)?).into_owned();
    let kind = c.u8()?;
    let rows = c.u32()?;
    let cols = c.u32()?;
    let bad = |reason: String| Some(Err(Error::Tensor { name: name.clone(), reason }));
    match ModelWeights::expected_shape(dims, &name) {
        Some(shape) if shape != (rows, cols) => {
            return bad(format!("shape {rows}x{cols}, expected {}x{}", shape.0, shape.1))
        }
        None => return bad("unknown tensor".into()),
        _ => {}
    }
    match kind {
        KIND_DENSE => {
            let data = c.f32s(rows * cols)?;
            Some(Ok((name, Raw::Dense(Matrix::new(rows, cols, data).unwrap()))))
        }
        KIND_SPARSE => {
            if rows % BLOCK_ROWS != 0 {
                return bad(format!("{rows} rows not a multiple of {BLOCK_ROWS}"));
            }
            let mut lists = Vec::new();
            let mut blocks = 0;
            for _ in 0..rows / BLOCK_ROWS {
                let n = c.u32()?;
                if n > cols {
                    return bad(format!("{n} blocks in a row of {cols} columns"));
                }
                let list: Option<Vec<u32>> = (0..n).map(|_| c.u32().map(|v| v as u32)).collect();
                blocks += n;
                lists.push(list?);
            }
            let values = c.f32s(blocks * BLOCK_ROWS)?;
            Some(match BlockSparse::from_parts(rows, cols, lists, values) {
                Ok(s) => Ok((name, Raw::Sparse(s))),
                Err(e) => Err(Error::Tensor { name, reason: e.to_string() }),
            })
        }
        k => bad(format!("unknown tensor kind {k}")),
    }
}

/// Parses and validates a weight file image.
pub fn from_bytes(bytes: &[u8]) -> Result<ModelWeights> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic: [u8; 4] = match c.take(4) {
        Some(m) => m.try_into().unwrap(),
        None => return Err(Error::MissingTensor("header".into())),
    };
    if magic != MAGIC {
        return Err(Error::BadMagic { expected: MAGIC, found: magic });
    }
    let header: Option<Vec<usize>> = (0..9).map(|_| c.u32()).collect();
    let Some(header) = header else { return Err(Error::MissingTensor("header".into())) };
    if header[0] != VERSION as usize {
        return Err(Error::VersionMismatch { what: "model", expected: VERSION, found: header[0] as u32 });
    }
    let dims = ModelDims {
        n_a: header[1],
        n_b: header[2],
        q: header[3],
        embed_dim: header[4],
        feature_dim: header[5],
        frame_hidden: header[6],
        cond_dim: header[7],
    };
    dims.validate()?;
    let count = header[8];
    let mut found: HashMap<String, Raw> = HashMap::new();
    for _ in 0..count {
        match read_tensor(&mut c, &dims) {
            Some(Ok((name, raw))) => {
                found.insert(name, raw);
            }
            Some(Err(e)) => return Err(e),
            None => break,
        }
    }
    if let Some(missing) = TENSOR_NAMES.iter().find(|n| !found.contains_key(**n)) {
        return Err(Error::MissingTensor(missing.to_string()));
    }
    let body_end = c.pos;
    let stored = match c.u32() {
        Some(v) => v as u32,
        None => return Err(Error::MissingTensor("checksum".into())),
    };
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut dense = |name: &str| -> Result<Matrix> {
        match found.remove(name) {
            Some(Raw::Dense(m)) => Ok(m),
            _ => Err(Error::Tensor { name: name.into(), reason: "expected a dense tensor".into() }),
        }
    };
    let mut w = ModelWeights::zeros(dims)?;
    w.conv1 = dense("conv1")?;
    w.conv1_bias = dense("conv1_bias")?.data().to_vec();
    w.conv2 = dense("conv2")?;
    w.conv2_bias = dense("conv2_bias")?.data().to_vec();
    w.fc1 = dense("fc1")?;
    w.fc1_bias = dense("fc1_bias")?.data().to_vec();
    w.fc2 = dense("fc2")?;
    w.fc2_bias = dense("fc2_bias")?.data().to_vec();
    w.cond_a = dense("cond_to_gru_a")?;
    w.cond_a_bias = dense("cond_to_gru_a_bias")?.data().to_vec();
    w.cond_b = dense("cond_to_gru_b")?;
    w.cond_b_bias = dense("cond_to_gru_b_bias")?.data().to_vec();
    w.embed_sig = dense("embed_sig")?;
    w.embed_exc = dense("embed_exc")?;
    w.gru_a_input = dense("gru_a_input")?;
    w.gru_a_rec_bias = dense("gru_a_rec_bias")?.data().to_vec();
    w.gru_b_input = dense("gru_b_input")?;
    w.gru_b_rec = dense("gru_b_recurrent")?;
    w.gru_b_rec_bias = dense("gru_b_rec_bias")?.data().to_vec();
    w.dual_w1 = dense("dual_fc_w1")?;
    w.dual_w2 = dense("dual_fc_w2")?;
    w.dual_b1 = dense("dual_fc_b1")?.data().to_vec();
    w.dual_b2 = dense("dual_fc_b2")?.data().to_vec();
    w.dual_a1 = dense("dual_fc_a1")?.data().to_vec();
    w.dual_a2 = dense("dual_fc_a2")?.data().to_vec();
    let mut sparse = |name: &str| -> Result<BlockSparse> {
        match found.remove(name) {
            Some(Raw::Sparse(s)) => Ok(s),
            Some(Raw::Dense(m)) => {
                BlockSparse::from_dense(&m).map_err(|e| Error::Tensor { name: name.into(), reason: e.to_string() })
            }
            None => Err(Error::MissingTensor(name.into())),
        }
    };
    w.gru_a_rec = GruARecurrent { w_u: sparse("gru_a_wu")?, w_r: sparse("gru_a_wr")?, w_h: sparse("gru_a_wh")? };
    w.validate()?;
    Ok(w)
}
