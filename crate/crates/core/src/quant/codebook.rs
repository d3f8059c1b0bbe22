//! Codebook tables and their file format.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! "LPCQ"  u32 version  u64 seed  u32 table_count
//! per table: u32 name_len, name (utf-8), u32 rows, u32 cols, rows*cols f32 (row-major)
//! ```

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::NB_BANDS;

pub const MAGIC: [u8; 4] = *b"LPCQ";
pub const VERSION: u32 = 1;
pub const VQ_STAGES: usize = 3;
pub const VQ_SIZE: usize = 1024;
pub const VQ_DIM: usize = NB_BANDS - 1;
pub const DELTA_AVG_SIZE: usize = 2048;
pub const DELTA_SINGLE_SIZE: usize = 1024;

const STAGE_NAMES: [&str; VQ_STAGES] = ["vq_stage1", "vq_stage2", "vq_stage3"];
const DELTA_AVG_NAME: &str = "delta_avg";
const DELTA_SINGLE_NAME: &str = "delta_single";

/// A table of `rows` codewords of dimension `cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Codebook {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidDims(format!(
                "codebook data has {} values, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDims("ragged codebook rows".into()));
        }
        Self::new(rows.len(), cols, rows.iter().flatten().map(|&v| v as f32).collect())
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn dim(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    fn gaussian(rows: usize, cols: usize, scale: impl Fn(usize) -> f64, rng: &mut ChaCha8Rng) -> Self {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let data = (0..rows * cols)
            .map(|i| (normal.sample(rng) * scale(i % cols)) as f32)
            .collect();
        Self { rows, cols, data }
    }
}

/// All tables used by the feature quantizers.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebooks {
    pub stages: [Codebook; VQ_STAGES],
    pub delta_avg: Codebook,
    pub delta_single: Codebook,
    /// Seed recorded by the generator or trainer.
    pub seed: u64,
}

impl Codebooks {
    pub fn validate(&self) -> Result<()> {
        let expect = |name: &str, cb: &Codebook, rows: usize, cols: usize| -> Result<()> {
            if cb.rows != rows || cb.cols != cols {
                return Err(Error::Tensor {
                    name: name.into(),
                    reason: format!("shape {}x{}, expected {rows}x{cols}", cb.rows, cb.cols),
                });
            }
            if let Some(i) = cb.data.iter().position(|v| !v.is_finite()) {
                return Err(Error::Tensor { name: name.into(), reason: format!("non-finite value at {i}") });
            }
            Ok(())
        };
        for (name, cb) in STAGE_NAMES.iter().zip(&self.stages) {
            expect(name, cb, VQ_SIZE, VQ_DIM)?;
        }
        expect(DELTA_AVG_NAME, &self.delta_avg, DELTA_AVG_SIZE, NB_BANDS)?;
        expect(DELTA_SINGLE_NAME, &self.delta_single, DELTA_SINGLE_SIZE, NB_BANDS)
    }

    /// Deterministic Gaussian codebooks with shrinking per-stage and
    /// per-coefficient scales. Useful as a stand-in when no trained tables
    /// are available; real deployments should train them.
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profile = |d: usize| 1.0 / (1.0 + 0.3 * d as f64);
        let stage_scale = [1.6, 0.5, 0.16];
        let stages = std::array::from_fn(|s| {
            Codebook::gaussian(VQ_SIZE, VQ_DIM, |d| stage_scale[s] * profile(d), &mut rng)
        });
        let mut delta_avg = Codebook::gaussian(DELTA_AVG_SIZE, NB_BANDS, |d| 0.6 * profile(d), &mut rng);
        delta_avg.data[..NB_BANDS].iter_mut().for_each(|v| *v = 0.0);
        let mut delta_single = Codebook::gaussian(DELTA_SINGLE_SIZE, NB_BANDS, |d| 0.9 * profile(d), &mut rng);
        delta_single.data[..NB_BANDS].iter_mut().for_each(|v| *v = 0.0);
        Self { stages, delta_avg, delta_single, seed }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        self.validate()?;
        let mut buf = Vec::new();
        buf.extend_from_slice(&MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&5u32.to_le_bytes());
        let tables = STAGE_NAMES
            .iter()
            .zip(&self.stages)
            .map(|(n, c)| (*n, c))
            .chain([(DELTA_AVG_NAME, &self.delta_avg), (DELTA_SINGLE_NAME, &self.delta_single)]);
        for (name, cb) in tables {
            buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
            buf.extend_from_slice(name.as_bytes());
            buf.extend_from_slice(&(cb.rows as u32).to_le_bytes());
            buf.extend_from_slice(&(cb.cols as u32).to_le_bytes());
            for v in &cb.data {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(Error::BadMagic { expected: MAGIC, found: magic });
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::VersionMismatch { what: "codebook", expected: VERSION, found: version });
        }
        let mut seed = [0u8; 8];
        r.read_exact(&mut seed)?;
        let seed = u64::from_le_bytes(seed);
        let count = read_u32(&mut r)?;
        let mut tables: Vec<(String, Codebook)> = Vec::new();
        for i in 0..count {
            let read_table = |r: &mut R| -> std::io::Result<(String, Codebook)> {
                let len = read_u32(r)? as usize;
                if len > 256 {
                    return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "table name too long"));
                }
                let mut name = vec![0u8; len];
                r.read_exact(&mut name)?;
                let name = String::from_utf8_lossy(&name).into_owned();
                let rows = read_u32(r)? as usize;
                let cols = read_u32(r)? as usize;
                if rows.saturating_mul(cols) > 1 << 24 {
                    return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "table too large"));
                }
                let mut raw = vec![0u8; rows * cols * 4];
                r.read_exact(&mut raw)?;
                let data = raw.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
                Ok((name, Codebook { rows, cols, data }))
            };
            let table = read_table(&mut r).map_err(|_| Error::MissingTensor(format!("codebook table #{i}")))?;
            tables.push(table);
        }
        let mut take = |name: &str| -> Result<Codebook> {
            let pos = tables
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| Error::MissingTensor(name.to_string()))?;
            Ok(tables.swap_remove(pos).1)
        };
        let stages = [take(STAGE_NAMES[0])?, take(STAGE_NAMES[1])?, take(STAGE_NAMES[2])?];
        let cbs = Self { stages, delta_avg: take(DELTA_AVG_NAME)?, delta_single: take(DELTA_SINGLE_NAME)?, seed };
        cbs.validate()?;
        Ok(cbs)
    }

    pub fn load<P: AsRef<std::path::Path>>(path: P) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn save<P: AsRef<std::path::Path>>(&self, path: P) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
