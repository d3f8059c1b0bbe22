//! Per-frame codec features and the feature dump format.
//!
//! A feature file is a flat stream of frames, each 20 little-endian `f32`
//! values: 18 cepstral coefficients, the pitch period in samples, and the
//! pitch correlation. There is no header.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::NB_BANDS;

pub const FEATURE_VALUES: usize = NB_BANDS + 2;
pub const FEATURE_FRAME_BYTES: usize = FEATURE_VALUES * 4;

/// One 10 ms frame of features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureFrame {
    pub cepstrum: [f64; NB_BANDS],
    /// Pitch period in samples.
    pub period: f64,
    /// Pitch correlation in `[0, 1]`.
    pub correlation: f64,
}

impl Default for FeatureFrame {
    fn default() -> Self {
        Self { cepstrum: [0.0; NB_BANDS], period: 128.0, correlation: 0.0 }
    }
}

impl FeatureFrame {
    pub fn to_values(&self) -> [f32; FEATURE_VALUES] {
        let mut v = [0.0f32; FEATURE_VALUES];
        for (o, c) in v.iter_mut().zip(self.cepstrum.iter()) {
            *o = *c as f32;
        }
        v[NB_BANDS] = self.period as f32;
        v[NB_BANDS + 1] = self.correlation as f32;
        v
    }

    pub fn from_values(v: &[f32; FEATURE_VALUES]) -> Self {
        Self {
            cepstrum: std::array::from_fn(|i| v[i] as f64),
            period: v[NB_BANDS] as f64,
            correlation: v[NB_BANDS + 1] as f64,
        }
    }
}

pub fn write_features<W: Write>(mut w: W, frames: &[FeatureFrame]) -> Result<()> {
    let mut buf = Vec::with_capacity(frames.len() * FEATURE_FRAME_BYTES);
    for f in frames {
        for v in f.to_values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_features<R: Read>(mut r: R) -> Result<Vec<FeatureFrame>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse_features(&bytes)
}

pub fn parse_features(bytes: &[u8]) -> Result<Vec<FeatureFrame>> {
    if bytes.len() % FEATURE_FRAME_BYTES != 0 {
        return Err(Error::TruncatedFeatures {
            len: bytes.len(),
            frame_bytes: FEATURE_FRAME_BYTES,
            offset: bytes.len() - bytes.len() % FEATURE_FRAME_BYTES,
        });
    }
    Ok(bytes
        .chunks_exact(FEATURE_FRAME_BYTES)
        .map(|chunk| {
            let v: [f32; FEATURE_VALUES] =
                std::array::from_fn(|i| f32::from_le_bytes(chunk[4 * i..4 * i + 4].try_into().unwrap()));
            FeatureFrame::from_values(&v)
        })
        .collect())
}
