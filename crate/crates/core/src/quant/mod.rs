//! Quantization of packet parameters.
//!
//! Per packet `k` holding cepstra `c[4k]..c[4k+3]`:
//!
//! * `c[4k+3]` (the anchor): C0 on a 7-bit uniform scalar quantizer, the
//!   remaining 17 coefficients on a 3-stage, 10-bit-per-stage VQ;
//! * `c[4k+1]`: predicted from the decoded anchors `c[4k-1]` and `c[4k+3]`,
//!   residual on a sign codebook (13 bits including the predictor choice);
//! * `c[4k]`, `c[4k+2]`: predicted from decoded neighbours only (3 bits);
//! * pitch: 6-bit log period, 3-bit modulation, 2-bit correlation.

pub mod codebook;
pub mod delta;
pub mod interp;
pub mod packet;
pub mod scalar;
pub mod vq;

pub use codebook::{Codebook, Codebooks};
pub use packet::{decode_packet_features, encode_packet_features, EncodedPacket};

use crate::error::{Error, Result};

/// Cepstral predictor for `c[4k+1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predictor {
    /// Mean of the previous and current anchors.
    Average,
    /// Previous packet's anchor.
    Previous,
    /// Current packet's anchor.
    Next,
}

/// The 13-bit cepstrum delta code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeltaCode {
    pub predictor: Predictor,
    pub negative: bool,
    /// Codeword index: 11 bits for [`Predictor::Average`], 10 otherwise.
    pub index: u16,
}

impl DeltaCode {
    pub fn max_index(predictor: Predictor) -> u16 {
        match predictor {
            Predictor::Average => 2047,
            Predictor::Previous | Predictor::Next => 1023,
        }
    }
}

/// Every coded symbol of one packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PacketIndices {
    pub pitch: u8,
    pub modulation: u8,
    pub correlation: u8,
    pub c0: u8,
    pub vq: [u16; 3],
    pub delta: DeltaCode,
    pub interp: u8,
}

impl Default for PacketIndices {
    fn default() -> Self {
        Self {
            pitch: 0,
            modulation: 0,
            correlation: 0,
            c0: 0,
            vq: [0; 3],
            delta: DeltaCode { predictor: Predictor::Average, negative: false, index: 0 },
            interp: 0,
        }
    }
}

fn check(field: &'static str, value: u32, max: u32) -> Result<()> {
    if value > max {
        Err(Error::FieldRange { field, value, max })
    } else {
        Ok(())
    }
}

impl PacketIndices {
    pub fn validate(&self) -> Result<()> {
        check("pitch", self.pitch as u32, 63)?;
        check("modulation", self.modulation as u32, 7)?;
        check("correlation", self.correlation as u32, 3)?;
        check("c0", self.c0 as u32, 127)?;
        for v in self.vq {
            check("vq", v as u32, 1023)?;
        }
        check("delta index", self.delta.index as u32, DeltaCode::max_index(self.delta.predictor) as u32)?;
        check("interp", self.interp as u32, 7)
    }
}
