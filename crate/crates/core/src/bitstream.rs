//! 64-bit packet layout.
//!
//! Fields are packed MSB first into a big-endian 64-bit word:
//!
//! | field        | bits |
//! |--------------|------|
//! | pitch        | 6    |
//! | modulation   | 3    |
//! | correlation  | 2    |
//! | C0           | 7    |
//! | VQ stage 1-3 | 3×10 |
//! | delta        | 13   |
//! | interp       | 3    |
//!
//! The 13 delta bits are `0 s iiiiiiiiiii` for the average predictor and
//! `1 w s iiiiiiiiii` otherwise, where `w` is 0 for the previous anchor and
//! 1 for the current one and `s` is 1 for a negated codeword.
//!
//! A bitstream file is a bare concatenation of packets.

use crate::error::{Error, Result};
use crate::quant::{DeltaCode, PacketIndices, Predictor};

pub const PACKET_BITS: u32 = 64;
pub const PACKET_BYTES: usize = 8;
/// `(name, width)` in packing order.
pub const FIELDS: [(&str, u32); 9] = [
    ("pitch", 6),
    ("modulation", 3),
    ("correlation", 2),
    ("c0", 7),
    ("vq1", 10),
    ("vq2", 10),
    ("vq3", 10),
    ("delta", 13),
    ("interp", 3),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Packet(pub [u8; PACKET_BYTES]);

impl Packet {
    pub fn bytes(&self) -> &[u8; PACKET_BYTES] {
        &self.0
    }
}

fn delta_bits(d: DeltaCode) -> u64 {
    let s = d.negative as u64;
    match d.predictor {
        Predictor::Average => (s << 11) | d.index as u64,
        Predictor::Previous => (1 << 12) | (s << 10) | d.index as u64,
        Predictor::Next => (1 << 12) | (1 << 11) | (s << 10) | d.index as u64,
    }
}

fn delta_from_bits(b: u64) -> DeltaCode {
    if b >> 12 & 1 == 0 {
        DeltaCode { predictor: Predictor::Average, negative: b >> 11 & 1 == 1, index: (b & 0x7ff) as u16 }
    } else {
        let predictor = if b >> 11 & 1 == 0 { Predictor::Previous } else { Predictor::Next };
        DeltaCode { predictor, negative: b >> 10 & 1 == 1, index: (b & 0x3ff) as u16 }
    }
}

pub fn pack(ix: &PacketIndices) -> Result<Packet> {
    ix.validate()?;
    let values = [
        ix.pitch as u64,
        ix.modulation as u64,
        ix.correlation as u64,
        ix.c0 as u64,
        ix.vq[0] as u64,
        ix.vq[1] as u64,
        ix.vq[2] as u64,
        delta_bits(ix.delta),
        ix.interp as u64,
    ];
    let mut word = 0u64;
    for ((_, width), v) in FIELDS.iter().zip(values) {
        word = (word << width) | v;
    }
    Ok(Packet(word.to_be_bytes()))
}

/// Total: every bit pattern is a valid packet.
pub fn unpack(p: &Packet) -> PacketIndices {
    let word = u64::from_be_bytes(p.0);
    let mut shift = PACKET_BITS;
    let mut v = [0u64; 9];
    for (out, (_, width)) in v.iter_mut().zip(FIELDS) {
        shift -= width;
        *out = (word >> shift) & ((1 << width) - 1);
    }
    PacketIndices {
        pitch: v[0] as u8,
        modulation: v[1] as u8,
        correlation: v[2] as u8,
        c0: v[3] as u8,
        vq: [v[4] as u16, v[5] as u16, v[6] as u16],
        delta: delta_from_bits(v[7]),
        interp: v[8] as u8,
    }
}

/// Splits a bitstream file into packets.
pub fn parse_stream(bytes: &[u8]) -> Result<Vec<Packet>> {
    if bytes.len() % PACKET_BYTES != 0 {
        return Err(Error::TruncatedBitstream {
            len: bytes.len(),
            offset: bytes.len() - bytes.len() % PACKET_BYTES,
        });
    }
    Ok(bytes.chunks_exact(PACKET_BYTES).map(|c| Packet(c.try_into().unwrap())).collect())
}

pub fn write_stream(packets: &[Packet]) -> Vec<u8> {
    packets.iter().flat_map(|p| p.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_sum_to_64() {
        assert_eq!(FIELDS.iter().map(|f| f.1).sum::<u32>(), PACKET_BITS);
    }

    #[test]
    fn zero_packet() {
        assert_eq!(pack(&PacketIndices::default()).unwrap().0, [0; 8]);
        assert_eq!(unpack(&Packet([0; 8])), PacketIndices::default());
    }

    #[test]
    fn all_ones_is_max_indices() {
        let ix = unpack(&Packet([0xff; 8]));
        assert_eq!(ix.pitch, 63);
        assert_eq!(ix.delta, DeltaCode { predictor: Predictor::Next, negative: true, index: 1023 });
        assert_eq!(pack(&ix).unwrap().0, [0xff; 8]);
    }

    #[test]
    fn out_of_range_rejected() {
        let ix = PacketIndices { c0: 128, ..Default::default() };
        assert!(matches!(pack(&ix), Err(Error::FieldRange { field: "c0", .. })));
        let mut ix = PacketIndices::default();
        ix.delta = DeltaCode { predictor: Predictor::Previous, negative: false, index: 1024 };
        assert!(pack(&ix).is_err());
    }

    #[test]
    fn truncated_stream_names_offset() {
        let err = parse_stream(&[0u8; 20]).unwrap_err();
        assert!(err.to_string().contains("offset 16"), "{err}");
    }
}
