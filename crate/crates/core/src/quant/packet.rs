//! Whole-packet feature quantization.

use crate::error::Result;
use crate::features::FeatureFrame;
use crate::pitch::{modulation_semitones, PitchSummary, SUBFRAMES};
use crate::quant::codebook::Codebooks;
use crate::quant::delta::{decode_delta, encode_delta, Cepstrum};
use crate::quant::interp::{decode_interpolation, encode_interpolation};
use crate::quant::scalar::*;
use crate::quant::vq::{msvq_decode, msvq_search};
use crate::quant::PacketIndices;
use crate::{FRAMES_PER_PACKET, NB_BANDS};

/// Sub-frame position of each frame's midpoint.
pub const FRAME_POSITIONS: [f64; FRAMES_PER_PACKET] = [0.5, 2.5, 4.5, 6.5];

/// Indices plus the decoder-side reconstruction the encoder derived them
/// from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodedPacket {
    pub indices: PacketIndices,
    pub frames: [FeatureFrame; FRAMES_PER_PACKET],
}

impl EncodedPacket {
    /// Decoded `c[4k+3]`, the next packet's previous anchor.
    pub fn anchor(&self) -> Cepstrum {
        self.frames[FRAMES_PER_PACKET - 1].cepstrum
    }
}

/// Per-frame periods from the packet's average period and modulation: a
/// line in log-period centred on the packet middle.
pub fn frame_periods(avg_period: f64, modulation: f64) -> [f64; FRAMES_PER_PACKET] {
    let centre = (SUBFRAMES - 1) as f64 / 2.0;
    FRAME_POSITIONS
        .map(|x| avg_period * 2f64.powf(modulation / 12.0 * (x - centre) / (SUBFRAMES - 1) as f64))
}

/// Pitch summary recovered from four frames (inverse of [`frame_periods`]).
pub fn frame_pitch_summary(frames: &[FeatureFrame; FRAMES_PER_PACKET]) -> PitchSummary {
    let periods = frames.map(|f| f.period.max(1e-9));
    let avg_period = (periods.iter().map(|p| p.ln()).sum::<f64>() / FRAMES_PER_PACKET as f64).exp();
    let modulation = modulation_semitones(&FRAME_POSITIONS, &periods);
    let avg_correlation = (frames.iter().map(|f| f.correlation).sum::<f64>() / FRAMES_PER_PACKET as f64).clamp(0.0, 1.0);
    PitchSummary { avg_period, modulation, avg_correlation }
}

fn decode_anchor(indices: &PacketIndices, cb: &Codebooks) -> Cepstrum {
    let vq = indices.vq.map(|i| (i as usize).min(cb.stages[0].len() - 1));
    let rest = msvq_decode(&vq, &cb.stages);
    let mut c = [0.0; NB_BANDS];
    c[0] = c0_value(indices.c0);
    c[1..].copy_from_slice(&rest);
    c
}

/// Quantizes one packet. `prev_anchor` is the decoded `c[4k-1]`.
pub fn encode_packet_features(
    frames: &[FeatureFrame; FRAMES_PER_PACKET],
    prev_anchor: &Cepstrum,
    summary: &PitchSummary,
    cb: &Codebooks,
    m_best: usize,
) -> Result<EncodedPacket> {
    let pitch = quantize_pitch(summary.avg_period);
    let (modulation, range) = quantize_modulation(summary.modulation, summary.avg_correlation);
    let correlation = quantize_correlation(summary.avg_correlation, range);

    let anchor = &frames[3].cepstrum;
    let c0 = quantize_c0(anchor[0]);
    let vq = msvq_search(&anchor[1..], &cb.stages, m_best)?;
    let mut indices = PacketIndices {
        pitch,
        modulation,
        correlation,
        c0,
        vq: [vq.indices[0] as u16, vq.indices[1] as u16, vq.indices[2] as u16],
        ..Default::default()
    };
    let next = decode_anchor(&indices, cb);
    indices.delta = encode_delta(&frames[1].cepstrum, prev_anchor, &next, cb);
    let mid = decode_delta(indices.delta, prev_anchor, &next, cb);
    indices.interp = encode_interpolation(&frames[0].cepstrum, &frames[2].cepstrum, prev_anchor, &mid, &next);
    let frames = decode_packet_features(&indices, prev_anchor, cb);
    Ok(EncodedPacket { indices, frames })
}

/// Reconstructs four frames from `indices` and the decoded `c[4k-1]`.
/// Total on every index value.
pub fn decode_packet_features(indices: &PacketIndices, prev_anchor: &Cepstrum, cb: &Codebooks) -> [FeatureFrame; FRAMES_PER_PACKET] {
    let next = decode_anchor(indices, cb);
    let mid = decode_delta(indices.delta, prev_anchor, &next, cb);
    let (c0, c2) = decode_interpolation(indices.interp, prev_anchor, &mid, &next);
    let (modulation, range) = modulation_value(indices.modulation);
    let correlation = correlation_value(indices.correlation, range);
    let periods = frame_periods(pitch_period(indices.pitch), modulation);
    let ceps = [c0, mid, c2, next];
    std::array::from_fn(|j| FeatureFrame { cepstrum: ceps[j], period: periods[j], correlation })
}
