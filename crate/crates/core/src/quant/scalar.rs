//! Scalar quantizers: pitch period, pitch modulation, pitch correlation and
//! cepstral energy (C0).

use crate::dsp::analysis::{silence_c0, DB_PER_C0};
use crate::pitch::{MAX_LAG, MIN_LAG};

/// Pitch codes per octave; one code is 12/21 ≈ 0.571 semitones.
pub const PITCH_CODES_PER_OCTAVE: f64 = 21.0;
pub const PITCH_LEVELS: u8 = 64;

pub fn quantize_pitch(period: f64) -> u8 {
    let p = if period.is_nan() { MAX_LAG as f64 } else { period.clamp(MIN_LAG as f64, MAX_LAG as f64) };
    let idx = (PITCH_CODES_PER_OCTAVE * (MAX_LAG as f64 / p).log2()).round();
    idx.clamp(0.0, (PITCH_LEVELS - 1) as f64) as u8
}

pub fn pitch_period(idx: u8) -> f64 {
    MAX_LAG as f64 * 2f64.powf(-(idx.min(PITCH_LEVELS - 1) as f64) / PITCH_CODES_PER_OCTAVE)
}

/// Semitones per modulation unit, so that ±3 spans ±2.5 semitones.
pub const MODULATION_STEP: f64 = 2.5 / 3.0;
/// Correlation below which the packet is treated as unvoiced.
pub const VOICING_THRESHOLD: f64 = 0.3;
/// Modulation code for "no modulation, correlation ≥ 0.3".
pub const MOD_ZERO_VOICED: u8 = 3;
/// Modulation code for "no modulation, correlation < 0.3".
pub const MOD_ZERO_UNVOICED: u8 = 4;

/// Which sub-range the correlation refinement bits cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelationRange {
    /// `[0, 0.3]`
    Low,
    /// `[0.3, 1]`
    High,
}

impl CorrelationRange {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            CorrelationRange::Low => (0.0, VOICING_THRESHOLD),
            CorrelationRange::High => (VOICING_THRESHOLD, 1.0),
        }
    }
}

/// Code layout: `[-3, -2, -1, 0 (voiced), 0 (unvoiced), 1, 2, 3]`.
pub fn quantize_modulation(semitones: f64, avg_correlation: f64) -> (u8, CorrelationRange) {
    if !(avg_correlation >= VOICING_THRESHOLD) {
        return (MOD_ZERO_UNVOICED, CorrelationRange::Low);
    }
    let m = if semitones.is_nan() { 0.0 } else { (semitones / MODULATION_STEP).round().clamp(-3.0, 3.0) };
    let code = match m as i32 {
        m @ -3..=-1 => (m + 3) as u8,
        0 => MOD_ZERO_VOICED,
        m => (m + 4) as u8,
    };
    (code, CorrelationRange::High)
}

/// Modulation in semitones and the correlation range signalled by a code.
pub fn modulation_value(code: u8) -> (f64, CorrelationRange) {
    let code = code & 7;
    let m = match code {
        0..=2 => code as i32 - 3,
        3 | 4 => 0,
        _ => code as i32 - 4,
    };
    let range = if code == MOD_ZERO_UNVOICED { CorrelationRange::Low } else { CorrelationRange::High };
    (m as f64 * MODULATION_STEP, range)
}

pub fn quantize_correlation(correlation: f64, range: CorrelationRange) -> u8 {
    let (lo, hi) = range.bounds();
    let step = (hi - lo) / 4.0;
    let c = if correlation.is_nan() { lo } else { correlation };
    ((c - lo) / step).floor().clamp(0.0, 3.0) as u8
}

pub fn correlation_value(code: u8, range: CorrelationRange) -> f64 {
    let (lo, hi) = range.bounds();
    lo + ((code & 3) as f64 + 0.5) * (hi - lo) / 4.0
}

/// C0 resolution in dB.
pub const C0_STEP_DB: f64 = 0.83;
pub const C0_LEVELS: u8 = 128;

/// C0 quantizer step in cepstral units.
pub fn c0_step() -> f64 {
    C0_STEP_DB / DB_PER_C0
}

/// Lowest C0 reconstruction level: the C0 of digital silence.
pub fn c0_min() -> f64 {
    silence_c0()
}

pub fn quantize_c0(c0: f64) -> u8 {
    if c0.is_nan() {
        return 0;
    }
    ((c0 - c0_min()) / c0_step()).round().clamp(0.0, (C0_LEVELS - 1) as f64) as u8
}

pub fn c0_value(idx: u8) -> f64 {
    c0_min() + idx.min(C0_LEVELS - 1) as f64 * c0_step()
}
