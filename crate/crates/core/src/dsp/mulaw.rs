//! 256-level μ-law companding (μ = 255) of the 16-bit PCM range.
//!
//! Code 128 decodes to exactly zero; codes below it are negative. The
//! mapping is the continuous companding curve rounded to the nearest code,
//! so it works on real-valued samples as well as on `i16`.

const MU: f64 = 255.0;
const FULL_SCALE: f64 = 32768.0;
const HALF_RANGE: f64 = 128.0;

/// A μ-law code in `0..=255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MuLaw(u8);

impl Default for MuLaw {
    fn default() -> Self {
        Self::CENTER
    }
}

impl MuLaw {
    /// The code of digital silence.
    pub const CENTER: MuLaw = MuLaw(128);

    pub const fn new(code: u8) -> Self {
        MuLaw(code)
    }

    pub const fn code(self) -> u8 {
        self.0
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    /// Encodes a linear sample on the 16-bit scale. Values beyond full
    /// scale saturate at codes 0 and 255.
    pub fn from_linear(x: f64) -> Self {
        if !x.is_finite() {
            return if x > 0.0 { MuLaw(255) } else if x < 0.0 { MuLaw(0) } else { Self::CENTER };
        }
        let mag = (x.abs() / FULL_SCALE).min(1.0);
        let u = HALF_RANGE * (1.0 + MU * mag).ln() / (1.0 + MU).ln();
        let code = HALF_RANGE + x.signum() * u;
        MuLaw(code.round().clamp(0.0, 255.0) as u8)
    }

    pub fn to_linear(self) -> f64 {
        let v = self.0 as f64 - HALF_RANGE;
        let mag = (FULL_SCALE / MU) * ((1.0 + MU).powf(v.abs() / HALF_RANGE) - 1.0);
        v.signum() * mag
    }
}

pub fn encode(sample: i16) -> MuLaw {
    MuLaw::from_linear(sample as f64)
}

pub fn decode(code: MuLaw) -> f64 {
    code.to_linear()
}

/// Distance between the reconstruction levels adjacent to `code`, i.e. the
/// local quantization step. Uses the wider of the two neighbouring gaps.
pub fn step_at(code: MuLaw) -> f64 {
    let c = code.0;
    let up = if c < 255 { MuLaw(c + 1).to_linear() - code.to_linear() } else { 0.0 };
    let down = if c > 0 { code.to_linear() - MuLaw(c - 1).to_linear() } else { 0.0 };
    up.max(down)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_maps_to_center() {
        assert_eq!(encode(0), MuLaw::CENTER);
        assert_eq!(MuLaw::CENTER.to_linear(), 0.0);
    }

    #[test]
    fn integer_roundtrip_all_codes() {
        for i in 0..=255u8 {
            assert_eq!(MuLaw::from_linear(MuLaw(i).to_linear()), MuLaw(i), "code {i}");
        }
    }

    #[test]
    fn endpoints() {
        assert_eq!(encode(i16::MIN), MuLaw(0));
        assert_eq!(encode(i16::MAX), MuLaw(255));
        assert_eq!(MuLaw(0).to_linear(), -32768.0);
    }

    #[test]
    fn odd_symmetry() {
        for x in 1..32000i16 {
            let pos = encode(x).code() as i32 - 128;
            let neg = encode(-x).code() as i32 - 128;
            assert_eq!(pos, -neg, "x = {x}");
        }
    }

    #[test]
    fn decode_is_monotone() {
        for i in 0..255u8 {
            assert!(MuLaw(i).to_linear() < MuLaw(i + 1).to_linear());
        }
        let mut prev = encode(i16::MIN);
        for x in (i16::MIN..=i16::MAX).step_by(7) {
            let c = encode(x);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn roundtrip_error_within_local_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x: i16 = rng.gen();
            let c = encode(x);
            let err = (c.to_linear() - x as f64).abs();
            // step at |x| on the negative side, whose top cell is not clipped
            let step = step_at(encode((-(x as i32).abs()).max(i16::MIN as i32) as i16));
            assert!(err <= step, "x={x} err={err} step={step}");
        }
    }
}
