//! Excitation sampling with voicing-dependent sharpening.

use rand::Rng;

use crate::dsp::MuLaw;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    /// Sharpening exponent slope: `β = 1 + max(0, slope · (corr - 0.5))`.
    pub sharpen_slope: f64,
    /// Fraction of the peak probability removed from every entry.
    pub threshold: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { sharpen_slope: 1.5, threshold: 0.002 }
    }
}

impl SamplingConfig {
    pub fn beta(&self, correlation: f64) -> f64 {
        1.0 + (self.sharpen_slope * (correlation - 0.5)).max(0.0)
    }

    /// Sharpened and thresholded distribution, normalized.
    pub fn adjust(&self, probs: &[f32], correlation: f64) -> Vec<f64> {
        let beta = self.beta(correlation);
        let mut q: Vec<f64> = probs.iter().map(|&p| (p.max(0.0) as f64).powf(beta)).collect();
        let sum: f64 = q.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return vec![1.0 / probs.len() as f64; probs.len()];
        }
        q.iter_mut().for_each(|v| *v /= sum);
        let floor = self.threshold * q.iter().copied().fold(0.0, f64::max);
        q.iter_mut().for_each(|v| *v = (*v - floor).max(0.0));
        let sum: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= sum);
        q
    }
}

/// Draws one code by inverse CDF with a single uniform number.
pub fn sample_excitation<R: Rng>(probs: &[f32], correlation: f64, cfg: &SamplingConfig, rng: &mut R) -> MuLaw {
    let q = cfg.adjust(probs, correlation);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in q.iter().enumerate() {
        if p > 0.0 {
            last = i;
            acc += p;
            if u < acc {
                return MuLaw::new(i as u8);
            }
        }
    }
    MuLaw::new(last as u8)
}
