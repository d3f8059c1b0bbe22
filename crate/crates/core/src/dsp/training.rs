//! Training-data preparation: noise injection inside the prediction loop
//! and level/frequency-response augmentation.

use rand::Rng;

use crate::dsp::lpc::LpcCoeffs;
use crate::dsp::mulaw::MuLaw;
use crate::{FRAME_SIZE, LPC_ORDER};

/// Per-sample network inputs and targets produced by
/// [`prepare_training_pairs`]. All streams have the input's length.
#[derive(Debug, Clone, Default)]
pub struct TrainingPairs {
    /// Noisy signal `s'` in μ-law.
    pub signal: Vec<MuLaw>,
    /// Noisy prediction `p'` in μ-law.
    pub prediction: Vec<MuLaw>,
    /// Noisy excitation fed back to the network as `e'`.
    pub excitation: Vec<MuLaw>,
    /// Target excitation: clean input minus noisy prediction, in μ-law.
    pub target: Vec<MuLaw>,
    /// Target excitation before μ-law quantization.
    pub target_linear: Vec<f64>,
    /// Noisy signal in the linear domain.
    pub signal_linear: Vec<f64>,
    /// Noisy prediction in the linear domain.
    pub prediction_linear: Vec<f64>,
}

/// Integer Laplace noise: a continuous Laplace(0, `scale`) draw by inverse
/// CDF, rounded to the nearest integer.
pub fn laplace_noise<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> i32 {
    if scale <= 0.0 {
        return 0;
    }
    let u: f64 = rng.gen::<f64>() - 0.5;
    let x = -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln();
    x.round() as i32
}

/// Linear ramp of the noise scale over a number of frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSchedule {
    pub start: f64,
    pub end: f64,
    pub ramp_frames: usize,
}

impl NoiseSchedule {
    pub fn constant(scale: f64) -> Self {
        Self { start: scale, end: scale, ramp_frames: 0 }
    }

    pub fn scale_at(&self, frame: usize) -> f64 {
        if self.ramp_frames == 0 || frame >= self.ramp_frames {
            return self.end;
        }
        let t = frame as f64 / self.ramp_frames as f64;
        self.start + t * (self.end - self.start)
    }

    pub fn per_frame(&self, frames: usize) -> Vec<f64> {
        (0..frames).map(|f| self.scale_at(f)).collect()
    }
}

/// Runs the noisy prediction loop over `clean` (pre-emphasized PCM).
///
/// For each sample the prediction is formed from the past *noisy* signal,
/// the excitation `clean - prediction` is μ-law quantized, integer Laplace
/// noise is added to its code, and the noisy signal is rebuilt from the
/// prediction plus the decoded noisy excitation. The target stays the
/// clean, unquantized input minus the noisy prediction.
pub fn prepare_training_pairs<R: Rng + ?Sized>(
    clean: &[f64],
    lpc_per_frame: &[LpcCoeffs],
    noise_scale: &[f64],
    rng: &mut R,
) -> TrainingPairs {
    let n = clean.len();
    let mut out = TrainingPairs {
        signal: Vec::with_capacity(n),
        prediction: Vec::with_capacity(n),
        excitation: Vec::with_capacity(n),
        target: Vec::with_capacity(n),
        target_linear: Vec::with_capacity(n),
        signal_linear: Vec::with_capacity(n),
        prediction_linear: Vec::with_capacity(n),
    };
    let zero = LpcCoeffs::zero();
    let mut history = [0.0f64; LPC_ORDER];
    for (t, &x) in clean.iter().enumerate() {
        let frame = t / FRAME_SIZE;
        let lpc = lpc_per_frame.get(frame).or(lpc_per_frame.last()).unwrap_or(&zero);
        let scale = noise_scale.get(frame).or(noise_scale.last()).copied().unwrap_or(0.0);
        debug_assert!(scale >= 0.0);

        let p = lpc.predict(&history);
        let e = x - p;
        let e_code = MuLaw::from_linear(e);
        let noisy_code = (e_code.code() as i32 + laplace_noise(scale, rng)).clamp(0, 255) as u8;
        let noisy = MuLaw::new(noisy_code);
        let s = p + noisy.to_linear();

        out.signal.push(MuLaw::from_linear(s));
        out.prediction.push(MuLaw::from_linear(p));
        out.excitation.push(noisy);
        out.target.push(e_code);
        out.target_linear.push(e);
        out.signal_linear.push(s);
        out.prediction_linear.push(p);

        history.copy_within(0..LPC_ORDER - 1, 1);
        history[0] = s;
    }
    out
}

/// Bound on each augmentation filter coefficient.
pub const AUGMENT_COEFF_LIMIT: f64 = 0.375;
const PCM_PEAK: f64 = 32767.0;

/// Applies a gain and the second-order response
/// `(1 + b1 z⁻¹ + b2 z⁻²) / (1 + a1 z⁻¹ + a2 z⁻²)` with
/// `params = [b1, b2, a1, a2]`, each clamped to ±0.375. If the result would
/// exceed the 16-bit range it is scaled down to a peak of 32767.
pub fn augment(signal: &[f64], gain_db: f64, params: [f64; 4]) -> Vec<f64> {
    debug_assert!((-40.0..=0.0).contains(&gain_db));
    let gain = 10f64.powf(gain_db.clamp(-40.0, 0.0) / 20.0);
    let [b1, b2, a1, a2] = params.map(|p| p.clamp(-AUGMENT_COEFF_LIMIT, AUGMENT_COEFF_LIMIT));
    let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
    let mut out: Vec<f64> = signal
        .iter()
        .map(|&x| {
            let x = gain * x;
            let y = x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = x;
            y2 = y1;
            y1 = y;
            y
        })
        .collect();
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > PCM_PEAK {
        let s = PCM_PEAK / peak;
        out.iter_mut().for_each(|v| *v *= s);
    }
    out
}

/// Draws augmentation parameters: gain uniform over `[-40, 0]` dB and
/// filter coefficients uniform over ±0.375.
pub fn random_augmentation<R: Rng + ?Sized>(rng: &mut R) -> (f64, [f64; 4]) {
    let gain = rng.gen_range(-40.0..=0.0);
    let params = std::array::from_fn(|_| rng.gen_range(-AUGMENT_COEFF_LIMIT..=AUGMENT_COEFF_LIMIT));
    (gain, params)
}
