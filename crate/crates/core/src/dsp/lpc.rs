//! Linear prediction: Levinson-Durbin, cepstrum to LPC, and the analysis
//! (excitation) filter.
//!
//! Coefficients follow the predictor convention `p[n] = Σ a_i s[n - i]`,
//! so the excitation is `e[n] = s[n] - p[n]`.

use crate::dsp::analysis::{cepstrum_to_log_bands, BAND_CENTERS, FREQ_BINS, WINDOW_SIZE};
use crate::{FRAME_SIZE, LPC_ORDER, NB_BANDS, SAMPLE_RATE};

/// Gaussian lag window bandwidth.
pub const LAG_WINDOW_HZ: f64 = 40.0;
/// Relative white-noise floor added to the zero-lag autocorrelation.
pub const NOISE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LpcCoeffs(pub [f64; LPC_ORDER]);

impl LpcCoeffs {
    pub fn zero() -> Self {
        Self([0.0; LPC_ORDER])
    }

    pub fn coeffs(&self) -> &[f64; LPC_ORDER] {
        &self.0
    }

    /// Prediction from `history`, where `history[0]` is the most recent sample.
    #[inline]
    pub fn predict(&self, history: &[f64]) -> f64 {
        self.0.iter().zip(history).map(|(a, s)| a * s).sum()
    }

    /// Reflection coefficients by step-down recursion, or `None` when the
    /// recursion hits a coefficient of magnitude ≥ 1.
    pub fn reflection_coefficients(&self) -> Option<[f64; LPC_ORDER]> {
        let mut a = self.0.to_vec();
        let mut k = [0.0; LPC_ORDER];
        for m in (0..LPC_ORDER).rev() {
            let km = a[m];
            if km.abs() >= 1.0 || !km.is_finite() {
                return None;
            }
            k[m] = km;
            let denom = 1.0 - km * km;
            let prev: Vec<f64> = (0..m).map(|i| (a[i] + km * a[m - 1 - i]) / denom).collect();
            a[..m].copy_from_slice(&prev);
        }
        Some(k)
    }

    pub fn is_stable(&self) -> bool {
        self.reflection_coefficients().is_some()
    }
}

/// Levinson-Durbin recursion on `r[0..=order]`. Returns the predictor
/// coefficients and the final prediction error. A non-positive `r[0]`
/// yields the zero predictor.
pub fn levinson_durbin(r: &[f64], order: usize) -> (Vec<f64>, f64) {
    assert!(r.len() > order);
    let mut a = vec![0.0; order];
    let mut err = r[0];
    if err <= 0.0 {
        return (a, 0.0);
    }
    for i in 0..order {
        let mut acc = r[i + 1];
        for j in 0..i {
            acc -= a[j] * r[i - j];
        }
        let k = acc / err;
        let prev = a.clone();
        a[i] = k;
        for j in 0..i {
            a[j] = prev[j] - k * prev[i - 1 - j];
        }
        err *= 1.0 - k * k;
        if err <= 0.0 {
            break;
        }
    }
    (a, err)
}

/// Log10 power spectrum over bins `0..=160`, piecewise-linear in the log
/// domain between band centres.
pub fn interpolate_log_spectrum(log_bands: &[f64; NB_BANDS]) -> [f64; FREQ_BINS] {
    let mut spec = [0.0; FREQ_BINS];
    for i in 0..NB_BANDS - 1 {
        let (lo, hi) = (BAND_CENTERS[i], BAND_CENTERS[i + 1]);
        for (j, s) in spec[lo..hi].iter_mut().enumerate() {
            let frac = j as f64 / (hi - lo) as f64;
            *s = (1.0 - frac) * log_bands[i] + frac * log_bands[i + 1];
        }
    }
    spec[FREQ_BINS - 1] = log_bands[NB_BANDS - 1];
    spec
}

/// Autocorrelation `r[0..=order]` of a real, even power spectrum given on
/// bins `0..=N/2` of an `N`-point transform.
pub fn spectrum_autocorrelation(power: &[f64; FREQ_BINS], order: usize) -> Vec<f64> {
    let n = WINDOW_SIZE as f64;
    (0..=order)
        .map(|m| {
            let mut acc = power[0] + power[FREQ_BINS - 1] * if m % 2 == 0 { 1.0 } else { -1.0 };
            for (k, &p) in power.iter().enumerate().take(FREQ_BINS - 1).skip(1) {
                acc += 2.0 * p * (2.0 * std::f64::consts::PI * (k * m) as f64 / n).cos();
            }
            acc / n
        })
        .collect()
}

/// Gaussian lag window and white-noise floor, applied in place.
pub fn regularize_autocorrelation(r: &mut [f64]) {
    for (m, v) in r.iter_mut().enumerate().skip(1) {
        let x = 2.0 * std::f64::consts::PI * LAG_WINDOW_HZ * m as f64 / SAMPLE_RATE as f64;
        *v *= (-0.5 * x * x).exp();
    }
    r[0] *= 1.0 + NOISE_FLOOR;
}

/// Order-16 predictor for the spectral envelope described by a cepstrum.
pub fn cepstrum_to_lpc(cepstrum: &[f64; NB_BANDS]) -> LpcCoeffs {
    let log_bands = cepstrum_to_log_bands(cepstrum);
    let log_spec = interpolate_log_spectrum(&log_bands);
    let mut power = [0.0; FREQ_BINS];
    for (p, l) in power.iter_mut().zip(log_spec.iter()) {
        *p = 10f64.powf(*l);
    }
    let mut r = spectrum_autocorrelation(&power, LPC_ORDER);
    if !r.iter().all(|v| v.is_finite()) {
        return LpcCoeffs::zero();
    }
    regularize_autocorrelation(&mut r);
    let (a, _) = levinson_durbin(&r, LPC_ORDER);
    let mut out = [0.0; LPC_ORDER];
    out.copy_from_slice(&a);
    LpcCoeffs(out)
}

/// Streaming analysis filter `e[n] = s[n] - Σ a_i s[n - i]`.
#[derive(Debug, Clone, Default)]
pub struct LpcAnalysisFilter {
    // mem[0] is the most recent input sample
    mem: [f64; LPC_ORDER],
}

impl LpcAnalysisFilter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn process(&mut self, lpc: &LpcCoeffs, input: &[f64], out: &mut Vec<f64>) {
        for &x in input {
            out.push(x - lpc.predict(&self.mem));
            self.mem.copy_within(0..LPC_ORDER - 1, 1);
            self.mem[0] = x;
        }
    }

    pub fn reset(&mut self) {
        self.mem = [0.0; LPC_ORDER];
    }
}

/// Excitation of a whole signal, switching coefficients every 10 ms frame.
/// Trailing samples beyond the last frame use the last coefficient set.
pub fn compute_excitation(signal: &[f64], lpc_per_frame: &[LpcCoeffs]) -> Vec<f64> {
    let mut filter = LpcAnalysisFilter::new();
    let mut out = Vec::with_capacity(signal.len());
    let zero = LpcCoeffs::zero();
    for (f, chunk) in signal.chunks(FRAME_SIZE).enumerate() {
        let lpc = lpc_per_frame.get(f).or(lpc_per_frame.last()).unwrap_or(&zero);
        filter.process(lpc, chunk, &mut out);
    }
    out
}
