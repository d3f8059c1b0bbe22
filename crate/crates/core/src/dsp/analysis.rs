//! Windowed Bark-band analysis and the band-energy cepstrum.
//!
//! Each 10 ms frame is analysed through a 20 ms (320-sample) window that
//! spans the frame's own 160 samples plus 80 samples on each side, so the
//! analysis of a frame needs 5 ms of look-ahead. The window is the Vorbis
//! power-complementary window, `w[n]² + w[n + 160]² = 1`.
//!
//! Band energies use 18 triangular bands centred on the edges below (FFT
//! bins of 50 Hz). Each bin's power is split linearly between the two
//! neighbouring band centres, and the outermost bands are doubled because
//! they only collect from one side.
//!
//! | band | centre bin | centre (Hz) |
//! |-----:|-----------:|------------:|
//! |  0 |   0 |    0 |
//! |  1 |   4 |  200 |
//! |  2 |   8 |  400 |
//! |  3 |  12 |  600 |
//! |  4 |  16 |  800 |
//! |  5 |  20 | 1000 |
//! |  6 |  24 | 1200 |
//! |  7 |  28 | 1400 |
//! |  8 |  32 | 1600 |
//! |  9 |  40 | 2000 |
//! | 10 |  48 | 2400 |
//! | 11 |  56 | 2800 |
//! | 12 |  64 | 3200 |
//! | 13 |  80 | 4000 |
//! | 14 |  96 | 4800 |
//! | 15 | 112 | 5600 |
//! | 16 | 136 | 6800 |
//! | 17 | 160 | 8000 |
//!
//! The cepstrum is the orthonormal DCT-II of `log10(max(E, 1e-2))`. A gain
//! change of `x` dB therefore moves C0 by `x * sqrt(18) / 10`, i.e. one C0
//! unit is [`DB_PER_C0`] ≈ 2.357 dB.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::{FRAME_SIZE, NB_BANDS};

pub const WINDOW_SIZE: usize = 2 * FRAME_SIZE;
/// Samples of look-ahead past the end of a frame needed by its window.
pub const WINDOW_LOOKAHEAD: usize = FRAME_SIZE / 2;
pub const FREQ_BINS: usize = WINDOW_SIZE / 2 + 1;
pub const HZ_PER_BIN: f64 = crate::SAMPLE_RATE as f64 / WINDOW_SIZE as f64;

/// Band centres in FFT bins.
pub const BAND_CENTERS: [usize; NB_BANDS] =
    [0, 4, 8, 12, 16, 20, 24, 28, 32, 40, 48, 56, 64, 80, 96, 112, 136, 160];

pub const ENERGY_FLOOR: f64 = 1e-2;

/// dB represented by one unit of C0.
pub const DB_PER_C0: f64 = 2.357_022_603_955_158_4; // 10 / sqrt(18)

/// C0 of a frame whose bands all sit at the energy floor.
pub fn silence_c0() -> f64 {
    (NB_BANDS as f64).sqrt() * ENERGY_FLOOR.log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisFrame {
    pub band_energies: [f64; NB_BANDS],
    pub cepstrum: [f64; NB_BANDS],
}

pub fn window() -> &'static [f64; WINDOW_SIZE] {
    use std::sync::OnceLock;
    static WINDOW: OnceLock<[f64; WINDOW_SIZE]> = OnceLock::new();
    WINDOW.get_or_init(|| {
        let mut w = [0.0; WINDOW_SIZE];
        for (n, v) in w.iter_mut().enumerate() {
            let s = (std::f64::consts::PI * (n as f64 + 0.5) / WINDOW_SIZE as f64).sin();
            *v = (std::f64::consts::FRAC_PI_2 * s * s).sin();
        }
        w
    })
}

struct Analyzer {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
}

thread_local! {
    static ANALYZER: RefCell<Analyzer> = RefCell::new(Analyzer {
        fft: FftPlanner::new().plan_fft_forward(WINDOW_SIZE),
        buf: vec![Complex::default(); WINDOW_SIZE],
    });
}

/// Power spectrum (bins `0..=160`) of one windowed 320-sample block,
/// normalised by the transform length.
pub fn power_spectrum(samples: &[f64]) -> [f64; FREQ_BINS] {
    assert_eq!(samples.len(), WINDOW_SIZE, "analysis needs exactly one 20 ms window");
    let w = window();
    ANALYZER.with(|a| {
        let mut a = a.borrow_mut();
        let Analyzer { fft, buf } = &mut *a;
        for ((b, &x), &wn) in buf.iter_mut().zip(samples).zip(w.iter()) {
            *b = Complex::new(x * wn, 0.0);
        }
        fft.process(buf);
        let norm = 1.0 / WINDOW_SIZE as f64;
        let mut out = [0.0; FREQ_BINS];
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = (b * norm).norm_sqr();
        }
        out
    })
}

/// Triangular band energies, each the weighted mean power per bin under
/// its triangle, so a flat spectrum gives equal values in every band.
pub fn band_energies(spectrum: &[f64; FREQ_BINS]) -> [f64; NB_BANDS] {
    let mut e = [0.0; NB_BANDS];
    let mut weight = [0.0; NB_BANDS];
    for i in 0..NB_BANDS - 1 {
        let size = BAND_CENTERS[i + 1] - BAND_CENTERS[i];
        for j in 0..size {
            let frac = j as f64 / size as f64;
            let p = spectrum[BAND_CENTERS[i] + j];
            e[i] += (1.0 - frac) * p;
            e[i + 1] += frac * p;
            weight[i] += 1.0 - frac;
            weight[i + 1] += frac;
        }
    }
    for (v, w) in e.iter_mut().zip(weight) {
        *v /= w;
    }
    e
}

/// Analyses one 20 ms window of pre-emphasized PCM.
pub fn analyze_frame(samples: &[f64]) -> AnalysisFrame {
    let band_energies = band_energies(&power_spectrum(samples));
    let cepstrum = bands_to_cepstrum(&band_energies);
    AnalysisFrame { band_energies, cepstrum }
}

fn dct_table() -> &'static [[f64; NB_BANDS]; NB_BANDS] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<[[f64; NB_BANDS]; NB_BANDS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = NB_BANDS as f64;
        let mut t = [[0.0; NB_BANDS]; NB_BANDS];
        for (k, row) in t.iter_mut().enumerate() {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            for (i, v) in row.iter_mut().enumerate() {
                *v = scale * (std::f64::consts::PI * (i as f64 + 0.5) * k as f64 / n).cos();
            }
        }
        t
    })
}

/// Orthonormal DCT-II.
pub fn dct(x: &[f64; NB_BANDS]) -> [f64; NB_BANDS] {
    let t = dct_table();
    let mut out = [0.0; NB_BANDS];
    for (o, row) in out.iter_mut().zip(t.iter()) {
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
    out
}

/// Inverse of [`dct`].
pub fn idct(c: &[f64; NB_BANDS]) -> [f64; NB_BANDS] {
    let t = dct_table();
    let mut out = [0.0; NB_BANDS];
    for (k, row) in t.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v * c[k];
        }
    }
    out
}

pub fn bands_to_cepstrum(energies: &[f64; NB_BANDS]) -> [f64; NB_BANDS] {
    let mut log_e = [0.0; NB_BANDS];
    for (l, &e) in log_e.iter_mut().zip(energies) {
        *l = e.max(ENERGY_FLOOR).log10();
    }
    dct(&log_e)
}

/// Log10 band energies encoded by a cepstrum.
pub fn cepstrum_to_log_bands(cepstrum: &[f64; NB_BANDS]) -> [f64; NB_BANDS] {
    idct(cepstrum)
}

pub fn cepstrum_to_bands(cepstrum: &[f64; NB_BANDS]) -> [f64; NB_BANDS] {
    let mut e = idct(cepstrum);
    for v in e.iter_mut() {
        *v = 10f64.powf(*v);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn window_is_power_complementary() {
        let w = window();
        for n in 0..FRAME_SIZE {
            assert!((w[n] * w[n] + w[n + FRAME_SIZE] * w[n + FRAME_SIZE] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn silence_sits_at_floor() {
        let a = analyze_frame(&[0.0; WINDOW_SIZE]);
        assert!(a.band_energies.iter().all(|&e| e == 0.0));
        assert!((a.cepstrum[0] - silence_c0()).abs() < 1e-12);
        assert!(a.cepstrum[1..].iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn dct_roundtrip_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: [f64; NB_BANDS] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let back = idct(&dct(&x));
        for (a, b) in x.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let energy_c: f64 = dct(&x).iter().map(|v| v * v).sum();
        assert!((energy - energy_c).abs() < 1e-9);
    }

    #[test]
    fn cepstrum_roundtrips_to_bands() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let e: [f64; NB_BANDS] = std::array::from_fn(|_| 10f64.powf(rng.gen_range(-1.0..8.0)));
            let back = cepstrum_to_bands(&bands_to_cepstrum(&e));
            for (a, b) in e.iter().zip(back.iter()) {
                assert!(((a - b) / a).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn db_per_c0_constant() {
        assert!((DB_PER_C0 - 10.0 / 18f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tone_energy_lands_in_matching_band() {
        // 1 kHz is bin 20, the centre of band 5.
        let x: Vec<f64> = (0..WINDOW_SIZE)
            .map(|n| 1000.0 * (2.0 * std::f64::consts::PI * 1000.0 * n as f64 / 16000.0).sin())
            .collect();
        let a = analyze_frame(&x);
        let (argmax, _) = a
            .band_energies
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(argmax, 5);
    }
}
