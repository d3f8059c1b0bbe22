//! Test signals shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unit pulses every `period` samples starting at `phase`.
pub fn pulse_train(len: usize, period: usize, phase: usize, amp: f64) -> Vec<f64> {
    (0..len).map(|n| if n >= phase && (n - phase) % period == 0 { amp } else { 0.0 }).collect()
}

/// Two-resonance all-pole filter, a crude vowel tract.
pub fn resonate(x: &[f64]) -> Vec<f64> {
    // poles at 500 Hz and 1500 Hz, radius 0.95 / 0.9
    let pole = |f: f64, r: f64| (2.0 * r * (2.0 * std::f64::consts::PI * f / 16000.0).cos(), -r * r);
    let (a1, a2) = pole(500.0, 0.95);
    let (b1, b2) = pole(1500.0, 0.9);
    let mut y1 = vec![0.0; x.len()];
    for n in 0..x.len() {
        y1[n] = x[n] + a1 * get(&y1, n, 1) + a2 * get(&y1, n, 2);
    }
    let mut y = vec![0.0; x.len()];
    for n in 0..x.len() {
        y[n] = y1[n] + b1 * get(&y, n, 1) + b2 * get(&y, n, 2);
    }
    y
}

fn get(v: &[f64], n: usize, k: usize) -> f64 {
    if n >= k {
        v[n - k]
    } else {
        0.0
    }
}

/// Scales to the given peak and converts to PCM.
pub fn to_i16(x: &[f64], peak: f64) -> Vec<i16> {
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
    x.iter().map(|v| (v / m * peak).round().clamp(-32768.0, 32767.0) as i16).collect()
}

/// Speech-like test material: voiced segments with a gliding pitch through
/// resonances, separated by noise bursts and pauses.
pub fn speechlike(len: usize, seed: u64) -> Vec<i16> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut src = vec![0.0; len];
    let mut n = 0usize;
    let mut phase = 0.0f64;
    while n < len {
        let seg = rng.gen_range(1600..6400).min(len - n);
        let kind = rng.gen_range(0..3);
        let p0 = rng.gen_range(50.0..180.0);
        let p1 = p0 * rng.gen_range(0.85..1.15);
        for k in 0..seg {
            let env = (std::f64::consts::PI * k as f64 / seg as f64).sin();
            src[n + k] = match kind {
                0 => {
                    let p = p0 + (p1 - p0) * k as f64 / seg as f64;
                    phase += 1.0 / p;
                    if phase >= 1.0 {
                        phase -= 1.0;
                        env
                    } else {
                        0.0
                    }
                }
                1 => env * 0.05 * rng.gen_range(-1.0..1.0),
                _ => 0.0,
            };
        }
        n += seg;
    }
    to_i16(&resonate(&src), 12000.0)
}
