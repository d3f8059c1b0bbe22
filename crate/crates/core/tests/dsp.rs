mod common;

use lpcnet_codec::dsp::analysis::{analyze_frame, silence_c0, DB_PER_C0, WINDOW_SIZE};
use lpcnet_codec::dsp::mulaw::{self, step_at};
use lpcnet_codec::dsp::training::{augment, laplace_noise, prepare_training_pairs, random_augmentation};
use lpcnet_codec::dsp::{cepstrum_to_lpc, compute_excitation, DeEmphasis, LpcCoeffs, MuLaw, PreEmphasis};
use lpcnet_codec::{FRAME_SIZE, LPC_ORDER, NB_BANDS};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Largest root magnitude of `1 - Σ a_i z^-i`, from the companion matrix.
fn max_root_radius(a: &[f64]) -> f64 {
    let n = a.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (j, &v) in a.iter().enumerate() {
        m[(0, j)] = v;
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Plain Levinson-Durbin, kept separate from the library's.
fn levinson(r: &[f64], order: usize) -> Vec<f64> {
    let mut a = vec![0.0; order];
    let mut err = r[0];
    for m in 0..order {
        let mut acc = r[m + 1];
        for i in 0..m {
            acc -= a[i] * r[m - i];
        }
        let k = acc / err;
        let prev = a.clone();
        a[m] = k;
        for i in 0..m {
            a[i] = prev[i] - k * prev[m - 1 - i];
        }
        err *= 1.0 - k * k;
    }
    a
}

fn random_cepstrum(rng: &mut impl Rng) -> [f64; NB_BANDS] {
    std::array::from_fn(|i| {
        if i == 0 {
            rng.gen_range(silence_c0()..40.0)
        } else {
            let spread = 4.0 / (1.0 + 0.4 * i as f64);
            rng.gen_range(-spread..spread)
        }
    })
}

#[test]
fn lpc_from_random_cepstra_is_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let c = if i % 50 == 0 {
            // occasional extreme spectra
            std::array::from_fn(|k| if k == 0 { 60.0 } else { rng.gen_range(-12.0..12.0) })
        } else {
            random_cepstrum(&mut rng)
        };
        let a = cepstrum_to_lpc(&c);
        let r = max_root_radius(a.coeffs());
        assert!(r < 1.0 - 1e-6, "root radius {r} for {c:?}");
        assert!(a.is_stable());
        worst = worst.max(r);
    }
    assert!(worst > 0.5, "spectra were not peaky enough to exercise the check ({worst})");
}

#[test]
fn lpc_of_ar1_matches_levinson_on_true_autocorrelation() {
    let rho: f64 = 0.9;
    let alpha = 0.85;
    // autocorrelation of the pre-emphasized AR(1) process
    let rx = |k: i64| rho.powi(k.abs() as i32) / (1.0 - rho * rho);
    let ry: Vec<f64> = (0..=LPC_ORDER as i64)
        .map(|k| (1.0 + alpha * alpha) * rx(k) - alpha * (rx(k - 1) + rx(k + 1)))
        .collect();
    let oracle = levinson(&ry, LPC_ORDER);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = Normal::new(0.0, 1000.0).unwrap();
    let mut x = 0.0;
    let signal: Vec<f64> = (0..16000 * 4)
        .map(|_| {
            x = rho * x + w.sample(&mut rng);
            x
        })
        .collect();
    let y = PreEmphasis::new().process(&signal);
    let frames: Vec<[f64; NB_BANDS]> =
        y.windows(WINDOW_SIZE).step_by(FRAME_SIZE).map(|win| analyze_frame(win).cepstrum).collect();
    let mean: [f64; NB_BANDS] =
        std::array::from_fn(|i| frames.iter().map(|c| c[i]).sum::<f64>() / frames.len() as f64);
    let a = cepstrum_to_lpc(&mean);
    assert!(
        (a.coeffs()[0] - oracle[0]).abs() < 0.1,
        "a1 = {}, oracle {}",
        a.coeffs()[0],
        oracle[0]
    );
}

#[test]
fn excitation_of_exact_ar16_is_the_innovation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    // stable AR(16) from reflection coefficients via step-up
    let mut a: Vec<f64> = Vec::new();
    for _ in 0..LPC_ORDER {
        let k: f64 = rng.gen_range(-0.8..0.8);
        let prev = a.clone();
        for i in 0..prev.len() {
            a[i] = prev[i] - k * prev[prev.len() - 1 - i];
        }
        a.push(k);
    }
    assert!(max_root_radius(&a) < 1.0);
    let innovation: Vec<f64> = (0..FRAME_SIZE * 20).map(|_| rng.gen_range(-100.0..100.0)).collect();
    let mut s = vec![0.0; innovation.len()];
    for n in 0..s.len() {
        s[n] = innovation[n] + (1..=LPC_ORDER).filter(|&i| i <= n).map(|i| a[i - 1] * s[n - i]).sum::<f64>();
    }
    let lpc = LpcCoeffs(a.try_into().unwrap());
    let e = compute_excitation(&s, &vec![lpc; 20]);
    for (x, y) in e.iter().zip(&innovation) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn fitted_lpc_reduces_energy() {
    let x = common::resonate(&common::pulse_train(FRAME_SIZE * 60, 97, 0, 1.0));
    let y: Vec<f64> = PreEmphasis::new().process(&x).iter().map(|v| v * 3000.0).collect();
    // frame f's window is centred on frame f
    let mut padded = vec![0.0; FRAME_SIZE / 2];
    padded.extend(&y);
    padded.resize(padded.len() + WINDOW_SIZE, 0.0);
    let lpc: Vec<LpcCoeffs> = (0..60)
        .map(|f| cepstrum_to_lpc(&analyze_frame(&padded[f * FRAME_SIZE..f * FRAME_SIZE + WINDOW_SIZE]).cepstrum))
        .collect();
    let e = compute_excitation(&y, &lpc);
    let energy = |v: &[f64]| v.iter().map(|s| s * s).sum::<f64>();
    assert!(energy(&e) < 0.5 * energy(&y), "{} vs {}", energy(&e), energy(&y));
}

#[test]
fn noise_gain_shifts_only_c0() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise: Vec<f64> = (0..WINDOW_SIZE * 40).map(|_| rng.gen_range(-3000.0..3000.0)).collect();
    let quiet: Vec<f64> = noise.iter().map(|v| v * 0.1).collect();
    let mut dc0 = 0.0;
    let mut n = 0.0;
    for (a, b) in noise.chunks(WINDOW_SIZE).zip(quiet.chunks(WINDOW_SIZE)) {
        let (ca, cb) = (analyze_frame(a).cepstrum, analyze_frame(b).cepstrum);
        dc0 += ca[0] - cb[0];
        n += 1.0;
        for k in 1..NB_BANDS {
            assert!((ca[k] - cb[k]).abs() < 1e-6, "c{k}: {} vs {}", ca[k], cb[k]);
        }
    }
    let db = dc0 / n * DB_PER_C0;
    assert!((db - 20.0).abs() < 0.5, "{db} dB");
}

const LAPLACE_SCALE: f64 = 2.0;
const LAPLACE_MAX_BIN: i32 = 12;

/// χ² statistic of `|noise|` against the rounded Laplace law, with bins
/// 0..=12 and one tail bin.
fn laplace_chi2(seed: u64, draws: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; LAPLACE_MAX_BIN as usize + 2];
    for _ in 0..draws {
        let k = laplace_noise(LAPLACE_SCALE, &mut rng).abs();
        counts[k.min(LAPLACE_MAX_BIN + 1) as usize] += 1;
    }
    let tail = |x: f64| 0.5 * (-x / LAPLACE_SCALE).exp();
    let prob = |k: i32| -> f64 {
        match k {
            0 => 1.0 - 2.0 * tail(0.5),
            k if k <= LAPLACE_MAX_BIN => 2.0 * (tail(k as f64 - 0.5) - tail(k as f64 + 0.5)),
            _ => 2.0 * tail(LAPLACE_MAX_BIN as f64 + 0.5),
        }
    };
    counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let e = draws as f64 * prob(k as i32);
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

#[test]
fn laplace_noise_matches_distribution() {
    let dof = (LAPLACE_MAX_BIN + 1) as f64;
    let chi2 = laplace_chi2(0, 1_000_000);
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.95);
    assert!(chi2 < critical, "chi2 {chi2} >= {critical}");
}

#[test]
fn laplace_noise_pooled_over_seeds() {
    // independent runs add: the sum is χ² with 20× the degrees of freedom
    let runs = 20;
    let dof = (LAPLACE_MAX_BIN + 1) as f64 * runs as f64;
    let total: f64 = (100..100 + runs).map(|seed| laplace_chi2(seed, 200_000)).sum();
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.95);
    assert!(total < critical, "pooled chi2 {total} >= {critical}");
}

#[test]
fn zero_noise_pairs_reconstruct_clean_signal() {
    let x: Vec<f64> = common::speechlike(FRAME_SIZE * 20, 2).iter().map(|&v| v as f64).collect();
    let x = PreEmphasis::new().process(&x);
    let lpc: Vec<LpcCoeffs> = (0..20).map(|f| cepstrum_to_lpc(&analyze_frame(&{
        let mut w = vec![0.0; WINDOW_SIZE];
        let start = f * FRAME_SIZE;
        let end = (start + WINDOW_SIZE).min(x.len());
        w[..end - start].copy_from_slice(&x[start..end]);
        w
    }).cepstrum)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let tp = prepare_training_pairs(&x, &lpc, &[0.0], &mut rng);
    for t in 0..x.len() {
        let rebuilt = tp.prediction_linear[t] + tp.target[t].to_linear();
        let step = step_at(tp.target[t]);
        assert!((rebuilt - x[t]).abs() <= step, "t {t}: {rebuilt} vs {}", x[t]);
        assert_eq!(tp.excitation[t], tp.target[t]);
    }
}

#[test]
fn chained_augmentation_stays_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut x: Vec<f64> = common::speechlike(16000, 4).iter().map(|&v| v as f64 * 2.0).collect();
    for _ in 0..10 {
        let (_, params) = random_augmentation(&mut rng);
        // 0 dB keeps the level high so the range guard is exercised
        x = augment(&x, 0.0, params);
        assert!(x.iter().all(|v| v.abs() <= 32767.0 + 1e-9));
    }
}

proptest! {
    #[test]
    fn emphasis_roundtrip_any_chunking(
        x in prop::collection::vec(-32768.0f64..32767.0, 1..600),
        cuts in prop::collection::vec(0usize..600, 0..6),
    ) {
        let mut cuts: Vec<usize> = cuts.into_iter().map(|c| c % x.len()).collect();
        cuts.push(0);
        cuts.push(x.len());
        cuts.sort_unstable();
        let mut pre = PreEmphasis::new();
        let mut de = DeEmphasis::new();
        let mut chunked = Vec::new();
        for w in cuts.windows(2) {
            chunked.extend(de.process(&pre.process(&x[w[0]..w[1]])));
        }
        let whole = PreEmphasis::new().process(&x);
        let whole_chunked: Vec<f64> = {
            let mut p = PreEmphasis::new();
            cuts.windows(2).flat_map(|w| p.process(&x[w[0]..w[1]])).collect()
        };
        prop_assert_eq!(&whole, &whole_chunked);
        for (a, b) in chunked.iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mulaw_is_monotone_and_bounded(a in any::<i16>(), b in any::<i16>()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(mulaw::encode(lo).code() <= mulaw::encode(hi).code());
        let code = mulaw::encode(a);
        prop_assert_eq!(MuLaw::from_linear(mulaw::decode(code)), code);
    }

    #[test]
    fn analysis_is_gain_covariant(seed in any::<u64>(), gain_db in -20.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..WINDOW_SIZE).map(|_| rng.gen_range(-8000.0..8000.0)).collect();
        let g = 10f64.powf(gain_db / 20.0);
        let y: Vec<f64> = x.iter().map(|v| v * g).collect();
        let (cx, cy) = (analyze_frame(&x).cepstrum, analyze_frame(&y).cepstrum);
        prop_assert!(((cy[0] - cx[0]) * DB_PER_C0 - gain_db).abs() < 1e-6);
        for k in 1..NB_BANDS {
            prop_assert!((cx[k] - cy[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn lpc_always_stable(c in prop::array::uniform18(-30.0f64..30.0)) {
        let a = cepstrum_to_lpc(&c);
        prop_assert!(a.coeffs().iter().all(|v| v.is_finite()));
        prop_assert!(max_root_radius(a.coeffs()) < 1.0 - 1e-6);
    }
}
