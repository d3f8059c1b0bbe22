use std::sync::Arc;

use lpcnet_codec::dsp::MuLaw;
use lpcnet_codec::model::{generate_random_model, DensitySpec, ModelDims, ModelWeights};
use lpcnet_codec::synth::sample_net::{dual_fc, gru_a_input_lookup, gru_a_input_naive, sample_network_step, StepInputs};
use lpcnet_codec::synth::{frame_input, frame_rate_network, sample_excitation, synthesize, Model, SamplingConfig, SynthState};
use lpcnet_codec::{FeatureFrame, FRAME_SIZE};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn dims() -> ModelDims {
    ModelDims { n_a: 32, n_b: 8, embed_dim: 8, frame_hidden: 16, cond_dim: 16, ..Default::default() }
}

fn model(seed: u64) -> Arc<Model> {
    Arc::new(Model::new(generate_random_model(seed, dims(), DensitySpec::uniform(0.3)).unwrap()).unwrap())
}

fn random_inputs(rng: &mut impl Rng) -> StepInputs {
    StepInputs { signal: MuLaw::new(rng.gen()), prediction: MuLaw::new(rng.gen()), excitation: MuLaw::new(rng.gen()) }
}

fn frames(n: usize) -> Vec<FeatureFrame> {
    (0..n)
        .map(|i| {
            let mut f = FeatureFrame { period: 60.0 + (i % 30) as f64 * 3.0, correlation: (i % 10) as f64 / 10.0, ..Default::default() };
            f.cepstrum[0] = 10.0 + (i % 7) as f64;
            f.cepstrum[1] = -1.0 + (i % 5) as f64 * 0.4;
            f
        })
        .collect()
}

#[test]
fn step_outputs_are_distributions_and_state_stays_bounded() {
    let m = model(1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let feats = frames(8);
    let inputs: Vec<_> = feats.iter().map(frame_input).collect();
    let cond = frame_rate_network(&m.weights, &inputs);
    let mut state = SynthState::new(&m, 0);
    for t in 0..1000 {
        let p = sample_network_step(&m, &mut state, random_inputs(&mut rng), &cond[t % cond.len()]);
        assert_eq!(p.len(), 256);
        assert!(p.iter().all(|v| *v >= 0.0));
        assert!((p.iter().map(|v| *v as f64).sum::<f64>() - 1.0).abs() < 1e-6);
        assert!(state.h_a.iter().all(|v| v.abs() < 1.0));
        state.check_invariants().unwrap();
    }
}

#[test]
fn lookup_path_matches_embedding_product() {
    let m = model(3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let x = random_inputs(&mut rng);
        let a = gru_a_input_lookup(&m.lookup, x);
        let b = gru_a_input_naive(&m.weights, x);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() <= 1e-5, "{p} vs {q}");
        }
    }
}

#[test]
fn zero_model_gives_uniform_output() {
    let m = Model::new(ModelWeights::zeros(dims()).unwrap()).unwrap();
    let cond = frame_rate_network(&m.weights, &[frame_input(&FeatureFrame::default())]);
    let mut state = SynthState::new(&m, 0);
    let p = sample_network_step(&m, &mut state, random_inputs(&mut ChaCha8Rng::seed_from_u64(0)), &cond[0]);
    assert!(p.iter().all(|v| (v - 1.0 / 256.0).abs() < 1e-7));
}

#[test]
fn dual_fc_with_one_branch_is_plain_tanh() {
    let mut w = generate_random_model(6, dims(), DensitySpec::uniform(0.3)).unwrap();
    w.dual_a1.iter_mut().for_each(|a| *a = 1.0);
    w.dual_a2.iter_mut().for_each(|a| *a = 0.0);
    let x: Vec<f32> = (0..dims().n_b).map(|i| (i as f32 * 0.37).sin()).collect();
    let want: Vec<f32> = w.dual_w1.affine(&x, &w.dual_b1).iter().map(|v| v.tanh()).collect();
    assert_eq!(dual_fc(&w, &x), want);
}

#[test]
fn sampling_edge_cases() {
    let cfg = SamplingConfig::default();
    assert_eq!(cfg.beta(0.5), 1.0);
    assert_eq!(cfg.beta(0.1), 1.0);
    assert!((cfg.beta(1.0) - 1.75).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut one_hot = vec![0.0f32; 256];
    one_hot[200] = 1.0;
    for corr in [0.0, 0.5, 1.0] {
        for _ in 0..200 {
            assert_eq!(sample_excitation(&one_hot, corr, &cfg, &mut rng).index(), 200);
        }
    }

    let p: Vec<f32> = (0..256).map(|i| 1.0 + (i as f32 / 40.0).sin().abs()).collect();
    let sum: f32 = p.iter().sum();
    let p: Vec<f32> = p.iter().map(|v| v / sum).collect();
    let peak = |q: &[f64]| q.iter().copied().fold(0.0, f64::max);
    assert!(peak(&cfg.adjust(&p, 1.0)) > peak(&cfg.adjust(&p, 0.0)));
}

/// Empirical draw frequencies follow the adjusted distribution.
#[test]
fn sampling_frequencies_match_adjusted_distribution() {
    let cfg = SamplingConfig::default();
    let mut p = vec![0.0f32; 256];
    for (i, v) in p.iter_mut().enumerate().take(16) {
        *v = (i + 1) as f32;
    }
    let sum: f32 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    let q = cfg.adjust(&p, 0.9);
    let n = 200_000;
    let mut counts = [0usize; 256];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..n {
        counts[sample_excitation(&p, 0.9, &cfg, &mut rng).index()] += 1;
    }
    let mut stat = 0.0;
    let mut cells = 0;
    for (c, &prob) in counts.iter().zip(&q) {
        if prob > 0.0 {
            let e = prob * n as f64;
            stat += (*c as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            assert_eq!(*c, 0);
        }
    }
    let crit = ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.999);
    assert!(stat < crit, "chi2 {stat} over {cells} cells, critical {crit}");
}

#[test]
fn synthesis_is_deterministic_and_sized() {
    let m = model(11);
    let f = frames(12);
    let a = synthesize(m.clone(), &f, 5);
    assert_eq!(a.len(), f.len() * FRAME_SIZE);
    assert_eq!(a, synthesize(m.clone(), &f, 5));
    assert_ne!(a, synthesize(m, &f, 6));
    assert!(a.iter().all(|v| v.is_finite()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Hidden state stays inside the tanh range even with oversized weights.
    #[test]
    fn gru_state_bounded_under_large_weights(seed in any::<u64>(), scale in 1.0f32..20.0) {
        let mut w = generate_random_model(seed, dims(), DensitySpec::uniform(0.5)).unwrap();
        w.gru_a_input.data_mut().iter_mut().for_each(|v| *v *= scale);
        w.gru_a_rec_bias.iter_mut().for_each(|v| *v *= scale);
        let m = Model::new(w).unwrap();
        let cond = frame_rate_network(&m.weights, &[frame_input(&frames(1)[0])]);
        let mut state = SynthState::new(&m, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            sample_network_step(&m, &mut state, random_inputs(&mut rng), &cond[0]);
            prop_assert!(state.check_invariants().is_ok());
        }
    }
}
