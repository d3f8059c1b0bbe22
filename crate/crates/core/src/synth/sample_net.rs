//! Sample-rate network: GRU_A with block-sparse recurrent weights and
//! table lookups for its inputs, GRU_B, and the dual fully-connected
//! output layer followed by a softmax.
//!
//! ```text
//! u  = σ(W_u h + v(s,u) + v(p,u) + v(e,u) + g_u)
//! r  = σ(W_r h + v(s,r) + v(p,r) + v(e,r) + g_r)
//! h~ = tanh(r ∘ (W_h h) + v(s,h) + v(p,h) + v(e,h) + g_h)
//! h  = u ∘ h_prev + (1 - u) ∘ h~
//! dual_fc(x) = a1 ∘ tanh(W1 x + b1) + a2 ∘ tanh(W2 x + b2)
//! ```
//!
//! The recurrent biases are added to `W_· h` inside the gates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dsp::{DeEmphasis, MuLaw};
use crate::error::Result;
use crate::model::lookup::Input;
use crate::model::{build_lookup_tables, LookupTables, ModelWeights};
use crate::synth::frame_net::Conditioning;
use crate::LPC_ORDER;

/// Weights plus their precomputed lookup tables. Immutable and shareable.
#[derive(Debug, Clone)]
pub struct Model {
    pub weights: ModelWeights,
    pub lookup: LookupTables,
}

impl Model {
    pub fn new(weights: ModelWeights) -> Result<Self> {
        weights.validate()?;
        let lookup = build_lookup_tables(&weights.embed_sig, &weights.embed_exc, &weights.gru_a_input)?;
        Ok(Self { weights, lookup })
    }
}

/// Decoder-side runtime state of one stream.
#[derive(Debug, Clone)]
pub struct SynthState {
    pub h_a: Vec<f32>,
    pub h_b: Vec<f32>,
    /// Last synthesized pre-emphasized samples, newest first.
    pub history: [f64; LPC_ORDER],
    pub last_excitation: MuLaw,
    pub deemphasis: DeEmphasis,
    pub rng: ChaCha8Rng,
}

impl SynthState {
    pub fn new(model: &Model, seed: u64) -> Self {
        let d = &model.weights.dims;
        Self {
            h_a: vec![0.0; d.n_a],
            h_b: vec![0.0; d.n_b],
            history: [0.0; LPC_ORDER],
            last_excitation: MuLaw::CENTER,
            deemphasis: DeEmphasis::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Hidden states finite and within `[-1, 1]`; history finite.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (name, h) in [("h_a", &self.h_a), ("h_b", &self.h_b)] {
            if let Some(i) = h.iter().position(|v| !v.is_finite() || v.abs() > 1.0) {
                return Err(format!("{name}[{i}] = {}", h[i]));
            }
        }
        if self.history.iter().any(|v| !v.is_finite()) || !self.deemphasis.memory().is_finite() {
            return Err("non-finite sample history".into());
        }
        Ok(())
    }
}

#[inline]
fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// μ-law codes of the three GRU_A inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInputs {
    pub signal: MuLaw,
    pub prediction: MuLaw,
    pub excitation: MuLaw,
}

/// GRU_A input contributions from the lookup tables (`3·n_a`).
pub fn gru_a_input_lookup(lookup: &LookupTables, inputs: StepInputs) -> Vec<f32> {
    let s = lookup.row(Input::Signal, inputs.signal.index());
    let p = lookup.row(Input::Prediction, inputs.prediction.index());
    let e = lookup.row(Input::Excitation, inputs.excitation.index());
    s.iter().zip(p).zip(e).map(|((a, b), c)| a + b + c).collect()
}

/// The same contributions computed directly: input matrix times the
/// concatenated embeddings.
pub fn gru_a_input_naive(w: &ModelWeights, inputs: StepInputs) -> Vec<f32> {
    let mut x = Vec::with_capacity(3 * w.dims.embed_dim);
    x.extend_from_slice(w.embed_sig.row(inputs.signal.index()));
    x.extend_from_slice(w.embed_sig.row(inputs.prediction.index()));
    x.extend_from_slice(w.embed_exc.row(inputs.excitation.index()));
    let mut out = vec![0.0; 3 * w.dims.n_a];
    w.gru_a_input.matvec_add(&x, &mut out);
    out
}

/// Gate values of one GRU_A update.
#[derive(Debug, Clone, PartialEq)]
pub struct GruAOutput {
    pub u: Vec<f32>,
    pub r: Vec<f32>,
    pub candidate: Vec<f32>,
    pub h: Vec<f32>,
}

/// GRU_A update given the summed input contributions `x` (lookups plus
/// frame conditioning, `3·n_a`).
pub fn gru_a_update(w: &ModelWeights, h_prev: &[f32], x: &[f32]) -> GruAOutput {
    let n = w.dims.n_a;
    let mut rec = w.gru_a_rec_bias.clone();
    w.gru_a_rec.w_u.matvec_add(h_prev, &mut rec[..n]);
    w.gru_a_rec.w_r.matvec_add(h_prev, &mut rec[n..2 * n]);
    w.gru_a_rec.w_h.matvec_add(h_prev, &mut rec[2 * n..]);
    let u: Vec<f32> = (0..n).map(|i| sigmoid(rec[i] + x[i])).collect();
    let r: Vec<f32> = (0..n).map(|i| sigmoid(rec[n + i] + x[n + i])).collect();
    let candidate: Vec<f32> = (0..n).map(|i| (r[i] * rec[2 * n + i] + x[2 * n + i]).tanh()).collect();
    let h = (0..n).map(|i| u[i] * h_prev[i] + (1.0 - u[i]) * candidate[i]).collect();
    GruAOutput { u, r, candidate, h }
}

/// GRU_B update; `x_cond` is the conditioning part of its input.
pub fn gru_b_update(w: &ModelWeights, h_prev: &[f32], h_a: &[f32], x_cond: &[f32]) -> Vec<f32> {
    let n = w.dims.n_b;
    let mut x = x_cond.to_vec();
    w.gru_b_input.matvec_add(h_a, &mut x);
    let mut rec = w.gru_b_rec_bias.clone();
    w.gru_b_rec.matvec_add(h_prev, &mut rec);
    (0..n)
        .map(|i| {
            let u = sigmoid(x[i] + rec[i]);
            let r = sigmoid(x[n + i] + rec[n + i]);
            let c = (x[2 * n + i] + r * rec[2 * n + i]).tanh();
            u * h_prev[i] + (1.0 - u) * c
        })
        .collect()
}

/// `a1 ∘ tanh(W1 x + b1) + a2 ∘ tanh(W2 x + b2)`
pub fn dual_fc(w: &ModelWeights, x: &[f32]) -> Vec<f32> {
    let y1 = w.dual_w1.affine(x, &w.dual_b1);
    let y2 = w.dual_w2.affine(x, &w.dual_b2);
    (0..w.dims.q)
        .map(|i| w.dual_a1[i] * y1[i].tanh() + w.dual_a2[i] * y2[i].tanh())
        .collect()
}

pub fn softmax(logits: &[f32]) -> Vec<f32> {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let exps: Vec<f32> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f32 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// One network step: updates the hidden states in `state` and returns the
/// distribution over the 256 excitation codes.
pub fn sample_network_step(model: &Model, state: &mut SynthState, inputs: StepInputs, cond: &Conditioning) -> Vec<f32> {
    let w = &model.weights;
    let mut x = gru_a_input_lookup(&model.lookup, inputs);
    for (a, g) in x.iter_mut().zip(&cond.gate_a) {
        *a += g;
    }
    let a = gru_a_update(w, &state.h_a, &x);
    state.h_a = a.h;
    state.h_b = gru_b_update(w, &state.h_b, &state.h_a, &cond.gate_b);
    softmax(&dual_fc(w, &state.h_b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_random_model, DensitySpec, ModelDims};

    fn dims() -> ModelDims {
        ModelDims { n_a: 32, n_b: 8, embed_dim: 8, frame_hidden: 8, cond_dim: 8, ..Default::default() }
    }

    fn zero_cond(d: &ModelDims) -> Conditioning {
        Conditioning { g: vec![0.0; d.cond_dim], gate_a: vec![0.0; 3 * d.n_a], gate_b: vec![0.0; 3 * d.n_b] }
    }

    #[test]
    fn zero_model_is_uniform() {
        let model = Model::new(ModelWeights::zeros(dims()).unwrap()).unwrap();
        let mut st = SynthState::new(&model, 0);
        let inputs = StepInputs { signal: MuLaw::new(3), prediction: MuLaw::new(200), excitation: MuLaw::new(90) };
        let p = sample_network_step(&model, &mut st, inputs, &zero_cond(&dims()));
        assert!(p.iter().all(|&v| (v - 1.0 / 256.0).abs() < 1e-9));
    }

    #[test]
    fn dual_fc_single_branch() {
        let mut w = generate_random_model(1, dims(), DensitySpec::default()).unwrap();
        w.dual_a1 = vec![1.0; 256];
        w.dual_a2 = vec![0.0; 256];
        let x: Vec<f32> = (0..8).map(|i| i as f32 * 0.1 - 0.3).collect();
        let expect: Vec<f32> = w.dual_w1.affine(&x, &w.dual_b1).iter().map(|v| v.tanh()).collect();
        assert_eq!(dual_fc(&w, &x), expect);
    }

    #[test]
    fn saturated_update_gate_freezes_state() {
        let mut w = generate_random_model(2, dims(), DensitySpec::default()).unwrap();
        w.gru_a_rec_bias[..32].iter_mut().for_each(|b| *b = 100.0);
        let h: Vec<f32> = (0..32).map(|i| (i as f32 / 16.0 - 1.0) * 0.9).collect();
        let x = vec![0.3; 96];
        assert_eq!(gru_a_update(&w, &h, &x).h, h);
    }

    #[test]
    fn open_gates_give_candidate() {
        let mut w = generate_random_model(3, dims(), DensitySpec::default()).unwrap();
        w.gru_a_rec_bias[..32].iter_mut().for_each(|b| *b = -100.0);
        w.gru_a_rec_bias[32..64].iter_mut().for_each(|b| *b = 100.0);
        let h: Vec<f32> = (0..32).map(|i| (i as f32 / 16.0 - 1.0) * 0.9).collect();
        let x = vec![0.1; 96];
        let out = gru_a_update(&w, &h, &x);
        let mut wh = w.gru_a_rec_bias[64..].to_vec();
        w.gru_a_rec.w_h.matvec_add(&h, &mut wh);
        let expect: Vec<f32> = wh.iter().zip(&x[64..]).map(|(a, b)| (a + b).tanh()).collect();
        assert_eq!(out.h, expect);
    }
}
