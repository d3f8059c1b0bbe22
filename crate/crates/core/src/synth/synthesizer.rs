//! The per-sample synthesis loop.

use std::sync::Arc;

use crate::dsp::{cepstrum_to_lpc, MuLaw};
use crate::features::FeatureFrame;
use crate::synth::frame_net::{frame_input, frame_rate_network, Conditioning};
use crate::synth::sample_net::{sample_network_step, Model, StepInputs, SynthState};
use crate::synth::sampling::{sample_excitation, SamplingConfig};
use crate::FRAME_SIZE;

/// Largest magnitude of a synthesized pre-emphasized sample.
const SAMPLE_LIMIT: f64 = 32767.0;

/// Streaming vocoder for one stream.
pub struct Synthesizer {
    model: Arc<Model>,
    state: SynthState,
    sampling: SamplingConfig,
    seed: u64,
}

impl Synthesizer {
    pub fn new(model: Arc<Model>, seed: u64) -> Self {
        let state = SynthState::new(&model, seed);
        Self { model, state, sampling: SamplingConfig::default(), seed }
    }

    pub fn with_sampling(mut self, sampling: SamplingConfig) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn state(&self) -> &SynthState {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state = SynthState::new(&self.model, self.seed);
    }

    /// 160 de-emphasized samples for one frame. `frame` supplies the LPC
    /// (from its cepstrum) and the sampling correlation.
    pub fn synthesize_frame(&mut self, frame: &FeatureFrame, cond: &Conditioning, out: &mut Vec<f32>) {
        self.synthesize_frame_probed(frame, cond, out, &mut |_| {});
    }

    /// As [`Self::synthesize_frame`], calling `probe` with the conditioning
    /// used for every sample.
    pub fn synthesize_frame_probed(
        &mut self,
        frame: &FeatureFrame,
        cond: &Conditioning,
        out: &mut Vec<f32>,
        probe: &mut dyn FnMut(&Conditioning),
    ) {
        let lpc = cepstrum_to_lpc(&frame.cepstrum);
        let st = &mut self.state;
        for _ in 0..FRAME_SIZE {
            let pred = lpc.predict(&st.history);
            let inputs = StepInputs {
                signal: MuLaw::from_linear(st.history[0]),
                prediction: MuLaw::from_linear(pred),
                excitation: st.last_excitation,
            };
            probe(cond);
            let probs = sample_network_step(&self.model, st, inputs, cond);
            let e = sample_excitation(&probs, frame.correlation, &self.sampling, &mut st.rng);
            let s = (pred + e.to_linear()).clamp(-SAMPLE_LIMIT, SAMPLE_LIMIT);
            st.history.copy_within(0..crate::LPC_ORDER - 1, 1);
            st.history[0] = s;
            st.last_excitation = e;
            out.push(st.deemphasis.process_sample(s) as f32);
        }
    }
}

/// Synthesizes a whole feature sequence (unquantized or decoded) to
/// de-emphasized samples, 160 per frame.
pub fn synthesize(model: Arc<Model>, frames: &[FeatureFrame], seed: u64) -> Vec<f32> {
    let inputs: Vec<_> = frames.iter().map(frame_input).collect();
    let cond = frame_rate_network(&model.weights, &inputs);
    let mut synth = Synthesizer::new(model, seed);
    let mut out = Vec::with_capacity(frames.len() * FRAME_SIZE);
    for (f, c) in frames.iter().zip(&cond) {
        synth.synthesize_frame(f, c, &mut out);
    }
    out
}
