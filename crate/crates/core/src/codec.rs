//! Streaming encoder and decoder.
//!
//! Timeline: frame `f` covers input samples `[160f - 80, 160f + 80)` and
//! is analysed over `[160f - 160, 160f + 160)`. Packet `j` carries frames
//! `4j..4j+3` and is emitted once input sample `640j + 639` has arrived,
//! so the last 80 samples of each packet are analysis look-ahead. The
//! decoder's `j`-th call plays frames `4j-2..=4j+1` (negative frames are
//! silence) because each frame needs two frames of future conditioning.
//! Output sample `m` of the decoded stream corresponds to input sample
//! `m - 400`, and a call's output is played after its packet arrives, for
//! a total of 640 + 320 + 80 = 1040 samples.
//!
//! Packet loss concealment here is plumbing, not a tuned algorithm: a lost
//! packet repeats the previous packet's features with the correlation
//! scaled by 0.9 and leaves the anchor unchanged.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::bitstream::{pack, unpack, Packet};
use crate::dsp::analysis::{analyze_frame, silence_c0, WINDOW_LOOKAHEAD, WINDOW_SIZE};
use crate::dsp::{cepstrum_to_lpc, LpcAnalysisFilter, PreEmphasis};
use crate::dsp::wav::to_pcm;
use crate::error::{Error, Result};
use crate::features::{FeatureFrame, FEATURE_VALUES};
use crate::pitch::{packet_pitch_summary, PitchTrack, PitchTracker};
use crate::quant::delta::Cepstrum;
use crate::quant::vq::DEFAULT_M_BEST;
use crate::quant::{decode_packet_features, encode_packet_features, Codebooks, EncodedPacket};
use crate::synth::{frame_input, frame_rate_network, Model, SynthState, Synthesizer, FRAME_LOOKAHEAD};
use crate::{FRAMES_PER_PACKET, FRAME_SIZE, NB_BANDS, PACKET_SIZE};

/// Input-to-playback delay in samples.
pub const ALGORITHMIC_DELAY: usize = PACKET_SIZE + FRAME_LOOKAHEAD * FRAME_SIZE + WINDOW_LOOKAHEAD;
/// Offset between a sample's position in the input and in the decoded
/// output stream.
pub const STREAM_OFFSET: usize = ALGORITHMIC_DELAY - PACKET_SIZE;
/// Correlation scale applied to repeated features on packet loss.
pub const LOSS_CORRELATION_DECAY: f64 = 0.9;

/// Everything the encoder derived for one packet.
#[derive(Debug, Clone)]
pub struct EncoderOutput {
    pub packet: Packet,
    /// Unquantized features.
    pub features: [FeatureFrame; FRAMES_PER_PACKET],
    pub track: PitchTrack,
    pub encoded: EncodedPacket,
}

/// Unquantized per-frame features of one packet, plus its pitch track.
pub struct FeatureAnalyzer {
    preemphasis: PreEmphasis,
    /// Pre-emphasized input, `WINDOW_SIZE - FRAME_SIZE` samples of history
    /// followed by the current packet.
    buf: Vec<f64>,
    filter: LpcAnalysisFilter,
    tracker: PitchTracker,
}

impl Default for FeatureAnalyzer {
    fn default() -> Self {
        Self::new()
    }
}

const HISTORY: usize = WINDOW_SIZE - FRAME_SIZE;

impl FeatureAnalyzer {
    pub fn new() -> Self {
        Self {
            preemphasis: PreEmphasis::new(),
            buf: vec![0.0; HISTORY],
            filter: LpcAnalysisFilter::new(),
            tracker: PitchTracker::new(),
        }
    }

    pub fn reset(&mut self) {
        *self = Self::new();
    }

    pub fn analyze_packet(&mut self, pcm: &[i16]) -> Result<([FeatureFrame; FRAMES_PER_PACKET], PitchTrack)> {
        if pcm.len() != PACKET_SIZE {
            return Err(Error::Config(format!("packet needs {PACKET_SIZE} samples, got {}", pcm.len())));
        }
        self.buf.truncate(HISTORY);
        for &x in pcm {
            let y = self.preemphasis.process_sample(x as f64);
            self.buf.push(y);
        }
        let mut excitation = Vec::with_capacity(PACKET_SIZE);
        let mut cepstra = [[0.0; NB_BANDS]; FRAMES_PER_PACKET];
        for (i, cep) in cepstra.iter_mut().enumerate() {
            let start = i * FRAME_SIZE;
            *cep = analyze_frame(&self.buf[start..start + WINDOW_SIZE]).cepstrum;
            let lpc = cepstrum_to_lpc(cep);
            let region = start + WINDOW_LOOKAHEAD;
            self.filter.process(&lpc, &self.buf[region..region + FRAME_SIZE], &mut excitation);
        }
        let track = self.tracker.process_packet(&excitation);
        let frames = std::array::from_fn(|i| {
            let (a, b) = (2 * i, 2 * i + 1);
            let period = (track.lags[a] as f64 * track.lags[b] as f64).sqrt();
            let w = track.weights[a] + track.weights[b];
            let correlation = if w > 0.0 {
                ((track.weights[a] * track.correlations[a] + track.weights[b] * track.correlations[b]) / w)
                    .clamp(0.0, 1.0)
            } else {
                0.0
            };
            FeatureFrame { cepstrum: cepstra[i], period, correlation }
        });
        self.buf.drain(..PACKET_SIZE);
        Ok((frames, track))
    }
}

/// Unquantized features of a whole signal, zero-padded to whole packets.
pub fn analyze(pcm: &[i16]) -> Vec<FeatureFrame> {
    let mut a = FeatureAnalyzer::new();
    let mut out = Vec::new();
    for chunk in pcm.chunks(PACKET_SIZE) {
        let mut block = chunk.to_vec();
        block.resize(PACKET_SIZE, 0);
        out.extend(a.analyze_packet(&block).expect("full packet").0);
    }
    out
}

pub struct Encoder {
    codebooks: Arc<Codebooks>,
    m_best: usize,
    analyzer: FeatureAnalyzer,
    anchor: Cepstrum,
}

impl Encoder {
    pub fn new(codebooks: Arc<Codebooks>) -> Self {
        Self::with_m_best(codebooks, DEFAULT_M_BEST)
    }

    pub fn with_m_best(codebooks: Arc<Codebooks>, m_best: usize) -> Self {
        Self { codebooks, m_best, analyzer: FeatureAnalyzer::new(), anchor: [0.0; NB_BANDS] }
    }

    /// Decoded anchor `c[4k+3]` of the last packet.
    pub fn anchor(&self) -> &Cepstrum {
        &self.anchor
    }

    pub fn reset(&mut self) {
        self.analyzer.reset();
        self.anchor = [0.0; NB_BANDS];
    }

    pub fn encode_packet(&mut self, pcm: &[i16]) -> Result<Packet> {
        Ok(self.encode_packet_full(pcm)?.packet)
    }

    pub fn encode_packet_full(&mut self, pcm: &[i16]) -> Result<EncoderOutput> {
        let (features, track) = self.analyzer.analyze_packet(pcm)?;
        let summary = packet_pitch_summary(&track);
        let encoded = encode_packet_features(&features, &self.anchor, &summary, &self.codebooks, self.m_best)?;
        let packet = pack(&encoded.indices)?;
        self.anchor = encoded.anchor();
        Ok(EncoderOutput { packet, features, track, encoded })
    }

    /// Encodes whole packets; a trailing partial packet is ignored.
    pub fn encode_all(&mut self, pcm: &[i16]) -> Result<Vec<Packet>> {
        pcm.chunks_exact(PACKET_SIZE).map(|c| self.encode_packet(c)).collect()
    }
}

/// Bits to features, with the anchor chain and loss handling.
pub struct FeatureDecoder {
    codebooks: Arc<Codebooks>,
    anchor: Cepstrum,
    last: Option<[FeatureFrame; FRAMES_PER_PACKET]>,
}

impl FeatureDecoder {
    pub fn new(codebooks: Arc<Codebooks>) -> Self {
        Self { codebooks, anchor: [0.0; NB_BANDS], last: None }
    }

    pub fn anchor(&self) -> &Cepstrum {
        &self.anchor
    }

    pub fn reset(&mut self) {
        self.anchor = [0.0; NB_BANDS];
        self.last = None;
    }

    /// `None` marks a lost packet.
    pub fn decode(&mut self, packet: Option<&Packet>) -> [FeatureFrame; FRAMES_PER_PACKET] {
        let frames = match packet {
            Some(p) => {
                let frames = decode_packet_features(&unpack(p), &self.anchor, &self.codebooks);
                self.anchor = frames[FRAMES_PER_PACKET - 1].cepstrum;
                frames
            }
            None => match self.last {
                Some(prev) => prev.map(|f| FeatureFrame { correlation: f.correlation * LOSS_CORRELATION_DECAY, ..f }),
                None => {
                    let mut f = FeatureFrame::default();
                    f.cepstrum[0] = silence_c0();
                    [f; FRAMES_PER_PACKET]
                }
            },
        };
        self.last = Some(frames);
        frames
    }
}

/// Bits to audio.
pub struct Decoder {
    features: FeatureDecoder,
    synth: Synthesizer,
    /// Recent decoded frames; `frames[0]` is frame number `first`.
    frames: VecDeque<FeatureFrame>,
    inputs: VecDeque<[f32; FEATURE_VALUES]>,
    first: i64,
    calls: u64,
}

impl Decoder {
    pub fn new(model: Arc<Model>, codebooks: Arc<Codebooks>, seed: u64) -> Self {
        Self {
            features: FeatureDecoder::new(codebooks),
            synth: Synthesizer::new(model, seed),
            frames: VecDeque::new(),
            inputs: VecDeque::new(),
            first: 0,
            calls: 0,
        }
    }

    pub fn reset(&mut self) {
        self.features.reset();
        self.synth.reset();
        self.frames.clear();
        self.inputs.clear();
        self.first = 0;
        self.calls = 0;
    }

    pub fn anchor(&self) -> &Cepstrum {
        self.features.anchor()
    }

    pub fn synthesizer(&self) -> &Synthesizer {
        &self.synth
    }

    /// Frame indices (possibly negative) played by call number `call`.
    pub fn frames_of_call(call: u64) -> std::ops::Range<i64> {
        let first = (call * FRAMES_PER_PACKET as u64) as i64 - FRAME_LOOKAHEAD as i64;
        first..first + FRAMES_PER_PACKET as i64
    }

    /// 640 de-emphasized samples. `None` marks a lost packet.
    pub fn decode_packet_f32(&mut self, packet: Option<&Packet>) -> Vec<f32> {
        self.decode_packet_checked(packet, &mut |_| Ok(())).unwrap()
    }

    /// As [`Self::decode_packet_f32`], running `check` on the synthesis
    /// state after every synthesized frame and stopping at the first error.
    pub fn decode_packet_checked(
        &mut self,
        packet: Option<&Packet>,
        check: &mut dyn FnMut(&SynthState) -> std::result::Result<(), String>,
    ) -> std::result::Result<Vec<f32>, String> {
        let frames = self.features.decode(packet);
        self.frames.extend(frames);
        self.inputs.extend(frames.iter().map(frame_input));
        let mut out = Vec::with_capacity(PACKET_SIZE);
        for f in Self::frames_of_call(self.calls) {
            if f < 0 {
                out.resize(out.len() + FRAME_SIZE, 0.0);
                continue;
            }
            let f = f as usize;
            let zero = [0.0f32; FEATURE_VALUES];
            let window: Vec<[f32; FEATURE_VALUES]> = (0..2 * FRAME_LOOKAHEAD + 1)
                .map(|k| {
                    let idx = f as i64 + k as i64 - FRAME_LOOKAHEAD as i64;
                    if idx < 0 { zero } else { self.inputs[(idx - self.first) as usize] }
                })
                .collect();
            let cond = frame_rate_network(&self.synth.model().weights, &window).swap_remove(FRAME_LOOKAHEAD);
            let frame = self.frames[(f as i64 - self.first) as usize];
            self.synth.synthesize_frame(&frame, &cond, &mut out);
            check(self.synth.state())?;
        }
        self.calls += 1;
        // keep only what the next call's conditioning window reaches back to
        let oldest = Self::frames_of_call(self.calls).start - FRAME_LOOKAHEAD as i64;
        while self.first < oldest && !self.frames.is_empty() {
            self.frames.pop_front();
            self.inputs.pop_front();
            self.first += 1;
        }
        Ok(out)
    }

    pub fn decode_packet(&mut self, packet: Option<&Packet>) -> Vec<i16> {
        to_pcm(&self.decode_packet_f32(packet))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_constants() {
        assert_eq!(ALGORITHMIC_DELAY, 1040);
        assert_eq!(ALGORITHMIC_DELAY * 1000 / crate::SAMPLE_RATE, 65);
        assert_eq!(Decoder::frames_of_call(0), -2..2);
        assert_eq!(Decoder::frames_of_call(3), 10..14);
    }

    #[test]
    fn encoder_and_decoder_anchors_agree() {
        let cb = Arc::new(Codebooks::generate(1));
        let mut enc = Encoder::new(cb.clone());
        let mut dec = FeatureDecoder::new(cb);
        let pcm: Vec<i16> = (0..PACKET_SIZE * 6).map(|n| ((n as f64 * 0.07).sin() * 8000.0) as i16).collect();
        for chunk in pcm.chunks(PACKET_SIZE) {
            let out = enc.encode_packet_full(chunk).unwrap();
            let frames = dec.decode(Some(&out.packet));
            assert_eq!(frames, out.encoded.frames);
            assert_eq!(enc.anchor(), dec.anchor());
        }
    }

    #[test]
    fn wrong_packet_length_is_an_error() {
        let mut enc = Encoder::new(Arc::new(Codebooks::generate(1)));
        assert!(enc.encode_packet(&[0; 100]).is_err());
    }

    #[test]
    fn decoder_history_stays_bounded() {
        use crate::model::{generate_random_model, DensitySpec, ModelDims};
        let dims = ModelDims { n_a: 16, n_b: 4, embed_dim: 4, frame_hidden: 4, cond_dim: 4, ..Default::default() };
        let model = Arc::new(Model::new(generate_random_model(3, dims, DensitySpec::default()).unwrap()).unwrap());
        let mut dec = Decoder::new(model, Arc::new(Codebooks::generate(1)), 0);
        for _ in 0..20 {
            assert_eq!(dec.decode_packet_f32(None).len(), PACKET_SIZE);
            assert!(dec.frames.len() <= 2 * FRAMES_PER_PACKET);
        }
        assert_eq!(dec.first, 20 * FRAMES_PER_PACKET as i64 - 2 * FRAME_LOOKAHEAD as i64);
    }
}
