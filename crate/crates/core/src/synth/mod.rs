//! Vocoder inference: the frame-rate conditioning network, the sample-rate
//! network, excitation sampling and the synthesis loop.

pub mod frame_net;
pub mod sample_net;
pub mod sampling;
pub mod synthesizer;

pub use frame_net::{frame_input, frame_rate_network, Conditioning};
pub use sample_net::{Model, SynthState};
pub use sampling::{sample_excitation, SamplingConfig};
pub use synthesizer::{synthesize, Synthesizer};

/// Frames of future context the frame-rate network needs.
pub const FRAME_LOOKAHEAD: usize = 2;
