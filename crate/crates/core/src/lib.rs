//! Wideband (16 kHz) speech codec at 1.6 kb/s.
//!
//! The encoder turns PCM into 64-bit packets, each carrying four 10 ms
//! frames of Bark-cepstral, pitch period and pitch correlation features.
//! The decoder rebuilds the features and synthesizes speech with an
//! LPC-assisted recurrent vocoder: a frame-rate conditioning network and a
//! sample-rate network built from a block-sparse GRU, a small dense GRU and
//! a dual fully-connected output layer.
//!
//! Module map:
//!
//! * [`dsp`]: μ-law, emphasis filters, band analysis, cepstrum/LPC, training data prep, WAV I/O
//! * [`pitch`]: open-loop Viterbi pitch tracker
//! * [`quant`]: packet parameter quantizers and codebooks
//! * [`train`]: codebook training
//! * [`bitstream`]: 64-bit packet layout
//! * [`model`]: vocoder weights, weight files and complexity accounting
//! * [`synth`]: frame-rate and sample-rate networks, sampling, synthesis
//! * [`codec`]: streaming encoder and decoder

pub mod bitstream;
pub mod codec;
pub mod dsp;
pub mod error;
pub mod features;
pub mod model;
pub mod pitch;
pub mod quant;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use features::FeatureFrame;

/// Sampling rate of all audio handled by the codec.
pub const SAMPLE_RATE: usize = 16_000;
/// Samples in one 10 ms frame.
pub const FRAME_SIZE: usize = 160;
/// Frames carried by one packet.
pub const FRAMES_PER_PACKET: usize = 4;
/// Samples in one 40 ms packet.
pub const PACKET_SIZE: usize = FRAME_SIZE * FRAMES_PER_PACKET;
/// Number of Bark-spaced bands, and of cepstral coefficients per frame.
pub const NB_BANDS: usize = 18;
/// Linear prediction order.
pub const LPC_ORDER: usize = 16;
