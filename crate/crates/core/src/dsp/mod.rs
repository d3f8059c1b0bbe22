//! Sample- and frame-domain signal processing.

pub mod analysis;
pub mod emphasis;
pub mod lpc;
pub mod mulaw;
pub mod training;
pub mod wav;

pub use analysis::{analyze_frame, AnalysisFrame};
pub use emphasis::{DeEmphasis, PreEmphasis, PREEMPHASIS};
pub use lpc::{cepstrum_to_lpc, compute_excitation, LpcAnalysisFilter, LpcCoeffs};
pub use mulaw::MuLaw;
