//! Open-loop pitch tracking on the LPC excitation.
//!
//! Each 40 ms packet is split into eight 5 ms sub-frames. For every
//! sub-frame and candidate lag the tracker scores `w_i * r(τ)` where `r` is
//! the modified correlation
//!
//! ```text
//! r(τ) = 2 Σ e(n) e(n-τ) / (Σ e²(n) + Σ e²(n-τ))
//! ```
//!
//! and `w_i` is the sub-frame energy relative to the packet average. A
//! Viterbi search maximizes `J = Σ_i [w_i r(τ_i) - Θ(τ_i - τ_{i-1})]`,
//! updating forward scores every sub-frame and backtracking once per
//! packet. Ties go to the smaller lag, then to the smaller predecessor.

use crate::PACKET_SIZE;

pub const SUBFRAME_SIZE: usize = 80;
pub const SUBFRAMES: usize = PACKET_SIZE / SUBFRAME_SIZE;
pub const MIN_LAG: usize = 32;
pub const MAX_LAG: usize = 256;
/// Excitation history needed before a packet.
pub const HISTORY: usize = MAX_LAG;
pub const CARRY_DECAY: f64 = 0.9;
pub const MAX_WEIGHT: f64 = 4.0;
const ENERGY_GUARD: f64 = 1e-9;

/// Modified correlation over `e[start..start + len]` at `lag`. Requires
/// `start >= lag`. Returns 0 when both energies are negligible.
pub fn modified_correlation(e: &[f64], start: usize, len: usize, lag: usize) -> f64 {
    let cur = &e[start..start + len];
    let past = &e[start - lag..start - lag + len];
    let mut xy = 0.0;
    let mut xx = 0.0;
    let mut yy = 0.0;
    for (&x, &y) in cur.iter().zip(past) {
        xy += x * y;
        xx += x * x;
        yy += y * y;
    }
    let den = xx + yy;
    if den < ENERGY_GUARD {
        0.0
    } else {
        2.0 * xy / den
    }
}

/// Lag transition penalty Θ.
pub fn transition_penalty(delta: i64) -> f64 {
    if delta.abs() <= 4 {
        0.02 * (delta * delta) as f64
    } else {
        6.0
    }
}

/// Sub-frame energies divided by the packet average, clamped to `[0, 4]`.
/// An all-zero packet gets zero weights.
pub fn subframe_weights(packet: &[f64]) -> [f64; SUBFRAMES] {
    assert_eq!(packet.len(), PACKET_SIZE);
    let mut energy = [0.0; SUBFRAMES];
    for (e, chunk) in energy.iter_mut().zip(packet.chunks_exact(SUBFRAME_SIZE)) {
        *e = chunk.iter().map(|x| x * x).sum();
    }
    let mean = energy.iter().sum::<f64>() / SUBFRAMES as f64;
    if mean < ENERGY_GUARD {
        return [0.0; SUBFRAMES];
    }
    energy.map(|e| (e / mean).clamp(0.0, MAX_WEIGHT))
}

/// Result of the Viterbi pass over one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiPath {
    /// Chosen candidate index per sub-frame.
    pub states: [usize; SUBFRAMES],
    /// Cumulative score along the chosen path, per sub-frame, starting from
    /// the best carried score reaching the first state. The last entry
    /// equals the winning forward score.
    pub cumulative: [f64; SUBFRAMES],
    /// Final forward scores for every candidate.
    pub carry_out: Vec<f64>,
}

/// Viterbi search over `local[i][s]` (the per-sub-frame score of candidate
/// `s`), with `lags` sorted ascending and `carry_in` the forward scores of
/// the previous sub-frame.
pub fn viterbi_decode(local: &[Vec<f64>; SUBFRAMES], lags: &[usize], carry_in: &[f64]) -> ViterbiPath {
    let n = lags.len();
    assert!(n > 0 && carry_in.len() == n);
    debug_assert!(lags.windows(2).all(|w| w[0] < w[1]));
    let mut back = vec![[0usize; SUBFRAMES]; n];
    let mut prev = carry_in.to_vec();
    let mut cur = vec![0.0; n];
    for i in 0..SUBFRAMES {
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for p in 0..n {
                let v = prev[p] - transition_penalty(lags[s] as i64 - lags[p] as i64);
                if v > best {
                    best = v;
                    arg = p;
                }
            }
            cur[s] = best + local[i][s];
            back[s][i] = arg;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    // prev now holds the final forward scores
    let mut end = 0;
    for s in 1..n {
        if prev[s] > prev[end] {
            end = s;
        }
    }
    let mut states = [0usize; SUBFRAMES];
    states[SUBFRAMES - 1] = end;
    for i in (1..SUBFRAMES).rev() {
        states[i - 1] = back[states[i]][i];
    }
    let mut cumulative = [0.0; SUBFRAMES];
    let entry = back[states[0]][0];
    let mut acc = carry_in[entry] - transition_penalty(lags[states[0]] as i64 - lags[entry] as i64);
    for i in 0..SUBFRAMES {
        if i > 0 {
            acc -= transition_penalty(lags[states[i]] as i64 - lags[states[i - 1]] as i64);
        }
        acc += local[i][states[i]];
        cumulative[i] = acc;
    }
    ViterbiPath { states, cumulative, carry_out: prev }
}

/// Per-sub-frame pitch for one packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchTrack {
    pub lags: [usize; SUBFRAMES],
    pub correlations: [f64; SUBFRAMES],
    pub weights: [f64; SUBFRAMES],
    /// Cumulative `J` along the chosen path.
    pub scores: [f64; SUBFRAMES],
}

/// Tracks one packet. `excitation` holds [`HISTORY`] samples of history
/// followed by the packet's 640 samples.
pub fn viterbi_track(excitation: &[f64], lags: &[usize], carry_in: &[f64]) -> (PitchTrack, Vec<f64>) {
    assert_eq!(excitation.len(), HISTORY + PACKET_SIZE);
    assert!(lags.iter().all(|&l| (1..=HISTORY).contains(&l)));
    let weights = subframe_weights(&excitation[HISTORY..]);
    let corr: [Vec<f64>; SUBFRAMES] = std::array::from_fn(|i| {
        let start = HISTORY + i * SUBFRAME_SIZE;
        lags.iter().map(|&l| modified_correlation(excitation, start, SUBFRAME_SIZE, l)).collect()
    });
    let local: [Vec<f64>; SUBFRAMES] =
        std::array::from_fn(|i| corr[i].iter().map(|r| weights[i] * r).collect());
    let path = viterbi_decode(&local, lags, carry_in);
    let track = PitchTrack {
        lags: path.states.map(|s| lags[s]),
        correlations: std::array::from_fn(|i| corr[i][path.states[i]]),
        weights,
        scores: path.cumulative,
    };
    (track, path.carry_out)
}

/// Streaming tracker: keeps excitation history and carried forward scores.
#[derive(Debug, Clone)]
pub struct PitchTracker {
    lags: Vec<usize>,
    history: Vec<f64>,
    carry: Vec<f64>,
}

impl Default for PitchTracker {
    fn default() -> Self {
        Self::new()
    }
}

impl PitchTracker {
    pub fn new() -> Self {
        Self::with_lags((MIN_LAG..=MAX_LAG).collect())
    }

    pub fn with_lags(lags: Vec<usize>) -> Self {
        let n = lags.len();
        Self { lags, history: vec![0.0; HISTORY], carry: vec![0.0; n] }
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    /// Forward scores that the next packet will start from.
    pub fn carry(&self) -> &[f64] {
        &self.carry
    }

    pub fn process_packet(&mut self, packet: &[f64]) -> PitchTrack {
        assert_eq!(packet.len(), PACKET_SIZE);
        let mut buf = Vec::with_capacity(HISTORY + PACKET_SIZE);
        buf.extend_from_slice(&self.history);
        buf.extend_from_slice(packet);
        let (track, carry_out) = viterbi_track(&buf, &self.lags, &self.carry);
        self.carry = carry_out.into_iter().map(|v| v * CARRY_DECAY).collect();
        self.history.copy_from_slice(&buf[PACKET_SIZE..]);
        track
    }

    pub fn reset(&mut self) {
        self.history.iter_mut().for_each(|v| *v = 0.0);
        self.carry.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Packet-level pitch parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchSummary {
    /// Geometric mean period in samples.
    pub avg_period: f64,
    /// Period change from the first to the last sub-frame, in semitones
    /// (positive when the period grows).
    pub modulation: f64,
    /// Weighted mean correlation in `[0, 1]`.
    pub avg_correlation: f64,
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in x.iter().zip(y) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Semitone span over the packet of a log-period line fitted to
/// `(position, period)` samples, positions in sub-frame units.
pub fn modulation_semitones(positions: &[f64], periods: &[f64]) -> f64 {
    let semis: Vec<f64> = periods.iter().map(|p| 12.0 * p.log2()).collect();
    slope(positions, &semis) * (SUBFRAMES - 1) as f64
}

pub fn packet_pitch_summary(track: &PitchTrack) -> PitchSummary {
    let logs: f64 = track.lags.iter().map(|&l| (l as f64).ln()).sum();
    let avg_period = (logs / SUBFRAMES as f64).exp();
    let positions: Vec<f64> = (0..SUBFRAMES).map(|i| i as f64).collect();
    let periods: Vec<f64> = track.lags.iter().map(|&l| l as f64).collect();
    let modulation = modulation_semitones(&positions, &periods);
    let wsum: f64 = track.weights.iter().sum();
    let avg_correlation = if wsum > 0.0 {
        let c: f64 = track.weights.iter().zip(&track.correlations).map(|(w, r)| w * r).sum();
        (c / wsum).clamp(0.0, 1.0)
    } else {
        0.0
    };
    PitchSummary { avg_period, modulation, avg_correlation }
}
