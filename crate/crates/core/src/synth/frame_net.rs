//! Frame-rate network: two 3-tap convolutions over time followed by two
//! fully-connected layers, all with tanh, then the per-frame projections
//! into the two GRUs.

use crate::features::{FeatureFrame, FEATURE_VALUES};
use crate::model::{ModelWeights, CONV_TAPS};
use crate::NB_BANDS;

/// Per-frame conditioning, held for all 160 samples of the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioning {
    pub g: Vec<f32>,
    /// GRU_A gate contributions, u, r, h stacked (`3·n_a`).
    pub gate_a: Vec<f32>,
    /// GRU_B input contribution from `g`, including the input bias (`3·n_b`).
    pub gate_b: Vec<f32>,
}

/// Network input for one frame: the cepstrum, `(period - 128) / 64` and
/// `correlation - 0.5`.
pub fn frame_input(f: &FeatureFrame) -> [f32; FEATURE_VALUES] {
    let mut x = [0.0f32; FEATURE_VALUES];
    for (o, c) in x.iter_mut().zip(&f.cepstrum) {
        *o = *c as f32;
    }
    x[NB_BANDS] = ((f.period - 128.0) / 64.0) as f32;
    x[NB_BANDS + 1] = (f.correlation - 0.5) as f32;
    x
}

fn tanh_inplace(v: &mut [f32]) {
    v.iter_mut().for_each(|x| *x = x.tanh());
}

/// Centred 3-tap convolution over time with zero padding.
fn conv(w: &crate::model::Matrix, bias: &[f32], xs: &[Vec<f32>]) -> Vec<Vec<f32>> {
    let dim = xs.first().map_or(0, |x| x.len());
    let zeros = vec![0.0f32; dim];
    (0..xs.len())
        .map(|t| {
            let mut stacked = Vec::with_capacity(CONV_TAPS * dim);
            for k in 0..CONV_TAPS {
                let idx = t as isize + k as isize - 1;
                let x = if idx < 0 || idx as usize >= xs.len() { &zeros } else { &xs[idx as usize] };
                stacked.extend_from_slice(x);
            }
            let mut y = w.affine(&stacked, bias);
            tanh_inplace(&mut y);
            y
        })
        .collect()
}

/// Conditioning for every input vector. Positions outside `inputs` count
/// as zero vectors, so output `t` depends on inputs `t-2..=t+2`.
pub fn frame_rate_network(w: &ModelWeights, inputs: &[[f32; FEATURE_VALUES]]) -> Vec<Conditioning> {
    let xs: Vec<Vec<f32>> = inputs.iter().map(|x| x.to_vec()).collect();
    let h1 = conv(&w.conv1, &w.conv1_bias, &xs);
    let h2 = conv(&w.conv2, &w.conv2_bias, &h1);
    h2.iter()
        .map(|h| {
            let mut a = w.fc1.affine(h, &w.fc1_bias);
            tanh_inplace(&mut a);
            let mut g = w.fc2.affine(&a, &w.fc2_bias);
            tanh_inplace(&mut g);
            let gate_a = w.cond_a.affine(&g, &w.cond_a_bias);
            let gate_b = w.cond_b.affine(&g, &w.cond_b_bias);
            Conditioning { g, gate_a, gate_b }
        })
        .collect()
}
