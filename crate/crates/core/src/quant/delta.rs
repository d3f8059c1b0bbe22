//! Predictive coding of `c[4k+1]` from the two surrounding decoded anchors.

use crate::quant::codebook::{Codebook, Codebooks};
use crate::quant::{DeltaCode, Predictor};
use crate::NB_BANDS;

pub type Cepstrum = [f64; NB_BANDS];

/// Element-wise mean, shared by encoder and decoder so both round alike.
pub fn midpoint(a: &Cepstrum, b: &Cepstrum) -> Cepstrum {
    std::array::from_fn(|i| 0.5 * (a[i] + b[i]))
}

pub fn prediction(predictor: Predictor, prev: &Cepstrum, next: &Cepstrum) -> Cepstrum {
    match predictor {
        Predictor::Average => midpoint(prev, next),
        Predictor::Previous => *prev,
        Predictor::Next => *next,
    }
}

fn table(cb: &Codebooks, predictor: Predictor) -> &Codebook {
    match predictor {
        Predictor::Average => &cb.delta_avg,
        Predictor::Previous | Predictor::Next => &cb.delta_single,
    }
}

/// Reconstruction `pred ± codeword`.
pub fn reconstruct(pred: &Cepstrum, codeword: &[f32], negative: bool) -> Cepstrum {
    std::array::from_fn(|i| {
        let c = codeword[i] as f64;
        if negative {
            pred[i] - c
        } else {
            pred[i] + c
        }
    })
}

fn sq_err(target: &Cepstrum, rec: &Cepstrum) -> f64 {
    target.iter().zip(rec).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Exhaustive search over predictor, sign and index. Ties go to the
/// earlier predictor (average, previous, next), then positive sign, then
/// the lower index.
pub fn encode_delta(target: &Cepstrum, prev: &Cepstrum, next: &Cepstrum, cb: &Codebooks) -> DeltaCode {
    let mut best = DeltaCode { predictor: Predictor::Average, negative: false, index: 0 };
    let mut best_err = f64::INFINITY;
    for predictor in [Predictor::Average, Predictor::Previous, Predictor::Next] {
        let pred = prediction(predictor, prev, next);
        let t = table(cb, predictor);
        for index in 0..t.len() {
            for negative in [false, true] {
                let err = sq_err(target, &reconstruct(&pred, t.row(index), negative));
                if err < best_err {
                    best_err = err;
                    best = DeltaCode { predictor, negative, index: index as u16 };
                }
            }
        }
    }
    best
}

pub fn decode_delta(code: DeltaCode, prev: &Cepstrum, next: &Cepstrum, cb: &Codebooks) -> Cepstrum {
    let t = table(cb, code.predictor);
    let index = (code.index as usize).min(t.len() - 1);
    reconstruct(&prediction(code.predictor, prev, next), t.row(index), code.negative)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cep(rng: &mut ChaCha8Rng, scale: f64) -> Cepstrum {
        std::array::from_fn(|_| rng.gen_range(-scale..scale))
    }

    #[test]
    fn perfect_average_prediction() {
        let cb = Codebooks::generate(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let prev = random_cep(&mut rng, 3.0);
        let next = random_cep(&mut rng, 3.0);
        let target = midpoint(&prev, &next);
        let code = encode_delta(&target, &prev, &next, &cb);
        assert_eq!(code, DeltaCode { predictor: Predictor::Average, negative: false, index: 0 });
        assert_eq!(decode_delta(code, &prev, &next, &cb), target);
    }

    #[test]
    fn previous_predictor_when_target_is_prev() {
        let cb = Codebooks::generate(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let prev = random_cep(&mut rng, 3.0);
        let next: Cepstrum = std::array::from_fn(|i| prev[i] + 40.0);
        let code = encode_delta(&prev, &prev, &next, &cb);
        assert_eq!(code.predictor, Predictor::Previous);
        assert_eq!(code.index, 0);
    }

    #[test]
    fn matches_brute_force() {
        let cb = Codebooks::generate(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let prev = random_cep(&mut rng, 2.0);
            let next = random_cep(&mut rng, 2.0);
            let target = random_cep(&mut rng, 2.0);
            let code = encode_delta(&target, &prev, &next, &cb);
            let got = sq_err(&target, &decode_delta(code, &prev, &next, &cb));
            for predictor in [Predictor::Average, Predictor::Previous, Predictor::Next] {
                for index in 0..=DeltaCode::max_index(predictor) {
                    for negative in [false, true] {
                        let c = DeltaCode { predictor, negative, index };
                        assert!(got <= sq_err(&target, &decode_delta(c, &prev, &next, &cb)));
                    }
                }
            }
        }
    }
}
