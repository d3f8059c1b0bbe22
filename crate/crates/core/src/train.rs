//! Codebook training: k-means with k-means++ seeding, multi-stage residual
//! training for the anchor VQ, and sign-symmetric k-means for the delta
//! tables.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FeatureFrame;
use crate::quant::codebook::{Codebook, Codebooks, DELTA_AVG_SIZE, DELTA_SINGLE_SIZE, VQ_SIZE, VQ_STAGES};
use crate::quant::delta::midpoint;

pub const DEFAULT_ITERATIONS: usize = 20;
/// Training vectors required per codeword.
pub const MIN_VECTORS_PER_CODEWORD: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    /// Mean squared error after each assignment step.
    pub history: Vec<f64>,
}

impl KMeansResult {
    pub fn distortion(&self) -> f64 {
        *self.history.last().unwrap_or(&f64::NAN)
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dist2_neg(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum()
}

/// Error of `x` against centroid `c`, and whether the negated centroid fits.
fn fit(x: &[f64], c: &[f64], signed: bool) -> (f64, bool) {
    let pos = dist2(x, c);
    if signed {
        let neg = dist2_neg(x, c);
        if neg < pos {
            return (neg, true);
        }
    }
    (pos, false)
}

fn check_data(data: &[Vec<f64>], need: usize) -> Result<usize> {
    if data.len() < need {
        return Err(Error::InsufficientData { have: data.len(), need });
    }
    let dim = data[0].len();
    if data.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidDims("ragged training vectors".into()));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite training vector".into()));
    }
    Ok(dim)
}

fn seed_plus_plus(data: &[Vec<f64>], k: usize, signed: bool, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![data[rng.gen_range(0..data.len())].clone()];
    let mut best: Vec<f64> = data.iter().map(|x| fit(x, &centroids[0], signed).0).collect();
    while centroids.len() < k {
        let next = match WeightedIndex::new(&best) {
            Ok(w) => w.sample(rng),
            // all points already covered: duplicate data
            Err(_) => rng.gen_range(0..data.len()),
        };
        let c = data[next].clone();
        for (b, x) in best.iter_mut().zip(data) {
            *b = b.min(fit(x, &c, signed).0);
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(data: &[Vec<f64>], k: usize, iterations: usize, signed: bool, seed: u64) -> Result<KMeansResult> {
    if k == 0 {
        return Err(Error::Config("codebook size must be positive".into()));
    }
    let dim = check_data(data, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_plus_plus(data, k, signed, &mut rng);
    let mut history = Vec::with_capacity(iterations + 1);
    let mut assign = vec![(0usize, false, 0.0f64); data.len()];
    for it in 0..=iterations {
        let mut total = 0.0;
        for (a, x) in assign.iter_mut().zip(data) {
            let mut best = (0, false, f64::INFINITY);
            for (j, c) in centroids.iter().enumerate() {
                let (e, neg) = fit(x, c, signed);
                if e < best.2 {
                    best = (j, neg, e);
                }
            }
            *a = best;
            total += best.2;
        }
        history.push(total / data.len() as f64);
        if it == iterations {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&(j, neg, _), x) in assign.iter().zip(data) {
            counts[j] += 1;
            for (s, v) in sums[j].iter_mut().zip(x) {
                *s += if neg { -v } else { *v };
            }
        }
        // empty clusters take the worst-fitting vectors
        let mut worst: Vec<usize> = (0..data.len()).collect();
        worst.sort_by(|&a, &b| assign[b].2.total_cmp(&assign[a].2).then(a.cmp(&b)));
        let mut worst = worst.into_iter();
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            } else if let Some(i) = worst.next() {
                centroids[j] = data[i].clone();
            }
        }
    }
    Ok(KMeansResult { centroids, history })
}

/// Plain k-means. Needs at least `k` vectors.
pub fn kmeans(data: &[Vec<f64>], k: usize, iterations: usize, seed: u64) -> Result<KMeansResult> {
    lloyd(data, k, iterations, false, seed)
}

/// k-means where each vector may match a centroid or its negation.
pub fn sign_kmeans(data: &[Vec<f64>], k: usize, iterations: usize, seed: u64) -> Result<KMeansResult> {
    lloyd(data, k, iterations, true, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistageResult {
    pub stages: Vec<Codebook>,
    /// Mean squared error after each stage (greedy residual encoding).
    pub stage_distortion: Vec<f64>,
    pub histories: Vec<Vec<f64>>,
}

/// Trains `stages` codebooks of `size` entries, each on the residuals left
/// by the previous ones.
pub fn train_multistage(
    vectors: &[Vec<f64>],
    stages: usize,
    size: usize,
    iterations: usize,
    seed: u64,
) -> Result<MultistageResult> {
    check_data(vectors, MIN_VECTORS_PER_CODEWORD * size)?;
    let mut residual = vectors.to_vec();
    let mut out = MultistageResult { stages: Vec::new(), stage_distortion: Vec::new(), histories: Vec::new() };
    for s in 0..stages {
        let km = kmeans(&residual, size, iterations, seed.wrapping_add(s as u64))?;
        let mut total = 0.0;
        for r in residual.iter_mut() {
            let j = (0..size)
                .min_by(|&a, &b| dist2(r, &km.centroids[a]).total_cmp(&dist2(r, &km.centroids[b])))
                .unwrap();
            for (v, c) in r.iter_mut().zip(&km.centroids[j]) {
                *v -= c;
            }
            total += r.iter().map(|v| v * v).sum::<f64>();
        }
        out.stage_distortion.push(total / residual.len() as f64);
        out.stages.push(Codebook::from_rows(&km.centroids)?);
        out.histories.push(km.history);
    }
    Ok(out)
}

/// Sign codebook of `2^bits` entries.
pub fn train_sign_codebook(residuals: &[Vec<f64>], bits: u32, iterations: usize, seed: u64) -> Result<(Codebook, KMeansResult)> {
    let size = 1usize << bits;
    check_data(residuals, MIN_VECTORS_PER_CODEWORD * size)?;
    let km = sign_kmeans(residuals, size, iterations, seed)?;
    Ok((Codebook::from_rows(&km.centroids)?, km))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub anchor_stage_distortion: Vec<f64>,
    pub delta_avg_distortion: f64,
    pub delta_single_distortion: f64,
}

/// Trains every table from a frame sequence. Anchor stages use
/// coefficients 1..17 of all frames; the delta tables use the residuals of
/// each frame against the mean of (average table) or each of (single
/// table) its neighbours two frames away.
pub fn train_codebooks(frames: &[FeatureFrame], iterations: usize, seed: u64) -> Result<(Codebooks, TrainReport)> {
    let anchors: Vec<Vec<f64>> = frames.iter().map(|f| f.cepstrum[1..].to_vec()).collect();
    let mut avg = Vec::new();
    let mut single = Vec::new();
    for t in 2..frames.len().saturating_sub(2) {
        let (p, c, n) = (&frames[t - 2].cepstrum, &frames[t].cepstrum, &frames[t + 2].cepstrum);
        let m = midpoint(p, n);
        avg.push(c.iter().zip(&m).map(|(a, b)| a - b).collect::<Vec<f64>>());
        single.push(c.iter().zip(p).map(|(a, b)| a - b).collect::<Vec<f64>>());
        single.push(c.iter().zip(n).map(|(a, b)| a - b).collect::<Vec<f64>>());
    }
    let ms = train_multistage(&anchors, VQ_STAGES, VQ_SIZE, iterations, seed)?;
    let (delta_avg, avg_km) = train_sign_codebook(&avg, DELTA_AVG_SIZE.trailing_zeros(), iterations, seed ^ 0xa5a5)?;
    let (delta_single, single_km) =
        train_sign_codebook(&single, DELTA_SINGLE_SIZE.trailing_zeros(), iterations, seed ^ 0x5a5a)?;
    let stages: [Codebook; VQ_STAGES] = ms.stages.try_into().expect("stage count");
    let cb = Codebooks { stages, delta_avg, delta_single, seed };
    cb.validate()?;
    let report = TrainReport {
        anchor_stage_distortion: ms.stage_distortion,
        delta_avg_distortion: avg_km.distortion(),
        delta_single_distortion: single_km.distortion(),
    };
    Ok((cb, report))
}
