//! Multi-stage VQ with an M-best survivor search.
//!
//! Survivor sets are built incrementally so that the set kept for `M` is
//! always a superset of the set kept for `M - 1`: the `M`-th survivor of a
//! stage is the best not-yet-chosen extension of the first `M` survivors
//! of the previous stage. For `M = 1` this is the greedy search; as `M`
//! grows the candidate sets are nested, so the final error can only go
//! down. The last stage is searched exhaustively over all survivors.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::quant::codebook::Codebook;

/// Survivor count used by the codec.
pub const DEFAULT_M_BEST: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct VqResult {
    pub indices: Vec<usize>,
    /// Squared error of the full multi-stage reconstruction.
    pub error: f64,
}

#[inline]
fn sq_dist(residual: &[f64], codeword: &[f64]) -> f64 {
    residual.iter().zip(codeword).map(|(r, c)| {
        let d = r - c;
        d * d
    }).sum()
}

struct Survivor {
    path: Vec<usize>,
    residual: Vec<f64>,
}

/// One child option of an expanded parent. `rank` is the parent's position
/// in lexicographic path order, so `(rank, index)` orders child paths.
struct Candidate {
    error: f64,
    rank: usize,
    index: usize,
    parent: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .error
            .total_cmp(&self.error)
            .then_with(|| (other.rank, other.index).cmp(&(self.rank, self.index)))
    }
}

/// Searches `stages` for the index tuple approximating `target`.
pub fn msvq_search(target: &[f64], stages: &[Codebook], m_best: usize) -> Result<VqResult> {
    if m_best == 0 {
        return Err(Error::Config("m_best must be at least 1".into()));
    }
    if stages.is_empty() || stages.iter().any(|s| s.is_empty()) {
        return Err(Error::Config("empty codebook stage".into()));
    }
    if let Some(s) = stages.iter().find(|s| s.dim() != target.len()) {
        return Err(Error::Config(format!(
            "target has {} dimensions but codebook has {}",
            target.len(),
            s.dim()
        )));
    }
    let dim = target.len();

    let mut survivors = vec![Survivor { path: Vec::new(), residual: target.to_vec() }];
    for cb in &stages[..stages.len() - 1] {
        let words: Vec<f64> = cb.data().iter().map(|&v| v as f64).collect();
        let mut order: Vec<usize> = (0..survivors.len()).collect();
        order.sort_by(|&a, &b| survivors[a].path.cmp(&survivors[b].path));
        let mut rank = vec![0; survivors.len()];
        for (r, &k) in order.iter().enumerate() {
            rank[k] = r;
        }

        let mut queues: Vec<BinaryHeap<Candidate>> = Vec::new();
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
        let mut next = Vec::with_capacity(m_best.min(survivors.len() * cb.len()));
        for k in 0..m_best {
            if k < survivors.len() {
                let residual = &survivors[k].residual;
                let children: Vec<Candidate> = words
                    .chunks_exact(dim)
                    .enumerate()
                    .map(|(i, w)| Candidate { error: sq_dist(residual, w), rank: rank[k], index: i, parent: k })
                    .collect();
                let mut q = BinaryHeap::from(children);
                if let Some(best) = q.pop() {
                    heap.push(best);
                }
                queues.push(q);
            }
            let Some(chosen) = heap.pop() else { break };
            if let Some(c) = queues[chosen.parent].pop() {
                heap.push(c);
            }
            let parent = &survivors[chosen.parent];
            let cw = &words[chosen.index * dim..(chosen.index + 1) * dim];
            let residual = parent.residual.iter().zip(cw).map(|(r, c)| r - c).collect();
            let mut path = parent.path.clone();
            path.push(chosen.index);
            next.push(Survivor { path, residual });
        }
        survivors = next;
    }

    let last = stages.last().unwrap();
    let words: Vec<f64> = last.data().iter().map(|&v| v as f64).collect();
    let mut best: Option<(f64, &Survivor, usize)> = None;
    for s in &survivors {
        for (i, w) in words.chunks_exact(dim).enumerate() {
            let err = sq_dist(&s.residual, w);
            let better = match &best {
                None => true,
                Some((be, bs, bi)) => {
                    err < *be || (err == *be && (s.path.as_slice(), i) < (bs.path.as_slice(), *bi))
                }
            };
            if better {
                best = Some((err, s, i));
            }
        }
    }
    let (error, s, i) = best.unwrap();
    let mut indices = s.path.clone();
    indices.push(i);
    Ok(VqResult { indices, error })
}

/// Sum of the selected codewords.
pub fn msvq_decode(indices: &[usize], stages: &[Codebook]) -> Vec<f64> {
    let dim = stages.first().map_or(0, |s| s.dim());
    let mut out = vec![0.0; dim];
    for (s, &i) in stages.iter().zip(indices) {
        for (o, &c) in out.iter_mut().zip(s.row(i)) {
            *o += c as f64;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cb(rows: usize, dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> Codebook {
        Codebook::new(rows, dim, (0..rows * dim).map(|_| (rng.gen_range(-1.0..1.0) * scale) as f32).collect()).unwrap()
    }

    #[test]
    fn m1_is_greedy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let stages = vec![random_cb(32, 4, 1.0, &mut rng), random_cb(32, 4, 0.3, &mut rng)];
        let t: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = msvq_search(&t, &stages, 1).unwrap();
        let first = (0..32)
            .min_by(|&a, &b| {
                let d = |i: usize| sq_dist(&t, &stages[0].row(i).iter().map(|&v| v as f64).collect::<Vec<_>>());
                d(a).total_cmp(&d(b))
            })
            .unwrap();
        assert_eq!(r.indices[0], first);
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let stages = vec![random_cb(8, 4, 1.0, &mut rng)];
        assert!(matches!(msvq_search(&[0.0; 3], &stages, 1), Err(Error::Config(_))));
        assert!(matches!(msvq_search(&[0.0; 4], &stages, 0), Err(Error::Config(_))));
    }

    #[test]
    fn exact_point_found_with_full_survivors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let stages: Vec<Codebook> = (0..3).map(|s| random_cb(16, 5, 1.0 / (1 + s) as f64, &mut rng)).collect();
        let t = msvq_decode(&[3, 11, 7], &stages);
        let r = msvq_search(&t, &stages, 1024).unwrap();
        assert_eq!(r.indices, vec![3, 11, 7]);
        assert!(r.error < 1e-20);
    }
}
