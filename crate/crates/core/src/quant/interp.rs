//! 3-bit coding of `c[4k]` and `c[4k+2]` from decoded neighbours.
//!
//! Each vector picks its previous neighbour, the neighbours' mean, or its
//! next neighbour. Combination index table (first choice is for `c[4k]`,
//! second for `c[4k+2]`):
//!
//! | idx | c[4k] | c[4k+2] |
//! |-----|-------|---------|
//! | 0   | prev  | prev    |
//! | 1   | prev  | avg     |
//! | 2   | prev  | next    |
//! | 3   | avg   | prev    |
//! | 4   | avg   | avg     |
//! | 5   | avg   | next    |
//! | 6   | next  | avg     |
//! | 7   | next  | next    |
//!
//! (next, prev) would set both vectors to `c[4k+1]` and is not coded.

use crate::quant::delta::{midpoint, Cepstrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Choice {
    Prev,
    Avg,
    Next,
}

pub const COMBOS: [(Choice, Choice); 8] = [
    (Choice::Prev, Choice::Prev),
    (Choice::Prev, Choice::Avg),
    (Choice::Prev, Choice::Next),
    (Choice::Avg, Choice::Prev),
    (Choice::Avg, Choice::Avg),
    (Choice::Avg, Choice::Next),
    (Choice::Next, Choice::Avg),
    (Choice::Next, Choice::Next),
];

fn pick(choice: Choice, prev: &Cepstrum, next: &Cepstrum) -> Cepstrum {
    match choice {
        Choice::Prev => *prev,
        Choice::Avg => midpoint(prev, next),
        Choice::Next => *next,
    }
}

fn sq_err(a: &Cepstrum, b: &Cepstrum) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `prev`, `mid`, `next` are the decoded `c[4k-1]`, `c[4k+1]`, `c[4k+3]`.
/// Returns the combination with the least summed squared error, the lowest
/// index on ties.
pub fn encode_interpolation(
    c4k: &Cepstrum,
    c4k2: &Cepstrum,
    prev: &Cepstrum,
    mid: &Cepstrum,
    next: &Cepstrum,
) -> u8 {
    let mut best = 0;
    let mut best_err = f64::INFINITY;
    for (i, &(a, b)) in COMBOS.iter().enumerate() {
        let err = sq_err(c4k, &pick(a, prev, mid)) + sq_err(c4k2, &pick(b, mid, next));
        if err < best_err {
            best_err = err;
            best = i as u8;
        }
    }
    best
}

pub fn decode_interpolation(idx: u8, prev: &Cepstrum, mid: &Cepstrum, next: &Cepstrum) -> (Cepstrum, Cepstrum) {
    let (a, b) = COMBOS[(idx & 7) as usize];
    (pick(a, prev, mid), pick(b, mid, next))
}
