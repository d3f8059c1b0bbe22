//! Sample-rate network weight and compute accounting.

use crate::SAMPLE_RATE;

/// `3 d N_A² + 3 N_B (N_A + N_B) + 2 N_B Q` as a real number.
pub fn count_weights_exact(n_a: usize, density: f64, n_b: usize, q: usize) -> f64 {
    let (n_a, n_b, q) = (n_a as f64, n_b as f64, q as f64);
    3.0 * density * n_a * n_a + 3.0 * n_b * (n_a + n_b) + 2.0 * n_b * q
}

/// [`count_weights_exact`] rounded to the nearest integer.
pub fn count_weights(n_a: usize, density: f64, n_b: usize, q: usize) -> u64 {
    count_weights_exact(n_a, density, n_b, q).round() as u64
}

/// GFLOPS at one multiply-add (two operations) per weight per sample.
pub fn gflops(weights: f64) -> f64 {
    2.0 * weights * SAMPLE_RATE as f64 / 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_size() {
        assert_eq!(count_weights(384, 0.10, 16, 256), 71629);
        let g = gflops(count_weights(384, 0.10, 16, 256) as f64);
        assert!((g - 2.292128).abs() < 1e-9);
    }

    #[test]
    fn dense_part_only_at_zero_density() {
        assert_eq!(count_weights(384, 0.0, 16, 256), 3 * 16 * 400 + 2 * 16 * 256);
    }
}
