//! First-order pre-emphasis `E(z) = 1 - αz⁻¹` and its inverse.
//!
//! Both filters keep one sample of memory so that feeding a stream in
//! arbitrary chunks gives the same output as a single call.

pub const PREEMPHASIS: f64 = 0.85;

#[derive(Debug, Clone)]
pub struct PreEmphasis {
    alpha: f64,
    mem: f64,
}

impl Default for PreEmphasis {
    fn default() -> Self {
        Self::new()
    }
}

impl PreEmphasis {
    pub fn new() -> Self {
        Self::with_coefficient(PREEMPHASIS)
    }

    pub fn with_coefficient(alpha: f64) -> Self {
        Self { alpha, mem: 0.0 }
    }

    #[inline]
    pub fn process_sample(&mut self, x: f64) -> f64 {
        let y = x - self.alpha * self.mem;
        self.mem = x;
        y
    }

    pub fn process(&mut self, input: &[f64]) -> Vec<f64> {
        input.iter().map(|&x| self.process_sample(x)).collect()
    }

    pub fn reset(&mut self) {
        self.mem = 0.0;
    }
}

#[derive(Debug, Clone)]
pub struct DeEmphasis {
    alpha: f64,
    mem: f64,
}

impl Default for DeEmphasis {
    fn default() -> Self {
        Self::new()
    }
}

impl DeEmphasis {
    pub fn new() -> Self {
        Self::with_coefficient(PREEMPHASIS)
    }

    pub fn with_coefficient(alpha: f64) -> Self {
        Self { alpha, mem: 0.0 }
    }

    #[inline]
    pub fn process_sample(&mut self, x: f64) -> f64 {
        let y = x + self.alpha * self.mem;
        self.mem = y;
        y
    }

    pub fn process(&mut self, input: &[f64]) -> Vec<f64> {
        input.iter().map(|&x| self.process_sample(x)).collect()
    }

    pub fn memory(&self) -> f64 {
        self.mem
    }

    pub fn reset(&mut self) {
        self.mem = 0.0;
    }
}
