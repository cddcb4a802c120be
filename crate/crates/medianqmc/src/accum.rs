//! Compensated (Neumaier) summation.
//!
//! Replicate means sum up to 2^16 terms; plain accumulation would eat the
//! low bits the error-decomposition contracts (residual ≤ 2^−40) rely on.

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        // Neumaier's branch keeps the compensation valid when |v| > |sum|.
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn total(&self) -> f64 {
        self.sum + self.c
    }
}
