//! Streaming per-arm sample statistics.

use crate::error::{Error, Result};

/// Count, running mean and sum of squared deviations (Welford) for one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArmStatistics {
    count: u64,
    mean: f64,
    m2: f64,
}

impl ArmStatistics {
    pub const fn new() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    /// Folds one observation into the statistics.
    pub fn update(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFiniteObservation(x));
        }
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        // (x - old mean)(x - new mean) is nonnegative, so m2 never decreases
        self.m2 += delta * (x - self.mean);
        Ok(())
    }

    /// Value-returning form of [`update`](Self::update).
    pub fn with(mut self, x: f64) -> Result<Self> {
        self.update(x)?;
        Ok(self)
    }

    pub fn from_slice(xs: &[f64]) -> Result<Self> {
        xs.iter().try_fold(Self::new(), |s, &x| s.with(x))
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// `m2 / count`, the default (biased) estimator. `None` before any sample.
    pub fn biased_variance(&self) -> Option<f64> {
        (self.count >= 1).then(|| self.m2 / self.count as f64)
    }

    /// `m2 / (count - 1)`. `None` with fewer than two samples.
    pub fn unbiased_variance(&self) -> Option<f64> {
        (self.count >= 2).then(|| self.m2 / (self.count - 1) as f64)
    }

    pub fn biased_sd(&self) -> Option<f64> {
        self.biased_variance().map(f64::sqrt)
    }

    pub fn unbiased_sd(&self) -> Option<f64> {
        self.unbiased_variance().map(f64::sqrt)
    }

    /// Applies `x -> a*x + b` to every observation seen so far (`a > 0`).
    pub fn affine(&self, a: f64, b: f64) -> Self {
        if self.count == 0 {
            return *self;
        }
        Self {
            count: self.count,
            mean: a * self.mean + b,
            m2: a * a * self.m2,
        }
    }

    #[cfg(test)]
    pub(crate) fn from_parts(count: u64, mean: f64, m2: f64) -> Self {
        Self { count, mean, m2 }
    }
}
