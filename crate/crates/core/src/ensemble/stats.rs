//! Mergeable running mean and variance.

use serde::{Deserialize, Serialize};

/// Count, mean and sum of squared deviations; merging two accumulators is
/// the pairwise update of Chan et al.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Stat {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut s = Self::new();
        values.into_iter().for_each(|v| s.push(v));
        s
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Stat) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// `NaN` when empty.
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Sample standard deviation; 0 for fewer than two values.
    pub fn std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).sqrt()
        }
    }

    /// `std / sqrt(count)`; 0 for fewer than two values.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.std() / (self.count as f64).sqrt()
        }
    }
}
