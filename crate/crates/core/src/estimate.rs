use serde::{Deserialize, Serialize};
use std::fmt;

/// A Monte Carlo value together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    /// Bernoulli proportion `hits / samples` with standard error √(p̂(1−p̂)/N).
    pub fn from_counts(hits: u64, samples: u64) -> Self {
        assert!(samples >= 1, "an estimate needs at least one sample");
        let p = hits as f64 / samples as f64;
        Estimate {
            value: p,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }

    /// Sample mean with the standard error of the mean (unbiased variance).
    pub fn from_moments(moments: &Moments) -> Self {
        let n = moments.count;
        assert!(n >= 1, "an estimate needs at least one sample");
        let mean = moments.sum / n as f64;
        let std_error = if n > 1 {
            let var = ((moments.sum_sq - moments.sum * mean) / (n - 1) as f64).max(0.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            value: mean,
            std_error,
            samples: n,
        }
    }

    /// Whether `target` lies within `z` standard errors (or `floor`, whichever is larger).
    pub fn within(&self, target: f64, z: f64, floor: f64) -> bool {
        (self.value - target).abs() <= (z * self.std_error).max(floor)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Estimate {
            value: self.value * factor,
            std_error: self.std_error * factor.abs(),
            samples: self.samples,
        }
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {} (n={})", self.value, self.std_error, self.samples)
    }
}

/// Running first and second moments; merged chunk by chunk in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
}

impl Moments {
    pub fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.count += other.count;
    }
}
