//! Validated scalar parameters shared by permutons and graphons.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Ratio of a geometric block sequence, strictly inside `(0, 1)`.
///
/// Block `i` (zero-based) is `[1 − αⁱ, 1 − αⁱ⁺¹)` and has length `(1 − α)αⁱ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::invalid(format!("alpha must lie in (0,1), got {value}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Bounds `(z, z')` of block `i`.
    pub fn block_bounds(self, i: usize) -> (f64, f64) {
        let lo = self.0.powi(i as i32);
        (1.0 - lo, 1.0 - lo * self.0)
    }

    /// Length `(1 − α)αⁱ` of block `i`.
    pub fn block_weight(self, i: usize) -> f64 {
        (1.0 - self.0) * self.0.powi(i as i32)
    }

    /// Index and bounds of the block containing `t ∈ [0, 1)`.
    pub fn block_of(self, t: f64) -> (usize, f64, f64) {
        debug_assert!((0.0..1.0).contains(&t));
        let guess = ((1.0 - t).ln() / self.0.ln()).floor();
        let mut i = if guess.is_finite() && guess > 0.0 { guess as usize } else { 0 };
        loop {
            let (z, z_next) = self.block_bounds(i);
            if t < z && i > 0 {
                i -= 1;
            } else if t >= z_next {
                i += 1;
            } else {
                return (i, z, z_next);
            }
        }
    }

    /// Number of leading blocks whose complement has mass below `eps / scale`,
    /// i.e. the least `J` with `scale·α^J ≤ eps`.
    pub fn blocks_for_tail(self, eps: f64, scale: f64) -> usize {
        let j = ((eps / scale).ln() / self.0.ln()).ceil();
        if j.is_finite() && j > 0.0 {
            j as usize
        } else {
            1
        }
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Alpha::new(value)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::invalid(format!("probability must lie in [0,1], got {value}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
