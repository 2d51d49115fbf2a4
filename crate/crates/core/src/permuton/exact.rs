//! Exact pattern densities for the diagonal block families.
//!
//! Points in distinct diagonal blocks compare as the blocks do, so a pattern
//! `σ` can only arise as a direct sum `τ₁ ⊕ … ⊕ τ_r`, one summand per occupied
//! block. Within a monotone block the points are decreasing; within a square
//! block all orders are equally likely.

use super::Permuton;
use crate::error::{Error, Result};
use crate::param::Alpha;
use crate::perm::{factorial, Permutation};

/// Largest pattern order for the block enumeration.
pub const MAX_DIAGONAL_ORDER: usize = 7;

/// `d(σ, μ)` for the monotone and square geometric families, truncated to the
/// first `J` blocks with `k·α^J ≤ tail_epsilon`.
pub fn density_exact_diagonal(mu: &Permuton, sigma: &Permutation, tail_epsilon: f64) -> Result<f64> {
    let (alpha, monotone) = match mu {
        Permuton::MonotoneGeometric { alpha } => (*alpha, true),
        Permuton::SquareGeometric { alpha } => (*alpha, false),
        _ => {
            return Err(Error::invalid(
                "exact diagonal densities need a monotone or square geometric permuton",
            ))
        }
    };
    let k = sigma.len();
    if k > MAX_DIAGONAL_ORDER {
        return Err(Error::UnsupportedSize(format!(
            "exact diagonal densities support order ≤ {MAX_DIAGONAL_ORDER}, got {k}"
        )));
    }
    if !(tail_epsilon > 0.0) {
        return Err(Error::invalid("tail epsilon must be positive"));
    }
    let blocks = alpha.blocks_for_tail(tail_epsilon, k as f64);
    let v = sigma.zero_based();
    // cut c is admissible when the first c entries are exactly {0, …, c−1}
    let mut prefix_max = 0u32;
    let cuts: Vec<usize> = (1..k)
        .filter(|&c| {
            prefix_max = prefix_max.max(v[c - 1]);
            prefix_max as usize == c - 1
        })
        .collect();
    let mut total = 0.0;
    for mask in 0u32..(1 << cuts.len()) {
        let mut bounds = vec![0];
        bounds.extend(cuts.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &c)| c));
        bounds.push(k);
        let sizes: Vec<usize> = bounds.windows(2).map(|w| w[1] - w[0]).collect();
        let mut factor = factorial(k) as f64;
        let mut feasible = true;
        for w in bounds.windows(2) {
            let m = w[1] - w[0];
            factor /= factorial(m) as f64;
            if monotone {
                feasible &= v[w[0]..w[1]].windows(2).all(|p| p[0] > p[1]);
            } else {
                factor /= factorial(m) as f64;
            }
        }
        if feasible {
            total += factor * increasing_block_sum(alpha, &sizes, blocks);
        }
    }
    Ok(total)
}

/// `Σ_{i₁<…<i_r<J} ∏ w_{i_j}^{m_j}` with `w_i` the block weights.
fn increasing_block_sum(alpha: Alpha, sizes: &[usize], blocks: usize) -> f64 {
    let r = sizes.len();
    let mut dp = vec![0.0; r + 1];
    dp[0] = 1.0;
    for b in 0..blocks {
        let w = alpha.block_weight(b);
        for l in (1..=r).rev() {
            dp[l] += dp[l - 1] * w.powi(sizes[l - 1] as i32);
        }
    }
    dp[r]
}

/// Exact `d(σ, μ)` where available: `1/k!` for the uniform permuton, the
/// diagonal block sum for the geometric families.
pub fn density_exact(mu: &Permuton, sigma: &Permutation, tail_epsilon: f64) -> Result<f64> {
    match mu {
        Permuton::Uniform => Ok(1.0 / factorial(sigma.len()) as f64),
        Permuton::MonotoneGeometric { .. } | Permuton::SquareGeometric { .. } => {
            density_exact_diagonal(mu, sigma, tail_epsilon)
        }
        _ => Err(Error::UnsupportedForm(
            "exact densities are available for uniform and geometric permutons only".into(),
        )),
    }
}
