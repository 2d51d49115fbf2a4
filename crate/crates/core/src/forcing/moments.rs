//! Cauchy–Schwarz defect of a permuton on rectangles spanned by support points.
//!
//! For a rectangle `Q` with lower-left corner `c`, let `A(q) = (q_x−c_x)(q_y−c_y)`
//! and `B(q) = μ([c_x,q_x] × [c_y,q_y])`. The defect
//! `∫∫_{Q×Q} A(q')²B(q)² − A(q)B(q)A(q')B(q') dq dq'` is nonnegative and vanishes
//! iff `μ` restricted to `Q` is a multiple of Lebesgue measure. Integrating it
//! over μ-random corner points gives a statistic that is zero exactly when
//! every admissible rectangle carries uniform (or zero) mass.

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Moments};
use crate::mc;
use crate::permuton::Permuton;
use rand::Rng;

/// Which rectangles the statistic inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    /// Points `p₁, p₂` with `x₁ < x₂`, `y₁ > y₂`; rectangle `[x₁,x₂] × [y₂,y₁]`.
    TwoPoint,
    /// Points `p₁, p₂, p₃` with `x₁ < x₂ < x₃`, `y₂ < y₃ < y₁`; rectangle `[x₂,x₃] × [y₂,y₃]`.
    ThreePoint,
}

/// Monte Carlo estimate of the defect integral: `samples` corner configurations
/// drawn from μ, each admissible one scored by `inner_samples` pairs of uniform
/// points of its rectangle (scaled by the squared rectangle area); inadmissible
/// configurations score zero.
pub fn moment_uniformity_statistic(
    mu: &Permuton,
    mode: MomentMode,
    samples: u64,
    inner_samples: u64,
    seed: u64,
) -> Result<Estimate> {
    if samples == 0 || inner_samples == 0 {
        return Err(Error::invalid("outer and inner sample counts must be positive"));
    }
    let chunks = mc::run_chunks(samples, seed, |rng, n| {
        let mut m = Moments::default();
        for _ in 0..n {
            let rect = match mode {
                MomentMode::TwoPoint => {
                    let (p1, p2) = (mu.sample_point(rng), mu.sample_point(rng));
                    (p1.x < p2.x && p1.y > p2.y).then_some((p1.x, p2.x, p2.y, p1.y))
                }
                MomentMode::ThreePoint => {
                    let (p1, p2, p3) = (mu.sample_point(rng), mu.sample_point(rng), mu.sample_point(rng));
                    (p1.x < p2.x && p2.x < p3.x && p2.y < p3.y && p3.y < p1.y)
                        .then_some((p2.x, p3.x, p2.y, p3.y))
                }
            };
            m.push(match rect {
                Some((x0, x1, y0, y1)) => rectangle_defect(mu, rng, x0, x1, y0, y1, inner_samples),
                None => 0.0,
            });
        }
        m
    });
    let mut total = Moments::default();
    for c in &chunks {
        total.merge(c);
    }
    Ok(Estimate::from_moments(&total))
}

fn rectangle_defect<R: Rng + ?Sized>(mu: &Permuton, rng: &mut R, x0: f64, x1: f64, y0: f64, y1: f64, inner: u64) -> f64 {
    let area = (x1 - x0) * (y1 - y0);
    let mut draw = || {
        let qx = x0 + rng.gen::<f64>() * (x1 - x0);
        let qy = y0 + rng.gen::<f64>() * (y1 - y0);
        ((qx - x0) * (qy - y0), mu.rect_mass(x0, qx, y0, qy))
    };
    let mut sum = 0.0;
    for _ in 0..inner {
        let (a, b) = draw();
        let (a2, b2) = draw();
        sum += a2 * a2 * b * b - a * b * a2 * b2;
    }
    area * area * sum / inner as f64
}
