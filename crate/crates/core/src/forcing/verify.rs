//! Numerical certification of the constraint systems that force the monotone
//! and square geometric permutons.

use crate::error::Result;
use crate::estimate::{Estimate, Moments};
use crate::mc;
use crate::param::Alpha;
use crate::perm::Permutation;
use crate::permuton::{density_exact, density_mc, pattern_counts_mc, Permuton, SamplePoint};
use rand::Rng;
use serde::Serialize;
use std::fmt::Write as _;

/// Outcome of one constraint check. `pass` holds iff `|value − target| ≤ tolerance`,
/// except for structural zero checks, which demand a literal zero count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcingReport {
    pub id: String,
    pub target: f64,
    pub value: f64,
    pub std_error: Option<f64>,
    pub samples: Option<u64>,
    pub tolerance: f64,
    pub pass: bool,
    pub method: &'static str,
}

impl ForcingReport {
    pub const CSV_HEADER: &'static str = "id,target,value,std_error,tolerance,pass";

    fn exact(id: &str, target: f64, value: f64, tolerance: f64) -> Self {
        ForcingReport {
            id: id.to_string(),
            target,
            value,
            std_error: None,
            samples: None,
            tolerance,
            pass: (value - target).abs() <= tolerance,
            method: "exact",
        }
    }

    fn mc(id: &str, target: f64, est: Estimate, tol: &Tolerances, floor: f64) -> Self {
        let tolerance = (tol.z * est.std_error).max(floor);
        ForcingReport {
            id: id.to_string(),
            target,
            value: est.value,
            std_error: Some(est.std_error),
            samples: Some(est.samples),
            tolerance,
            pass: (est.value - target).abs() <= tolerance,
            method: "mc",
        }
    }

    pub fn csv_row(&self) -> String {
        let se = self.std_error.map(|s| s.to_string()).unwrap_or_default();
        format!("{},{},{},{},{},{}", self.id, self.target, self.value, se, self.tolerance, self.pass)
    }
}

/// CSV table (header plus one row per report).
pub fn reports_csv(reports: &[ForcingReport]) -> String {
    let mut out = String::from(ForcingReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        writeln!(out, "{}", r.csv_row()).expect("write to string");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Standard errors allowed for Monte Carlo checks.
    pub z: f64,
    /// Lower bound on Monte Carlo tolerances.
    pub mc_floor: f64,
    /// Exact (truncated series) density checks.
    pub exact: f64,
    /// Pointwise closed-form residual checks.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { z: 4.0, mc_floor: 1e-4, exact: 1e-10, residual: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    /// Sampled tuples for density checks.
    pub samples: u64,
    /// Sampled support points for pointwise residual checks.
    pub support_samples: u64,
    /// Sampled roots for the squared-integrand check.
    pub roots: u64,
    /// Point pairs per inner batch when estimating three-point flags.
    pub inner_samples: u64,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 1_000_000,
            support_samples: 10_000,
            roots: 20_000,
            inner_samples: 64,
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }
}

const TAIL_EPSILON: f64 = 1e-15;

fn inversion_report(id: &str, mu: &Permuton, target: f64, cfg: &VerifyConfig) -> Result<Vec<ForcingReport>> {
    let inv: Permutation = "21".parse()?;
    let mut out = Vec::new();
    if let Ok(v) = density_exact(mu, &inv, TAIL_EPSILON) {
        out.push(ForcingReport::exact(&format!("{id}:exact"), target, v, cfg.tolerances.exact));
    }
    let est = density_mc(mu, &inv, cfg.samples, mc::derive_seed(cfg.seed, 2))?;
    out.push(ForcingReport::mc(&format!("{id}:mc"), target, est, &cfg.tolerances, cfg.tolerances.mc_floor));
    Ok(out)
}

/// Checks `μ` against the constraints forcing the monotone geometric permuton
/// with ratio `alpha`: no `231` or `312` occurrences, the inversion density
/// `(1−α)/(1+α)`, and the pointwise integrand
/// `1−x−y+F − α/(1−α)·(x+y−2F)` vanishing on the support.
pub fn verify_monotone_forcing(mu: &Permuton, alpha: Alpha, cfg: &VerifyConfig) -> Result<Vec<ForcingReport>> {
    let a = alpha.get();
    let mut reports = Vec::new();

    let counts = pattern_counts_mc(mu, 3, cfg.samples, mc::derive_seed(cfg.seed, 1))?;
    let bad = counts["231".parse::<Permutation>()?.rank() as usize] + counts["312".parse::<Permutation>()?.rank() as usize];
    let est = Estimate::from_counts(bad, cfg.samples);
    reports.push(ForcingReport {
        id: "monotone:231+312".into(),
        target: 0.0,
        value: est.value,
        std_error: Some(est.std_error),
        samples: Some(cfg.samples),
        tolerance: 0.0,
        pass: bad == 0,
        method: "zero-count",
    });

    reports.extend(inversion_report("monotone:d21", mu, (1.0 - a) / (1.0 + a), cfg)?);

    let points = mu.sample(cfg.support_samples as usize, mc::derive_seed(cfg.seed, 3));
    let worst = points
        .iter()
        .map(|p| {
            let f = mu.cdf(p.x, p.y);
            (1.0 - p.x - p.y + f - a / (1.0 - a) * (p.x + p.y - 2.0 * f)).abs()
        })
        .fold(0.0, f64::max);
    reports.push(ForcingReport {
        samples: Some(cfg.support_samples),
        method: "max-residual",
        ..ForcingReport::exact("monotone:integrand", 0.0, worst, cfg.tolerances.residual)
    });
    Ok(reports)
}

/// Blocks and grid used by the closed-form residual check.
pub const SQUARE_CHECK_BLOCKS: usize = 10;
pub const SQUARE_CHECK_GRID: usize = 20;

/// Largest residual of the block-interior identity
/// `(1−α)(F↗ − F↘·y₂/y₁) = α(F↖ + F↘ + F↖·y₁/y₂ + F↘·y₂/y₁)` over a grid of
/// interior points of the first diagonal blocks of `alpha`, with the quadrant
/// masses taken from `mu`.
pub fn square_closed_form_residual(mu: &Permuton, alpha: Alpha, blocks: usize, grid: usize) -> f64 {
    let a = alpha.get();
    let mut worst = 0.0f64;
    for i in 0..blocks {
        let (z, z2) = alpha.block_bounds(i);
        let len = z2 - z;
        for gx in 0..grid {
            for gy in 0..grid {
                let x = z + (gx as f64 + 0.5) / grid as f64 * len;
                let y = z + (gy as f64 + 0.5) / grid as f64 * len;
                let (y1, y2) = (y - z, z2 - y);
                let f = mu.quadrant_flags(x, y);
                let lhs = (1.0 - a) * (f.ne - f.se * y2 / y1);
                let rhs = a * (f.nw + f.se + f.nw * y1 / y2 + f.se * y2 / y1);
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

/// Inner-sample estimates of the three-point flags around a root.
#[derive(Debug, Clone, Copy, Default)]
struct ThreeFlags {
    nw: f64,
    ne: f64,
    sw: f64,
    se: f64,
}

fn three_flags<R: Rng + ?Sized>(mu: &Permuton, root: SamplePoint, rng: &mut R, pairs: u64) -> ThreeFlags {
    let mut hits = [0u64; 4];
    for _ in 0..pairs {
        let (p, q) = (mu.sample_point(rng), mu.sample_point(rng));
        for (u, v) in [(p, q), (q, p)] {
            // u precedes v in x order
            if u.x >= v.x {
                continue;
            }
            let (ux, uy) = (u.x - root.x, u.y - root.y);
            let (vx, vy) = (v.x - root.x, v.y - root.y);
            if ux < 0.0 && vx < 0.0 && uy > 0.0 && vy > 0.0 {
                hits[0] += 1;
            }
            if ux > 0.0 && vx > 0.0 && uy > 0.0 && vy < 0.0 {
                hits[1] += 1;
            }
            if ux < 0.0 && vx < 0.0 && uy > 0.0 && vy < 0.0 {
                hits[2] += 1;
            }
            if ux > 0.0 && vx > 0.0 && uy < 0.0 && vy < 0.0 {
                hits[3] += 1;
            }
        }
    }
    let n = pairs as f64;
    ThreeFlags {
        nw: hits[0] as f64 / n,
        ne: hits[1] as f64 / n,
        sw: hits[2] as f64 / n,
        se: hits[3] as f64 / n,
    }
}

/// Monte Carlo estimate of `∫ g² dμ` for the square-family integrand
/// `g = (1−α)(F↗f↘ − F↘f↗)f↖ − α(F↖f↖f↘ + F↘f↖f↘ + F↖f↙f↘ + F↘f↖f↗)`.
///
/// Two-point flags `F` come from the cdf. Each root gets four independent inner
/// batches: in every term the first three-point flag is read from one batch and
/// the second from another, and the two resulting copies of `g` are multiplied,
/// so the per-root value is an unbiased estimate of `g²`.
pub fn square_integral_mc(mu: &Permuton, alpha: Alpha, roots: u64, inner: u64, seed: u64) -> Result<Estimate> {
    if roots == 0 || inner == 0 {
        return Err(crate::Error::invalid("root and inner sample counts must be positive"));
    }
    let a = alpha.get();
    let chunks = mc::run_chunks(roots, seed, |rng, n| {
        let mut m = Moments::default();
        for _ in 0..n {
            let root = mu.sample_point(rng);
            let big = mu.quadrant_flags(root.x, root.y);
            let mut copy = || {
                let b = three_flags(mu, root, rng, inner);
                let c = three_flags(mu, root, rng, inner);
                (1.0 - a) * (big.ne * b.se * c.nw - big.se * b.ne * c.nw)
                    - a * (big.nw * b.nw * c.se + big.se * b.nw * c.se + big.nw * b.sw * c.se + big.se * b.nw * c.ne)
            };
            let g1 = copy();
            let g2 = copy();
            m.push(g1 * g2);
        }
        m
    });
    let mut total = Moments::default();
    for c in &chunks {
        total.merge(c);
    }
    Ok(Estimate::from_moments(&total))
}

/// Checks `μ` against the constraints forcing the square geometric permuton with
/// ratio `alpha`: the inversion density `(1−α)/(2(1+α))`, the block-interior
/// closed-form identity, and the vanishing of the squared integrand.
pub fn verify_square_forcing(mu: &Permuton, alpha: Alpha, cfg: &VerifyConfig) -> Result<Vec<ForcingReport>> {
    let a = alpha.get();
    let mut reports = inversion_report("square:d21", mu, (1.0 - a) / (2.0 * (1.0 + a)), cfg)?;
    let worst = square_closed_form_residual(mu, alpha, SQUARE_CHECK_BLOCKS, SQUARE_CHECK_GRID);
    reports.push(ForcingReport {
        method: "max-residual",
        ..ForcingReport::exact("square:closed-form", 0.0, worst, cfg.tolerances.residual)
    });
    let est = square_integral_mc(mu, alpha, cfg.roots, cfg.inner_samples, mc::derive_seed(cfg.seed, 4))?;
    reports.push(ForcingReport::mc("square:integral", 0.0, est, &cfg.tolerances, cfg.tolerances.residual));
    Ok(reports)
}
