//! Permutons: probability measures on the unit square with uniform marginals.
//!
//! Every representation has a closed-form cdf, a sampler, and Monte Carlo
//! pattern densities. The two geometric families also have exact densities
//! (see [`density_exact_diagonal`]).

mod exact;
mod geometry;

pub use exact::{density_exact, density_exact_diagonal, MAX_DIAGONAL_ORDER};
pub use geometry::PolygonPiece;

use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::mc;
use crate::param::Alpha;
use crate::perm::{factorial, Permutation, MAX_PATTERN_ORDER};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tolerance for weight sums and marginal checks.
pub const MARGINAL_TOL: f64 = 1e-9;

/// A point of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
}

/// A finite mixture of uniform measures on convex pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct Mixture {
    pieces: Vec<PolygonPiece>,
    #[serde(skip_serializing)]
    picker: WeightedIndex<f64>,
}

#[derive(Deserialize)]
struct RawMixture {
    pieces: Vec<PolygonPiece>,
}

impl TryFrom<RawMixture> for Mixture {
    type Error = Error;

    fn try_from(raw: RawMixture) -> Result<Self> {
        Mixture::new(raw.pieces)
    }
}

impl Mixture {
    /// Checks that the weights sum to one and that both marginals are uniform
    /// on the grid `{0, 0.01, …, 1}`.
    pub fn new(pieces: Vec<PolygonPiece>) -> Result<Self> {
        let total: f64 = pieces.iter().map(|p| p.weight()).sum();
        if pieces.is_empty() || (total - 1.0).abs() > MARGINAL_TOL {
            return Err(Error::invalid(format!("mixture weights sum to {total}, not 1")));
        }
        let picker = WeightedIndex::new(pieces.iter().map(|p| p.weight()))
            .map_err(|e| Error::invalid(format!("mixture weights: {e}")))?;
        let mixture = Mixture { pieces, picker };
        let defect = marginal_defect(|x, y| mixture.cdf(x, y), 100);
        if defect > MARGINAL_TOL {
            return Err(Error::invalid(format!(
                "mixture marginals are not uniform (max deviation {defect:.3e})"
            )));
        }
        Ok(mixture)
    }

    pub fn pieces(&self) -> &[PolygonPiece] {
        &self.pieces
    }

    fn cdf(&self, x: f64, y: f64) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.weight() * p.lower_left_fraction(x, y))
            .sum()
    }
}

/// The step permuton: cell `(i, j)` of the `z`-grid carries mass `M_ij`
/// spread uniformly, with `i` indexing the x-block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep")]
pub struct StepMatrix {
    m: Vec<Vec<f64>>,
    z: Vec<f64>,
    #[serde(skip_serializing)]
    starts: Vec<f64>,
    #[serde(skip_serializing)]
    picker: WeightedIndex<f64>,
}

#[derive(Deserialize)]
struct RawStep {
    m: Vec<Vec<f64>>,
    z: Vec<f64>,
}

impl TryFrom<RawStep> for StepMatrix {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepMatrix::new(raw.m, raw.z)
    }
}

impl StepMatrix {
    /// `z` positive summing to one; `M` nonnegative with row and column `i` summing to `z_i`.
    pub fn new(m: Vec<Vec<f64>>, z: Vec<f64>) -> Result<Self> {
        let k = z.len();
        if k == 0 || z.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::invalid("block widths must be positive"));
        }
        let total: f64 = z.iter().sum();
        if (total - 1.0).abs() > MARGINAL_TOL {
            return Err(Error::invalid(format!("block widths sum to {total}, not 1")));
        }
        if m.len() != k || m.iter().any(|row| row.len() != k) {
            return Err(Error::invalid(format!("the step matrix must be {k}×{k}")));
        }
        if m.iter().flatten().any(|&v| !(v.is_finite() && v >= 0.0)) {
            return Err(Error::invalid("step matrix entries must be nonnegative"));
        }
        for i in 0..k {
            let row: f64 = m[i].iter().sum();
            let col: f64 = m.iter().map(|r| r[i]).sum();
            if (row - z[i]).abs() > MARGINAL_TOL || (col - z[i]).abs() > MARGINAL_TOL {
                return Err(Error::invalid(format!(
                    "row {i} sums to {row} and column {i} to {col}, expected {}",
                    z[i]
                )));
            }
        }
        let mut starts = Vec::with_capacity(k + 1);
        let mut acc = 0.0;
        starts.push(0.0);
        for &w in &z {
            acc += w;
            starts.push(acc);
        }
        let picker = WeightedIndex::new(m.iter().flatten().copied())
            .map_err(|e| Error::invalid(format!("step matrix weights: {e}")))?;
        Ok(StepMatrix { m, z, starts, picker })
    }

    /// Three equal blocks with `M = [[0,0,1/3],[2/9,1/9,0],[1/9,2/9,0]]`.
    pub fn three_block_example() -> Self {
        let t = 1.0 / 3.0;
        let n = 1.0 / 9.0;
        StepMatrix::new(
            vec![vec![0.0, 0.0, t], vec![2.0 * n, n, 0.0], vec![n, 2.0 * n, 0.0]],
            vec![t, t, t],
        )
        .expect("valid example")
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn widths(&self) -> &[f64] {
        &self.z
    }

    fn coverage(&self, i: usize, t: f64) -> f64 {
        ((t - self.starts[i]) / self.z[i]).clamp(0.0, 1.0)
    }

    fn cdf(&self, x: f64, y: f64) -> f64 {
        let k = self.z.len();
        let cy: Vec<f64> = (0..k).map(|j| self.coverage(j, y)).collect();
        (0..k)
            .map(|i| {
                let cx = self.coverage(i, x);
                if cx == 0.0 {
                    0.0
                } else {
                    cx * self.m[i].iter().zip(&cy).map(|(v, c)| v * c).sum::<f64>()
                }
            })
            .sum()
    }
}

/// A permuton in one of the supported closed-form representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Permuton {
    /// Lebesgue measure on the square.
    Uniform,
    Mixture(Mixture),
    /// Weight `(1−α)α^{i−1}` on the anti-diagonal segment of the `i`-th diagonal block.
    MonotoneGeometric { alpha: Alpha },
    /// Weight `(1−α)α^{i−1}` spread uniformly over the `i`-th diagonal square.
    SquareGeometric { alpha: Alpha },
    StepMatrix(StepMatrix),
}

/// Masses of the four quadrants around a point: `sw` is the cdf itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrantFlags {
    pub sw: f64,
    pub nw: f64,
    pub se: f64,
    pub ne: f64,
}

impl Permuton {
    pub fn monotone(alpha: f64) -> Result<Self> {
        Ok(Permuton::MonotoneGeometric { alpha: Alpha::new(alpha)? })
    }

    pub fn square(alpha: f64) -> Result<Self> {
        Ok(Permuton::SquareGeometric { alpha: Alpha::new(alpha)? })
    }

    /// The uniform measure on the diagonal `{(t, t)}`.
    pub fn increasing() -> Self {
        let seg = PolygonPiece::segment([0.0, 0.0], [1.0, 1.0], 1.0).expect("valid segment");
        Permuton::Mixture(Mixture::new(vec![seg]).expect("valid mixture"))
    }

    /// The uniform measure on the anti-diagonal `{(t, 1−t)}`.
    pub fn decreasing() -> Self {
        let seg = PolygonPiece::segment([0.0, 1.0], [1.0, 0.0], 1.0).expect("valid segment");
        Permuton::Mixture(Mixture::new(vec![seg]).expect("valid mixture"))
    }

    /// `μ([0,x] × [0,y])`, in closed form for every representation.
    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x.clamp(0.0, 1.0), y.clamp(0.0, 1.0));
        if x >= 1.0 {
            return y;
        }
        if y >= 1.0 {
            return x;
        }
        match self {
            Permuton::Uniform => x * y,
            Permuton::Mixture(mix) => mix.cdf(x, y),
            Permuton::MonotoneGeometric { alpha } => {
                let (_, z, z2) = alpha.block_of(x.min(y));
                z + (x.min(z2) - z.max(z + z2 - y)).max(0.0)
            }
            Permuton::SquareGeometric { alpha } => {
                let (_, z, z2) = alpha.block_of(x.min(y));
                z + (x.min(z2) - z).max(0.0) * (y.min(z2) - z).max(0.0) / (z2 - z)
            }
            Permuton::StepMatrix(step) => step.cdf(x, y),
        }
    }

    pub fn quadrant_flags(&self, x: f64, y: f64) -> QuadrantFlags {
        let sw = self.cdf(x, y);
        QuadrantFlags {
            sw,
            nw: x - sw,
            se: y - sw,
            ne: 1.0 - x - y + sw,
        }
    }

    /// `μ([x0,x1] × [y0,y1])` by inclusion–exclusion on the cdf.
    pub fn rect_mass(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        if x1 <= x0 || y1 <= y0 {
            return 0.0;
        }
        (self.cdf(x1, y1) - self.cdf(x0, y1) - self.cdf(x1, y0) + self.cdf(x0, y0)).max(0.0)
    }

    /// One draw from the measure.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> SamplePoint {
        match self {
            Permuton::Uniform => SamplePoint { x: rng.gen(), y: rng.gen() },
            Permuton::Mixture(mix) => {
                let [x, y] = mix.pieces[mix.picker.sample(rng)].sample_point(rng);
                SamplePoint { x, y }
            }
            Permuton::MonotoneGeometric { alpha } => {
                let x: f64 = rng.gen();
                let (_, z, z2) = alpha.block_of(x);
                SamplePoint { x, y: z + z2 - x }
            }
            Permuton::SquareGeometric { alpha } => {
                let x: f64 = rng.gen();
                let (_, z, z2) = alpha.block_of(x);
                SamplePoint { x, y: z + rng.gen::<f64>() * (z2 - z) }
            }
            Permuton::StepMatrix(step) => {
                let cell = step.picker.sample(rng);
                let k = step.z.len();
                let (i, j) = (cell / k, cell % k);
                SamplePoint {
                    x: step.starts[i] + rng.gen::<f64>() * step.z[i],
                    y: step.starts[j] + rng.gen::<f64>() * step.z[j],
                }
            }
        }
    }

    /// `n` independent points, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<SamplePoint> {
        let mut rng = mc::rng(seed);
        (0..n).map(|_| self.sample_point(&mut rng)).collect()
    }

    /// Fills `points` with `n` draws having pairwise distinct x and y
    /// coordinates, sorted by x. Colliding points are redrawn.
    pub fn sample_distinct<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, points: &mut Vec<SamplePoint>) {
        points.clear();
        points.extend((0..n).map(|_| self.sample_point(rng)));
        let mut ys = Vec::with_capacity(n);
        loop {
            points.sort_by(|a, b| a.x.total_cmp(&b.x));
            let mut offending = (1..points.len()).find(|&i| points[i].x == points[i - 1].x);
            if offending.is_none() {
                ys.clear();
                ys.extend(points.iter().map(|p| p.y));
                ys.sort_by(f64::total_cmp);
                if let Some(w) = ys.windows(2).find(|w| w[0] == w[1]) {
                    offending = points.iter().position(|p| p.y == w[0]);
                }
            }
            match offending {
                Some(i) => points[i] = self.sample_point(rng),
                None => return,
            }
        }
    }

    /// A μ-random permutation of order `n`.
    pub fn sample_permutation(&self, n: usize, seed: u64) -> Result<Permutation> {
        if n == 0 {
            return Err(Error::invalid("a permutation has order at least 1"));
        }
        let mut rng = mc::rng(seed);
        let mut points = Vec::with_capacity(n);
        self.sample_distinct(&mut rng, n, &mut points);
        let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        Ok(Permutation::from_relative_order(&ys).expect("distinct coordinates"))
    }

    /// Largest deviation of the marginals from uniform on an `(steps+1)`-point grid.
    pub fn marginal_defect(&self, steps: usize) -> f64 {
        marginal_defect(|x, y| self.cdf(x, y), steps)
    }
}

fn marginal_defect(cdf: impl Fn(f64, f64) -> f64, steps: usize) -> f64 {
    (0..=steps)
        .map(|i| {
            let t = i as f64 / steps as f64;
            (cdf(t, 1.0) - t).abs().max((cdf(1.0, t) - t).abs())
        })
        .fold(0.0, f64::max)
}

/// Lexicographic rank of the pattern induced by `points`, which must be
/// sorted by x with distinct y values.
pub(crate) fn points_pattern_rank(points: &[SamplePoint]) -> u64 {
    let n = points.len();
    let mut rank = 0u64;
    for i in 0..n {
        let smaller = points[i + 1..].iter().filter(|p| p.y < points[i].y).count() as u64;
        rank = rank * (n - i) as u64 + smaller;
    }
    rank
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_PATTERN_ORDER {
        return Err(Error::UnsupportedSize(format!(
            "pattern order must lie in 1..={MAX_PATTERN_ORDER}, got {k}"
        )));
    }
    Ok(())
}

/// Occurrence counts of every pattern of order `k` (indexed by rank) in
/// `samples` μ-random `k`-tuples.
pub fn pattern_counts_mc(mu: &Permuton, k: usize, samples: u64, seed: u64) -> Result<Vec<u64>> {
    check_order(k)?;
    let size = factorial(k) as usize;
    let chunks = mc::run_chunks(samples, seed, |rng, n| {
        let mut counts = vec![0u64; size];
        let mut points = Vec::with_capacity(k);
        for _ in 0..n {
            mu.sample_distinct(rng, k, &mut points);
            counts[points_pattern_rank(&points) as usize] += 1;
        }
        counts
    });
    let mut total = vec![0u64; size];
    for c in chunks {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    Ok(total)
}

/// Monte Carlo estimates of `d(σ, μ)` for every `σ ∈ S_k` from one shared sample.
pub fn pattern_profile_mc(mu: &Permuton, k: usize, samples: u64, seed: u64) -> Result<Vec<Estimate>> {
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    Ok(pattern_counts_mc(mu, k, samples, seed)?
        .into_iter()
        .map(|c| Estimate::from_counts(c, samples))
        .collect())
}

/// Monte Carlo estimate of `d(σ, μ)` with standard error `√(p̂(1−p̂)/N)`.
pub fn density_mc(mu: &Permuton, sigma: &Permutation, samples: u64, seed: u64) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    let k = sigma.len();
    if k > 20 {
        return Err(Error::UnsupportedSize(format!("pattern order {k} exceeds 20")));
    }
    let target = sigma.rank();
    let hits: u64 = mc::run_chunks(samples, seed, |rng, n| {
        let mut points = Vec::with_capacity(k);
        (0..n)
            .filter(|_| {
                mu.sample_distinct(rng, k, &mut points);
                points_pattern_rank(&points) == target
            })
            .count() as u64
    })
    .into_iter()
    .sum();
    Ok(Estimate::from_counts(hits, samples))
}
