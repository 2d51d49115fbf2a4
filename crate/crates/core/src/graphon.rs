//! Graphons: symmetric kernels on the unit square, plus the permuton-induced
//! graphons that are only available through their sampler.

use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::graph::{CanonicalCache, Graph, GraphKey, MAX_KEY_ORDER};
use crate::mc;
use crate::param::{Alpha, Probability};
use crate::permuton::Permuton;
use crate::perm::factorial;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const SUM_TOL: f64 = 1e-9;

/// A block-size sequence: explicit leading sizes, optionally continued by a
/// geometric tail. With `h` leading sizes and tail ratio `α`, the tail covers
/// `[1 − α^h, 1)` and block `h + i` has size `α^h(1−α)αⁱ`. Without a tail,
/// mass not covered by a block belongs to no block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBlocks")]
pub struct BlockSizes {
    head: Vec<f64>,
    tail_alpha: Option<Alpha>,
    #[serde(skip_serializing)]
    starts: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBlocks {
    #[serde(default)]
    head: Vec<f64>,
    #[serde(default)]
    tail_alpha: Option<Alpha>,
}

impl TryFrom<RawBlocks> for BlockSizes {
    type Error = Error;

    fn try_from(raw: RawBlocks) -> Result<Self> {
        BlockSizes::new(raw.head, raw.tail_alpha)
    }
}

/// Location of a block: index, start and size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub index: usize,
    pub start: f64,
    pub size: f64,
}

impl BlockSizes {
    pub fn new(head: Vec<f64>, tail_alpha: Option<Alpha>) -> Result<Self> {
        if head.iter().any(|&a| !(a.is_finite() && a >= 0.0)) {
            return Err(Error::invalid("block sizes must be nonnegative"));
        }
        let sum: f64 = head.iter().sum();
        match tail_alpha {
            Some(alpha) => {
                let tail = alpha.get().powi(head.len() as i32);
                if (sum + tail - 1.0).abs() > SUM_TOL {
                    return Err(Error::invalid(format!(
                        "leading sizes sum to {sum} but the geometric tail needs {}",
                        1.0 - tail
                    )));
                }
            }
            None => {
                if sum > 1.0 + SUM_TOL {
                    return Err(Error::invalid(format!("block sizes sum to {sum} > 1")));
                }
            }
        }
        let mut starts = Vec::with_capacity(head.len() + 1);
        let mut acc = 0.0;
        starts.push(0.0);
        for &a in &head {
            acc += a;
            starts.push(acc);
        }
        Ok(BlockSizes { head, tail_alpha, starts })
    }

    /// `a_i = (1−α)α^{i−1}`.
    pub fn geometric(alpha: Alpha) -> Self {
        BlockSizes::new(Vec::new(), Some(alpha)).expect("valid geometric sizes")
    }

    /// Replaces the first `head.len()` sizes of the geometric sequence for `alpha`.
    pub fn perturbed_geometric(head: Vec<f64>, alpha: Alpha) -> Result<Self> {
        BlockSizes::new(head, Some(alpha))
    }

    pub fn head(&self) -> &[f64] {
        &self.head
    }

    pub fn tail_alpha(&self) -> Option<Alpha> {
        self.tail_alpha
    }

    /// Size of block `i`.
    pub fn size(&self, i: usize) -> f64 {
        let h = self.head.len();
        if i < h {
            self.head[i]
        } else {
            match self.tail_alpha {
                Some(alpha) => alpha.get().powi(h as i32) * alpha.block_weight(i - h),
                None => 0.0,
            }
        }
    }

    /// The block containing `t ∈ [0, 1)`, if any.
    pub fn block_of(&self, t: f64) -> Option<Block> {
        let h = self.head.len();
        let head_end = self.starts[h];
        if t < head_end {
            let i = self.starts.partition_point(|&s| s <= t) - 1;
            return Some(Block { index: i, start: self.starts[i], size: self.head[i] });
        }
        let alpha = self.tail_alpha?;
        let scale = alpha.get().powi(h as i32);
        let tail_start = 1.0 - scale;
        let u = ((t - tail_start) / scale).clamp(0.0, 1.0 - f64::EPSILON);
        let (i, z, z2) = alpha.block_of(u);
        Some(Block {
            index: h + i,
            start: tail_start + scale * z,
            size: scale * (z2 - z),
        })
    }

    /// `Σ_j a_j^ℓ`, the geometric tail summed in closed form.
    pub fn power_sum(&self, ell: u32) -> f64 {
        let head: f64 = self.head.iter().map(|a| a.powi(ell as i32)).sum();
        match self.tail_alpha {
            Some(alpha) => {
                let a = alpha.get();
                let scale = a.powi((self.head.len() as u32 * ell) as i32);
                head + scale * (1.0 - a).powi(ell as i32) / (1.0 - a.powi(ell as i32))
            }
            None => head,
        }
    }
}

/// A step kernel: constant `values[i][j]` on the product of width intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepKernel")]
pub struct StepKernel {
    values: Vec<Vec<f64>>,
    widths: Vec<f64>,
    #[serde(skip_serializing)]
    starts: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStepKernel {
    values: Vec<Vec<f64>>,
    widths: Vec<f64>,
}

impl TryFrom<RawStepKernel> for StepKernel {
    type Error = Error;

    fn try_from(raw: RawStepKernel) -> Result<Self> {
        StepKernel::new(raw.values, raw.widths)
    }
}

impl StepKernel {
    pub fn new(values: Vec<Vec<f64>>, widths: Vec<f64>) -> Result<Self> {
        let k = widths.len();
        if k == 0 || widths.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::invalid("step widths must be positive"));
        }
        let total: f64 = widths.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("step widths sum to {total}, not 1")));
        }
        if values.len() != k || values.iter().any(|r| r.len() != k) {
            return Err(Error::invalid(format!("step values must be {k}×{k}")));
        }
        for i in 0..k {
            for j in 0..k {
                let v = values[i][j];
                if !(0.0..=1.0).contains(&v) || v != values[j][i] {
                    return Err(Error::invalid(format!(
                        "step values must be symmetric and in [0,1]; entry ({i},{j}) is {v}"
                    )));
                }
            }
        }
        let mut starts = vec![0.0];
        let mut acc = 0.0;
        for &w in &widths[..k - 1] {
            acc += w;
            starts.push(acc);
        }
        Ok(StepKernel { values, widths, starts })
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    fn part(&self, t: f64) -> usize {
        self.starts.partition_point(|&s| s <= t).max(1) - 1
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        self.values[self.part(x)][self.part(y)]
    }
}

/// A graphon in one of the supported representations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Graphon {
    Constant { rho: Probability },
    Step(StepKernel),
    /// Indicator of the diagonal blocks.
    CliqueBlocks { blocks: BlockSizes },
    /// A rescaled copy of `base` on every diagonal block, zero elsewhere.
    Planted { base: Box<Graphon>, blocks: BlockSizes },
    /// The inversion graphon of a permuton: latent points are μ-distributed and
    /// two vertices are adjacent iff their points form an inversion.
    PermutonInduced { permuton: Permuton },
}

impl Graphon {
    pub fn constant(rho: f64) -> Result<Self> {
        Ok(Graphon::Constant { rho: Probability::new(rho)? })
    }

    pub fn clique_blocks_geometric(alpha: f64) -> Result<Self> {
        Ok(Graphon::CliqueBlocks {
            blocks: BlockSizes::geometric(Alpha::new(alpha)?),
        })
    }

    /// `Constant(ρ)` planted on the geometric blocks of `α`.
    pub fn planted_constant(rho: f64, alpha: f64) -> Result<Self> {
        Ok(Graphon::Planted {
            base: Box::new(Graphon::constant(rho)?),
            blocks: BlockSizes::geometric(Alpha::new(alpha)?),
        })
    }

    /// Pointwise kernel value; unsupported for permuton-induced graphons.
    pub fn kernel(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            Graphon::Constant { rho } => Ok(rho.get()),
            Graphon::Step(step) => Ok(step.value(x, y)),
            Graphon::CliqueBlocks { blocks } => Ok(match (blocks.block_of(x), blocks.block_of(y)) {
                (Some(a), Some(b)) if a.index == b.index => 1.0,
                _ => 0.0,
            }),
            Graphon::Planted { base, blocks } => match (blocks.block_of(x), blocks.block_of(y)) {
                (Some(a), Some(b)) if a.index == b.index => {
                    let rel = |t: f64| ((t - a.start) / a.size).clamp(0.0, 1.0 - f64::EPSILON);
                    base.kernel(rel(x), rel(y))
                }
                (_, _) if base.has_kernel() => Ok(0.0),
                _ => base.kernel(0.0, 0.0),
            },
            Graphon::PermutonInduced { .. } => Err(Error::UnsupportedForm(
                "a permuton-induced graphon has no pointwise kernel; use sampling".into(),
            )),
        }
    }

    pub fn has_kernel(&self) -> bool {
        match self {
            Graphon::PermutonInduced { .. } => false,
            Graphon::Planted { base, .. } => base.has_kernel(),
            _ => true,
        }
    }

    fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, edge: &mut dyn FnMut(usize, usize)) {
        let bernoulli = |rng: &mut R, p: f64| p >= 1.0 || (p > 0.0 && rng.gen::<f64>() < p);
        match self {
            Graphon::Constant { rho } => {
                let p = rho.get();
                for j in 1..n {
                    for i in 0..j {
                        if bernoulli(rng, p) {
                            edge(i, j);
                        }
                    }
                }
            }
            Graphon::Step(_) | Graphon::CliqueBlocks { .. } => {
                let xs: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
                for j in 1..n {
                    for i in 0..j {
                        let p = self.kernel(xs[i], xs[j]).expect("kernel form");
                        if bernoulli(rng, p) {
                            edge(i, j);
                        }
                    }
                }
            }
            Graphon::Planted { base, blocks } => {
                let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for v in 0..n {
                    if let Some(b) = blocks.block_of(rng.gen()) {
                        groups.entry(b.index).or_default().push(v);
                    }
                }
                for members in groups.values() {
                    base.sample_with(rng, members.len(), &mut |i, j| edge(members[i], members[j]));
                }
            }
            Graphon::PermutonInduced { permuton } => {
                let pts: Vec<_> = (0..n).map(|_| permuton.sample_point(rng)).collect();
                for j in 1..n {
                    for i in 0..j {
                        if (pts[i].x - pts[j].x) * (pts[i].y - pts[j].y) < 0.0 {
                            edge(i, j);
                        }
                    }
                }
            }
        }
    }

    /// A W-random graph of order `n`, reproducible from `seed`.
    pub fn sample_graph(&self, n: usize, seed: u64) -> Graph {
        let mut rng = mc::rng(seed);
        let mut g = Graph::empty(n);
        self.sample_with(&mut rng, n, &mut |i, j| g.add_edge(i, j));
        g
    }

    pub(crate) fn sample_key<R: Rng + ?Sized>(&self, rng: &mut R, k: usize) -> GraphKey {
        debug_assert!(k <= MAX_KEY_ORDER);
        let mut key = GraphKey { order: k as u8, mask: 0 };
        self.sample_with(rng, k, &mut |i, j| key.mask |= 1 << (j * (j - 1) / 2 + i));
        key
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::invalid("at least one sample is required"));
    }
    Ok(())
}

/// Monte Carlo estimate of `d(H, W)` for `|H| ≤ 8`.
pub fn density_mc(h: &Graph, w: &Graphon, samples: u64, seed: u64) -> Result<Estimate> {
    check_samples(samples)?;
    let target = h
        .canonical_key()
        .ok_or_else(|| Error::UnsupportedSize(format!("graph order {} exceeds {MAX_KEY_ORDER}", h.order())))?;
    let k = h.order();
    let hits: u64 = mc::run_chunks(samples, seed, |rng, n| {
        let mut cache = CanonicalCache::default();
        (0..n)
            .filter(|_| cache.canonical(w.sample_key(rng, k)) == target)
            .count() as u64
    })
    .into_iter()
    .sum();
    Ok(Estimate::from_counts(hits, samples))
}

/// Monte Carlo estimates of `d(H, W)` for every isomorphism class `H` of order
/// `k`, from one shared sample, keyed by canonical form.
pub fn graph_profile_mc(w: &Graphon, k: usize, samples: u64, seed: u64) -> Result<BTreeMap<GraphKey, Estimate>> {
    check_samples(samples)?;
    if k == 0 || k > MAX_KEY_ORDER {
        return Err(Error::UnsupportedSize(format!("graph order must lie in 1..={MAX_KEY_ORDER}, got {k}")));
    }
    let chunks = mc::run_chunks(samples, seed, |rng, n| {
        let mut cache = CanonicalCache::default();
        let mut counts: BTreeMap<GraphKey, u64> = BTreeMap::new();
        for _ in 0..n {
            *counts.entry(cache.canonical(w.sample_key(rng, k))).or_default() += 1;
        }
        counts
    });
    let mut total: BTreeMap<GraphKey, u64> = BTreeMap::new();
    for c in chunks {
        for (key, v) in c {
            *total.entry(key).or_default() += v;
        }
    }
    Ok(total
        .into_iter()
        .map(|(key, c)| (key, Estimate::from_counts(c, samples)))
        .collect())
}

/// Largest graph order for quadrature.
pub const MAX_QUADRATURE_ORDER: usize = 5;

/// Midpoint tensor-grid quadrature of `d(H, W) = k!/|Aut H| ∫ ∏_E W ∏_{non-E} (1−W)`.
pub fn density_quadrature(h: &Graph, w: &Graphon, grid: usize) -> Result<f64> {
    let k = h.order();
    if k == 0 || k > MAX_QUADRATURE_ORDER {
        return Err(Error::UnsupportedSize(format!(
            "quadrature supports 1 ≤ |H| ≤ {MAX_QUADRATURE_ORDER}, got {k}"
        )));
    }
    if grid < 2 {
        return Err(Error::invalid("quadrature grid must be at least 2"));
    }
    let mid = |a: usize| (a as f64 + 0.5) / grid as f64;
    let table: Vec<Vec<f64>> = (0..grid)
        .map(|a| (0..grid).map(|b| w.kernel(mid(a), mid(b))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let adj: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| h.has_edge(i, j)).collect()).collect();
    let rows: Vec<f64> = (0..grid)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![first];
            tuple_sum(&table, &adj, &mut idx, 1.0)
        })
        .collect();
    let sum: f64 = rows.iter().sum();
    let integral = sum / (grid as f64).powi(k as i32);
    Ok(integral * factorial(k) as f64 / h.automorphism_count() as f64)
}

fn tuple_sum(table: &[Vec<f64>], adj: &[Vec<bool>], idx: &mut Vec<usize>, weight: f64) -> f64 {
    let v = idx.len();
    if v == adj.len() {
        return weight;
    }
    let mut total = 0.0;
    for a in 0..table.len() {
        let mut f = weight;
        for (u, &b) in idx.iter().enumerate() {
            let p = table[b][a];
            f *= if adj[u][v] { p } else { 1.0 - p };
            if f == 0.0 {
                break;
            }
        }
        if f != 0.0 {
            idx.push(a);
            total += tuple_sum(table, adj, idx, f);
            idx.pop();
        }
    }
    total
}

/// Result of grid-refined quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub grid: usize,
    pub converged: bool,
}

/// Doubles the grid from `grid` until consecutive values agree within `tol`
/// or the grid exceeds `max_grid`.
pub fn density_quadrature_refined(h: &Graph, w: &Graphon, grid: usize, tol: f64, max_grid: usize) -> Result<Quadrature> {
    let mut g = grid;
    let mut prev = density_quadrature(h, w, g)?;
    while 2 * g <= max_grid {
        g *= 2;
        let next = density_quadrature(h, w, g)?;
        if (next - prev).abs() <= tol {
            return Ok(Quadrature { value: next, grid: g, converged: true });
        }
        prev = next;
    }
    Ok(Quadrature { value: prev, grid: g, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn clique_block_kernel() {
        let w = Graphon::clique_blocks_geometric(0.5).unwrap();
        assert_eq!(w.kernel(0.1, 0.4).unwrap(), 1.0);
        assert_eq!(w.kernel(0.1, 0.6).unwrap(), 0.0);
        assert_eq!(w.kernel(0.55, 0.7).unwrap(), 1.0);
        let p = Graphon::planted_constant(0.3, 0.5).unwrap();
        assert_eq!(p.kernel(0.55, 0.7).unwrap(), 0.3);
        assert_eq!(p.kernel(0.45, 0.7).unwrap(), 0.0);
        let induced = Graphon::PermutonInduced { permuton: Permuton::Uniform };
        assert!(matches!(induced.kernel(0.1, 0.2), Err(Error::UnsupportedForm(_))));
    }

    #[test]
    fn block_sizes() {
        let alpha = Alpha::new(0.5).unwrap();
        let g = BlockSizes::geometric(alpha);
        assert_abs_diff_eq!(g.power_sum(1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.power_sum(2), 1.0 / 3.0, epsilon = 1e-15);
        let b = g.block_of(0.8).unwrap();
        assert_eq!(b.index, 2);
        assert_abs_diff_eq!(b.start, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(b.size, 0.125, epsilon = 1e-15);
        let p = BlockSizes::perturbed_geometric(vec![0.49, 0.26], alpha).unwrap();
        assert_eq!(p.block_of(0.3).unwrap().index, 0);
        assert_eq!(p.block_of(0.5).unwrap().index, 1);
        let t = p.block_of(0.76).unwrap();
        assert_eq!(t.index, 2);
        assert_abs_diff_eq!(t.size, 0.125, epsilon = 1e-15);
        assert!(BlockSizes::perturbed_geometric(vec![0.5, 0.3], alpha).is_err());
        assert!(BlockSizes::new(vec![0.7, 0.5], None).is_err());
        assert!(BlockSizes::new(vec![0.5], None).unwrap().block_of(0.7).is_none());
    }

    #[test]
    fn step_kernel_validation() {
        assert!(StepKernel::new(vec![vec![0.0, 1.0], vec![0.5, 0.0]], vec![0.5, 0.5]).is_err());
        assert!(StepKernel::new(vec![vec![0.2]], vec![0.9]).is_err());
    }

    #[test]
    fn constant_samples() {
        assert_eq!(Graphon::constant(1.0).unwrap().sample_graph(7, 1), Graph::complete(7));
        assert_eq!(Graphon::constant(0.0).unwrap().sample_graph(7, 1).edge_count(), 0);
        let rev = Graphon::PermutonInduced { permuton: Permuton::decreasing() };
        assert_eq!(rev.sample_graph(9, 4), Graph::complete(9));
    }

    #[test]
    fn quadrature_examples() {
        let w = Graphon::constant(0.5).unwrap();
        assert_abs_diff_eq!(density_quadrature(&Graph::complete(2), &w, 2).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(density_quadrature(&Graph::complete(3), &w, 16).unwrap(), 0.125, epsilon = 1e-9);
        let err = density_quadrature(&Graph::complete(2), &w, 1);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn serde_round_trip() {
        let forms = vec![
            Graphon::constant(0.25).unwrap(),
            Graphon::clique_blocks_geometric(0.5).unwrap(),
            Graphon::planted_constant(0.5, 1.0 / 3.0).unwrap(),
            Graphon::Step(StepKernel::new(vec![vec![1.0, 0.2], vec![0.2, 0.0]], vec![0.25, 0.75]).unwrap()),
            Graphon::PermutonInduced { permuton: Permuton::Uniform },
        ];
        for w in forms {
            let text = serde_json::to_string(&w).unwrap();
            let back: Graphon = serde_json::from_str(&text).unwrap();
            assert_eq!(back, w, "{text}");
        }
    }
}
