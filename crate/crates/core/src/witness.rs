//! Perturbed block-size sequences that match the first `n` power sums of the
//! geometric sequence, and their certification against clique and planted densities.

use crate::clique::{clique_density_blocks, planted_density_constant, partitions_with_empties, CliqueUnion};
use crate::error::{Error, Result};
use crate::graphon::BlockSizes;
use crate::param::Alpha;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::BTreeSet;

/// Largest number of matched power sums.
pub const MAX_WITNESS_ORDER: usize = 10;
/// Upper bound on ε-halving retries.
pub const MAX_HALVINGS: u32 = 20;

/// Match `n` power sums of `a_i = (1−α)α^{i−1}` while moving `a_{n+1}` by `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessProblem {
    n: usize,
    alpha: Alpha,
    epsilon: f64,
}

impl WitnessProblem {
    pub fn new(n: usize, alpha: Alpha, epsilon: f64) -> Result<Self> {
        if n == 0 || n > MAX_WITNESS_ORDER {
            return Err(Error::UnsupportedSize(format!("n must lie in 1..={MAX_WITNESS_ORDER}, got {n}")));
        }
        let p = WitnessProblem { n, alpha, epsilon };
        let moved = p.a()[n] + epsilon;
        if !epsilon.is_finite() || !(moved > 0.0 && moved < 1.0) {
            return Err(Error::invalid(format!("a_{{n+1}} + ε = {moved} is outside (0,1)")));
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The first `n+1` geometric sizes.
    pub fn a(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.alpha.block_weight(i)).collect()
    }

    /// Full block sequence using `head` for the first `n+1` sizes.
    pub fn blocks(&self, head: &[f64]) -> Result<BlockSizes> {
        BlockSizes::perturbed_geometric(head.to_vec(), self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessResult {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `F_1, …, F_n` at `b`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Perturbation actually used after halving.
    pub epsilon: f64,
    pub halvings: u32,
    /// `max_i |F_i|` before each Newton step of the final attempt, and after the last.
    pub residual_history: Vec<f64>,
}

impl WitnessResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `‖b − a‖_∞`.
    pub fn distance(&self) -> f64 {
        self.a.iter().zip(&self.b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    /// CSV rows `index,a,b` (1-based index).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,a,b\n");
        for (i, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            out += &format!("{},{:.17e},{:.17e}\n", i + 1, a, b);
        }
        out
    }
}

/// `F_i(x) = Σ_{j ≤ n+1} (x_j^i − a_j^i)` for `i = 1, …, n` where `n + 1 = len`.
pub fn power_sum_residuals(x: &[f64], a: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.len() || x.is_empty() {
        return Err(Error::invalid(format!("length mismatch: {} vs {}", x.len(), a.len())));
    }
    let n = x.len() - 1;
    Ok((1..=n as i32)
        .map(|i| x.iter().zip(a).map(|(xj, aj)| xj.powi(i) - aj.powi(i)).sum())
        .collect())
}

/// `∂F_i/∂x_j = i·x_j^{i−1}` for `i, j = 1, …, n` (uses the first `n` entries of `x`).
pub fn jacobian(x: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| (i + 1) as f64 * x[j].powi(i as i32))
}

fn guard_ok(x: &[f64]) -> bool {
    x.iter().all(|&v| v > 0.0) && x.windows(2).all(|w| w[0] > w[1])
}

enum Attempt {
    Converged { x: Vec<f64>, iterations: usize, history: Vec<f64> },
    Failed,
}

fn newton(a: &[f64], epsilon: f64, max_iter: usize, tol: f64) -> Result<Attempt> {
    let n = a.len() - 1;
    let mut x = a.to_vec();
    x[n] += epsilon;
    let mut history = Vec::new();
    for it in 0..=max_iter {
        let f = power_sum_residuals(&x, a)?;
        let norm = f.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        history.push(norm);
        if norm <= tol {
            return Ok(Attempt::Converged { x, iterations: it, history });
        }
        if it == max_iter {
            break;
        }
        let lu = jacobian(&x, n).lu();
        let step = lu.solve(&-DVector::from_vec(f)).ok_or_else(|| {
            Error::Singular(format!("jacobian singular at iteration {it}, x = {:?}", &x[..n]))
        })?;
        for j in 0..n {
            x[j] += step[j];
        }
        if !step.iter().all(|s| s.is_finite()) || !guard_ok(&x) {
            return Ok(Attempt::Failed);
        }
    }
    Ok(Attempt::Failed)
}

/// Newton iteration on `x_1, …, x_n` with `x_{n+1} = a_{n+1} + ε` held fixed,
/// started at `a`. If an iterate leaves the positive, strictly decreasing cone
/// or the iteration does not converge, `ε` is halved and the solve restarted.
pub fn solve_witness(p: &WitnessProblem, max_iter: usize, tol: f64) -> Result<WitnessResult> {
    let a = p.a();
    let mut epsilon = p.epsilon;
    for halvings in 0..=MAX_HALVINGS {
        if let Attempt::Converged { x, iterations, history } = newton(&a, epsilon, max_iter, tol)? {
            let residuals = power_sum_residuals(&x, &a)?;
            return Ok(WitnessResult {
                a,
                b: x,
                residuals,
                iterations,
                converged: true,
                epsilon,
                halvings,
                residual_history: history,
            });
        }
        if halvings < MAX_HALVINGS {
            epsilon /= 2.0;
        }
    }
    let mut b = a.clone();
    b[p.n] += epsilon;
    let residuals = power_sum_residuals(&b, &a)?;
    Ok(WitnessResult {
        a,
        b,
        residuals,
        iterations: max_iter,
        converged: false,
        epsilon,
        halvings: MAX_HALVINGS,
        residual_history: Vec::new(),
    })
}

/// Thresholds for [`certify_witness`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifyConfig {
    /// Allowed mismatch of power sums `1..=n`.
    pub match_tol: f64,
    /// Required separation of power sum `n+1`.
    pub gap_threshold: f64,
    /// Allowed mismatch of planted densities.
    pub transfer_tol: f64,
    /// Edge density of the constant base graphon.
    pub rho: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig { match_tol: 1e-9, gap_threshold: 1e-8, transfer_tol: 1e-9, rho: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferCheck {
    pub graph: String,
    pub planted_a: f64,
    pub planted_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    /// `d(K_i, W^c_b) − d(K_i, W^c_a)` for `i = 1, …, n`.
    pub clique_differences: Vec<f64>,
    /// `|Σ b_j^{n+1} − Σ a_j^{n+1}|`.
    pub gap: f64,
    pub transfer: Vec<TransferCheck>,
    pub config: CertifyConfig,
}

impl Certification {
    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, d) in self.clique_differences.iter().enumerate() {
            out += &format!("clique_diff[{}] = {:.3e}\n", i + 1, d);
        }
        out += &format!("gap = {:.6e}\n", self.gap);
        for t in &self.transfer {
            out += &format!("planted[{}] = {:.15} vs {:.15}\n", t.graph, t.planted_a, t.planted_b);
        }
        out
    }
}

/// Clique unions with at most `n` vertices.
pub fn clique_unions_up_to(n: usize) -> Vec<CliqueUnion> {
    let mut seen = BTreeSet::new();
    for k in 1..=n {
        for rgs in partitions_with_empties(k, k) {
            let mut sizes = vec![0usize; rgs.iter().max().map_or(0, |m| m + 1)];
            for p in rgs {
                sizes[p] += 1;
            }
            seen.insert(CliqueUnion::new(sizes).expect("nonempty parts"));
        }
    }
    seen.into_iter().collect()
}

/// Checks (i) power sums `1..=n` agree, so `W^c_b` and `W^c_a` share the
/// densities of `K_1, …, K_n`; (ii) power sum `n+1` differs, so the graphons
/// differ; (iii) planting `Constant(ρ)` on `b` and on `a` gives the same density
/// for every clique union on at most `n` vertices.
pub fn certify_witness(r: &WitnessResult, p: &WitnessProblem, cfg: &CertifyConfig) -> Result<Certification> {
    let n = p.n;
    let fail = |check: &str, index: usize, detail: String| Error::CertificationFailed {
        check: check.to_string(),
        index,
        detail,
    };
    if !r.converged {
        return Err(fail("converged", 0, format!("max residual {:.3e}", r.max_residual())));
    }
    if r.b.len() != n + 1 {
        return Err(Error::invalid(format!("witness has {} entries, expected {}", r.b.len(), n + 1)));
    }
    let wa = p.blocks(&r.a)?;
    let wb = p.blocks(&r.b).map_err(|e| fail("i", 1, e.to_string()))?;
    let mut clique_differences = Vec::with_capacity(n);
    for i in 1..=n {
        let d = clique_density_blocks(&wb, i) - clique_density_blocks(&wa, i);
        if d.abs() > cfg.match_tol {
            return Err(fail("i", i, format!("d(K{i}) differs by {d:.3e}")));
        }
        clique_differences.push(d);
    }
    let gap = (clique_density_blocks(&wb, n + 1) - clique_density_blocks(&wa, n + 1)).abs();
    if !(gap > cfg.gap_threshold) {
        return Err(fail("ii", n + 1, format!("power sum gap {gap:.3e} ≤ {:.1e}", cfg.gap_threshold)));
    }
    let mut transfer = Vec::new();
    for (idx, h) in clique_unions_up_to(n).into_iter().enumerate() {
        let g = h.to_graph();
        let da = planted_density_constant(&g, cfg.rho, &wa)?;
        let db = planted_density_constant(&g, cfg.rho, &wb)?;
        if (da - db).abs() > cfg.transfer_tol {
            return Err(fail("iii", idx + 1, format!("planted density of {h} differs: {da} vs {db}")));
        }
        transfer.push(TransferCheck { graph: h.to_string(), planted_a: da, planted_b: db });
    }
    Ok(Certification { clique_differences, gap, transfer, config: *cfg })
}
