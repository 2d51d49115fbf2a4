//! Linear combinations of pattern densities representing integrals of
//! polynomials in the cdf and of products of rooted flags.

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Moments};
use crate::perm::{all_patterns, factorial, pattern_density, Permutation, RootedPermutation, MAX_PATTERN_ORDER};
use crate::permuton::{density_exact_diagonal, pattern_counts_mc, Permuton, MAX_DIAGONAL_ORDER};
use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// `Σ γ_σ d(σ, μ)` over patterns `σ` of a single order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityExpression {
    order: usize,
    terms: BTreeMap<Permutation, BigRational>,
}

impl DensityExpression {
    pub fn zero(order: usize) -> Self {
        DensityExpression { order, terms: BTreeMap::new() }
    }

    /// Builds an expression; zero coefficients are dropped.
    pub fn new(order: usize, terms: impl IntoIterator<Item = (Permutation, BigRational)>) -> Result<Self> {
        let mut e = DensityExpression::zero(order);
        for (sigma, c) in terms {
            if sigma.len() != order {
                return Err(Error::invalid(format!(
                    "pattern {sigma} does not have order {order}"
                )));
            }
            e.add_term(sigma, c);
        }
        Ok(e)
    }

    fn add_term(&mut self, sigma: Permutation, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(sigma) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<Permutation, BigRational> {
        &self.terms
    }

    pub fn coefficient(&self, sigma: &Permutation) -> BigRational {
        self.terms.get(sigma).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value on the uniform permuton, where every pattern of order `m` has density `1/m!`.
    pub fn uniform_value(&self) -> BigRational {
        let sum: BigRational = self.terms.values().cloned().sum();
        sum / BigRational::from_integer(BigInt::from(factorial(self.order)))
    }

    /// The same functional over patterns of order `m ≥ order`, using
    /// `d(σ, μ) = Σ_{τ ∈ S_m} d(σ, τ) d(τ, μ)`.
    pub fn lift_to(&self, m: usize) -> Result<Self> {
        if m < self.order {
            return Err(Error::invalid(format!("cannot lift order {} down to {m}", self.order)));
        }
        if m == self.order {
            return Ok(self.clone());
        }
        let taus = all_patterns(m)?;
        let coeffs: Vec<BigRational> = taus
            .par_iter()
            .map(|tau| {
                self.terms
                    .iter()
                    .map(|(sigma, c)| c * pattern_density(sigma, tau))
                    .sum()
            })
            .collect();
        DensityExpression::new(m, taus.into_iter().zip(coeffs))
    }

    /// `self + factor·other`, lifting both to the larger order.
    pub fn add_scaled(&self, other: &DensityExpression, factor: &BigRational) -> Result<Self> {
        let m = self.order.max(other.order);
        let mut out = self.lift_to(m)?;
        for (sigma, c) in other.lift_to(m)?.terms {
            out.add_term(sigma, c * factor);
        }
        Ok(out)
    }
}

impl fmt::Display for DensityExpression {
    /// One `pattern:coefficient` line per nonzero term, patterns in lexicographic order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (sigma, c) in &self.terms {
            writeln!(f, "{sigma}:{c}")?;
        }
        Ok(())
    }
}

impl FromStr for DensityExpression {
    type Err = Error;

    /// Parses `pattern:coefficient` lines; blank lines and `#` comments are skipped.
    /// An expression without terms needs an `order=<m>` line.
    fn from_str(s: &str) -> Result<Self> {
        let mut order = None;
        let mut terms = Vec::new();
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(m) = line.strip_prefix("order=") {
                order = Some(m.trim().parse().map_err(|_| Error::parse(format!("bad order line {line:?}")))?);
                continue;
            }
            let (p, c) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(format!("expected pattern:coefficient, got {line:?}")))?;
            let sigma: Permutation = p.parse()?;
            let c: BigRational = c.trim().parse().map_err(|_| Error::parse(format!("bad coefficient in {line:?}")))?;
            terms.push((sigma, c));
        }
        let order = match (order, terms.first()) {
            (Some(m), _) => m,
            (None, Some((sigma, _))) => sigma.len(),
            (None, None) => return Err(Error::parse("empty expression needs an order=<m> line")),
        };
        DensityExpression::new(order, terms)
    }
}

fn check_cap(m: usize) -> Result<()> {
    if m > MAX_PATTERN_ORDER {
        return Err(Error::UnsupportedSize(format!(
            "expression order {m} exceeds the cap {MAX_PATTERN_ORDER}"
        )));
    }
    Ok(())
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

/// Number of ways to place the labelled sample points on the non-root positions
/// of a pattern: `a` points must land left of the x-reference, `b` points below
/// the y-reference and `k` points in both regions. `in_x[i]`, `in_y[i]` describe
/// the non-root positions.
fn placements(in_x: &[bool], in_y: &[bool], a: usize, b: usize, k: usize) -> BigInt {
    let (mut nb, mut nx, mut ny) = (0usize, 0usize, 0usize);
    for (&x, &y) in in_x.iter().zip(in_y) {
        match (x, y) {
            (true, true) => nb += 1,
            (true, false) => nx += 1,
            (false, true) => ny += 1,
            (false, false) => return BigInt::zero(),
        }
    }
    if nx > a || ny > b || nb < k {
        return BigInt::zero();
    }
    binomial(big(nb as u64), big(k as u64))
        * big(factorial(k))
        * binomial(big((nb - k) as u64), big((a - nx) as u64))
        * big(factorial(a))
        * big(factorial(b))
}

/// Expression for `∫ x^a y^b F_μ(x,y)^k dλ`, valid on every permuton μ.
///
/// `γ_σ` is the probability that a uniformly random assignment of `m = a+b+k+2`
/// labelled points to the positions of `σ` puts the first `a` points left of
/// the x-reference point, the next `b` below the y-reference point and the
/// last `k` in both regions.
pub fn express_lambda_integral(a: usize, b: usize, k: usize) -> Result<DensityExpression> {
    let m = a + b + k + 2;
    check_cap(m)?;
    let denom = BigRational::from_integer(big(factorial(m)));
    let terms: Vec<(Permutation, BigRational)> = all_patterns(m)?
        .into_par_iter()
        .map(|sigma| {
            let v = sigma.zero_based();
            let mut count = BigInt::zero();
            for p in 0..m {
                for q in (0..m).filter(|&q| q != p) {
                    let others: Vec<usize> = (0..m).filter(|&i| i != p && i != q).collect();
                    let in_x: Vec<bool> = others.iter().map(|&i| i < p).collect();
                    let in_y: Vec<bool> = others.iter().map(|&i| v[i] < v[q]).collect();
                    count += placements(&in_x, &in_y, a, b, k);
                }
            }
            (sigma, BigRational::from_integer(count) / &denom)
        })
        .collect();
    DensityExpression::new(m, terms)
}

/// Expression for `∫ x^a y^b F_μ(x,y)^k dμ`, with a single reference point.
pub fn express_mu_integral(a: usize, b: usize, k: usize) -> Result<DensityExpression> {
    let m = a + b + k + 1;
    check_cap(m)?;
    let denom = BigRational::from_integer(big(factorial(m)));
    let terms: Vec<(Permutation, BigRational)> = all_patterns(m)?
        .into_par_iter()
        .map(|sigma| {
            let v = sigma.zero_based();
            let mut count = BigInt::zero();
            for p in 0..m {
                let others: Vec<usize> = (0..m).filter(|&i| i != p).collect();
                let in_x: Vec<bool> = others.iter().map(|&i| i < p).collect();
                let in_y: Vec<bool> = others.iter().map(|&i| v[i] < v[p]).collect();
                count += placements(&in_x, &in_y, a, b, k);
            }
            (sigma, BigRational::from_integer(count) / &denom)
        })
        .collect();
    DensityExpression::new(m, terms)
}

/// Expression for `∫ ∏_{σ ∈ flags} F_μ^σ(x,y) dμ`.
///
/// `γ_τ` is the probability that, for a uniformly random root position and a
/// uniformly random split of the other `m − 1` positions of `τ` into labelled
/// groups of sizes `|σ|−1`, every group together with the root induces its
/// flag with the root in the flag's root position.
pub fn express_flag_product(flags: &[RootedPermutation]) -> Result<DensityExpression> {
    let m = 1 + flags.iter().map(|f| f.len() - 1).sum::<usize>();
    check_cap(m)?;
    let sizes: Vec<usize> = flags.iter().map(|f| f.len() - 1).collect();
    // ordered set partitions of m−1 labelled positions into groups of these sizes
    let splits = sizes
        .iter()
        .fold(big(factorial(m - 1)), |acc, &s| acc / big(factorial(s)));
    let denom = BigRational::from_integer(splits * big(m as u64));
    let terms: Vec<(Permutation, BigRational)> = all_patterns(m)?
        .into_par_iter()
        .map(|tau| {
            let count: u64 = (0..m).map(|r| flag_assignments(&tau, r, flags)).sum();
            (tau, BigRational::from_integer(big(count)) / &denom)
        })
        .collect();
    DensityExpression::new(m, terms)
}

/// Number of ways to split the non-root positions of `tau` into labelled groups
/// such that group `i` with the root at position `r` realizes `flags[i]`.
fn flag_assignments(tau: &Permutation, r: usize, flags: &[RootedPermutation]) -> u64 {
    let m = tau.len();
    let others: Vec<usize> = (0..m).filter(|&i| i != r).collect();
    let full = (1u32 << others.len()) - 1;
    let mut ways: BTreeMap<u32, u64> = BTreeMap::from([(0, 1)]);
    let mut valid_cache: BTreeMap<&RootedPermutation, Vec<u32>> = BTreeMap::new();
    for flag in flags {
        let valid = valid_cache.entry(flag).or_insert_with(|| {
            (0..others.len())
                .combinations(flag.len() - 1)
                .filter(|subset| {
                    let mut pos: Vec<usize> = subset.iter().map(|&i| others[i]).collect();
                    pos.push(r);
                    pos.sort_unstable();
                    pos.binary_search(&r) == Ok(flag.root())
                        && tau.induced_pattern(&pos).expect("valid indices") == *flag.pattern()
                })
                .map(|subset| subset.iter().fold(0u32, |acc, &i| acc | 1 << i))
                .collect()
        });
        let mut next: BTreeMap<u32, u64> = BTreeMap::new();
        for (&used, &w) in &ways {
            for &s in valid.iter().filter(|&&s| s & used == 0) {
                *next.entry(used | s).or_default() += w;
            }
        }
        ways = next;
        if ways.is_empty() {
            return 0;
        }
    }
    ways.get(&full).copied().unwrap_or(0)
}

/// How an expression (or a density) was measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measured {
    Exact(f64),
    MonteCarlo(Estimate),
}

impl Measured {
    pub fn value(&self) -> f64 {
        match self {
            Measured::Exact(v) => *v,
            Measured::MonteCarlo(e) => e.value,
        }
    }

    /// Zero for exact values.
    pub fn std_error(&self) -> f64 {
        match self {
            Measured::Exact(_) => 0.0,
            Measured::MonteCarlo(e) => e.std_error,
        }
    }

    pub fn samples(&self) -> Option<u64> {
        match self {
            Measured::Exact(_) => None,
            Measured::MonteCarlo(e) => Some(e.samples),
        }
    }

    pub fn mode(&self) -> &'static str {
        match self {
            Measured::Exact(_) => "exact",
            Measured::MonteCarlo(_) => "mc",
        }
    }
}

/// Requested evaluation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo,
}

/// Result of [`evaluate_expression`]; `fell_back` records an exact request
/// that had to be answered by Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub measured: Measured,
    pub fell_back: bool,
}

/// Truncation used for exact diagonal densities inside expressions.
pub const EXACT_TAIL_EPSILON: f64 = 1e-15;

/// `Σ γ_σ d(σ, μ)`. Exact mode covers the uniform permuton and the geometric
/// families (order ≤ 7); any other exact request falls back to Monte Carlo and
/// says so. Monte Carlo averages `γ` of the pattern of `samples` μ-random
/// `m`-tuples.
pub fn evaluate_expression(
    e: &DensityExpression,
    mu: &Permuton,
    mode: EvalMode,
    samples: u64,
    seed: u64,
) -> Result<Evaluation> {
    if e.is_zero() {
        return Ok(Evaluation { measured: Measured::Exact(0.0), fell_back: false });
    }
    if mode == EvalMode::Exact {
        let exact = match mu {
            Permuton::Uniform => Some(e.uniform_value().to_f64().unwrap_or(f64::NAN)),
            Permuton::MonotoneGeometric { .. } | Permuton::SquareGeometric { .. }
                if e.order <= MAX_DIAGONAL_ORDER =>
            {
                let mut sum = 0.0;
                for (sigma, c) in &e.terms {
                    sum += c.to_f64().unwrap_or(f64::NAN) * density_exact_diagonal(mu, sigma, EXACT_TAIL_EPSILON)?;
                }
                Some(sum)
            }
            _ => None,
        };
        if let Some(v) = exact {
            return Ok(Evaluation { measured: Measured::Exact(v), fell_back: false });
        }
    }
    if samples == 0 {
        return Err(Error::invalid("Monte Carlo evaluation needs at least one sample"));
    }
    let counts = pattern_counts_mc(mu, e.order, samples, seed)?;
    let mut moments = Moments::default();
    for (sigma, c) in &e.terms {
        let n = counts[sigma.rank() as usize];
        let g = c.to_f64().unwrap_or(f64::NAN);
        moments.sum += g * n as f64;
        moments.sum_sq += g * g * n as f64;
    }
    moments.count = samples;
    Ok(Evaluation {
        measured: Measured::MonteCarlo(Estimate::from_moments(&moments)),
        fell_back: mode == EvalMode::Exact,
    })
}
