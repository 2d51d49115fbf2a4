//! Density algebra for graphons whose random graphs are disjoint unions of cliques.
//!
//! In such a graphon every induced density of a clique union is a polynomial
//! in the clique densities `d(K_ℓ)`, obtained by splitting off one clique and
//! accounting for how it can merge with the rest. Planted graphons reduce to
//! these polynomials through partitions of the component set.

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKey};
use crate::graphon::BlockSizes;
use crate::perm::factorial;
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

/// Largest total order handled by the recursion.
pub const MAX_UNION_ORDER: usize = 12;

/// A disjoint union of complete graphs, stored as sorted component orders.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CliqueUnion {
    sizes: Vec<usize>,
}

impl CliqueUnion {
    pub fn new(mut sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::invalid("a clique union needs at least one clique of order ≥ 1"));
        }
        sizes.sort_unstable();
        Ok(CliqueUnion { sizes })
    }

    /// The clique union isomorphic to `g`, if `g` is one.
    pub fn from_graph(g: &Graph) -> Option<Self> {
        if g.order() == 0 || !g.is_clique_union() {
            return None;
        }
        CliqueUnion::new(g.components().iter().map(Vec::len).collect()).ok()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn order(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn to_graph(&self) -> Graph {
        Graph::clique_union(&self.sizes)
    }
}

impl fmt::Display for CliqueUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

impl FromStr for CliqueUnion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sizes = s
            .split('+')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::parse(format!("bad clique union {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        CliqueUnion::new(sizes)
    }
}

/// Clique densities `d(K_ℓ)` for `ℓ = 1, …, max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueDensityVector {
    values: Vec<f64>,
}

impl CliqueDensityVector {
    /// `values[ℓ−1] = d(K_ℓ)`; requires `d(K₁) = 1`, values in `[0,1]`, nonincreasing.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.first() != Some(&1.0) {
            return Err(Error::invalid("d(K1) must equal 1"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("clique densities must lie in [0,1]"));
        }
        if values.windows(2).any(|w| w[1] > w[0] + 1e-12) {
            return Err(Error::invalid("clique densities must be nonincreasing in the order"));
        }
        Ok(CliqueDensityVector { values })
    }

    /// Clique densities of the clique-block graphon with these block sizes.
    pub fn from_blocks(blocks: &BlockSizes, max_order: usize) -> Self {
        let mut values: Vec<f64> = (1..=max_order).map(|l| clique_density_blocks(blocks, l)).collect();
        if let Some(v) = values.first_mut() {
            *v = 1.0;
        }
        CliqueDensityVector { values }
    }

    pub fn max_order(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, ell: usize) -> Option<f64> {
        ell.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    /// CSV with header `ell,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ell,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out += &format!("{},{}\n", i + 1, v);
        }
        out
    }
}

/// `d(K_ℓ, W) = Σ_j a_j^ℓ` for the clique-block graphon of `a`.
pub fn clique_density_blocks(a: &BlockSizes, ell: usize) -> f64 {
    a.power_sum(ell as u32)
}

/// A polynomial in the clique densities `d(K_ℓ)`, `ℓ ≥ 2`: each monomial is the
/// sorted list of its factors' orders.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliquePolynomial {
    terms: BTreeMap<Vec<usize>, BigRational>,
}

impl CliquePolynomial {
    fn one() -> Self {
        CliquePolynomial { terms: BTreeMap::from([(Vec::new(), BigRational::one())]) }
    }

    fn clique(m: usize) -> Self {
        if m <= 1 {
            return Self::one();
        }
        CliquePolynomial { terms: BTreeMap::from([(vec![m], BigRational::one())]) }
    }

    fn add_scaled(&mut self, other: &CliquePolynomial, factor: &BigRational) {
        for (mono, c) in &other.terms {
            let entry = self.terms.entry(mono.clone()).or_insert_with(BigRational::zero);
            *entry += c * factor;
        }
        self.terms.retain(|_, c| !c.is_zero());
    }

    fn mul(&self, other: &CliquePolynomial) -> CliquePolynomial {
        let mut out = CliquePolynomial::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut mono: Vec<usize> = m1.iter().chain(m2).copied().collect();
                mono.sort_unstable();
                *out.terms.entry(mono).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    fn scale(&mut self, factor: &BigRational) {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, BigRational> {
        &self.terms
    }

    /// Largest clique order the polynomial depends on (1 for constants).
    pub fn max_order(&self) -> usize {
        self.terms.keys().flatten().copied().max().unwrap_or(1)
    }

    pub fn evaluate(&self, v: &CliqueDensityVector) -> Result<f64> {
        if v.max_order() < self.max_order() {
            return Err(Error::invalid(format!(
                "clique densities cover orders up to {}, need {}",
                v.max_order(),
                self.max_order()
            )));
        }
        Ok(self
            .terms
            .iter()
            .map(|(mono, c)| c.to_f64().unwrap_or(f64::NAN) * mono.iter().map(|&l| v.values[l - 1]).product::<f64>())
            .sum())
    }

    /// Exact evaluation with rational clique densities keyed by order.
    pub fn evaluate_exact(&self, v: &BTreeMap<usize, BigRational>) -> Result<BigRational> {
        let mut total = BigRational::zero();
        for (mono, c) in &self.terms {
            let mut t = c.clone();
            for l in mono {
                t *= v
                    .get(l)
                    .ok_or_else(|| Error::invalid(format!("missing exact density of K{l}")))?;
            }
            total += t;
        }
        Ok(total)
    }
}

impl fmt::Display for CliquePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(mono, c)| {
                let factors: Vec<String> = mono.iter().map(|l| format!("d(K{l})")).collect();
                if factors.is_empty() {
                    c.to_string()
                } else {
                    format!("{c}*{}", factors.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn memo() -> &'static Mutex<HashMap<Vec<usize>, CliquePolynomial>> {
    static MEMO: OnceLock<Mutex<HashMap<Vec<usize>, CliquePolynomial>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

fn remove_one(sizes: &[usize], value: usize) -> Vec<usize> {
    let mut out = sizes.to_vec();
    let i = out.iter().position(|&s| s == value).expect("value present");
    out.remove(i);
    out
}

/// Probability that a uniformly random `s`-subset of the clique union `h`
/// is a clique whose complement is isomorphic to the clique union `rest`.
fn split_probability(h: &[usize], s: usize, rest: &[usize]) -> BigRational {
    let n: usize = h.iter().sum();
    let mut count = BigInt::zero();
    let mut seen = BTreeSet::new();
    for &c in h.iter().filter(|&&c| c >= s) {
        if !seen.insert(c) {
            // every copy of a component order contributes the same count
            continue;
        }
        let mut remainder = remove_one(h, c);
        if c > s {
            remainder.push(c - s);
        }
        remainder.sort_unstable();
        if remainder == rest {
            let copies = h.iter().filter(|&&x| x == c).count();
            count += binomial(BigInt::from(c), BigInt::from(s)) * BigInt::from(copies);
        }
    }
    BigRational::new(count, binomial(BigInt::from(n), BigInt::from(s)))
}

/// `d(K_{s₁} ∪ … ∪ K_{s_r}, W)` as a polynomial in the clique densities of `W`,
/// valid for every graphon whose random graphs are clique unions.
pub fn clique_union_polynomial(g: &CliqueUnion) -> Result<CliquePolynomial> {
    if g.order() > MAX_UNION_ORDER {
        return Err(Error::UnsupportedSize(format!(
            "clique unions of order up to {MAX_UNION_ORDER} are supported, got {}",
            g.order()
        )));
    }
    Ok(union_poly(&g.sizes))
}

fn union_poly(sizes: &[usize]) -> CliquePolynomial {
    if sizes.len() == 1 {
        return CliquePolynomial::clique(sizes[0]);
    }
    if let Some(p) = memo().lock().expect("memo lock").get(sizes) {
        return p.clone();
    }
    // split off the first (smallest) clique G₁ = K_s
    let s = sizes[0];
    let rest = sizes[1..].to_vec();
    // d(K_s)·d(rest) = Σ_H split(H)·d(H) over H ∈ {G} ∪ {G₁ merged into one rest component}
    let mut poly = CliquePolynomial::clique(s).mul(&union_poly(&rest));
    let distinct: BTreeSet<usize> = rest.iter().copied().collect();
    for c in distinct {
        let mut merged = remove_one(&rest, c);
        merged.push(c + s);
        merged.sort_unstable();
        let p = split_probability(&merged, s, &rest);
        if !p.is_zero() {
            poly.add_scaled(&union_poly(&merged), &-p);
        }
    }
    let own = split_probability(sizes, s, &rest);
    poly.scale(&own.recip());
    memo().lock().expect("memo lock").insert(sizes.to_vec(), poly.clone());
    poly
}

/// Density of the clique union under any clique-union graphon with clique densities `v`.
pub fn clique_union_density(g: &CliqueUnion, v: &CliqueDensityVector) -> Result<f64> {
    if v.max_order() < g.order() {
        return Err(Error::invalid(format!(
            "clique densities cover orders up to {}, need {}",
            v.max_order(),
            g.order()
        )));
    }
    clique_union_polynomial(g)?.evaluate(v)
}

/// Set partitions of `{0, …, k−1}` with at most `max_parts` nonempty parts, as
/// restricted-growth strings (`rgs[i]` is the part of `i`; part labels appear in
/// increasing order of first use).
pub fn partitions_with_empties(k: usize, max_parts: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = if k == 0 || max_parts > 0 { Some(vec![0; k]) } else { None };
    std::iter::from_fn(move || {
        let out = current.clone()?;
        current = next_rgs(&out, max_parts);
        Some(out)
    })
}

fn next_rgs(rgs: &[usize], max_parts: usize) -> Option<Vec<usize>> {
    let k = rgs.len();
    let mut next = rgs.to_vec();
    for i in (1..k).rev() {
        let prefix_max = next[..i].iter().copied().max().unwrap_or(0);
        if next[i] <= prefix_max && next[i] + 1 < max_parts {
            next[i] += 1;
            for v in next.iter_mut().skip(i + 1) {
                *v = 0;
            }
            return Some(next);
        }
    }
    None
}

/// Parts of an RGS as sorted member lists.
pub fn rgs_parts(rgs: &[usize]) -> Vec<Vec<usize>> {
    let parts = rgs.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); parts];
    for (i, &p) in rgs.iter().enumerate() {
        out[p].push(i);
    }
    out
}

/// Induced densities of the base graphon, keyed by canonical form.
pub type BaseDensities = BTreeMap<GraphKey, f64>;

/// `d(H, W)` for the constant graphon: `k!/|Aut H| · ρ^e (1−ρ)^{C(k,2)−e}`.
pub fn constant_density(h: &Graph, rho: f64) -> f64 {
    let k = h.order();
    let e = h.edge_count();
    let non = k * k.saturating_sub(1) / 2 - e;
    factorial(k) as f64 / h.automorphism_count() as f64 * rho.powi(e as i32) * (1.0 - rho).powi(non as i32)
}

fn component_unions(g: &Graph) -> Vec<Graph> {
    let comps = g.components();
    let c = comps.len();
    (1u32..1 << c)
        .map(|mask| {
            let vertices: Vec<usize> = (0..c)
                .filter(|i| mask >> i & 1 == 1)
                .flat_map(|i| comps[i].iter().copied())
                .collect();
            g.induced(&vertices)
        })
        .collect()
}

/// Base densities of `Constant(ρ)` for every union of components of `g`.
pub fn constant_base_densities(g: &Graph, rho: f64) -> BaseDensities {
    component_unions(g)
        .into_iter()
        .filter_map(|h| h.canonical_key().map(|k| (k, constant_density(&h, rho))))
        .collect()
}

/// `d(G, W_{→a})` for the graphon planting `W` on the blocks `a`:
/// a sum over multiset partitions `Q` of the components of `G` of
/// `∏ d(Q_i, W) · d(∪_i K_{|Q_i|}, W^c_a)`, each term weighted by the number of
/// ways to place the groups on equal-size cliques (`∏_s N_s! / ∏_t m_t!` for
/// `N_s` groups of order `s` and `m_t` groups of isomorphism type `t`).
pub fn planted_density(g: &Graph, base: &BaseDensities, blocks: &BlockSizes) -> Result<f64> {
    let k = g.order();
    if k == 0 || k > crate::graph::MAX_KEY_ORDER {
        return Err(Error::UnsupportedSize(format!("planted densities need 1 ≤ |G| ≤ 8, got {k}")));
    }
    let comps = g.components();
    let v = CliqueDensityVector::from_blocks(blocks, k);
    let mut seen: BTreeSet<Vec<GraphKey>> = BTreeSet::new();
    let mut total = 0.0;
    for rgs in partitions_with_empties(comps.len(), comps.len()) {
        let groups: Vec<Graph> = rgs_parts(&rgs)
            .iter()
            .map(|part| {
                let vertices: Vec<usize> = part.iter().flat_map(|&i| comps[i].iter().copied()).collect();
                g.induced(&vertices)
            })
            .collect();
        let mut keys: Vec<GraphKey> = groups.iter().map(|h| h.canonical_key().expect("small order")).collect();
        keys.sort_unstable();
        if !seen.insert(keys.clone()) {
            continue;
        }
        let mut term = 1.0;
        for key in &keys {
            term *= base.get(key).copied().ok_or_else(|| {
                Error::invalid(format!("base densities miss the component union {}", key.to_graph()))
            })?;
        }
        let sizes: Vec<usize> = keys.iter().map(|k| k.order as usize).collect();
        let mut by_size: BTreeMap<usize, u64> = BTreeMap::new();
        let mut by_type: BTreeMap<GraphKey, u64> = BTreeMap::new();
        for k in &keys {
            *by_size.entry(k.order as usize).or_default() += 1;
            *by_type.entry(*k).or_default() += 1;
        }
        let arrangements = by_size.values().map(|&n| factorial(n as usize) as f64).product::<f64>()
            / by_type.values().map(|&n| factorial(n as usize) as f64).product::<f64>();
        total += term * arrangements * clique_union_density(&CliqueUnion::new(sizes)?, &v)?;
    }
    Ok(total)
}

/// [`planted_density`] with base `Constant(ρ)`.
pub fn planted_density_constant(g: &Graph, rho: f64, blocks: &BlockSizes) -> Result<f64> {
    planted_density(g, &constant_base_densities(g, rho), blocks)
}
