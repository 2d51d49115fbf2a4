//! Finite permutations, subpermutation (pattern) densities and rooted permutations.
//!
//! Positions are zero-based in the API. Values are stored zero-based as well;
//! one-line notation (parsing, display, [`Permutation::new`]) is one-based.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Largest pattern order accepted by enumeration-based operations.
pub const MAX_PATTERN_ORDER: usize = 9;

/// A permutation of `[n]`, `n ≥ 1`, in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    /// Builds a permutation from one-based one-line notation, e.g. `[7,1,2,6,3,5,4]`.
    pub fn new(one_line: Vec<usize>) -> Result<Self> {
        let values = one_line
            .iter()
            .map(|&v| {
                if v == 0 {
                    Err(Error::invalid("one-line entries are one-based"))
                } else {
                    Ok((v - 1) as u32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_zero_based(values)
    }

    /// Builds a permutation from zero-based values.
    pub fn from_zero_based(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::invalid("a permutation has order at least 1"));
        }
        let mut seen = vec![false; n];
        for &v in &values {
            let v = v as usize;
            if v >= n || seen[v] {
                return Err(Error::invalid(format!(
                    "{:?} is not a bijection of [{n}]",
                    values.iter().map(|v| v + 1).collect::<Vec<_>>()
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { values })
    }

    /// The permutation order-isomorphic to `seq`; `None` on ties or incomparable entries.
    pub fn from_relative_order<T: PartialOrd>(seq: &[T]) -> Option<Self> {
        if seq.is_empty() {
            return None;
        }
        let mut idx: Vec<usize> = (0..seq.len()).collect();
        let mut incomparable = false;
        idx.sort_by(|&a, &b| {
            seq[a].partial_cmp(&seq[b]).unwrap_or_else(|| {
                incomparable = true;
                Ordering::Equal
            })
        });
        if incomparable || idx.windows(2).any(|w| seq[w[0]] >= seq[w[1]]) {
            return None;
        }
        let mut values = vec![0u32; seq.len()];
        for (rank, &i) in idx.iter().enumerate() {
            values[i] = rank as u32;
        }
        Some(Permutation { values })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1);
        Permutation {
            values: (0..n as u32).collect(),
        }
    }

    /// The decreasing permutation `n…21`.
    pub fn reversal(n: usize) -> Self {
        assert!(n >= 1);
        Permutation {
            values: (0..n as u32).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One-based value at zero-based position `i`.
    pub fn value(&self, i: usize) -> usize {
        self.values[i] as usize + 1
    }

    pub fn one_line(&self) -> Vec<usize> {
        self.values.iter().map(|&v| v as usize + 1).collect()
    }

    pub fn zero_based(&self) -> &[u32] {
        &self.values
    }

    pub fn inversions(&self) -> usize {
        let v = &self.values;
        (0..v.len())
            .map(|i| v[i + 1..].iter().filter(|&&w| w < v[i]).count())
            .sum()
    }

    /// Index of this permutation in the lexicographic listing of `S_n` (Lehmer code).
    pub fn rank(&self) -> u64 {
        lehmer_rank(&self.values)
    }

    /// Inverse of [`Permutation::rank`].
    pub fn from_rank(n: usize, rank: u64) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::UnsupportedSize(format!("rank decoding needs 1 ≤ n ≤ 20, got {n}")));
        }
        if rank >= factorial(n) {
            return Err(Error::invalid(format!("rank {rank} out of range for S_{n}")));
        }
        let mut pool: Vec<u32> = (0..n as u32).collect();
        let mut rest = rank;
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let f = factorial(n - 1 - i);
            let d = (rest / f) as usize;
            rest %= f;
            values.push(pool.remove(d));
        }
        Ok(Permutation { values })
    }

    /// Subpermutation induced by the strictly increasing zero-based positions `indices`.
    pub fn induced_pattern(&self, indices: &[usize]) -> Result<Permutation> {
        if indices.is_empty() {
            return Err(Error::invalid("induced pattern needs at least one index"));
        }
        check_increasing(indices, self.len())?;
        let picked: Vec<u32> = indices.iter().map(|&i| self.values[i]).collect();
        Ok(Permutation::from_relative_order(&picked).expect("values of a permutation are distinct"))
    }
}

impl PartialOrd for Permutation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shorter permutations first, then lexicographic one-line order.
impl Ord for Permutation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.values.cmp(&other.values))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 9 {
            for v in self.one_line() {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.one_line().iter().map(|v| v.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let one_line = if s.contains(',') {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(format!("bad permutation entry {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::parse(format!("bad permutation digit {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Permutation::new(one_line).map_err(|e| Error::parse(format!("{s:?}: {e}")))
    }
}

/// A permutation with one distinguished element (a 1-rooted flag).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootedPermutation {
    pattern: Permutation,
    root: usize,
}

impl RootedPermutation {
    /// `root` is the zero-based position of the distinguished element.
    pub fn new(pattern: Permutation, root: usize) -> Result<Self> {
        if root >= pattern.len() {
            return Err(Error::invalid(format!(
                "root position {root} outside a pattern of order {}",
                pattern.len()
            )));
        }
        Ok(RootedPermutation { pattern, root })
    }

    pub fn pattern(&self) -> &Permutation {
        &self.pattern
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }
}

impl fmt::Display for RootedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .pattern
            .one_line()
            .iter()
            .enumerate()
            .map(|(i, v)| if i == self.root { format!("{v}'") } else { v.to_string() })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl fmt::Debug for RootedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedPermutation({self})")
    }
}

impl FromStr for RootedPermutation {
    type Err = Error;

    /// Accepts `2,3',4,1` and the compact digit form `23'41`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let tokens: Vec<String> = if s.contains(',') {
            s.split(',').map(|t| t.trim().to_string()).collect()
        } else {
            let mut tokens: Vec<String> = Vec::new();
            for c in s.chars() {
                if c == '\'' {
                    match tokens.last_mut() {
                        Some(t) => t.push(c),
                        None => return Err(Error::parse(format!("{s:?}: mark follows no entry"))),
                    }
                } else {
                    tokens.push(c.to_string());
                }
            }
            tokens
        };
        let mut root = None;
        let mut one_line = Vec::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            let digits = match t.strip_suffix('\'') {
                Some(d) => {
                    if root.replace(i).is_some() {
                        return Err(Error::parse(format!("{s:?}: more than one root")));
                    }
                    d
                }
                None => t.as_str(),
            };
            one_line.push(
                digits
                    .parse::<usize>()
                    .map_err(|_| Error::parse(format!("{s:?}: bad entry {t:?}")))?,
            );
        }
        let root = root.ok_or_else(|| Error::parse(format!("{s:?}: no root marked with '")))?;
        RootedPermutation::new(Permutation::new(one_line)?, root)
    }
}

pub(crate) fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub(crate) fn lehmer_rank(values: &[u32]) -> u64 {
    let n = values.len();
    let mut rank = 0u64;
    for i in 0..n {
        let smaller = values[i + 1..].iter().filter(|&&w| w < values[i]).count() as u64;
        rank = rank * (n - i) as u64 + smaller;
    }
    rank
}

fn check_increasing(indices: &[usize], n: usize) -> Result<()> {
    if let Some(&last) = indices.last() {
        if last >= n {
            return Err(Error::invalid(format!("index {last} out of range for order {n}")));
        }
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("indices {indices:?} are not strictly increasing")));
    }
    Ok(())
}

/// Number of `k`-subsets of positions of `pi` inducing `sigma`.
///
/// Depth-first over increasing positions; a partial choice is abandoned as soon
/// as its relative order disagrees with the corresponding prefix of `sigma`.
pub fn pattern_count(sigma: &Permutation, pi: &Permutation) -> u64 {
    let (k, n) = (sigma.len(), pi.len());
    if k > n {
        return 0;
    }
    let sigma = sigma.zero_based();
    let pi = pi.zero_based();
    (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut chosen = Vec::with_capacity(k);
            chosen.push(first);
            count_extensions(sigma, pi, &mut chosen)
        })
        .sum()
}

fn count_extensions(sigma: &[u32], pi: &[u32], chosen: &mut Vec<usize>) -> u64 {
    let (k, n) = (sigma.len(), pi.len());
    let j = chosen.len();
    if j == k {
        return 1;
    }
    let start = chosen.last().map_or(0, |&c| c + 1);
    let mut total = 0;
    for i in start..=n - (k - j) {
        let v = pi[i];
        let consistent = chosen
            .iter()
            .zip(sigma)
            .all(|(&c, &s)| (pi[c] < v) == (s < sigma[j]));
        if consistent {
            chosen.push(i);
            total += count_extensions(sigma, pi, chosen);
            chosen.pop();
        }
    }
    total
}

/// Exact density `d(σ, π)`; zero when `|σ| > |π|`.
pub fn pattern_density(sigma: &Permutation, pi: &Permutation) -> BigRational {
    let (k, n) = (sigma.len(), pi.len());
    if k > n {
        return BigRational::from_integer(0.into());
    }
    let count = BigUint::from(pattern_count(sigma, pi));
    let total = num_integer::binomial(BigUint::from(n), BigUint::from(k));
    BigRational::new(count.into(), total.into())
}

pub fn pattern_density_f64(sigma: &Permutation, pi: &Permutation) -> f64 {
    pattern_density(sigma, pi).to_f64().unwrap_or(f64::NAN)
}

/// Whether `{root_index} ∪ other_indices` induces `sigma` with the root of `sigma`
/// sitting at `root_index`. Indices are zero-based positions of `pi`.
pub fn rooted_pattern_indicator(
    sigma: &RootedPermutation,
    pi: &Permutation,
    root_index: usize,
    other_indices: &[usize],
) -> Result<bool> {
    let n = pi.len();
    if root_index >= n {
        return Err(Error::invalid(format!("root index {root_index} out of range for order {n}")));
    }
    if other_indices.contains(&root_index) {
        return Err(Error::invalid("the root index also appears among the other indices"));
    }
    if other_indices.len() + 1 != sigma.len() {
        return Err(Error::invalid(format!(
            "{} indices given for a rooted pattern of order {}",
            other_indices.len() + 1,
            sigma.len()
        )));
    }
    let mut all = other_indices.to_vec();
    all.push(root_index);
    all.sort_unstable();
    if all.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("repeated index"));
    }
    check_increasing(&all, n)?;
    let root_slot = all.binary_search(&root_index).expect("root is among the indices");
    Ok(root_slot == sigma.root() && pi.induced_pattern(&all)? == *sigma.pattern())
}

/// All `k!` permutations of order `k` in lexicographic order.
pub fn all_patterns(k: usize) -> Result<Vec<Permutation>> {
    if k == 0 || k > MAX_PATTERN_ORDER {
        return Err(Error::UnsupportedSize(format!(
            "pattern enumeration supports 1 ≤ k ≤ {MAX_PATTERN_ORDER}, got {k}"
        )));
    }
    Ok((0..factorial(k))
        .map(|r| Permutation::from_rank(k, r).expect("rank in range"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn induced_pattern_examples() {
        // positions 3,4,6 (one-based) of 7126354
        assert_eq!(p("7126354").induced_pattern(&[2, 3, 5]).unwrap(), p("132"));
        let pi = p("4213");
        assert_eq!(pi.induced_pattern(&[0, 1, 2, 3]).unwrap(), pi);
        assert_eq!(p("321").induced_pattern(&[0, 2]).unwrap(), p("21"));
    }

    #[test]
    fn induced_pattern_rejects_bad_indices() {
        let pi = p("321");
        assert!(matches!(pi.induced_pattern(&[0, 3]), Err(Error::InvalidArgument(_))));
        assert!(matches!(pi.induced_pattern(&[1, 1]), Err(Error::InvalidArgument(_))));
        assert!(matches!(pi.induced_pattern(&[2, 1]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn density_examples() {
        assert_eq!(pattern_density(&p("21"), &p("21")), BigRational::one());
        assert_eq!(pattern_density(&p("12"), &p("132")), q(2, 3));
        assert!(pattern_density(&p("123"), &p("21")).is_zero());
    }

    #[test]
    fn rooted_indicator_examples() {
        let id2 = p("12");
        let up: RootedPermutation = "12'".parse().unwrap();
        let down: RootedPermutation = "21'".parse().unwrap();
        assert!(rooted_pattern_indicator(&up, &id2, 1, &[0]).unwrap());
        assert!(!rooted_pattern_indicator(&down, &id2, 1, &[0]).unwrap());
        let flag: RootedPermutation = "2,3',4,1".parse().unwrap();
        assert!(rooted_pattern_indicator(&flag, &p("2341"), 1, &[0, 2, 3]).unwrap());
        assert!(!rooted_pattern_indicator(&flag, &p("2341"), 2, &[0, 1, 3]).unwrap());
    }

    #[test]
    fn rooted_indicator_errors() {
        let up: RootedPermutation = "12'".parse().unwrap();
        let pi = p("123");
        assert!(rooted_pattern_indicator(&up, &pi, 1, &[1]).is_err());
        assert!(rooted_pattern_indicator(&up, &pi, 3, &[0]).is_err());
        assert!(rooted_pattern_indicator(&up, &pi, 1, &[0, 2]).is_err());
    }

    #[test]
    fn all_patterns_order_and_caps() {
        assert_eq!(all_patterns(1).unwrap(), vec![p("1")]);
        assert_eq!(all_patterns(2).unwrap(), vec![p("12"), p("21")]);
        let s3 = all_patterns(3).unwrap();
        assert_eq!(s3.len(), 6);
        assert_eq!(s3[0], p("123"));
        assert_eq!(s3[5], p("321"));
        assert!(s3.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(all_patterns(0), Err(Error::UnsupportedSize(_))));
        assert!(matches!(all_patterns(10), Err(Error::UnsupportedSize(_))));
    }

    #[test]
    fn rank_round_trip() {
        for (r, sigma) in all_patterns(4).unwrap().iter().enumerate() {
            assert_eq!(sigma.rank(), r as u64);
        }
    }

    #[test]
    fn text_forms() {
        assert_eq!(p("7126354").to_string(), "7126354");
        let long = Permutation::new(vec![10, 1, 2, 3, 4, 5, 6, 7, 8, 9]).unwrap();
        assert_eq!(long.to_string(), "10,1,2,3,4,5,6,7,8,9");
        assert_eq!(long.to_string().parse::<Permutation>().unwrap(), long);
        let rooted: RootedPermutation = "23'41".parse().unwrap();
        assert_eq!(rooted.to_string(), "2,3',4,1");
        assert_eq!(rooted.root(), 1);
        assert!("2341".parse::<RootedPermutation>().is_err());
        assert!("2'3'41".parse::<RootedPermutation>().is_err());
        assert!("1223".parse::<Permutation>().is_err());
        assert!("".parse::<Permutation>().is_err());
    }
}
