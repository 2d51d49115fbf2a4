//! Bivariate polynomials and quadrature of cdf-polynomial constraint integrals.

use crate::error::{Error, Result};
use crate::permuton::Permuton;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Largest total degree accepted.
pub const MAX_DEGREE: u32 = 8;

/// A real polynomial in `x` and `y`, stored as `(i, j) ↦ coefficient of xⁱyʲ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly2 {
    pub fn new(terms: impl IntoIterator<Item = ((u32, u32), f64)>) -> Result<Self> {
        let mut p = Poly2::default();
        for ((i, j), c) in terms {
            if i + j > MAX_DEGREE {
                return Err(Error::invalid(format!("degree {} exceeds {MAX_DEGREE}", i + j)));
            }
            if !c.is_finite() {
                return Err(Error::invalid("polynomial coefficients must be finite"));
            }
            *p.terms.entry((i, j)).or_insert(0.0) += c;
        }
        p.terms.retain(|_, c| *c != 0.0);
        Ok(p)
    }

    pub fn constant(c: f64) -> Self {
        Poly2::new([((0, 0), c)]).expect("degree zero")
    }

    pub fn x() -> Self {
        Poly2::new([((1, 0), 1.0)]).expect("degree one")
    }

    pub fn y() -> Self {
        Poly2::new([((0, 1), 1.0)]).expect("degree one")
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(i, j), c)| {
                let mut s = c.to_string();
                if i > 0 {
                    s += &format!("*x^{i}");
                }
                if j > 0 {
                    s += &format!("*y^{j}");
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl FromStr for Poly2 {
    type Err = Error;

    /// Sums of products such as `x*y`, `0.5*x^2*y - 1`, `x + y`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |t: &str| Error::parse(format!("bad polynomial term {t:?} in {s:?}"));
        let normalized = s.replace(' ', "").replace('-', "+-");
        let mut terms = Vec::new();
        for term in normalized.split('+').filter(|t| !t.is_empty()) {
            let (sign, body) = match term.strip_prefix('-') {
                Some(rest) => (-1.0, rest),
                None => (1.0, term),
            };
            let (mut c, mut i, mut j) = (sign, 0u32, 0u32);
            for factor in body.split('*') {
                let (base, power) = match factor.split_once('^') {
                    Some((b, p)) => (b, p.parse::<u32>().map_err(|_| bad(term))?),
                    None => (factor, 1),
                };
                match base {
                    "x" => i += power,
                    "y" => j += power,
                    num => c *= num.parse::<f64>().map_err(|_| bad(term))?.powi(power as i32),
                }
            }
            terms.push(((i, j), c));
        }
        Poly2::new(terms)
    }
}

/// Midpoint-grid quadrature of `∫ f dλ` over the unit square.
pub fn integrate_lambda(grid: usize, f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let g = grid as f64;
    let rows: Vec<f64> = (0..grid)
        .into_par_iter()
        .map(|a| {
            let x = (a as f64 + 0.5) / g;
            (0..grid).map(|b| f(x, (b as f64 + 0.5) / g)).sum()
        })
        .collect();
    rows.iter().sum::<f64>() / (g * g)
}

/// Quadrature values of `∫ ∏ᵢ (F_μ − pᵢ)² dλ` and `∫ (F_μ − p)² dλ`.
pub fn polynomial_constraint_residual(mu: &Permuton, polys: &[Poly2], reference: &Poly2, grid: usize) -> Result<(f64, f64)> {
    if grid < 2 {
        return Err(Error::invalid("quadrature grid must be at least 2"));
    }
    let product = integrate_lambda(grid, |x, y| {
        let f = mu.cdf(x, y);
        polys.iter().map(|p| (f - p.eval(x, y)).powi(2)).product::<f64>()
    });
    let distance = integrate_lambda(grid, |x, y| (mu.cdf(x, y) - reference.eval(x, y)).powi(2));
    Ok((product, distance))
}
