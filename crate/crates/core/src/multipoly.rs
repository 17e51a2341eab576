//! Sparse multivariate complex polynomials in multi-index form, the
//! `l1` coefficient norm, shifts, and restriction to complex lines.

use crate::unipoly::UniPoly;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Threshold below which a coefficient is treated as structurally zero.
const COEFF_EPS: f64 = 0.0;
/// Term-count limit for the exact line-restriction expansion.
const EXPANSION_TERM_LIMIT: usize = 10_000;

#[derive(Debug, Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero polynomial has no normalization")]
    ZeroPolynomial,
    #[error("multi-index {alpha:?} exceeds declared degree {degree}")]
    DegreeViolation { alpha: Vec<u32>, degree: u32 },
    #[error("invalid polynomial: {0}")]
    Invalid(String),
}

/// Sparse polynomial `P(z) = sum_{|alpha| <= d} a_alpha z^alpha` over `C^n`.
///
/// Terms are kept in a `BTreeMap` so iteration order (and hence every
/// derived quantity) is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    dim: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, C64>,
}

impl MultiPoly {
    /// Build from terms, dropping zero coefficients and inferring the true degree.
    pub fn new(dim: usize, terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Result<Self, PolyError> {
        let mut map: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.len() != dim {
                return Err(PolyError::DimensionMismatch { expected: dim, got: alpha.len() });
            }
            if c.norm() > COEFF_EPS {
                *map.entry(alpha).or_insert(C64::new(0.0, 0.0)) += c;
            }
        }
        map.retain(|_, c| c.norm() > COEFF_EPS);
        let degree = map.keys().map(|a| a.iter().sum::<u32>()).max().unwrap_or(0);
        Ok(MultiPoly { dim, degree, terms: map })
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        let mut terms = BTreeMap::new();
        if c.norm() > COEFF_EPS {
            terms.insert(vec![0u32; dim], c);
        }
        MultiPoly { dim, degree: 0, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.degree == 0
    }

    /// `sum |a_alpha|`.
    pub fn norm1(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm1() - 1.0).abs() <= 1e-12
    }

    /// Evaluate at `z` by direct power accumulation over the sparse terms.
    pub fn eval(&self, z: &[C64]) -> Result<C64, PolyError> {
        if z.len() != self.dim {
            return Err(PolyError::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let mut acc = C64::new(0.0, 0.0);
        for (alpha, c) in &self.terms {
            let mut m = *c;
            for (i, &a) in alpha.iter().enumerate() {
                m *= powc(z[i], a);
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Scale coefficients so the l1 norm is 1. The zero set is unchanged.
    pub fn normalize(&self) -> Result<Self, PolyError> {
        let n1 = self.norm1();
        if n1 <= 0.0 {
            return Err(PolyError::ZeroPolynomial);
        }
        // bitwise idempotence: re-normalizing an already normalized
        // polynomial must not perturb coefficients
        if (n1 - 1.0).abs() <= 1e-12 {
            return Ok(self.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|(a, c)| (a.clone(), c / n1))
            .collect::<BTreeMap<_, _>>();
        Ok(MultiPoly { dim: self.dim, degree: self.degree, terms })
    }

    /// `Q(z) = P(z + b)` by exact binomial expansion.
    ///
    /// For `|b_i| <= 1` the result satisfies `norm1(Q) <= 2^d * norm1(P)`.
    pub fn shift(&self, b: &[C64]) -> Result<Self, PolyError> {
        if b.len() != self.dim {
            return Err(PolyError::DimensionMismatch { expected: self.dim, got: b.len() });
        }
        let mut out: BTreeMap<Vec<u32>, C64> = BTreeMap::new();
        for (alpha, c) in &self.terms {
            // expand prod_i (z_i + b_i)^{alpha_i} one variable at a time
            let mut partial: Vec<(Vec<u32>, C64)> = vec![(Vec::with_capacity(self.dim), *c)];
            for (i, &ai) in alpha.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (ai as usize + 1));
                for (idx, coeff) in &partial {
                    for j in 0..=ai {
                        let binom = binomial(ai, j);
                        let term = coeff * binom * powc(b[i], ai - j);
                        let mut nidx = idx.clone();
                        nidx.push(j);
                        next.push((nidx, term));
                    }
                }
                partial = next;
            }
            for (idx, coeff) in partial {
                *out.entry(idx).or_insert(C64::new(0.0, 0.0)) += coeff;
            }
        }
        out.retain(|_, c| c.norm() > COEFF_EPS);
        let degree = out.keys().map(|a| a.iter().sum::<u32>()).max().unwrap_or(0);
        Ok(MultiPoly { dim: self.dim, degree, terms: out })
    }

    /// Restriction `p(t) = P(b + v t)` to the line `L`.
    ///
    /// Exact multinomial expansion when the term count permits, otherwise
    /// evaluation at Chebyshev nodes followed by Newton interpolation.
    pub fn restrict_to_line(&self, line: &CLine) -> Result<UniPoly, PolyError> {
        if line.base.len() != self.dim {
            return Err(PolyError::DimensionMismatch { expected: self.dim, got: line.base.len() });
        }
        if self.num_terms() <= EXPANSION_TERM_LIMIT {
            self.restrict_exact(line)
        } else {
            self.restrict_interpolated(line)
        }
    }

    fn restrict_exact(&self, line: &CLine) -> Result<UniPoly, PolyError> {
        let d = self.degree as usize;
        let mut coeffs = vec![C64::new(0.0, 0.0); d + 1];
        for (alpha, c) in &self.terms {
            // product over i of (b_i + v_i t)^{alpha_i}, accumulated as a
            // univariate polynomial in t
            let mut factor = vec![C64::new(1.0, 0.0)];
            for (i, &ai) in alpha.iter().enumerate() {
                let mut lin = vec![C64::new(0.0, 0.0); ai as usize + 1];
                for j in 0..=ai {
                    lin[j as usize] =
                        binomial(ai, j) * powc(line.base[i], ai - j) * powc(line.direction[i], j);
                }
                factor = poly_mul(&factor, &lin);
            }
            for (j, f) in factor.iter().enumerate() {
                coeffs[j] += c * f;
            }
        }
        Ok(UniPoly::from_coeffs(coeffs))
    }

    fn restrict_interpolated(&self, line: &CLine) -> Result<UniPoly, PolyError> {
        let d = self.degree as usize;
        // Chebyshev nodes mapped to [0,1]
        let nodes: Vec<C64> = (0..=d)
            .map(|k| {
                let theta = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / (2.0 * (d + 1) as f64);
                C64::new(0.5 + 0.5 * theta.cos(), 0.0)
            })
            .collect();
        let values: Vec<C64> = nodes
            .iter()
            .map(|&t| {
                let z: Vec<C64> = line
                    .base
                    .iter()
                    .zip(&line.direction)
                    .map(|(&b, &v)| b + v * t)
                    .collect();
                self.eval(&z)
            })
            .collect::<Result<_, _>>()?;
        Ok(UniPoly::from_coeffs(newton_interpolate(&nodes, &values)))
    }

    /// A certified Lipschitz constant for `P` on the closed polydisk-like box
    /// `max_i |z_i| <= rho_box`: `sum |a_alpha| * |alpha| * rho_box^(|alpha|-1)`.
    pub fn lipschitz_on_box(&self, rho_box: f64) -> f64 {
        let r = rho_box.max(0.0);
        self.terms
            .iter()
            .map(|(alpha, c)| {
                let total: u32 = alpha.iter().sum();
                if total == 0 {
                    0.0
                } else {
                    // gradient norm bound: sqrt(2n) slack folded in by callers
                    c.norm() * total as f64 * r.powi(total as i32 - 1)
                }
            })
            .sum()
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            dim: self.dim,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TermJson { alpha: a.clone(), re: c.re, im: c.im })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Self, PolyError> {
        for t in &json.terms {
            let total: u32 = t.alpha.iter().sum();
            if total > json.degree {
                return Err(PolyError::DegreeViolation { alpha: t.alpha.clone(), degree: json.degree });
            }
        }
        MultiPoly::new(
            json.dim,
            json.terms.iter().map(|t| (t.alpha.clone(), C64::new(t.re, t.im))),
        )
    }
}

impl Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = PolyJson::deserialize(deserializer)?;
        MultiPoly::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Shared JSON wire format for polynomials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyJson {
    pub dim: usize,
    pub degree: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// Complex straight line `L = {b + v t : t in C}` with a unit direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CLine {
    pub base: Vec<C64>,
    pub direction: Vec<C64>,
}

impl CLine {
    pub fn new(base: Vec<C64>, direction: Vec<C64>) -> Result<Self, PolyError> {
        if base.len() != direction.len() {
            return Err(PolyError::DimensionMismatch { expected: base.len(), got: direction.len() });
        }
        let norm: f64 = direction.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(PolyError::Invalid(format!("direction norm {norm} is not 1")));
        }
        Ok(CLine { base, direction })
    }

    /// Line through two distinct points, based at `from`.
    pub fn through(from: &[C64], to: &[C64]) -> Result<(Self, f64), PolyError> {
        if from.len() != to.len() {
            return Err(PolyError::DimensionMismatch { expected: from.len(), got: to.len() });
        }
        let diff: Vec<C64> = to.iter().zip(from).map(|(a, b)| a - b).collect();
        let norm: f64 = diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return Err(PolyError::Invalid("coincident points do not define a line".into()));
        }
        let dir: Vec<C64> = diff.into_iter().map(|z| z / norm).collect();
        Ok((CLine { base: from.to_vec(), direction: dir }, norm))
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Ambient point at line coordinate `t`.
    pub fn point_at(&self, t: C64) -> Vec<C64> {
        self.base
            .iter()
            .zip(&self.direction)
            .map(|(&b, &v)| b + v * t)
            .collect()
    }
}

pub fn powc(z: C64, mut k: u32) -> C64 {
    let mut base = z;
    let mut acc = C64::new(1.0, 0.0);
    while k > 0 {
        if k & 1 == 1 {
            acc *= base;
        }
        base *= base;
        k >>= 1;
    }
    acc
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Newton divided-difference interpolation, returned in monomial form.
fn newton_interpolate(nodes: &[C64], values: &[C64]) -> Vec<C64> {
    let n = nodes.len();
    let mut dd = values.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - j]);
        }
    }
    // expand Newton form into monomial coefficients
    let mut coeffs = vec![C64::new(0.0, 0.0); n];
    let mut basis = vec![C64::new(1.0, 0.0)]; // prod (t - x_j), growing
    for (j, &c) in dd.iter().enumerate() {
        for (k, &b) in basis.iter().enumerate() {
            coeffs[k] += c * b;
        }
        if j + 1 < n {
            basis = poly_mul(&basis, &[-nodes[j], C64::new(1.0, 0.0)]);
        }
    }
    coeffs
}
