//! Univariate complex polynomials: simultaneous root finding, distance to
//! the root multiset, and the one-dimensional lower-bound and disk-doubling
//! inequalities used by chart certification.

use crate::C64;
use thiserror::Error;

/// Iteration cap for the simultaneous root iteration.
const MAX_ROOT_ITERS: usize = 200;
/// Relative leading-coefficient floor (no silent degree collapse).
const LEADING_COEFF_FLOOR: f64 = 1e-14;
/// Boundary samples used for max-on-circle estimation.
const CIRCLE_SAMPLES: usize = 4096;

#[derive(Debug, Error)]
pub enum UniError {
    #[error("degree must be >= 1 for root finding (got {0})")]
    DegreeTooSmall(usize),
    #[error("leading coefficient too small relative to the norm ({0:.3e})")]
    DegenerateLeading(f64),
    #[error("root iteration did not converge: residual {residual:.3e} after {iters} iterations")]
    NonConvergence { residual: f64, iters: usize },
    #[error("empty root set")]
    EmptyRootSet,
    #[error("inner disk (center {center}, radius {radius}) not contained in the unit disk")]
    DiskNotContained { center: C64, radius: f64 },
}

/// `p(t) = c_0 + c_1 t + ... + c_m t^m` with `c_m != 0` (trailing zeros trimmed).
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<C64>,
}

impl UniPoly {
    pub fn from_coeffs(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        UniPoly { coeffs }
    }

    /// Trim trailing coefficients that are negligible relative to the norm.
    pub fn trimmed(&self, rel_eps: f64) -> Self {
        let floor = self.norm1() * rel_eps;
        let mut coeffs = self.coeffs.clone();
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.norm() <= floor) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, j: usize) -> C64 {
        self.coeffs.get(j).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn leading(&self) -> C64 {
        *self.coeffs.last().unwrap()
    }

    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn eval(&self, t: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn eval_deriv(&self, t: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * t + c * (j as f64);
        }
        acc
    }

    /// Monic polynomial with the given roots times `leading`.
    pub fn from_roots(leading: C64, roots: &[C64]) -> Self {
        let mut coeffs = vec![leading];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i] -= c * r;
                next[i + 1] += c;
            }
            coeffs = next;
        }
        UniPoly::from_coeffs(coeffs)
    }
}

/// Certified root multiset of a `UniPoly`.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub roots: Vec<C64>,
    /// `max_s |p(t_s)| / ||p||`.
    pub residual_bound: f64,
    /// Per-root inclusion radii (Newton-correction based, with a cluster floor).
    pub inclusion_radii: Vec<f64>,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Aberth-Ehrlich simultaneous iteration with deterministic initial guesses
/// uniformly spaced on a circle of radius `1 + max|c_j/c_m|`.
pub fn find_roots(p: &UniPoly, tol: f64) -> Result<RootSet, UniError> {
    let p = p.trimmed(1e-300); // drop exact-zero leading coefficients only
    let m = p.degree();
    if m < 1 {
        return Err(UniError::DegreeTooSmall(m));
    }
    let norm = p.norm1();
    let lead = p.leading().norm();
    if lead / norm < LEADING_COEFF_FLOOR {
        return Err(UniError::DegenerateLeading(lead / norm));
    }

    let radius = 1.0
        + p.coeffs()[..m]
            .iter()
            .map(|c| (c / p.leading()).norm())
            .fold(0.0f64, f64::max);
    let mut z: Vec<C64> = (0..m)
        .map(|k| {
            // fixed angular offset breaks symmetric configurations
            let theta = 2.0 * std::f64::consts::PI * k as f64 / m as f64 + 0.4;
            C64::from_polar(radius, theta)
        })
        .collect();

    let mut residual = f64::INFINITY;
    for iter in 0..MAX_ROOT_ITERS {
        let mut max_step = 0.0f64;
        for i in 0..m {
            let pv = p.eval(z[i]);
            let dv = p.eval_deriv(z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let w = if dv.norm() > 0.0 { pv / dv } else { C64::new(1e-8, 0.0) };
            let mut s = C64::new(0.0, 0.0);
            for j in 0..m {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 1e-300 {
                        s += C64::new(1.0, 0.0) / diff;
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - w * s;
            let step = if denom.norm() > 1e-300 { w / denom } else { w };
            z[i] -= step;
            max_step = max_step.max(step.norm());
        }
        residual = z.iter().map(|&t| p.eval(t).norm()).fold(0.0f64, f64::max) / norm;
        if residual <= tol && max_step <= tol.sqrt() * radius {
            let radii = inclusion_radii(&p, &z);
            return Ok(RootSet { roots: z, residual_bound: residual, inclusion_radii: radii });
        }
        let _ = iter;
    }
    if residual <= tol {
        let radii = inclusion_radii(&p, &z);
        return Ok(RootSet { roots: z, residual_bound: residual, inclusion_radii: radii });
    }
    Err(UniError::NonConvergence { residual, iters: MAX_ROOT_ITERS })
}

/// Per-root inclusion radius: a disk around each computed root that contains
/// a true root. For a simple root the bound `m * |p/p'|` applies; for
/// clustered roots we fall back to the global bound `(|p(t)| / |c_m|)^{1/m}`
/// which holds unconditionally because the product of distances to all true
/// roots equals `|p(t)|/|c_m|`.
fn inclusion_radii(p: &UniPoly, roots: &[C64]) -> Vec<f64> {
    let m = p.degree();
    roots
        .iter()
        .map(|&t| {
            let pv = p.eval(t).norm();
            let global = (pv / p.leading().norm()).powf(1.0 / m as f64);
            let dv = p.eval_deriv(t).norm();
            if dv > 0.0 {
                (m as f64 * pv / dv).min(global)
            } else {
                global
            }
        })
        .collect()
}

/// `min_s |t_s - v|` over the root multiset.
pub fn dist_to_roots(roots: &RootSet, v: C64) -> Result<f64, UniError> {
    if roots.is_empty() {
        return Err(UniError::EmptyRootSet);
    }
    Ok(roots
        .roots
        .iter()
        .map(|&t| (t - v).norm())
        .fold(f64::INFINITY, f64::min))
}

/// `c_d = 1 / (4 (d+1) 48^d)`.
pub fn c_d_constant(d: u32) -> f64 {
    assert!(d >= 1);
    1.0 / (4.0 * (d as f64 + 1.0) * 48f64.powi(d as i32))
}

/// Gradient bound `n d^2 2^d` for normalized polynomials on the doubled cube.
pub fn markov_gradient_bound(n: u32, d: u32) -> f64 {
    assert!(n >= 1 && d >= 1);
    n as f64 * (d as f64) * (d as f64) * 2f64.powi(d as i32)
}

#[derive(Debug, Clone)]
pub struct LowerBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Check `|p(v)| >= c_d ||p|| dist(v, Z)^d` with root residuals folded into
/// the tolerance.
pub fn check_univariate_lower(p: &UniPoly, v: C64) -> Result<LowerBoundCheck, UniError> {
    let d = p.degree();
    if d < 1 {
        return Err(UniError::DegreeTooSmall(d));
    }
    let roots = find_roots(p, 1e-10)?;
    let dist = dist_to_roots(&roots, v)?;
    // inflate the measured distance by the inclusion radii so the true
    // distance is never underestimated on the right-hand side
    let eps_root: f64 = roots.inclusion_radii.iter().fold(0.0f64, |a, &b| a.max(b));
    let dist_upper = dist + eps_root;
    let lhs = p.eval(v).norm();
    let rhs = c_d_constant(d as u32) * p.norm1() * dist_upper.powi(d as i32);
    let slack = 1.0 - 1e-9 - eps_root / dist_upper.max(1e-300);
    Ok(LowerBoundCheck { lhs, rhs, holds: lhs >= rhs * slack.max(0.0) || (lhs == 0.0 && dist == 0.0) })
}

#[derive(Debug, Clone)]
pub struct RemezDiskCheck {
    pub max_d1: f64,
    pub max_dk: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Check the disk-doubling inequality
/// `max_{D_1} |p| <= (12/kappa)^d max_{D_kappa} |p|`
/// for an inner disk of radius `kappa` at `center` contained in the unit disk.
pub fn check_remez_disk(p: &UniPoly, center: C64, kappa: f64) -> Result<RemezDiskCheck, UniError> {
    if !(0.0..1.0).contains(&kappa) || center.norm() + kappa > 1.0 + 1e-12 {
        return Err(UniError::DiskNotContained { center, radius: kappa });
    }
    let d = p.degree() as i32;
    let max_d1 = max_on_circle(p, C64::new(0.0, 0.0), 1.0);
    let max_dk = max_on_circle(p, center, kappa);
    let bound = (12.0 / kappa).powi(d) * max_dk;
    Ok(RemezDiskCheck { max_d1, max_dk, bound, holds: max_d1 <= bound * (1.0 + 1e-9) })
}

/// Maximum of `|p|` on a circle: dense boundary sampling plus golden-section
/// refinement around the best samples (maximum principle reduces the 2-D
/// problem to the boundary).
pub fn max_on_circle(p: &UniPoly, center: C64, radius: f64) -> f64 {
    let n = CIRCLE_SAMPLES;
    let at = |theta: f64| p.eval(center + C64::from_polar(radius, theta)).norm();
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut samples: Vec<(f64, usize)> = (0..n).map(|k| (at(k as f64 * step), k)).collect();
    samples.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut best = samples[0].0;
    for &(_, k) in samples.iter().take(8) {
        let lo = (k as f64 - 1.0) * step;
        let hi = (k as f64 + 1.0) * step;
        best = best.max(golden_max(&at, lo, hi));
    }
    best
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}
