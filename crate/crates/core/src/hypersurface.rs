//! Certified two-sided distance estimates to `H = {P = 0}`, ellipsoid
//! doubling charts over disks in a complex line, clearance certification of
//! scaled charts, and intersection-radius lower bounds.

use crate::multipoly::{CLine, MultiPoly, PolyError};
use crate::sampling::{derive_seed, rng_from_seed, unit_direction};
use crate::unipoly::{self, find_roots, markov_gradient_bound, UniError};
use crate::C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("polynomial is not normalized (l1 norm {0})")]
    NotNormalized(f64),
    #[error("point outside the unit cube Q")]
    OutsideQ,
    #[error("polynomial is constant; no line restriction carries root data")]
    ConstantPolynomial,
    #[error("all line restrictions degenerated; direction choice failed")]
    DegenerateLines,
    #[error("certification budget too small: {0}")]
    BudgetTooSmall(usize),
    #[error("unsupported chart configuration: frames differ and neither chart is a ball")]
    UnsupportedCharts,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Uni(#[from] UniError),
}

/// Two-sided bracket `lower <= dist(point, H) <= upper`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceBracket {
    pub lower: f64,
    pub upper: f64,
    pub point: Vec<C64>,
    /// Explicit point of `H` witnessing the upper bound.
    pub witness: Option<Vec<C64>>,
}

/// Line metadata carried by lifted charts, used for the factored clearance
/// certificate and junction computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartLine {
    pub line: CLine,
    /// Disk center in the line coordinate.
    pub t0: C64,
    /// Disk radius.
    pub radius: f64,
}

/// Affine doubling chart `psi(u) = center + frame * diag(semi_axes) * u`.
///
/// `frame` holds orthonormal complex columns; `semi_axes` is `(R, h, ..., h)`
/// for lifted disks and `(r, ..., r)` for round balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidChart {
    pub center: Vec<C64>,
    pub frame: Vec<Vec<C64>>,
    pub semi_axes: Vec<f64>,
    pub c6_line: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_line: Option<ChartLine>,
}

impl EllipsoidChart {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn ball(center: Vec<C64>, radius: f64) -> Self {
        let n = center.len();
        EllipsoidChart {
            center,
            frame: identity_frame(n),
            semi_axes: vec![radius; n],
            c6_line: 0.0,
            chart_line: None,
        }
    }

    pub fn is_ball(&self) -> bool {
        let r = self.semi_axes[0];
        self.semi_axes.iter().all(|&a| (a - r).abs() <= 1e-15 * r.max(1.0))
    }

    pub fn max_axis(&self) -> f64 {
        self.semi_axes.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    pub fn min_axis(&self) -> f64 {
        self.semi_axes.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Forward map on preimage coordinates.
    pub fn forward(&self, u: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut out = self.center.clone();
        for (k, col) in self.frame.iter().enumerate() {
            let scaled = u[k] * self.semi_axes[k];
            for i in 0..n {
                out[i] += col[i] * scaled;
            }
        }
        out
    }

    /// Preimage coordinates of an ambient point.
    pub fn preimage(&self, z: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut dot = C64::new(0.0, 0.0);
                for i in 0..n {
                    dot += self.frame[k][i].conj() * (z[i] - self.center[i]);
                }
                dot / self.semi_axes[k]
            })
            .collect()
    }

    pub fn preimage_norm(&self, z: &[C64]) -> f64 {
        self.preimage(z).iter().map(|u| u.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn contains(&self, z: &[C64], scale: f64) -> bool {
        self.preimage_norm(z) < scale
    }

    /// `max_i |z_i|` over the chart scaled by `scale` (coarse bounding box).
    pub fn bounding_radius(&self, scale: f64) -> f64 {
        let reach = scale * self.max_axis();
        self.center
            .iter()
            .map(|c| c.norm() + reach)
            .fold(0.0f64, f64::max)
    }

    /// Unitarity defect of the frame.
    pub fn frame_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let mut dot = C64::new(0.0, 0.0);
                for i in 0..n {
                    dot += self.frame[a][i].conj() * self.frame[b][i];
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Zero-exclusion certificate for a scaled chart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClearanceCertificate {
    pub chart: EllipsoidChart,
    pub scale: f64,
    /// Certified lower bound for `|P|` on the scaled chart (factored method)
    /// or the minimum sampled value (grid method).
    pub min_abs_p: f64,
    pub lipschitz: f64,
    /// Forward sample spacing of the grid method; 0 for the factored method.
    pub sample_spacing: f64,
    pub certified: bool,
    pub method: String,
}

impl ClearanceCertificate {
    /// Certified margin: a lower bound for `|P|` everywhere on the scaled chart.
    pub fn margin(&self) -> f64 {
        let n = self.chart.dim();
        self.min_abs_p - self.lipschitz * self.sample_spacing * (2.0 * n as f64).sqrt() / 2.0
    }
}

pub fn identity_frame(n: usize) -> Vec<Vec<C64>> {
    (0..n)
        .map(|k| {
            let mut col = vec![C64::new(0.0, 0.0); n];
            col[k] = C64::new(1.0, 0.0);
            col
        })
        .collect()
}

/// Orthonormal frame whose first column is `dir`, completed by Gram-Schmidt
/// against the standard basis in index order.
pub fn frame_from_direction(dir: &[C64]) -> Vec<Vec<C64>> {
    let n = dir.len();
    let mut cols: Vec<Vec<C64>> = vec![dir.to_vec()];
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut cand = vec![C64::new(0.0, 0.0); n];
        cand[k] = C64::new(1.0, 0.0);
        for col in &cols {
            let mut dot = C64::new(0.0, 0.0);
            for i in 0..n {
                dot += col[i].conj() * cand[i];
            }
            for i in 0..n {
                cand[i] -= col[i] * dot;
            }
        }
        let norm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(cand.into_iter().map(|z| z / norm).collect());
        }
    }
    assert_eq!(cols.len(), n, "frame completion failed");
    cols
}

/// Whether `v` lies in the unit cube `Q` = `[0,1]^{2n}` (re/im coordinates).
pub fn in_unit_cube(v: &[C64]) -> bool {
    v.iter()
        .all(|z| (0.0..=1.0).contains(&z.re) && (0.0..=1.0).contains(&z.im))
}

/// Certified lower bound `|P(v)| / (n d^2 2^d) <= dist(v, H)` for normalized
/// `P` and `v` in `Q`. Returns the bound together with a degeneracy flag that
/// is set when `H` is certified to miss the doubled cube (floor value 1).
pub fn dist_lower(p: &MultiPoly, v: &[C64]) -> Result<(f64, bool), GeomError> {
    if !p.is_normalized() {
        return Err(GeomError::NotNormalized(p.norm1()));
    }
    if !in_unit_cube(v) {
        return Err(GeomError::OutsideQ);
    }
    if double_cube_clear(p) {
        return Ok((1.0, true));
    }
    let n = p.dim() as u32;
    let d = p.degree().max(1);
    let value = p.eval(v)?.norm() / markov_gradient_bound(n, d);
    Ok((value, false))
}

/// Cheap certified emptiness check for `H` on the doubled cube `2Q`:
/// grid sampling plus the coefficient Lipschitz bound. One-sided; `false`
/// means inconclusive.
pub fn double_cube_clear(p: &MultiPoly) -> bool {
    if p.is_constant() {
        return !p.is_zero();
    }
    let n = p.dim();
    if n > 3 {
        return false;
    }
    let g = match n {
        1 => 41,
        2 => 11,
        _ => 5,
    };
    let lip = p.lipschitz_on_box(1.5) * (2.0 * n as f64).sqrt();
    let step = 2.0 / (g - 1) as f64;
    let cover = step * (2.0 * n as f64).sqrt() / 2.0;
    let mut min_abs = f64::INFINITY;
    let total = (g as usize).pow(2 * n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut z = vec![C64::new(0.0, 0.0); n];
        for zi in z.iter_mut() {
            let a = rem % g as usize;
            rem /= g as usize;
            let b = rem % g as usize;
            rem /= g as usize;
            *zi = C64::new(-0.5 + a as f64 * step, -0.5 + b as f64 * step);
        }
        min_abs = min_abs.min(p.eval(&z).unwrap().norm());
        if min_abs <= lip * cover {
            return false;
        }
    }
    min_abs > lip * cover
}

/// Upper bound on `dist(v, H)` from root witnesses on `num_lines` seeded
/// random lines through `v`, with the lower bound filled from `dist_lower`
/// when `v` lies in `Q`.
pub fn dist_upper(
    p: &MultiPoly,
    v: &[C64],
    num_lines: usize,
    seed: u64,
) -> Result<DistanceBracket, GeomError> {
    if p.is_constant() {
        return Err(GeomError::ConstantPolynomial);
    }
    let n = p.dim();
    let mut best: Option<(f64, Vec<C64>)> = None;
    for attempt in 0..2u64 {
        let mut rng = rng_from_seed(derive_seed(seed, 0xD157 + attempt));
        for _ in 0..num_lines {
            let dir = unit_direction(&mut rng, n);
            let line = CLine::new(v.to_vec(), dir)?;
            let restricted = p.restrict_to_line(&line)?.trimmed(1e-14);
            if restricted.degree() < 1 {
                continue;
            }
            if restricted.leading().norm() / restricted.norm1() < 1e-12 {
                continue;
            }
            let roots = match find_roots(&restricted, 1e-10) {
                Ok(r) => r,
                Err(_) => continue,
            };
            for &t in &roots.roots {
                let dist = t.norm();
                if best.as_ref().map_or(true, |(b, _)| dist < *b) {
                    best = Some((dist, line.point_at(t)));
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    let (upper, witness) = best.ok_or(GeomError::DegenerateLines)?;
    let lower = if p.is_normalized() && in_unit_cube(v) {
        dist_lower(p, v)?.0.min(upper)
    } else {
        0.0
    };
    Ok(DistanceBracket { lower, upper, point: v.to_vec(), witness: Some(witness) })
}

/// Lift a disk `(t0, radius)` in the line `L` to an ellipsoid chart with
/// semi-axes `(R, c6_line * R^d / 4, ...)`.
pub fn lift_disk(line: &CLine, t0: C64, radius: f64, c6_line: f64, d: u32) -> EllipsoidChart {
    assert!(radius > 0.0 && c6_line >= 0.0);
    let n = line.dim();
    let frame = frame_from_direction(&line.direction);
    let h = c6_line * radius.powi(d as i32) / 4.0;
    let mut semi_axes = vec![h; n];
    semi_axes[0] = radius;
    EllipsoidChart {
        center: line.point_at(t0),
        frame,
        semi_axes,
        c6_line,
        chart_line: Some(ChartLine { line: line.clone(), t0, radius }),
    }
}

/// Certify that the `scale`-enlarged chart misses `H`.
///
/// Charts carrying line metadata use the factored certificate: the line
/// restriction is recomputed, its roots are enclosed in certified inclusion
/// disks, `|P|` on the scaled disk is bounded below through the factored
/// form `|lead| * prod(dist - radius)`, and the transverse offset is paid
/// for with a coefficient Lipschitz bound. Round charts fall back to grid
/// sampling plus the same Lipschitz bound. `certified = false` means
/// inconclusive, never a disproof.
pub fn certify_clearance(
    chart: &EllipsoidChart,
    scale: f64,
    p: &MultiPoly,
    budget: usize,
) -> Result<ClearanceCertificate, GeomError> {
    match &chart.chart_line {
        Some(meta) => certify_line_factored(chart, meta, scale, p),
        None => certify_grid(chart, scale, p, budget),
    }
}

fn certify_line_factored(
    chart: &EllipsoidChart,
    meta: &ChartLine,
    scale: f64,
    p: &MultiPoly,
) -> Result<ClearanceCertificate, GeomError> {
    let restricted = p.restrict_to_line(&meta.line)?.trimmed(1e-14);
    let rho_box = chart.bounding_radius(scale).max(1.0);
    let lip = p.lipschitz_on_box(rho_box) * (2.0 * p.dim() as f64).sqrt();
    let scaled_r = scale * meta.radius;

    let min_line = if restricted.degree() < 1 {
        restricted.coeff(0).norm()
    } else {
        let roots = find_roots(&restricted, 1e-12)?;
        let lead = restricted.leading().norm();
        let mut log_prod = lead.ln();
        let mut ok = true;
        for (s, &t) in roots.roots.iter().enumerate() {
            // inclusion radius inflated for safety; the certified factor is
            // the distance from the scaled disk to the inclusion disk
            let incl = roots.inclusion_radii[s] * 4.0 + 1e-290;
            let gap = (t - meta.t0).norm() - scaled_r - incl;
            if gap <= 0.0 {
                ok = false;
                break;
            }
            log_prod += gap.ln();
        }
        if ok { log_prod.exp() } else { 0.0 }
    };

    // transverse semi-axis of the scaled chart
    let h = if chart.dim() > 1 { chart.semi_axes[1] } else { 0.0 };
    let min_abs = min_line - lip * scale * h;
    Ok(ClearanceCertificate {
        chart: chart.clone(),
        scale,
        min_abs_p: min_abs.max(0.0),
        lipschitz: lip,
        sample_spacing: 0.0,
        certified: min_abs > 0.0,
        method: "line-factored".into(),
    })
}

fn certify_grid(
    chart: &EllipsoidChart,
    scale: f64,
    p: &MultiPoly,
    budget: usize,
) -> Result<ClearanceCertificate, GeomError> {
    let n = chart.dim();
    let axes = 2 * n as u32;
    let g = (budget as f64).powf(1.0 / axes as f64).floor() as usize;
    if g < 2 {
        return Err(GeomError::BudgetTooSmall(budget));
    }
    let rho_box = chart.bounding_radius(scale).max(1.0);
    let lip = p.lipschitz_on_box(rho_box) * (2.0 * n as f64).sqrt();
    let step = 2.0 * scale / (g - 1) as f64;
    let mut min_abs = f64::INFINITY;
    let total = g.pow(axes);
    for idx in 0..total {
        let mut rem = idx;
        let mut u = vec![C64::new(0.0, 0.0); n];
        for ui in u.iter_mut() {
            let a = rem % g;
            rem /= g;
            let b = rem % g;
            rem /= g;
            *ui = C64::new(-scale + a as f64 * step, -scale + b as f64 * step);
        }
        // clamp to the scaled ball; radial projection is a contraction so
        // covering radii are preserved
        let norm: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > scale {
            for ui in u.iter_mut() {
                *ui *= scale / norm;
            }
        }
        let z = chart.forward(&u);
        min_abs = min_abs.min(p.eval(&z)?.norm());
    }
    let spacing_fwd = step * chart.max_axis();
    let margin = lip * spacing_fwd * (2.0 * n as f64).sqrt() / 2.0;
    Ok(ClearanceCertificate {
        chart: chart.clone(),
        scale,
        min_abs_p: min_abs,
        lipschitz: lip,
        sample_spacing: spacing_fwd,
        certified: min_abs > margin,
        method: "grid".into(),
    })
}

/// Lower bound for the intersection radius of two charts.
///
/// Co-linear charts with the same frame use the disk case analysis (radius
/// ratio 1 gives 1/3, ratio 2 gives `2^{-d}/3`); a chart-ball junction is
/// quantified by shrinking an ambient ball about a shared witness point.
/// Returns 0 for disjoint charts.
pub fn intersection_radius_lower(a: &EllipsoidChart, b: &EllipsoidChart) -> Result<f64, GeomError> {
    let sep: f64 = a
        .center
        .iter()
        .zip(&b.center)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if sep >= a.max_axis() + b.max_axis() {
        return Ok(0.0);
    }
    if same_frame(a, b) && colinear(a, b, sep) {
        return Ok(colinear_junction(a, b, sep));
    }
    if a.is_ball() || b.is_ball() {
        return Ok(ball_junction(a, b));
    }
    Err(GeomError::UnsupportedCharts)
}

fn same_frame(a: &EllipsoidChart, b: &EllipsoidChart) -> bool {
    if a.dim() != b.dim() {
        return false;
    }
    a.frame
        .iter()
        .zip(&b.frame)
        .all(|(ca, cb)| ca.iter().zip(cb).all(|(x, y)| (x - y).norm() < 1e-9))
}

fn colinear(a: &EllipsoidChart, b: &EllipsoidChart, sep: f64) -> bool {
    // center offset lies along the first frame column
    let n = a.dim();
    let mut along = C64::new(0.0, 0.0);
    for i in 0..n {
        along += a.frame[0][i].conj() * (b.center[i] - a.center[i]);
    }
    (along.norm() - sep).abs() <= 1e-9 * sep.max(1.0)
}

fn colinear_junction(a: &EllipsoidChart, b: &EllipsoidChart, sep: f64) -> f64 {
    let (ra, rb) = (a.semi_axes[0], b.semi_axes[0]);
    let honest = {
        let side = |this: &EllipsoidChart, other: &EllipsoidChart| -> f64 {
            let m = this
                .semi_axes
                .iter()
                .zip(&other.semi_axes)
                .map(|(&sa, &so)| so / sa)
                .fold(f64::INFINITY, f64::min);
            let c = sep / this.semi_axes[0];
            ((1.0 + m - c) / 2.0).clamp(0.0, m.min(1.0))
        };
        side(a, b).min(side(b, a))
    };
    let ratio = ra / rb;
    let reltol = 1e-9;
    if (ratio - 1.0).abs() <= reltol {
        // equal disks overlapping by at least one third of the radius
        if sep <= (4.0 / 3.0) * ra * (1.0 + reltol) {
            return honest.min(1.0 / 3.0);
        }
        return honest;
    }
    if ((ratio - 2.0).abs() <= reltol || (ratio - 0.5).abs() <= reltol)
        && sep <= ra + rb - (2.0 / 3.0) * ra.min(rb) * (1.0 - reltol)
    {
        let d_exp = if a.dim() > 1 {
            let (hb, hs) = if ratio > 1.0 {
                (a.semi_axes[1], b.semi_axes[1])
            } else {
                (b.semi_axes[1], a.semi_axes[1])
            };
            (hb / hs).log2().round().max(1.0)
        } else {
            1.0
        };
        return honest.min(2f64.powf(-d_exp) / 3.0);
    }
    honest
}

fn ball_junction(a: &EllipsoidChart, b: &EllipsoidChart) -> f64 {
    // witness: walk the segment between centers looking for a point inside
    // both open charts
    let n = a.dim();
    let mut witness: Option<Vec<C64>> = None;
    for k in 0..=64 {
        let t = k as f64 / 64.0;
        let z: Vec<C64> = (0..n)
            .map(|i| a.center[i] * (1.0 - t) + b.center[i] * t)
            .collect();
        if a.preimage_norm(&z) < 1.0 - 1e-12 && b.preimage_norm(&z) < 1.0 - 1e-12 {
            witness = Some(z);
            break;
        }
    }
    let Some(w) = witness else {
        return 0.0;
    };
    let slack = |chart: &EllipsoidChart, r: f64| -> bool {
        chart.preimage_norm(&w) + r / chart.min_axis() <= 1.0
    };
    let mut lo = 0.0f64;
    let mut hi = a.max_axis().max(b.max_axis());
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if slack(a, mid) && slack(b, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo / a.max_axis()).min(lo / b.max_axis())
}

/// Shorthand: the instance constant `c_4 = c_d / (n d^2 2^d)`.
pub fn c4_constant(n: u32, d: u32) -> f64 {
    unipoly::c_d_constant(d) / markov_gradient_bound(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipoly::MultiPoly;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn poly_z1(n: usize) -> MultiPoly {
        let mut alpha = vec![0u32; n];
        alpha[0] = 1;
        MultiPoly::new(n, vec![(alpha, c(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn dist_lower_linear() {
        // n=1, d=1, P=z normalized, v=0.5 -> 0.25
        let p = poly_z1(1);
        let (v, flag) = dist_lower(&p, &[c(0.5, 0.0)]).unwrap();
        assert!(!flag);
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn dist_lower_on_h_is_zero() {
        let p = poly_z1(1);
        let (v, _) = dist_lower(&p, &[c(0.0, 0.0)]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn dist_lower_rejects_unnormalized() {
        let p = MultiPoly::new(1, vec![(vec![1], c(2.0, 0.0))]).unwrap();
        assert!(dist_lower(&p, &[c(0.5, 0.0)]).is_err());
    }

    #[test]
    fn dist_upper_n1_exact() {
        let p = poly_z1(1);
        let b = dist_upper(&p, &[c(0.3, 0.0)], 4, 1).unwrap();
        assert!((b.upper - 0.3).abs() < 1e-9);
        let w = b.witness.unwrap();
        assert!(p.eval(&w).unwrap().norm() < 1e-8);
    }

    #[test]
    fn dist_upper_product_structure() {
        // P = z1 in C^2, v = (0.4, 0.7): upper approaches 0.4 with many lines
        let p = poly_z1(2);
        let v = [c(0.4, 0.0), c(0.7, 0.0)];
        let b = dist_upper(&p, &v, 512, 7).unwrap();
        assert!(b.upper >= 0.4 - 1e-9);
        assert!(b.upper < 0.45, "upper {} should approach 0.4", b.upper);
    }

    #[test]
    fn dist_upper_monotone_in_lines() {
        let mut rng = crate::sampling::rng_from_seed(19);
        for trial in 0..10 {
            let p = random_normalized(&mut rng, 2, 2);
            let v = [c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
                     c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))];
            let few = dist_upper(&p, &v, 8, 100 + trial);
            let many = dist_upper(&p, &v, 32, 100 + trial);
            if let (Ok(f), Ok(m)) = (few, many) {
                assert!(m.upper <= f.upper + 1e-12);
            }
        }
    }

    pub(crate) fn random_normalized(rng: &mut rand_chacha::ChaCha8Rng, n: usize, d: u32) -> MultiPoly {
        loop {
            let mut terms = Vec::new();
            let mut stack = vec![vec![]];
            while let Some(prefix) = stack.pop() {
                if prefix.len() == n {
                    let total: u32 = prefix.iter().sum();
                    if total <= d {
                        terms.push((prefix.clone(), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
                    }
                    continue;
                }
                for v in 0..=d {
                    let mut p2 = prefix.clone();
                    p2.push(v);
                    stack.push(p2);
                }
            }
            let p = MultiPoly::new(n, terms).unwrap();
            if p.degree() == d {
                return p.normalize().unwrap();
            }
        }
    }

    #[test]
    fn sandwich_holds() {
        let mut rng = crate::sampling::rng_from_seed(29);
        for trial in 0..30 {
            let p = random_normalized(&mut rng, 2, 2);
            let v = [c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
                     c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))];
            let b = dist_upper(&p, &v, 32, 1000 + trial).unwrap();
            assert!(b.lower <= b.upper + 1e-12);
        }
    }

    #[test]
    fn lift_disk_geometry() {
        let line = CLine::new(vec![c(0.0, 0.0), c(0.0, 0.0)],
                              vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let chart = lift_disk(&line, c(0.2, 0.0), 0.1, 0.01, 2);
        assert!((chart.semi_axes[1] - 2.5e-5).abs() < 1e-18);
        assert!(chart.frame_defect() < 1e-10);
        // psi(0) is the embedded disk center; psi(e1) - psi(0) has norm R
        let z0 = chart.forward(&[c(0.0, 0.0), c(0.0, 0.0)]);
        assert!((z0[0] - c(0.2, 0.0)).norm() < 1e-14);
        let z1 = chart.forward(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let diff: f64 = z1.iter().zip(&z0).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!((diff - 0.1).abs() < 1e-14);
    }

    #[test]
    fn lift_disk_n1_degenerate() {
        let line = CLine::new(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        let chart = lift_disk(&line, c(0.5, 0.0), 0.1, 0.01, 1);
        assert_eq!(chart.semi_axes.len(), 1);
        assert_eq!(chart.semi_axes[0], 0.1);
    }

    #[test]
    fn certify_disk_away_from_root() {
        // P = z, disk of radius 0.1 at 0.5, scale 4: 4x disk spans 0.1..0.9
        let p = poly_z1(1);
        let line = CLine::new(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        let chart = lift_disk(&line, c(0.5, 0.0), 0.1, 0.01, 1);
        let cert = certify_clearance(&chart, 4.0, &p, 10_000).unwrap();
        assert!(cert.certified);
        assert!(cert.min_abs_p > 0.05);
    }

    #[test]
    fn certify_fails_on_h() {
        let p = poly_z1(1);
        let line = CLine::new(vec![c(0.0, 0.0)], vec![c(1.0, 0.0)]).unwrap();
        let chart = lift_disk(&line, c(0.0, 0.0), 0.1, 0.01, 1);
        let cert = certify_clearance(&chart, 4.0, &p, 10_000).unwrap();
        assert!(!cert.certified);
    }

    #[test]
    fn certify_grid_ball() {
        let p = poly_z1(2).normalize().unwrap();
        let chart = EllipsoidChart::ball(vec![c(0.8, 0.8), c(0.5, 0.5)], 0.01);
        let cert = certify_clearance(&chart, 4.0, &p, 10_000).unwrap();
        assert!(cert.certified);
        assert!(cert.margin() > 0.0);
    }

    #[test]
    fn grid_certificate_audit_soundness() {
        // a 10x denser audit never finds |P| below the certified margin
        let p = random_normalized(&mut crate::sampling::rng_from_seed(61), 2, 2);
        let chart = EllipsoidChart::ball(vec![c(0.9, 0.9), c(0.9, 0.9)], 0.005);
        let cert = certify_clearance(&chart, 4.0, &p, 4096).unwrap();
        if cert.certified {
            let audit = certify_clearance(&chart, 4.0, &p, 40_960).unwrap();
            assert!(audit.min_abs_p >= cert.margin());
        }
    }

    #[test]
    fn junction_equal_disks() {
        let line = CLine::new(vec![c(0.0, 0.0), c(0.0, 0.0)],
                              vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let a = lift_disk(&line, c(0.0, 0.0), 0.1, 0.01, 2);
        let b = lift_disk(&line, c(0.12, 0.0), 0.1, 0.01, 2);
        let r = intersection_radius_lower(&a, &b).unwrap();
        assert!(r >= 1.0 / 3.0 - 1e-12);
    }

    #[test]
    fn junction_ratio_two() {
        let d = 3u32;
        let line = CLine::new(vec![c(0.0, 0.0), c(0.0, 0.0)],
                              vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let a = lift_disk(&line, c(0.0, 0.0), 0.1, 0.01, d);
        let b = lift_disk(&line, c(0.03, 0.0), 0.05, 0.01, d);
        let r = intersection_radius_lower(&a, &b).unwrap();
        assert!((r - 2f64.powi(-(d as i32)) / 3.0).abs() < 1e-12, "got {r}");
    }

    #[test]
    fn junction_disjoint() {
        let line = CLine::new(vec![c(0.0, 0.0), c(0.0, 0.0)],
                              vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let a = lift_disk(&line, c(0.0, 0.0), 0.1, 0.01, 2);
        let b = lift_disk(&line, c(0.5, 0.0), 0.1, 0.01, 2);
        assert_eq!(intersection_radius_lower(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn junction_ball_ball() {
        let a = EllipsoidChart::ball(vec![c(0.0, 0.0)], 0.1);
        let b = EllipsoidChart::ball(vec![c(0.05, 0.0)], 0.1);
        let r = intersection_radius_lower(&a, &b).unwrap();
        assert!(r > 0.2, "overlapping equal balls should give a fat junction, got {r}");
    }

    #[test]
    fn junction_unsupported_frames() {
        let line1 = CLine::new(vec![c(0.0, 0.0), c(0.0, 0.0)],
                               vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let line2 = CLine::new(vec![c(0.0, 0.0), c(0.0, 0.0)],
                               vec![c(s, 0.0), c(s, 0.0)]).unwrap();
        let a = lift_disk(&line1, c(0.0, 0.0), 0.1, 0.01, 2);
        let b = lift_disk(&line2, c(0.0, 0.0), 0.1, 0.01, 2);
        assert!(intersection_radius_lower(&a, &b).is_err());
    }

    #[test]
    fn frame_unitary_for_random_directions() {
        let mut rng = crate::sampling::rng_from_seed(31);
        for _ in 0..20 {
            let dir = unit_direction(&mut rng, 3);
            let frame = frame_from_direction(&dir);
            let chart = EllipsoidChart {
                center: vec![c(0.0, 0.0); 3],
                frame,
                semi_axes: vec![1.0; 3],
                c6_line: 0.0,
                chart_line: None,
            };
            assert!(chart.frame_defect() < 1e-10);
        }
    }
}
