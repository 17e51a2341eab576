//! Downstream bounds: Kobayashi-distance upper bounds from chains, doubling
//! constants of rational functions on grid domains, and delta-sweep scaling
//! studies of chain length and doubling constant.

use crate::chain::{build_chain, ChainConfig, DoublingChain};
use crate::clearball::rho_const;
use crate::hypersurface::dist_upper;
use crate::multipoly::MultiPoly;
use crate::sampling::{derive_seed, linear_fit};
use crate::C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("chain is not verified (missing report or all_certified = false)")]
    UnverifiedChain,
    #[error("omega grid is not a subset of the G grid")]
    OmegaNotSubset,
    #[error("max of |f| over omega is zero")]
    OmegaMaxZero,
    #[error("declared omega ball radius {radius} below rho(n,d)/10 = {required}")]
    BallTooSmall { radius: f64, required: f64 },
    #[error("denominator vanishes at a grid point")]
    DenominatorVanishes,
    #[error("empty grid")]
    EmptyGrid,
}

/// `3 l(Ch)` for a verified chain.
pub fn kobayashi_upper(chain: &DoublingChain) -> Result<f64, AnalysisError> {
    match &chain.report {
        Some(r) if r.all_certified => Ok(3.0 * r.length as f64),
        _ => Err(AnalysisError::UnverifiedChain),
    }
}

/// `180 d ln(180 d / delta)`.
pub fn kobayashi_closed_form_bound(d: u32, delta: f64) -> f64 {
    assert!(d >= 1 && delta > 0.0);
    180.0 * d as f64 * (180.0 * d as f64 / delta).ln()
}

/// Membership domain backing the local refinement of grid maxima.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GridDomain {
    /// Bare point set; no refinement beyond the grid.
    Points,
    /// `{ z in [0,1]^{2n} : |P(z)| >= tau }`.
    SubLevel { p: MultiPoly, tau: f64 },
    /// Closed ball.
    Ball { center: Vec<C64>, radius: f64 },
}

impl GridDomain {
    pub fn contains_point(&self, z: &[C64]) -> bool {
        match self {
            GridDomain::Points => true,
            GridDomain::SubLevel { p, tau } => {
                z.iter()
                    .all(|w| (0.0..=1.0).contains(&w.re) && (0.0..=1.0).contains(&w.im))
                    && p.eval(z).map(|v| v.norm() >= *tau).unwrap_or(false)
            }
            GridDomain::Ball { center, radius } => {
                let d2: f64 = center.iter().zip(z).map(|(c, x)| (c - x).norm_sqr()).sum();
                d2.sqrt() <= *radius
            }
        }
    }
}

/// Rational function `f = A / P^k` with sample grids for the compacts
/// `G` and `Omega` (`Omega` must be a sub-point-set of `G` and contain a
/// declared ball of radius at least `rho(n,d)/10`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoublingQuery {
    pub numerator: MultiPoly,
    pub denominator: MultiPoly,
    pub k: u32,
    pub g_points: Vec<Vec<C64>>,
    pub omega_points: Vec<Vec<C64>>,
    pub g_domain: GridDomain,
    pub omega_domain: GridDomain,
    pub omega_ball_center: Vec<C64>,
    pub omega_ball_radius: f64,
    /// Initial refinement step (typically the grid spacing).
    pub refine_step: f64,
}

impl DoublingQuery {
    pub fn new(
        numerator: MultiPoly,
        denominator: MultiPoly,
        k: u32,
        g_points: Vec<Vec<C64>>,
        omega_points: Vec<Vec<C64>>,
        g_domain: GridDomain,
        omega_domain: GridDomain,
        omega_ball_center: Vec<C64>,
        omega_ball_radius: f64,
        refine_step: f64,
    ) -> Result<Self, AnalysisError> {
        let key = |z: &Vec<C64>| -> Vec<(u64, u64)> {
            z.iter().map(|w| (w.re.to_bits(), w.im.to_bits())).collect()
        };
        let g_set: std::collections::BTreeSet<_> = g_points.iter().map(key).collect();
        if !omega_points.iter().all(|z| g_set.contains(&key(z))) {
            return Err(AnalysisError::OmegaNotSubset);
        }
        let n = denominator.dim() as u32;
        let d = denominator.degree().max(1);
        let required = rho_const(n, d) / 10.0;
        if omega_ball_radius < required {
            return Err(AnalysisError::BallTooSmall { radius: omega_ball_radius, required });
        }
        Ok(DoublingQuery {
            numerator,
            denominator,
            k,
            g_points,
            omega_points,
            g_domain,
            omega_domain,
            omega_ball_center,
            omega_ball_radius,
            refine_step,
        })
    }

    fn eval(&self, z: &[C64]) -> Result<f64, AnalysisError> {
        let den = self
            .denominator
            .eval(z)
            .map_err(|_| AnalysisError::DenominatorVanishes)?
            .norm();
        if den == 0.0 {
            return Err(AnalysisError::DenominatorVanishes);
        }
        let num = self
            .numerator
            .eval(z)
            .map_err(|_| AnalysisError::DenominatorVanishes)?
            .norm();
        Ok(num / den.powi(self.k as i32))
    }
}

/// `DC_f(G, Omega) = max_G |f| / max_Omega |f|`, each maximum taken over the
/// sample grid followed by a local pattern-search refinement constrained to
/// the domain (infeasible moves are projected onto the domain boundary by
/// bisection, which is what reaches e.g. the exact `|P| = tau` level set).
pub fn doubling_constant(q: &DoublingQuery) -> Result<f64, AnalysisError> {
    let max_g = refined_max(q, &q.g_points, &q.g_domain)?;
    let max_o = refined_max(q, &q.omega_points, &q.omega_domain)?;
    if max_o == 0.0 {
        return Err(AnalysisError::OmegaMaxZero);
    }
    Ok(max_g / max_o)
}

fn refined_max(
    q: &DoublingQuery,
    points: &[Vec<C64>],
    domain: &GridDomain,
) -> Result<f64, AnalysisError> {
    let mut best_val = f64::NEG_INFINITY;
    let mut best_pt: Option<Vec<C64>> = None;
    for z in points {
        let v = q.eval(z)?;
        if v > best_val {
            best_val = v;
            best_pt = Some(z.clone());
        }
    }
    let Some(start) = best_pt else {
        return Err(AnalysisError::EmptyGrid);
    };
    if matches!(domain, GridDomain::Points) {
        return Ok(best_val);
    }
    let n = start.len();
    let mut cur = start;
    let mut cur_val = best_val;
    let mut step = q.refine_step;
    for _ in 0..60 {
        let mut improved = false;
        for axis in 0..2 * n {
            for sign in [-1.0f64, 1.0] {
                let mut cand = cur.clone();
                if axis % 2 == 0 {
                    cand[axis / 2].re += sign * step;
                } else {
                    cand[axis / 2].im += sign * step;
                }
                let cand = if domain.contains_point(&cand) {
                    cand
                } else {
                    project_to_boundary(&cur, &cand, domain)
                };
                if let Ok(v) = q.eval(&cand) {
                    if v > cur_val * (1.0 + 1e-15) {
                        cur_val = v;
                        cur = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
            if step < q.refine_step * 1e-12 {
                break;
            }
        }
    }
    Ok(cur_val.max(best_val))
}

/// Last feasible point on the segment from the feasible `a` toward the
/// infeasible `b`.
fn project_to_boundary(a: &[C64], b: &[C64], domain: &GridDomain) -> Vec<C64> {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let lerp = |t: f64| -> Vec<C64> {
        a.iter().zip(b).map(|(x, y)| x * (1.0 - t) + y * t).collect()
    };
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if domain.contains_point(&lerp(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lerp(lo)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyRow {
    pub delta: f64,
    pub length: usize,
    pub bound: f64,
    pub dc: Option<f64>,
    pub min_clearance: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub deltas: Vec<f64>,
    pub rows: Vec<StudyRow>,
    /// ln(DC) against ln(1/delta).
    pub dc_fit: Option<Fit>,
    /// l(Ch) against ln(1/delta).
    pub len_fit: Option<Fit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub chain: ChainConfig,
    /// Grid density per real axis for the G grid.
    pub grid_density: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { chain: ChainConfig::default(), grid_density: 256 }
    }
}

/// Delta sweep on a fixed instance: for each delta, place a point at
/// distance about delta from `H`, build and verify a chain to `v_far`,
/// measure `DC_{1/P}` between the `|P| >= delta` grid and a small ball
/// around `v_far`, then regress both series against `ln(1/delta)`.
pub fn run_scaling_study(
    p_raw: &MultiPoly,
    v_far: &[C64],
    deltas: &[f64],
    config: &StudyConfig,
) -> Result<ScalingStudy, AnalysisError> {
    let p = p_raw.normalize().map_err(|_| AnalysisError::DenominatorVanishes)?;
    let n = p.dim();
    let d = p.degree().max(1);
    assert!(
        deltas.windows(2).all(|w| w[1] < w[0]),
        "deltas must be strictly decreasing"
    );

    let mut rows = Vec::new();
    for (i, &delta) in deltas.iter().enumerate() {
        let seed = derive_seed(config.chain.seed, 0xA11A + i as u64);
        let (length, bound, min_clearance, certified) =
            match pick_near_point(&p, v_far, delta, seed).and_then(|v_delta| {
                build_chain(p_raw, &v_delta, v_far, delta, &config.chain).ok()
            }) {
                Some(chain) => {
                    let r = chain.report.as_ref().expect("builder embeds a report");
                    (r.length, r.length_bound, r.min_clearance, r.all_certified)
                }
                None => (0, 0.0, 0.0, false),
            };

        let dc = study_dc(&p, v_far, delta, config).ok();
        rows.push(StudyRow { delta, length, bound, dc, min_clearance, certified });
    }

    let good: Vec<&StudyRow> = rows
        .iter()
        .filter(|r| r.certified && r.dc.is_some())
        .collect();
    let xs: Vec<f64> = good.iter().map(|r| (1.0 / r.delta).ln()).collect();
    let dc_fit = linear_fit(
        &xs,
        &good.iter().map(|r| r.dc.unwrap().ln()).collect::<Vec<_>>(),
    )
    .map(|(slope, intercept, r)| Fit { slope, intercept, r });
    let len_fit = linear_fit(
        &xs,
        &good.iter().map(|r| r.length as f64).collect::<Vec<_>>(),
    )
    .map(|(slope, intercept, r)| Fit { slope, intercept, r });

    let _ = n;
    let _ = d;
    Ok(ScalingStudy { deltas: deltas.to_vec(), rows, dc_fit, len_fit })
}

/// Point at distance about `delta` from `H` on the segment from the nearest
/// found root witness toward `v_far`, accepted through the witness protocol.
fn pick_near_point(p: &MultiPoly, v_far: &[C64], delta: f64, seed: u64) -> Option<Vec<C64>> {
    let bracket = dist_upper(p, v_far, 256, seed).ok()?;
    let w = bracket.witness?;
    let diff: Vec<C64> = v_far.iter().zip(&w).map(|(a, b)| a - b).collect();
    let norm: f64 = diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    for factor in [1.05, 1.1, 1.2, 1.5, 2.0] {
        let v: Vec<C64> = w
            .iter()
            .zip(&diff)
            .map(|(wi, di)| wi + di * (delta * factor / norm))
            .collect();
        if !v
            .iter()
            .all(|z| (0.0..=1.0).contains(&z.re) && (0.0..=1.0).contains(&z.im))
        {
            continue;
        }
        match dist_upper(p, &v, 256, derive_seed(seed, factor.to_bits())) {
            Ok(b) if b.upper >= delta && b.upper <= 2.0 * delta => return Some(v),
            _ => continue,
        }
    }
    None
}

fn study_dc(
    p: &MultiPoly,
    v_far: &[C64],
    delta: f64,
    config: &StudyConfig,
) -> Result<f64, AnalysisError> {
    let n = p.dim();
    let m = config.grid_density.max(8);
    let g_domain = GridDomain::SubLevel { p: p.clone(), tau: delta };

    let mut g_points: Vec<Vec<C64>> = Vec::new();
    // full product grid is only tractable for n = 1; for n >= 2 sample the
    // grid through a coarser density on each real axis
    let per_axis = if n == 1 { m } else { m.min(24) };
    let total = (per_axis as u64).pow(2 * n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut z = vec![C64::new(0.0, 0.0); n];
        for zi in z.iter_mut() {
            let a = (rem % per_axis as u64) as f64;
            rem /= per_axis as u64;
            let b = (rem % per_axis as u64) as f64;
            rem /= per_axis as u64;
            *zi = C64::new(a / (per_axis - 1) as f64, b / (per_axis - 1) as f64);
        }
        if g_domain.contains_point(&z) {
            g_points.push(z);
        }
    }

    let n_f = n as f64;
    let rho = rho_const(n as u32, p.degree().max(1));
    let radius = (rho / 10.0).max(1e-6).min(0.05 / n_f.sqrt());
    let omega_domain = GridDomain::Ball { center: v_far.to_vec(), radius };
    let mut omega_points: Vec<Vec<C64>> = Vec::new();
    let om = 6usize;
    let ototal = (om as u64).pow(2 * n as u32);
    for idx in 0..ototal {
        let mut rem = idx;
        let mut z = vec![C64::new(0.0, 0.0); n];
        for (k, zi) in z.iter_mut().enumerate() {
            let a = (rem % om as u64) as f64;
            rem /= om as u64;
            let b = (rem % om as u64) as f64;
            rem /= om as u64;
            *zi = v_far[k]
                + C64::new(
                    (2.0 * a / (om - 1) as f64 - 1.0) * radius / (2.0 * n_f).sqrt(),
                    (2.0 * b / (om - 1) as f64 - 1.0) * radius / (2.0 * n_f).sqrt(),
                );
        }
        if omega_domain.contains_point(&z) && g_domain.contains_point(&z) {
            omega_points.push(z);
        }
    }
    g_points.extend(omega_points.iter().cloned());

    let query = DoublingQuery::new(
        MultiPoly::constant(n, C64::new(1.0, 0.0)),
        p.clone(),
        1,
        g_points,
        omega_points,
        g_domain,
        omega_domain,
        v_far.to_vec(),
        radius,
        1.0 / (per_axis - 1) as f64,
    )?;
    doubling_constant(&query)
}
