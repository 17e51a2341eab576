//! Existence of a clear ball: a ball of radius `rho(n,d)` in the unit cube
//! whose fourfold enlargement misses `H`, plus the Vitushkin-style count of
//! epsilon-cubes meeting `H`.

use crate::hypersurface::{certify_clearance, ClearanceCertificate, EllipsoidChart, GeomError};
use crate::multipoly::MultiPoly;
use crate::sampling::halton_point;
use crate::C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BallError {
    #[error("polynomial is not normalized (l1 norm {0})")]
    NotNormalized(f64),
    #[error("no certifiable clear ball found within the search budget (best margin {best_margin})")]
    NoCertifiedBall { best_margin: f64 },
    #[error("epsilon grid has {cells} cubes, above the limit of {limit}; use a larger epsilon")]
    GridTooLarge { cells: u128, limit: u128 },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Poly(#[from] crate::multipoly::PolyError),
}

/// `rho(n,d) = 1 / (4 (16(d+n))^n)`.
pub fn rho_const(n: u32, d: u32) -> f64 {
    assert!(n >= 1 && d >= 1);
    1.0 / (4.0 * (16.0 * (d + n) as f64).powi(n as i32))
}

/// `epsilon(n,d) = 1 / (16(d+n))^n = 4 rho(n,d)`.
pub fn epsilon_const(n: u32, d: u32) -> f64 {
    4.0 * rho_const(n, d)
}

/// Ball of radius `rho(n,d)` whose 4x enlargement is certified clear of `H`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClearBall {
    pub center: Vec<C64>,
    pub radius: f64,
    pub certificate: ClearanceCertificate,
}

impl ClearBall {
    pub fn chart(&self) -> EllipsoidChart {
        EllipsoidChart::ball(self.center.clone(), self.radius)
    }

    pub fn contains(&self, z: &[C64]) -> bool {
        let d2: f64 = self
            .center
            .iter()
            .zip(z)
            .map(|(c, x)| (c - x).norm_sqr())
            .sum();
        d2.sqrt() < self.radius
    }
}

const CANDIDATE_LIMIT: usize = 4096;
const CUBE_LIMIT: u128 = 10_000_000;

/// Find a certified clear ball of radius `rho(n,d)` in the unit cube.
///
/// Candidate epsilon-cube centers are drawn from a seeded low-discrepancy
/// sequence snapped to the epsilon grid (the full grid is astronomically
/// large for n = 2), ordered by `|P(center)|` descending, and the first
/// center whose inscribed `4 rho` ball certifies wins. A failed sweep
/// retries with a fourfold sampling budget before giving up.
pub fn find_clear_ball(p: &MultiPoly, seed: u64) -> Result<ClearBall, BallError> {
    if !p.is_normalized() {
        return Err(BallError::NotNormalized(p.norm1()));
    }
    let n = p.dim() as u32;
    let d = p.degree().max(1);
    let rho = rho_const(n, d);
    let eps = epsilon_const(n, d);
    let cells_per_axis = (1.0 / eps).round().max(1.0);

    // candidate cube centers: Halton points snapped to the grid, deduplicated
    let mut centers: Vec<Vec<C64>> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut i = 0u64;
    while centers.len() < CANDIDATE_LIMIT && i < 64 * CANDIDATE_LIMIT as u64 {
        let h = halton_point(seed, i, 2 * n as usize);
        i += 1;
        let idx: Vec<u64> = h
            .iter()
            .map(|&x| ((x * cells_per_axis).floor() as u64).min(cells_per_axis as u64 - 1))
            .collect();
        if !seen.insert(idx.clone()) {
            continue;
        }
        let coords: Vec<f64> = idx.iter().map(|&k| (k as f64 + 0.5) * eps).collect();
        centers.push(
            (0..n as usize)
                .map(|k| C64::new(coords[2 * k], coords[2 * k + 1]))
                .collect(),
        );
    }

    let mut scored: Vec<(f64, Vec<C64>)> = centers
        .into_iter()
        .map(|c| {
            let v = p.eval(&c).map(|z| z.norm()).unwrap_or(0.0);
            (v, c)
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut best_margin = f64::NEG_INFINITY;
    for budget in [4096usize, 16_384] {
        for (_, center) in scored.iter().take(256) {
            let chart = EllipsoidChart::ball(center.clone(), rho);
            let cert = certify_clearance(&chart, 4.0, p, budget)?;
            best_margin = best_margin.max(cert.margin());
            if cert.certified {
                return Ok(ClearBall { center: center.clone(), radius: rho, certificate: cert });
            }
        }
    }
    Err(BallError::NoCertifiedBall { best_margin })
}

/// Count of epsilon-cubes of the unit cube flagged as meeting `H`, against
/// the bound `(16(d+n))^{2n} / eps^{2n-2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VitushkinReport {
    pub epsilon: f64,
    pub count: u64,
    pub bound: f64,
}

/// Conservative cube count: a cube is flagged when its circumscribed ball
/// cannot be certified clear. Never used to prove emptiness.
pub fn vitushkin_count(p: &MultiPoly, eps: f64, seed: u64) -> Result<VitushkinReport, BallError> {
    let _ = seed;
    let n = p.dim() as u32;
    let d = p.degree().max(1);
    let m = (1.0 / eps).round().max(1.0) as u64;
    let eps_used = 1.0 / m as f64;
    let bound = (16.0 * (d + n) as f64).powi(2 * n as i32) / eps_used.powi(2 * n as i32 - 2);
    if p.is_constant() && !p.is_zero() {
        return Ok(VitushkinReport { epsilon: eps_used, count: 0, bound });
    }
    let cells = (m as u128).pow(2 * n);
    if cells > CUBE_LIMIT {
        return Err(BallError::GridTooLarge { cells, limit: CUBE_LIMIT });
    }
    let half_diag = eps_used * (2.0 * n as f64).sqrt() / 2.0;
    let lip = p.lipschitz_on_box(1.5) * (2.0 * n as f64).sqrt();
    let mut count = 0u64;
    for cell in 0..cells {
        let mut rem = cell;
        let mut center = vec![C64::new(0.0, 0.0); n as usize];
        for zi in center.iter_mut() {
            let a = (rem % m as u128) as f64;
            rem /= m as u128;
            let b = (rem % m as u128) as f64;
            rem /= m as u128;
            *zi = C64::new((a + 0.5) * eps_used, (b + 0.5) * eps_used);
        }
        let value = p.eval(&center)?.norm();
        // cheapest certificate: the whole cube is clear by the Lipschitz bound
        if value > lip * half_diag {
            continue;
        }
        // Taylor-majorant certificate on the circumscribed ball: with
        // a_alpha the coefficients of P recentered at the cube center,
        // sum_{alpha != 0} |a_alpha| r^|alpha| < |a_0| proves |P| > 0 there
        let shifted = p.shift(&center)?;
        let mut head = 0.0f64;
        let mut tail = 0.0f64;
        for (alpha, c) in shifted.terms() {
            let total: u32 = alpha.iter().sum();
            if total == 0 {
                head = c.norm();
            } else {
                tail += c.norm() * half_diag.powi(total as i32);
            }
        }
        if tail < head {
            continue;
        }
        let chart = EllipsoidChart::ball(center.clone(), half_diag);
        if !certify_clearance(&chart, 1.0, p, 4096)?.certified {
            count += 1;
        }
    }
    Ok(VitushkinReport { epsilon: eps_used, count, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipoly::MultiPoly;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rho_values() {
        assert!((rho_const(1, 1) - 1.0 / 128.0).abs() < 1e-18);
        assert!((rho_const(1, 3) - 1.0 / 256.0).abs() < 1e-18);
        assert!((rho_const(2, 2) - 1.0 / 16384.0).abs() < 1e-20);
    }

    #[test]
    fn epsilon_values_and_identity() {
        assert!((epsilon_const(1, 1) - 1.0 / 32.0).abs() < 1e-18);
        assert!((epsilon_const(2, 2) - 1.0 / 4096.0).abs() < 1e-20);
        for n in 1..=3 {
            for d in 1..=4 {
                assert_eq!(epsilon_const(n, d), 4.0 * rho_const(n, d));
            }
        }
    }

    #[test]
    fn clear_ball_for_z() {
        let p = MultiPoly::new(1, vec![(vec![1], c(1.0, 0.0))]).unwrap();
        let ball = find_clear_ball(&p, 3).unwrap();
        assert!(ball.certificate.certified);
        assert_eq!(ball.radius, rho_const(1, 1));
        // 4x ball must miss the root at 0
        assert!(ball.center[0].norm() > 4.0 * ball.radius);
        // re-certification at a 4x budget agrees
        let again = certify_clearance(&ball.chart(), 4.0, &p, 65_536).unwrap();
        assert!(again.certified);
    }

    #[test]
    fn clear_ball_avoids_interior_root() {
        let root = c(0.5, 0.5);
        let p = MultiPoly::new(1, vec![(vec![1], c(1.0, 0.0)), (vec![0], -root)])
            .unwrap()
            .normalize()
            .unwrap();
        let ball = find_clear_ball(&p, 11).unwrap();
        let dist = (ball.center[0] - root).norm();
        assert!(dist > 5.0 * ball.radius, "center too close to the root: {dist}");
    }

    #[test]
    fn clear_ball_inside_unit_cube() {
        let p = MultiPoly::new(2, vec![(vec![1, 1], c(1.0, 0.0))])
            .unwrap()
            .normalize()
            .unwrap();
        let ball = find_clear_ball(&p, 5).unwrap();
        for z in &ball.center {
            assert!(z.re > ball.radius && z.re < 1.0 - ball.radius);
            assert!(z.im > ball.radius && z.im < 1.0 - ball.radius);
        }
    }

    #[test]
    fn rejects_unnormalized() {
        let p = MultiPoly::new(1, vec![(vec![1], c(3.0, 0.0))]).unwrap();
        assert!(matches!(find_clear_ball(&p, 1), Err(BallError::NotNormalized(_))));
    }

    #[test]
    fn vitushkin_z_small_grid() {
        let p = MultiPoly::new(1, vec![(vec![1], c(1.0, 0.0))]).unwrap();
        let report = vitushkin_count(&p, 1.0 / 32.0, 1).unwrap();
        // H = {0} sits at the cube corner: at most the 4 corner cubes
        assert!(report.count <= 4, "count {}", report.count);
        assert!((report.bound - 1024.0).abs() < 1e-9);
    }

    #[test]
    fn vitushkin_constant_is_zero() {
        let p = MultiPoly::constant(1, c(1.0, 0.0));
        let report = vitushkin_count(&p, 0.25, 1).unwrap();
        assert_eq!(report.count, 0);
    }

    #[test]
    fn vitushkin_refuses_huge_grid() {
        let p = MultiPoly::new(2, vec![(vec![1, 0], c(1.0, 0.0))]).unwrap();
        assert!(matches!(
            vitushkin_count(&p, 1.0 / 4096.0, 1),
            Err(BallError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn vitushkin_interior_root_count_vs_bound() {
        let root = c(0.5, 0.5);
        let p = MultiPoly::new(1, vec![(vec![1], c(1.0, 0.0)), (vec![0], -root)])
            .unwrap()
            .normalize()
            .unwrap();
        let report = vitushkin_count(&p, 1.0 / 16.0, 2).unwrap();
        assert!(report.count >= 1);
        assert!((report.count as f64) <= report.bound);
    }
}
