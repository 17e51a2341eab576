//! Doubling-chain pipeline: endpoint admission, line selection, disk chains
//! lifted to certified ellipsoid charts, and independent chain verification.

use crate::clearball::{rho_const, BallError, ClearBall};
use crate::hypersurface::{
    c4_constant, certify_clearance, dist_lower, dist_upper, intersection_radius_lower,
    lift_disk, EllipsoidChart, GeomError,
};
use crate::multipoly::{CLine, MultiPoly, PolyError};
use crate::punctured::{
    build_disk_chain_with, delta_prime, find_path_adaptive, CoverError, DiskCover,
    PuncturedDisk,
};
use crate::sampling::{derive_seed, halton_point};
use crate::unipoly::{find_roots, markov_gradient_bound, UniError};
use crate::C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("delta {delta} exceeds rho(n,d) = {rho}")]
    DeltaTooLarge { delta: f64, rho: f64 },
    #[error("delta must be positive")]
    DeltaNonPositive,
    #[error("endpoint within delta of H: witness at distance {dist}")]
    EndpointWithinDelta { witness: Vec<C64>, dist: f64 },
    #[error("chart {index} failed clearance certification (margin {margin})")]
    CertificationFailed { index: usize, margin: f64 },
    #[error("endpoint dimension {got} does not match polynomial dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Uni(#[from] UniError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Ball(#[from] BallError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainConfig {
    pub seed: u64,
    /// Sampling budget for grid clearance certificates.
    pub budget: usize,
    /// Rasterization resolution for path finding.
    pub resolution: usize,
    /// Sample count for line selection.
    pub num_line_samples: usize,
    /// Worker count; results are independent of it (computation is
    /// deterministically ordered), it only caps fan-out.
    pub workers: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            seed: 0,
            budget: 4096,
            resolution: 2048,
            num_line_samples: 64,
            workers: 1,
        }
    }
}

/// Chain of doubling charts joining two points clear of `H`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoublingChain {
    pub delta: f64,
    pub v1: Vec<C64>,
    pub v2: Vec<C64>,
    pub charts: Vec<EllipsoidChart>,
    pub junction_radii: Vec<f64>,
    pub line1: Option<CLine>,
    pub line2: Option<CLine>,
    pub c6: Vec<f64>,
    /// Disk covers underlying the lifted charts.
    pub covers: Vec<DiskCover>,
    /// Endpoint admission fell in the gray zone (no certified lower bound
    /// >= delta, but no witness within delta either).
    pub unverified_margin: bool,
    pub report: Option<ChainReport>,
}

/// Audit report; always recomputed from the chain, never trusted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainReport {
    pub length: usize,
    pub length_bound: f64,
    /// Minimum junction radius; `None` is the sentinel for a single-chart
    /// chain (no junctions, +infinity).
    pub rho_chain: Option<f64>,
    pub rho_bound: f64,
    /// Min over charts of certified min |P| divided by `n d^2 2^d`.
    pub min_clearance: f64,
    pub endpoints_ok: bool,
    pub junctions_ok: bool,
    pub certs_ok: bool,
    pub length_ok: bool,
    pub rho_ok: bool,
    pub all_certified: bool,
    pub failing_charts: Vec<usize>,
    /// How far the chain's bounding box pokes out of the unit cube.
    pub bbox_excess: f64,
}

/// Result of line selection from an endpoint through the clear ball.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LineSelection {
    pub z_star: Vec<C64>,
    pub line: Option<CLine>,
    pub norm_pl: f64,
    /// Endpoint already inside the ball; no line needed.
    pub trivial: bool,
}

/// Pick the line through `v` and a ball point maximizing the l1 norm of the
/// restricted polynomial. Samples are a seeded low-discrepancy sequence, so
/// sample sets are nested in `num_samples`.
pub fn select_line(
    p: &MultiPoly,
    v: &[C64],
    ball: &ClearBall,
    num_samples: usize,
    seed: u64,
) -> Result<LineSelection, ChainError> {
    let n = p.dim();
    if v.len() != n {
        return Err(ChainError::DimensionMismatch { expected: n, got: v.len() });
    }
    if ball.contains(v) {
        return Ok(LineSelection {
            z_star: v.to_vec(),
            line: None,
            norm_pl: p.norm1(),
            trivial: true,
        });
    }
    let mut best: Option<(f64, Vec<C64>, CLine)> = None;
    let mut i = 0u64;
    let mut accepted = 0usize;
    while accepted < num_samples.max(32) && i < 64 * num_samples.max(32) as u64 {
        let h = halton_point(seed, i, 2 * n);
        i += 1;
        // cube inscribed in the ball keeps acceptance deterministic
        let side = ball.radius / (n as f64).sqrt() / std::f64::consts::SQRT_2;
        let z: Vec<C64> = (0..n)
            .map(|k| {
                ball.center[k]
                    + C64::new(
                        (2.0 * h[2 * k] - 1.0) * side,
                        (2.0 * h[2 * k + 1] - 1.0) * side,
                    )
            })
            .collect();
        accepted += 1;
        let Ok((line, _)) = CLine::through(v, &z) else {
            continue;
        };
        let restricted = p.restrict_to_line(&line)?;
        let norm = restricted.norm1();
        if best.as_ref().map_or(true, |(b, _, _)| norm > *b) {
            best = Some((norm, z, line));
        }
    }
    let (norm_pl, z_star, line) = best.expect("line selection sampled nothing");
    Ok(LineSelection { z_star, line: Some(line), norm_pl, trivial: false })
}

/// Endpoint admission by the witness protocol.
struct Admission {
    lower: f64,
    verified: bool,
}

fn admit_endpoint(
    p: &MultiPoly,
    v: &[C64],
    delta: f64,
    seed: u64,
) -> Result<Admission, ChainError> {
    let lower = match dist_lower(p, v) {
        Ok((l, _)) => l,
        Err(GeomError::OutsideQ) => 0.0,
        Err(e) => return Err(e.into()),
    };
    if lower >= delta {
        return Ok(Admission { lower, verified: true });
    }
    // probe 256 lines for an explicit H-witness within delta
    match dist_upper(p, v, 256, seed) {
        Ok(bracket) => {
            if bracket.upper < delta {
                return Err(ChainError::EndpointWithinDelta {
                    witness: bracket.witness.unwrap_or_default(),
                    dist: bracket.upper,
                });
            }
            Ok(Admission { lower, verified: false })
        }
        // no root witness at all (e.g. H empty along probes): gray zone
        Err(GeomError::DegenerateLines) | Err(GeomError::ConstantPolynomial) => {
            Ok(Admission { lower, verified: false })
        }
        Err(e) => Err(e.into()),
    }
}

/// Build a certified doubling chain from `v1` to `v2` at clearance `delta`.
///
/// The chain runs along the single line through both endpoints: roots of the
/// restricted polynomial are the punctures of an ambient disk in that line, a
/// path from `v1` to `v2` avoids their `delta'`-neighborhoods, the beta = 6
/// disk chain along the path is lifted to ellipsoid charts with transverse
/// axis `c6_line R^d / 4`, and every chart is certified at scale 4. All
/// junctions are then between co-linear charts with dyadic radii, which is
/// what the `2^{-d}/3` intersection bound requires.
pub fn build_chain(
    p_raw: &MultiPoly,
    v1: &[C64],
    v2: &[C64],
    delta: f64,
    config: &ChainConfig,
) -> Result<DoublingChain, ChainError> {
    let p = p_raw.normalize()?;
    let n = p.dim();
    if v1.len() != n || v2.len() != n {
        return Err(ChainError::DimensionMismatch {
            expected: n,
            got: if v1.len() != n { v1.len() } else { v2.len() },
        });
    }
    let d = p.degree().max(1);
    let rho = rho_const(n as u32, d);
    if delta <= 0.0 {
        return Err(ChainError::DeltaNonPositive);
    }
    if delta > rho {
        return Err(ChainError::DeltaTooLarge { delta, rho });
    }

    let adm1 = admit_endpoint(&p, v1, delta, derive_seed(config.seed, 1))?;
    let adm2 = admit_endpoint(&p, v2, delta, derive_seed(config.seed, 2))?;
    let unverified_margin = !(adm1.verified && adm2.verified);

    let sep: f64 = v1.iter().zip(v2).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();

    // degenerate cases: H empty, or endpoints close enough for one chart
    if p.is_constant() || sep == 0.0 || 4.0 * (sep / 2.0) * 1.5 < adm1.lower.min(adm2.lower) {
        if let Some(chain) =
            try_single_chart(&p, p_raw, v1, v2, sep, delta, config)?
        {
            return Ok(chain);
        }
    }

    let (line, _) = CLine::through(v1, v2)?;
    let restricted = p.restrict_to_line(&line)?.trimmed(1e-14);
    let norm_pl = restricted.norm1();
    let c6_line = c4_constant(n as u32, d) * norm_pl;

    let punctures: Vec<C64> = if restricted.degree() < 1 {
        Vec::new()
    } else {
        find_roots(&restricted, 1e-12)?.roots
    };

    let ambient_radius = 1.0f64.max(sep + 2.0 * rho);
    let dp = delta_prime(delta, d);
    let pd = PuncturedDisk::new(C64::new(0.0, 0.0), ambient_radius, punctures, dp);
    let t2 = C64::new(sep, 0.0);
    let path = find_path_adaptive(&pd, C64::new(0.0, 0.0), t2, config.resolution)?;

    let mut last_err = None;
    for halvings in 0..2 {
        let r_max = pd.radius / 8.0 / 2f64.powi(halvings);
        let cover = build_disk_chain_with(&pd, &path, r_max)?;
        let mut charts = Vec::with_capacity(cover.disks.len());
        let mut failed: Option<(usize, f64)> = None;
        for (i, disk) in cover.disks.iter().enumerate() {
            let chart = lift_disk(&line, disk.center, disk.radius, c6_line, d);
            let cert = certify_clearance(&chart, 4.0, &p, config.budget)?;
            if !cert.certified {
                failed = Some((i, cert.margin()));
                break;
            }
            charts.push(chart);
        }
        if let Some((index, margin)) = failed {
            last_err = Some(ChainError::CertificationFailed { index, margin });
            continue;
        }
        let mut junction_radii = Vec::with_capacity(charts.len().saturating_sub(1));
        for pair in charts.windows(2) {
            junction_radii.push(intersection_radius_lower(&pair[0], &pair[1])?);
        }
        let mut chain = DoublingChain {
            delta,
            v1: v1.to_vec(),
            v2: v2.to_vec(),
            charts,
            junction_radii,
            line1: Some(line.clone()),
            line2: Some(line.clone()),
            c6: vec![c6_line],
            covers: vec![cover],
            unverified_margin,
            report: None,
        };
        let report = verify_chain(&chain, p_raw, delta);
        chain.report = Some(report);
        return Ok(chain);
    }
    Err(last_err.expect("retry loop must record an error"))
}

fn try_single_chart(
    p: &MultiPoly,
    p_raw: &MultiPoly,
    v1: &[C64],
    v2: &[C64],
    sep: f64,
    delta: f64,
    config: &ChainConfig,
) -> Result<Option<DoublingChain>, ChainError> {
    let n = p.dim();
    let center: Vec<C64> = v1
        .iter()
        .zip(v2)
        .map(|(a, b)| (a + b) / 2.0)
        .collect();
    let radius = (sep / 2.0 * 1.5).max(delta / 8.0);
    let chart = EllipsoidChart::ball(center, radius);
    let cert = certify_clearance(&chart, 4.0, p, config.budget.max(4096))?;
    if !cert.certified {
        return Ok(None);
    }
    if chart.preimage_norm(v1) >= 1.0 || chart.preimage_norm(v2) >= 1.0 {
        return Ok(None);
    }
    let _ = n;
    let mut chain = DoublingChain {
        delta,
        v1: v1.to_vec(),
        v2: v2.to_vec(),
        charts: vec![chart],
        junction_radii: Vec::new(),
        line1: None,
        line2: None,
        c6: Vec::new(),
        covers: Vec::new(),
        unverified_margin: false,
        report: None,
    };
    let report = verify_chain(&chain, p_raw, delta);
    chain.report = Some(report);
    Ok(Some(chain))
}

/// Independent audit of an arbitrary chain: recertifies every chart with a
/// fresh budget, recomputes junction radii and endpoint membership, and
/// checks the length and intersection-radius bounds. Failures are report
/// fields, never errors.
pub fn verify_chain(chain: &DoublingChain, p_raw: &MultiPoly, delta: f64) -> ChainReport {
    let d;
    let p = match p_raw.normalize() {
        Ok(p) => {
            d = p.degree().max(1);
            Some(p)
        }
        Err(_) => {
            d = 1;
            None
        }
    };
    let n = p_raw.dim() as u32;
    let length = chain.charts.len();
    let length_bound = 36.0 * d as f64 * (180.0 * d as f64 / delta).ln() + 1.0;
    let rho_bound = 2f64.powi(-(d as i32)) / 3.0;

    let endpoints_ok = !chain.charts.is_empty()
        && chain.charts.first().unwrap().preimage_norm(&chain.v1) < 1.0
        && chain.charts.last().unwrap().preimage_norm(&chain.v2) < 1.0;

    let mut certs_ok = true;
    let mut failing_charts = Vec::new();
    let mut min_clearance = f64::INFINITY;
    if let Some(p) = &p {
        for (i, chart) in chain.charts.iter().enumerate() {
            match certify_clearance(chart, 4.0, p, 8192) {
                Ok(cert) if cert.certified => {
                    let clearance = cert.margin() / markov_gradient_bound(n, d);
                    min_clearance = min_clearance.min(clearance);
                }
                _ => {
                    certs_ok = false;
                    failing_charts.push(i);
                }
            }
        }
    } else {
        certs_ok = false;
    }
    if !min_clearance.is_finite() {
        min_clearance = 0.0;
    }

    let mut junctions_ok = true;
    let mut rho_chain: Option<f64> = None;
    for pair in chain.charts.windows(2) {
        let r = intersection_radius_lower(&pair[0], &pair[1]).unwrap_or(0.0);
        if r <= 0.0 {
            junctions_ok = false;
        }
        rho_chain = Some(rho_chain.map_or(r, |m: f64| m.min(r)));
    }

    let length_ok = (length as f64) <= length_bound;
    let rho_ok = rho_chain.map_or(true, |r| r >= rho_bound * (1.0 - 1e-9));

    let mut bbox_excess = 0.0f64;
    for chart in &chain.charts {
        let reach = chart.max_axis();
        for z in &chart.center {
            for coord in [z.re, z.im] {
                bbox_excess = bbox_excess
                    .max(coord + reach - 1.0)
                    .max(-(coord - reach));
            }
        }
    }
    bbox_excess = bbox_excess.max(0.0);

    let all_certified =
        endpoints_ok && certs_ok && junctions_ok && length_ok && rho_ok && length > 0;
    ChainReport {
        length,
        length_bound,
        rho_chain,
        rho_bound,
        min_clearance,
        endpoints_ok,
        junctions_ok,
        certs_ok,
        length_ok,
        rho_ok,
        all_certified,
        failing_charts,
        bbox_excess,
    }
}

impl DoublingChain {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
