//! Shared helpers for the integration suites: an argument-principle root
//! oracle implemented independently of the library's root finder, and
//! deterministic random instance generators.

use chaincover_core::multipoly::MultiPoly;
use chaincover_core::unipoly::UniPoly;
use chaincover_core::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Horner evaluation over ascending coefficients, independent of the
/// library's implementation.
fn eval(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// True when the image of the closed disk around `m` of radius `r` under the
/// polynomial stays inside the open disk centered at `p(m)` of radius
/// `|p(m)|` — certified by the Taylor-majorant bound
/// `sum_{k>=1} |a_k| r^k < |a_0|`. The argument of `p` then varies by less
/// than pi along any path inside, so principal values are exact.
fn segment_certified(coeffs: &[C64], a: C64, b: C64) -> bool {
    let m = (a + b) / 2.0;
    let r = (b - a).norm() / 2.0;
    let t = taylor_coeffs(coeffs, m);
    let a0 = t[0].norm();
    let mut tail = 0.0;
    let mut rk = 1.0;
    for ak in &t[1..] {
        rk *= r;
        tail += ak.norm() * rk;
    }
    tail < a0
}

/// Taylor coefficients of the polynomial at `m` by repeated synthetic
/// division (Horner shift).
fn taylor_coeffs(coeffs: &[C64], m: C64) -> Vec<C64> {
    let n = coeffs.len();
    let mut work = coeffs.to_vec();
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let next = work[j + 1];
            work[j] = work[j] + next * m;
        }
    }
    work
}

/// Winding number of `p` along the boundary of the square `center +- half`,
/// by adaptive argument tracking. A sub-segment is accepted only when the
/// Taylor certificate proves its image misses a half-plane through the
/// origin, making the principal argument increment exact.
/// Returns `None` when the boundary passes too close to a zero.
fn winding(coeffs: &[C64], center: C64, half: f64) -> Option<i64> {
    let corners = [
        center + C64::new(-half, -half),
        center + C64::new(half, -half),
        center + C64::new(half, half),
        center + C64::new(-half, half),
    ];
    let tiny = 1e-280;
    let mut total = 0.0f64;
    for k in 0..4 {
        let a = corners[k];
        let b = corners[(k + 1) % 4];
        let mut stack = vec![(a, b, 0u32)];
        while let Some((a, b, depth)) = stack.pop() {
            let pa = eval(coeffs, a);
            let pb = eval(coeffs, b);
            if pa.norm() < tiny || pb.norm() < tiny {
                return None;
            }
            if segment_certified(coeffs, a, b) {
                total += (pb / pa).arg();
            } else {
                if depth >= 52 {
                    return None;
                }
                let mid = (a + b) / 2.0;
                stack.push((mid, b, depth + 1));
                stack.push((a, mid, depth + 1));
            }
        }
    }
    let turns = total / (2.0 * std::f64::consts::PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 {
        return None;
    }
    Some(rounded as i64)
}

/// One subdivision sweep over an exact tiling of the initial box. Any
/// ambiguous contour (a zero too close to a box edge) aborts the sweep, so
/// that sub-box counts always add up exactly.
fn subdivision_sweep(coeffs: &[C64], center0: C64, half0: f64) -> Option<Vec<C64>> {
    let mut roots = Vec::new();
    let mut stack = vec![(center0, half0)];
    while let Some((center, half)) = stack.pop() {
        let w = winding(coeffs, center, half)?;
        if w <= 0 {
            continue;
        }
        if half < 5e-9 {
            for _ in 0..w {
                roots.push(center);
            }
            continue;
        }
        let h = half / 2.0;
        for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
            stack.push((center + C64::new(sx * h, sy * h), h));
        }
    }
    Some(roots)
}

/// All roots of the polynomial (ascending coefficients, repeated with
/// multiplicity) by argument-principle box subdivision down to 1e-8.
///
/// When a zero sits on (or too near) a subdivision edge, the whole sweep
/// restarts with the initial box shifted by an irrational offset, which
/// moves every edge at every scale.
pub fn oracle_roots(coeffs_in: &[C64]) -> Vec<C64> {
    let mut coeffs = coeffs_in.to_vec();
    while coeffs.len() > 1 && coeffs.last().unwrap().norm() == 0.0 {
        coeffs.pop();
    }
    let m = coeffs.len() - 1;
    if m == 0 {
        return Vec::new();
    }
    let lead = coeffs[m].norm();
    let bound = 1.0
        + coeffs[..m]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0f64, f64::max);

    for attempt in 0..40 {
        let shift = C64::new(0.618_033_988_7, 0.414_213_562_4) * (attempt as f64 * 0.01 * bound);
        // the enlarged half-width keeps every root strictly inside
        let half0 = bound * 1.01 + shift.norm();
        if let Some(mut roots) = subdivision_sweep(&coeffs, shift, half0) {
            assert_eq!(roots.len(), m, "subdivision miscounted roots");
            roots.sort_by(|a, b| {
                a.re.partial_cmp(&b.re)
                    .unwrap()
                    .then(a.im.partial_cmp(&b.im).unwrap())
            });
            return roots;
        }
    }
    panic!("oracle failed after 40 shifted sweeps");
}

pub fn random_unipoly(rng: &mut ChaCha8Rng, degree: usize) -> UniPoly {
    loop {
        let coeffs: Vec<C64> = (0..=degree)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        if coeffs[degree].norm() > 0.1 {
            return UniPoly::from_coeffs(coeffs);
        }
    }
}

/// Random dense normalized polynomial of exact degree `d` in `n` variables.
pub fn random_normalized_multipoly(rng: &mut ChaCha8Rng, n: usize, d: u32) -> MultiPoly {
    loop {
        let mut terms = Vec::new();
        let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
        while let Some(prefix) = stack.pop() {
            if prefix.len() == n {
                let total: u32 = prefix.iter().sum();
                if total <= d {
                    terms.push((
                        prefix,
                        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    ));
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
