//! Connectivity of a disk minus small neighborhoods of punctures, grid path
//! finding between points avoiding those neighborhoods, and construction of
//! the beta = 6 doubling disk chain along a path.

use crate::C64;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("point lies outside the ambient disk")]
    OutsideDisk,
    #[error("point lies inside a puncture neighborhood (clearance {clearance}, required {required})")]
    InsidePuncture { clearance: f64, required: f64 },
    #[error("resolution {0} below the minimum of 512")]
    ResolutionTooSmall(usize),
    #[error("no path found at resolution {0}")]
    NoPath(usize),
    #[error("path clearance violation at vertex {index}: clearance {clearance} < {required}")]
    PathClearance { index: usize, clearance: f64, required: f64 },
    #[error("empty polyline")]
    EmptyPath,
    #[error("disk chain exceeded the hard disk budget")]
    ChainTooLong,
}

/// Ambient disk minus `delta`-neighborhoods of the punctures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PuncturedDisk {
    pub center: C64,
    pub radius: f64,
    pub punctures: Vec<C64>,
    /// Removed-neighborhood radius.
    pub delta: f64,
}

impl PuncturedDisk {
    pub fn new(center: C64, radius: f64, punctures: Vec<C64>, delta: f64) -> Self {
        assert!(radius > 0.0 && delta > 0.0);
        PuncturedDisk { center, radius, punctures, delta }
    }

    pub fn dist_to_punctures(&self, z: C64) -> f64 {
        self.punctures
            .iter()
            .map(|&p| (z - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum over punctures of the distance to the segment `[a, b]`.
    pub fn segment_clearance(&self, a: C64, b: C64) -> f64 {
        self.punctures
            .iter()
            .map(|&p| point_segment_dist(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center).norm() <= self.radius
    }

    fn admit(&self, z: C64) -> Result<(), CoverError> {
        if !self.contains(z) {
            return Err(CoverError::OutsideDisk);
        }
        let clear = self.dist_to_punctures(z);
        if clear <= self.delta {
            return Err(CoverError::InsidePuncture { clearance: clear, required: self.delta });
        }
        Ok(())
    }
}

fn point_segment_dist(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    // real inner product <p - a, ab>
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// `delta' = delta / (10 d)`.
pub fn delta_prime(delta: f64, d: u32) -> f64 {
    assert!(delta > 0.0 && d >= 1);
    delta / (10.0 * d as f64)
}

const FREE: u8 = 1;
const BLOCKED: u8 = 2;
const OUTSIDE: u8 = 0;

/// Conservative rasterization: a pixel is blocked when its center is within
/// `delta` plus half the pixel diagonal of a puncture, so every path through
/// free pixels is certifiedly clear.
struct Raster {
    n: usize,
    x0: f64,
    y0: f64,
    pixel: f64,
    cells: Vec<u8>,
}

impl Raster {
    fn build(pd: &PuncturedDisk, resolution: usize) -> Raster {
        let n = resolution;
        let pixel = 2.0 * pd.radius / n as f64;
        let x0 = pd.center.re - pd.radius;
        let y0 = pd.center.im - pd.radius;
        let half_diag = pixel * std::f64::consts::SQRT_2 / 2.0;
        let mut cells = vec![OUTSIDE; n * n];
        for j in 0..n {
            let y = y0 + (j as f64 + 0.5) * pixel;
            for i in 0..n {
                let x = x0 + (i as f64 + 0.5) * pixel;
                let z = C64::new(x, y);
                if (z - pd.center).norm() > pd.radius {
                    continue;
                }
                let idx = j * n + i;
                cells[idx] = if pd.dist_to_punctures(z) <= pd.delta + half_diag {
                    BLOCKED
                } else {
                    FREE
                };
            }
        }
        Raster { n, x0, y0, pixel, cells }
    }

    fn center_of(&self, i: usize, j: usize) -> C64 {
        C64::new(
            self.x0 + (i as f64 + 0.5) * self.pixel,
            self.y0 + (j as f64 + 0.5) * self.pixel,
        )
    }

    fn pixel_of(&self, z: C64) -> (usize, usize) {
        let i = (((z.re - self.x0) / self.pixel) as isize).clamp(0, self.n as isize - 1);
        let j = (((z.im - self.y0) / self.pixel) as isize).clamp(0, self.n as isize - 1);
        (i as usize, j as usize)
    }

    /// Free pixels nearest to `z`, by expanding square rings.
    fn nearest_free(&self, z: C64, max_ring: usize, limit: usize) -> Vec<(usize, usize)> {
        let (ci, cj) = self.pixel_of(z);
        let mut out = Vec::new();
        for ring in 0..=max_ring {
            let lo_i = ci.saturating_sub(ring);
            let hi_i = (ci + ring).min(self.n - 1);
            let lo_j = cj.saturating_sub(ring);
            let hi_j = (cj + ring).min(self.n - 1);
            let mut ring_hits = Vec::new();
            for j in lo_j..=hi_j {
                for i in lo_i..=hi_i {
                    let on_ring = ring == 0
                        || i == lo_i
                        || i == hi_i
                        || j == lo_j
                        || j == hi_j;
                    if on_ring && self.cells[j * self.n + i] == FREE {
                        ring_hits.push((i, j));
                    }
                }
            }
            ring_hits.sort_by(|a, b| {
                let da = (self.center_of(a.0, a.1) - z).norm();
                let db = (self.center_of(b.0, b.1) - z).norm();
                da.partial_cmp(&db).unwrap().then(a.cmp(b))
            });
            out.extend(ring_hits);
            if out.len() >= limit {
                out.truncate(limit);
                break;
            }
        }
        out
    }

    /// Connected-component labels over a cell predicate, 8-connectivity.
    fn label(&self, kind: u8) -> Vec<u32> {
        let mut labels = vec![0u32; self.n * self.n];
        let mut next = 1u32;
        let mut queue = VecDeque::new();
        for start in 0..self.cells.len() {
            if self.cells[start] != kind || labels[start] != 0 {
                continue;
            }
            labels[start] = next;
            queue.push_back(start);
            while let Some(idx) = queue.pop_front() {
                let (i, j) = (idx % self.n, idx / self.n);
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let ni = i as i64 + di;
                        let nj = j as i64 + dj;
                        if ni < 0 || nj < 0 || ni >= self.n as i64 || nj >= self.n as i64 {
                            continue;
                        }
                        let nidx = nj as usize * self.n + ni as usize;
                        if self.cells[nidx] == kind && labels[nidx] == 0 {
                            labels[nidx] = next;
                            queue.push_back(nidx);
                        }
                    }
                }
            }
            next += 1;
        }
        labels
    }
}

/// Flood-fill oracle: whether `v1` and `v2` lie in the same connected
/// component of the rasterized punctured disk.
pub fn same_component_grid(
    pd: &PuncturedDisk,
    v1: C64,
    v2: C64,
    resolution: usize,
) -> Result<bool, CoverError> {
    if resolution < 512 {
        return Err(CoverError::ResolutionTooSmall(resolution));
    }
    pd.admit(v1)?;
    pd.admit(v2)?;
    if (v1 - v2).norm() == 0.0 {
        return Ok(true);
    }
    let raster = Raster::build(pd, resolution);
    let labels = raster.label(FREE);
    let l1 = snap_label(&raster, &labels, v1);
    let l2 = snap_label(&raster, &labels, v2);
    match (l1, l2) {
        (Some(a), Some(b)) => Ok(a == b),
        _ => Ok(false),
    }
}

fn snap_label(raster: &Raster, labels: &[u32], z: C64) -> Option<u32> {
    // conservatism can block the point's own pixel; an admissible point has
    // free pixels within a couple of pixel diagonals
    raster
        .nearest_free(z, 8, 1)
        .first()
        .map(|&(i, j)| labels[j * raster.n + i])
}

/// Diameters (in ambient units) of the flood-fill components of the blocked
/// region, computed over component boundary pixels.
pub fn puncture_component_diameters(pd: &PuncturedDisk, resolution: usize) -> Vec<f64> {
    let raster = Raster::build(pd, resolution);
    let labels = raster.label(BLOCKED);
    let max_label = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut boundary: Vec<Vec<C64>> = vec![Vec::new(); max_label + 1];
    let n = raster.n;
    for j in 0..n {
        for i in 0..n {
            let idx = j * n + i;
            let l = labels[idx] as usize;
            if l == 0 {
                continue;
            }
            let mut is_boundary = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            if !is_boundary {
                'scan: for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let nidx = ((j as i64 + dj) * n as i64 + i as i64 + di) as usize;
                        if labels[nidx] != l as u32 {
                            is_boundary = true;
                            break 'scan;
                        }
                    }
                }
            }
            if is_boundary {
                boundary[l].push(raster.center_of(i, j));
            }
        }
    }
    boundary
        .into_iter()
        .skip(1)
        .map(|pts| {
            let mut diam = 0.0f64;
            for a in 0..pts.len() {
                for b in (a + 1)..pts.len() {
                    diam = diam.max((pts[a] - pts[b]).norm());
                }
            }
            diam
        })
        .collect()
}

/// Polyline from `v1` to `v2` staying clear of the punctures: grid BFS with
/// 8-connectivity, then greedy shortcut smoothing under exact segment
/// clearance checks.
pub fn find_path(
    pd: &PuncturedDisk,
    v1: C64,
    v2: C64,
    resolution: usize,
) -> Result<Vec<C64>, CoverError> {
    if resolution < 512 {
        return Err(CoverError::ResolutionTooSmall(resolution));
    }
    pd.admit(v1)?;
    pd.admit(v2)?;
    if pd.segment_clearance(v1, v2) > pd.delta {
        return Ok(vec![v1, v2]);
    }
    let raster = Raster::build(pd, resolution);
    let start = escape_targets(pd, &raster, v1)?;
    let goal = escape_targets(pd, &raster, v2)?;
    let path_px = bfs_path(&raster, &start, &goal).ok_or(CoverError::NoPath(resolution))?;
    let mut path: Vec<C64> = Vec::with_capacity(path_px.len() + 2);
    path.push(v1);
    path.extend(path_px.iter().map(|&(i, j)| raster.center_of(i, j)));
    path.push(v2);
    let smoothed = smooth_path(pd, &path);
    audit_path(pd, &smoothed)?;
    Ok(smoothed)
}

/// `find_path` with resolution doubling up to 4x on failure.
pub fn find_path_adaptive(
    pd: &PuncturedDisk,
    v1: C64,
    v2: C64,
    resolution: usize,
) -> Result<Vec<C64>, CoverError> {
    let mut res = resolution.max(512);
    let mut last = CoverError::NoPath(res);
    for _ in 0..3 {
        match find_path(pd, v1, v2, res) {
            Ok(p) => return Ok(p),
            Err(e @ CoverError::NoPath(_)) => {
                last = e;
                res *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Free pixels reachable from `z` through an exactly-clear escape segment.
fn escape_targets(
    pd: &PuncturedDisk,
    raster: &Raster,
    z: C64,
) -> Result<Vec<(usize, usize)>, CoverError> {
    let max_ring = ((pd.delta / raster.pixel).ceil() as usize + 4).min(raster.n);
    let candidates = raster.nearest_free(z, max_ring, 16);
    let ok: Vec<(usize, usize)> = candidates
        .into_iter()
        .filter(|&(i, j)| pd.segment_clearance(z, raster.center_of(i, j)) > pd.delta)
        .collect();
    if ok.is_empty() {
        return Err(CoverError::NoPath(raster.n));
    }
    Ok(ok)
}

fn bfs_path(
    raster: &Raster,
    start: &[(usize, usize)],
    goal: &[(usize, usize)],
) -> Option<Vec<(usize, usize)>> {
    let n = raster.n;
    let mut prev = vec![usize::MAX; n * n];
    let mut queue = VecDeque::new();
    let goal_set: Vec<usize> = goal.iter().map(|&(i, j)| j * n + i).collect();
    for &(i, j) in start {
        let idx = j * n + i;
        if prev[idx] == usize::MAX {
            prev[idx] = idx;
            queue.push_back(idx);
        }
    }
    let mut found = None;
    'outer: while let Some(idx) = queue.pop_front() {
        if goal_set.contains(&idx) {
            found = Some(idx);
            break 'outer;
        }
        let (i, j) = (idx % n, idx / n);
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let ni = i as i64 + di;
                let nj = j as i64 + dj;
                if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                    continue;
                }
                let nidx = nj as usize * n + ni as usize;
                if raster.cells[nidx] == FREE && prev[nidx] == usize::MAX {
                    prev[nidx] = idx;
                    queue.push_back(nidx);
                }
            }
        }
    }
    let mut idx = found?;
    let mut out = Vec::new();
    loop {
        out.push((idx % n, idx / n));
        if prev[idx] == idx {
            break;
        }
        idx = prev[idx];
    }
    out.reverse();
    Some(out)
}

/// Greedy segment merging: from each vertex jump to the farthest later
/// vertex reachable through an exactly-clear in-disk segment.
fn smooth_path(pd: &PuncturedDisk, path: &[C64]) -> Vec<C64> {
    let mut out = vec![path[0]];
    let mut i = 0;
    while i + 1 < path.len() {
        let mut j = path.len() - 1;
        while j > i + 1 {
            if pd.segment_clearance(path[i], path[j]) > pd.delta
                && pd.contains(path[i])
                && pd.contains(path[j])
            {
                break;
            }
            j -= 1;
        }
        out.push(path[j]);
        i = j;
    }
    out
}

fn audit_path(pd: &PuncturedDisk, path: &[C64]) -> Result<(), CoverError> {
    if path.is_empty() {
        return Err(CoverError::EmptyPath);
    }
    for (k, pair) in path.windows(2).enumerate() {
        let clear = pd.segment_clearance(pair[0], pair[1]);
        if clear <= pd.delta {
            return Err(CoverError::PathClearance {
                index: k,
                clearance: clear,
                required: pd.delta,
            });
        }
    }
    Ok(())
}

/// One disk of a cover, in the line coordinate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoverDisk {
    pub center: C64,
    pub radius: f64,
}

/// Chain of disks along a polyline with the beta = 6 doubling property.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiskCover {
    pub disks: Vec<CoverDisk>,
    /// Index pairs with certified nonempty intersection (consecutive disks).
    pub adjacency: Vec<(usize, usize)>,
    pub beta: f64,
    /// The polyline the cover was built for.
    pub path: Vec<C64>,
    pub r_max: f64,
}

/// Per-property audit of a [`DiskCover`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverAudit {
    pub clearance_ok: bool,
    pub dyadic_ok: bool,
    pub ratio_ok: bool,
    pub overlap_ok: bool,
    pub coverage_ok: bool,
    pub endpoints_ok: bool,
    pub count: usize,
    pub count_bound: f64,
    pub witnesses: Vec<String>,
}

impl CoverAudit {
    pub fn all_pass(&self) -> bool {
        self.clearance_ok
            && self.dyadic_ok
            && self.ratio_ok
            && self.overlap_ok
            && self.coverage_ok
            && self.endpoints_ok
    }
}

const MAX_DISKS: usize = 1_000_000;
const MAX_DYADIC_LEVEL: i32 = 120;

/// Greedy path-following construction of the disk chain: at arc position `s`
/// the radius is `min(R_max, dist(gamma(s), Z)/6)` rounded down to the
/// dyadic grid `R_max 2^{-k}`, and the center advances along the path by
/// `(2/3) min(R_current, R_next)`. The 1-Lipschitz distance to the punctures
/// keeps consecutive dyadic levels within one step of each other.
pub fn build_disk_chain(pd: &PuncturedDisk, path: &[C64]) -> Result<DiskCover, CoverError> {
    build_disk_chain_with(pd, path, pd.radius / 8.0)
}

/// [`build_disk_chain`] with an explicit maximum radius (used by retry
/// logic that shrinks the dyadic grid).
pub fn build_disk_chain_with(
    pd: &PuncturedDisk,
    path: &[C64],
    r_max: f64,
) -> Result<DiskCover, CoverError> {
    audit_path(pd, path)?;
    let arc = ArcWalk::new(path);
    let radius_at = |z: C64| -> f64 {
        let target = (pd.dist_to_punctures(z) / 6.0).min(r_max);
        dyadic_round_down(target, r_max)
    };

    let mut disks: Vec<CoverDisk> = Vec::new();
    let mut s = 0.0f64;
    loop {
        let z = arc.point(s);
        let r = radius_at(z);
        if r <= 0.0 {
            return Err(CoverError::PathClearance {
                index: 0,
                clearance: pd.dist_to_punctures(z),
                required: pd.delta,
            });
        }
        disks.push(CoverDisk { center: z, radius: r });
        if disks.len() > MAX_DISKS {
            return Err(CoverError::ChainTooLong);
        }
        if s >= arc.total {
            break;
        }
        // fixed-point step h = (2/3) min(R_cur, R(s+h)), clamped at the end
        let mut h = (2.0 / 3.0) * r;
        for _ in 0..12 {
            let s_next = (s + h).min(arc.total);
            let r_next = radius_at(arc.point(s_next));
            let h_next = (2.0 / 3.0) * r.min(r_next);
            if (h_next - h).abs() <= 1e-15 * h.max(1e-300) {
                h = h_next;
                break;
            }
            h = h_next;
        }
        s = (s + h).min(arc.total);
    }
    let adjacency = (0..disks.len().saturating_sub(1)).map(|i| (i, i + 1)).collect();
    Ok(DiskCover {
        disks,
        adjacency,
        beta: 6.0,
        path: path.to_vec(),
        r_max,
    })
}

fn dyadic_round_down(target: f64, r_max: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    if target >= r_max {
        return r_max;
    }
    let k = (r_max / target).log2().ceil() as i32;
    let k = k.clamp(0, MAX_DYADIC_LEVEL);
    // guard against log rounding on exact powers of two
    let mut r = r_max * 2f64.powi(-k);
    if r > target {
        r *= 0.5;
    } else if r * 2.0 <= target {
        r *= 2.0;
    }
    r
}

struct ArcWalk {
    verts: Vec<C64>,
    cum: Vec<f64>,
    total: f64,
}

impl ArcWalk {
    fn new(path: &[C64]) -> ArcWalk {
        let mut cum = vec![0.0];
        for pair in path.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + (pair[1] - pair[0]).norm());
        }
        let total = *cum.last().unwrap();
        ArcWalk { verts: path.to_vec(), cum, total }
    }

    fn point(&self, s: f64) -> C64 {
        let s = s.clamp(0.0, self.total);
        match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => self.verts[i],
            Err(i) => {
                let a = self.verts[i - 1];
                let b = self.verts[i];
                let seg = self.cum[i] - self.cum[i - 1];
                if seg == 0.0 {
                    a
                } else {
                    a + (b - a) * ((s - self.cum[i - 1]) / seg)
                }
            }
        }
    }
}

/// Re-verify every cover invariant from scratch.
pub fn audit_cover(cover: &DiskCover, pd: &PuncturedDisk) -> CoverAudit {
    let reltol = 1e-9;
    let mut witnesses = Vec::new();

    let mut clearance_ok = true;
    for (i, d) in cover.disks.iter().enumerate() {
        let clear = pd.dist_to_punctures(d.center);
        if cover.beta * d.radius > clear * (1.0 + reltol) {
            clearance_ok = false;
            witnesses.push(format!(
                "disk {i}: 6R = {} exceeds puncture distance {clear}",
                cover.beta * d.radius
            ));
        }
    }

    let mut dyadic_ok = true;
    for (i, d) in cover.disks.iter().enumerate() {
        let ratio = cover.r_max / d.radius;
        let k = ratio.log2();
        if (k - k.round()).abs() > 1e-9 || k < -1e-9 {
            dyadic_ok = false;
            witnesses.push(format!("disk {i}: radius {} not dyadic below {}", d.radius, cover.r_max));
        }
    }

    let mut ratio_ok = true;
    let mut overlap_ok = true;
    for &(i, j) in &cover.adjacency {
        let (ri, rj) = (cover.disks[i].radius, cover.disks[j].radius);
        let ratio = ri / rj;
        if ![0.5, 1.0, 2.0].iter().any(|&t| (ratio - t).abs() <= reltol * t) {
            ratio_ok = false;
            witnesses.push(format!("pair ({i},{j}): radius ratio {ratio}"));
        }
        let e = (cover.disks[i].center - cover.disks[j].center).norm();
        let lens = ((ri + rj - e) / 2.0).min(ri).min(rj);
        if lens < ri.min(rj) / 3.0 * (1.0 - reltol) {
            overlap_ok = false;
            witnesses.push(format!("pair ({i},{j}): lens radius {lens} below min/3"));
        }
    }

    let mut coverage_ok = true;
    let arc = ArcWalk::new(&cover.path);
    let samples = 4096;
    'cov: for k in 0..=samples {
        let z = arc.point(arc.total * k as f64 / samples as f64);
        if !cover
            .disks
            .iter()
            .any(|d| (z - d.center).norm() <= d.radius * (1.0 + reltol))
        {
            coverage_ok = false;
            witnesses.push(format!("path point {z} not covered"));
            break 'cov;
        }
    }

    let endpoints_ok = match (cover.path.first(), cover.disks.first(), cover.path.last(), cover.disks.last()) {
        (Some(&a), Some(d0), Some(&b), Some(dl)) => {
            (a - d0.center).norm() <= d0.radius * (1.0 + reltol)
                && (b - dl.center).norm() <= dl.radius * (1.0 + reltol)
        }
        _ => false,
    };
    if !endpoints_ok {
        witnesses.push("endpoints not contained in first/last disk".into());
    }

    let d = pd.punctures.len().max(1) as f64;
    let count_bound = 18.0 * d * (18.0 / pd.delta).ln();
    CoverAudit {
        clearance_ok,
        dyadic_ok,
        ratio_ok,
        overlap_ok,
        coverage_ok,
        endpoints_ok,
        count: cover.disks.len(),
        count_bound,
        witnesses,
    }
}
