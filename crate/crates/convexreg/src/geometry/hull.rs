//! Lower convex hulls of lifted samples.
//!
//! Samples `(x_i, v_i)` are lifted to `R^{d+1}`; the facets of the convex
//! hull whose outward normal points down in the last coordinate describe the
//! largest convex function dominated by the samples. Dimension one uses an
//! exact monotone chain; higher dimensions run an incremental beneath-beyond
//! hull with a small visibility tolerance, verified afterwards against the
//! samples and retried with a deterministic downward joggle if the
//! degenerate-input handling ever leaves an inconsistent facet set.

use super::domain::affinely_spans;
use super::{dot, AffinePiece, ConvexEnvelope, GeometryError, PolyhedralDomain};
use crate::linalg;

/// Largest convex function dominated by the samples, as a piecewise-linear
/// envelope. Duplicate sample sites keep their minimum value (the envelope
/// only ever sees the lower sheet). The domain is the convex hull of the
/// sample sites.
pub fn lower_hull(samples: &[(Vec<f64>, f64)]) -> Result<ConvexEnvelope, GeometryError> {
    lower_hull_impl(samples, None)
}

/// Same as [`lower_hull`] but with the target domain supplied by the caller,
/// for fits whose grid is known to span the domain already.
pub fn lower_hull_on(
    samples: &[(Vec<f64>, f64)],
    domain: PolyhedralDomain,
) -> Result<ConvexEnvelope, GeometryError> {
    lower_hull_impl(samples, Some(domain))
}

fn lower_hull_impl(
    samples: &[(Vec<f64>, f64)],
    domain: Option<PolyhedralDomain>,
) -> Result<ConvexEnvelope, GeometryError> {
    let dim = samples
        .first()
        .map(|(x, _)| x.len())
        .ok_or_else(|| GeometryError::InvalidInput("no samples".into()))?;
    if dim == 0 {
        return Err(GeometryError::InvalidInput(
            "zero-dimensional samples".into(),
        ));
    }
    if dim > 8 {
        return Err(GeometryError::InvalidInput(format!(
            "hulls are supported up to dimension 8, got {dim}"
        )));
    }
    for (x, v) in samples {
        if x.len() != dim {
            return Err(GeometryError::InvalidInput(
                "samples of mixed dimension".into(),
            ));
        }
        if x.iter().any(|c| !c.is_finite()) || !v.is_finite() {
            return Err(GeometryError::InvalidInput("samples must be finite".into()));
        }
    }
    // Canonical order, then collapse duplicate sites to their minimum value.
    let mut cleaned: Vec<(Vec<f64>, f64)> = samples.to_vec();
    cleaned.sort_by(|(xa, va), (xb, vb)| lex_cmp(xa, xb).then_with(|| va.total_cmp(vb)));
    cleaned.dedup_by(|next, kept| next.0 == kept.0);

    let pieces = if dim == 1 {
        if cleaned.len() < 2 {
            return Err(GeometryError::DegenerateGeometry(
                "need at least two distinct sample sites in dimension 1".into(),
            ));
        }
        chain_1d(&cleaned)
    } else {
        let xs: Vec<Vec<f64>> = cleaned.iter().map(|(x, _)| x.clone()).collect();
        if !affinely_spans(&xs, dim) {
            return Err(GeometryError::DegenerateGeometry(format!(
                "sample sites do not affinely span dimension {dim}"
            )));
        }
        lifted_hull_pieces(&cleaned, dim)?
    };

    let domain = match domain {
        Some(q) => q,
        None => site_hull_domain(&cleaned, dim)?,
    };
    let support = cleaned.into_iter().map(|(x, _)| x).collect();
    ConvexEnvelope::new(pieces, domain, support)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.total_cmp(y);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// Monotone-chain lower hull for d = 1 (sites already sorted and distinct).
fn chain_1d(samples: &[(Vec<f64>, f64)]) -> Vec<AffinePiece> {
    // Merge tolerance: points within float noise of the chord count as
    // collinear, so smoothing an affine function yields one piece instead
    // of a fan of ulp-level kinks.
    let scale = samples
        .iter()
        .flat_map(|(x, v)| [x[0].abs(), v.abs()])
        .fold(1.0f64, f64::max);
    let merge_tol = 1e-12 * scale * scale;
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for (x, v) in samples {
        let (cx, cv) = (x[0], *v);
        while hull.len() >= 2 {
            let (ax, av) = hull[hull.len() - 2];
            let (bx, bv) = hull[hull.len() - 1];
            // Pop the middle point when it lies on or above the chord.
            if (bx - ax) * (cv - av) - (bv - av) * (cx - ax) <= merge_tol {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((cx, cv));
    }
    hull.windows(2)
        .map(|w| {
            let (x0, v0) = w[0];
            let (x1, v1) = w[1];
            let slope = (v1 - v0) / (x1 - x0);
            AffinePiece {
                gradient: vec![slope],
                offset: v0 - slope * x0,
            }
        })
        .collect()
}

/// Convex hull of the sample sites, as the envelope's domain.
fn site_hull_domain(
    samples: &[(Vec<f64>, f64)],
    dim: usize,
) -> Result<PolyhedralDomain, GeometryError> {
    if dim == 1 {
        let lo = samples.first().map(|(x, _)| x[0]).unwrap();
        let hi = samples.last().map(|(x, _)| x[0]).unwrap();
        return PolyhedralDomain::box_domain(&[lo], &[hi]);
    }
    let xs: Vec<Vec<f64>> = samples.iter().map(|(x, _)| x.clone()).collect();
    if dim == 2 {
        return PolyhedralDomain::from_vertices(chain_2d(&xs));
    }
    let hull = IncrementalHull::build(&xs, dim)
        .map_err(|_| GeometryError::DegenerateGeometry("site hull failed".into()))?;
    let mut seen = vec![false; xs.len()];
    for facet in hull.facets.iter().filter(|f| f.alive) {
        for &v in &facet.vertices {
            seen[v as usize] = true;
        }
    }
    // Facet vertices of a hull with collinear boundary runs include
    // non-extreme points; keep only the extreme ones.
    let candidates: Vec<Vec<f64>> = xs
        .iter()
        .zip(&seen)
        .filter(|&(_, &s)| s)
        .map(|(x, _)| x.clone())
        .collect();
    let mut vertices = Vec::with_capacity(candidates.len());
    for (i, v) in candidates.iter().enumerate() {
        let others: Vec<&[f64]> = candidates
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.as_slice())
            .collect();
        if crate::linalg::convex_combination(&others, v, 1e-9).is_none() {
            vertices.push(v.clone());
        }
    }
    PolyhedralDomain::from_vertices(vertices)
}

/// Planar convex hull by monotone chain with strict turns, so collinear
/// boundary points never appear as vertices.
fn chain_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let build = |iter: &mut dyn Iterator<Item = (f64, f64)>| {
        let mut chain: Vec<(f64, f64)> = Vec::new();
        for p in iter {
            while chain.len() >= 2
                && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0
            {
                chain.pop();
            }
            chain.push(p);
        }
        chain
    };
    let mut lower = build(&mut pts.iter().copied());
    let mut upper = build(&mut pts.iter().rev().copied());
    lower.pop();
    upper.pop();
    lower.append(&mut upper);
    lower.into_iter().map(|(x, y)| vec![x, y]).collect()
}

/// Lower facets of the lifted hull, as affine pieces.
fn lifted_hull_pieces(
    samples: &[(Vec<f64>, f64)],
    dim: usize,
) -> Result<Vec<AffinePiece>, GeometryError> {
    let lifted: Vec<Vec<f64>> = samples
        .iter()
        .map(|(x, v)| {
            let mut p = x.clone();
            p.push(*v);
            p
        })
        .collect();
    let scale = lifted
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |a, &c| a.max(c.abs()));

    match try_lifted_hull(&lifted, samples, dim, scale) {
        Ok(pieces) => Ok(pieces),
        Err(HullFailure::Flat) => Ok(vec![flat_piece(samples)?]),
        Err(HullFailure::Inconsistent) => {
            // Deterministic downward joggle breaks the coplanar ties; it can
            // only lower the envelope, and by at most 1e-11 * scale.
            let joggled: Vec<Vec<f64>> = lifted
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut q = p.clone();
                    let last = q.len() - 1;
                    q[last] -= 1e-11 * scale * unit_hash(i);
                    q
                })
                .collect();
            match try_lifted_hull(&joggled, samples, dim, scale) {
                Ok(pieces) => Ok(pieces),
                Err(HullFailure::Flat) => Ok(vec![flat_piece(samples)?]),
                Err(HullFailure::Inconsistent) => Err(GeometryError::DegenerateGeometry(
                    "lower hull construction failed even after joggle".into(),
                )),
            }
        }
    }
}

enum HullFailure {
    /// Lifted points lie in a single hyperplane: the envelope is one piece.
    Flat,
    /// Facet bookkeeping went inconsistent or verification failed.
    Inconsistent,
}

fn try_lifted_hull(
    lifted: &[Vec<f64>],
    samples: &[(Vec<f64>, f64)],
    dim: usize,
    scale: f64,
) -> Result<Vec<AffinePiece>, HullFailure> {
    let hull = IncrementalHull::build(lifted, dim + 1).map_err(|e| match e {
        BuildError::Flat => HullFailure::Flat,
        BuildError::Inconsistent => HullFailure::Inconsistent,
    })?;
    let mut pieces: Vec<AffinePiece> = Vec::new();
    let mut touched: Vec<bool> = vec![false; samples.len()];
    for facet in hull.facets.iter().filter(|f| f.alive) {
        let nz = facet.normal[dim];
        // Unit normals: |n_z| below 1e-12 means a vertical facet, which
        // carries no graph information; positive n_z is the upper hull.
        if nz >= -1e-12 {
            continue;
        }
        let gradient: Vec<f64> = facet.normal[..dim].iter().map(|&c| -c / nz).collect();
        let offset = facet.offset / nz;
        pieces.push(AffinePiece { gradient, offset });
        for &v in &facet.vertices {
            touched[v as usize] = true;
        }
    }
    if pieces.is_empty() {
        return Err(HullFailure::Inconsistent);
    }
    pieces.sort_by(|p, q| lex_cmp(&p.gradient, &q.gradient).then(p.offset.total_cmp(&q.offset)));
    pieces.dedup_by(|a, b| a.gradient == b.gradient && a.offset == b.offset);

    // Verify the envelope against the samples: never above any sample, and
    // touching every sample that appears as a lower-facet vertex.
    let tol = 1e-9 * scale;
    for (i, (x, v)) in samples.iter().enumerate() {
        let phi = pieces
            .iter()
            .map(|p| p.eval(x))
            .fold(f64::NEG_INFINITY, f64::max);
        if phi > v + tol || (touched[i] && phi < v - tol) {
            return Err(HullFailure::Inconsistent);
        }
    }
    Ok(pieces)
}

/// Single least-squares plane through (near-)coplanar lifted samples, shifted
/// down so it never exceeds a sample value.
fn flat_piece(samples: &[(Vec<f64>, f64)]) -> Result<AffinePiece, GeometryError> {
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|(x, _)| {
            let mut row = vec![1.0];
            row.extend_from_slice(x);
            row
        })
        .collect();
    let ys: Vec<f64> = samples.iter().map(|(_, v)| *v).collect();
    let weights = vec![1.0; samples.len()];
    let coef = linalg::weighted_lstsq(&rows, &ys, &weights, 1e-13).ok_or_else(|| {
        GeometryError::DegenerateGeometry("plane fit through flat samples failed".into())
    })?;
    let gradient = coef[1..].to_vec();
    let mut offset = coef[0];
    let overshoot = samples
        .iter()
        .map(|(x, v)| dot(&gradient, x) + offset - v)
        .fold(0.0f64, f64::max);
    offset -= overshoot;
    AffinePiece::new(gradient, offset)
}

fn unit_hash(i: usize) -> f64 {
    // splitmix64 finalizer, mapped to [0, 1).
    let mut z = (i as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

enum BuildError {
    Flat,
    Inconsistent,
}

struct Facet {
    vertices: Vec<u32>,
    normal: Vec<f64>,
    offset: f64,
    alive: bool,
}

/// Beneath-beyond convex hull in dimension `d >= 2` with simplicial facets.
struct IncrementalHull {
    facets: Vec<Facet>,
}

impl IncrementalHull {
    fn build(points: &[Vec<f64>], dim: usize) -> Result<Self, BuildError> {
        let scale = points
            .iter()
            .flat_map(|p| p.iter())
            .fold(1.0f64, |a, &c| a.max(c.abs()));
        let eps = 1e-12 * scale;

        let simplex = initial_simplex(points, dim, 1e-11 * scale).ok_or(BuildError::Flat)?;
        let interior: Vec<f64> = (0..dim)
            .map(|k| simplex.iter().map(|&i| points[i][k]).sum::<f64>() / (dim + 1) as f64)
            .collect();

        let mut hull = IncrementalHull { facets: Vec::new() };
        for drop in 0..=dim {
            let verts: Vec<u32> = simplex
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != drop)
                .map(|(_, &i)| i as u32)
                .collect();
            let facet = make_facet(verts, points, &interior).ok_or(BuildError::Inconsistent)?;
            hull.facets.push(facet);
        }

        let in_simplex = |i: usize| simplex.contains(&i);
        for idx in 0..points.len() {
            if in_simplex(idx) {
                continue;
            }
            hull.insert(idx, points, &interior, eps)?;
            if idx % 64 == 0 {
                hull.facets.retain(|f| f.alive);
            }
        }
        hull.facets.retain(|f| f.alive);
        if !hull.ridges_consistent(dim) {
            return Err(BuildError::Inconsistent);
        }
        Ok(hull)
    }

    fn insert(
        &mut self,
        idx: usize,
        points: &[Vec<f64>],
        interior: &[f64],
        eps: f64,
    ) -> Result<(), BuildError> {
        let p = &points[idx];
        let visible: Vec<usize> = self
            .facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && dot(&f.normal, p) - f.offset > eps)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            return Ok(());
        }
        // Horizon ridges appear in exactly one visible facet.
        let mut ridges: Vec<(Vec<u32>, u32)> = Vec::new();
        for &fi in &visible {
            let verts = &self.facets[fi].vertices;
            for drop in 0..verts.len() {
                let mut ridge: Vec<u32> = verts
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != drop)
                    .map(|(_, &v)| v)
                    .collect();
                ridge.sort_unstable();
                ridges.push((ridge, 1));
            }
        }
        ridges.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut horizon: Vec<Vec<u32>> = Vec::new();
        let mut i = 0;
        while i < ridges.len() {
            let mut j = i + 1;
            while j < ridges.len() && ridges[j].0 == ridges[i].0 {
                j += 1;
            }
            if j - i == 1 {
                horizon.push(ridges[i].0.clone());
            }
            i = j;
        }
        if horizon.is_empty() {
            return Err(BuildError::Inconsistent);
        }
        for &fi in &visible {
            self.facets[fi].alive = false;
        }
        for ridge in horizon {
            let mut verts = ridge;
            verts.push(idx as u32);
            let facet = make_facet(verts, points, interior).ok_or(BuildError::Inconsistent)?;
            self.facets.push(facet);
        }
        Ok(())
    }

    /// Closed simplicial hull: every ridge is shared by exactly two facets.
    fn ridges_consistent(&self, dim: usize) -> bool {
        let mut ridges: Vec<Vec<u32>> = Vec::new();
        for f in self.facets.iter().filter(|f| f.alive) {
            for drop in 0..dim {
                let mut ridge: Vec<u32> = f
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != drop)
                    .map(|(_, &v)| v)
                    .collect();
                ridge.sort_unstable();
                ridges.push(ridge);
            }
        }
        ridges.sort_unstable();
        let mut i = 0;
        while i < ridges.len() {
            let mut j = i + 1;
            while j < ridges.len() && ridges[j] == ridges[i] {
                j += 1;
            }
            if j - i != 2 {
                return false;
            }
            i = j;
        }
        true
    }
}

/// Facet through `verts`, oriented so `interior` lies on the negative side.
fn make_facet(verts: Vec<u32>, points: &[Vec<f64>], interior: &[f64]) -> Option<Facet> {
    let dim = interior.len();
    let base = &points[verts[0] as usize];
    let mut diffs: Vec<Vec<f64>> = verts[1..]
        .iter()
        .map(|&v| {
            points[v as usize]
                .iter()
                .zip(base)
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();
    let mut normal = null_vector(&mut diffs, dim)?;
    let norm = dot(&normal, &normal).sqrt();
    if norm.is_nan() || norm <= 1e-14 {
        return None;
    }
    for c in normal.iter_mut() {
        *c /= norm;
    }
    // Offset from the facet centroid for stability.
    let centroid: Vec<f64> = (0..dim)
        .map(|k| verts.iter().map(|&v| points[v as usize][k]).sum::<f64>() / verts.len() as f64)
        .collect();
    let mut offset = dot(&normal, &centroid);
    let side = dot(&normal, interior) - offset;
    if side > 0.0 {
        for c in normal.iter_mut() {
            *c = -*c;
        }
        offset = -offset;
    } else if side == 0.0 {
        return None;
    }
    Some(Facet {
        vertices: verts,
        normal,
        offset,
        alive: true,
    })
}

/// A vector orthogonal to `dim - 1` difference vectors, by Gram-Schmidt
/// against the standard basis.
fn null_vector(diffs: &mut [Vec<f64>], dim: usize) -> Option<Vec<f64>> {
    // Orthonormalize the difference vectors.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    for v in diffs.iter_mut() {
        for _ in 0..2 {
            for e in &basis {
                let proj = dot(v, e);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= proj * ei;
                }
            }
        }
        let norm = dot(v, v).sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return None;
        }
        for c in v.iter_mut() {
            *c /= norm;
        }
        basis.push(v.clone());
    }
    // Project out the basis from the least-aligned coordinate axis.
    let mut best: Option<Vec<f64>> = None;
    let mut best_norm = 0.0;
    for axis in 0..dim {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        for _ in 0..2 {
            for e in &basis {
                let proj = dot(&v, e);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= proj * ei;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > best_norm {
            best_norm = norm;
            best = Some(v);
        }
    }
    let mut v = best?;
    if best_norm < 1e-7 {
        return None;
    }
    for c in v.iter_mut() {
        *c /= best_norm;
    }
    Some(v)
}

/// Greedy farthest-point selection of `dim + 1` affinely independent points.
/// Returns `None` when the set is flat at the given threshold.
fn initial_simplex(points: &[Vec<f64>], dim: usize, threshold: f64) -> Option<Vec<usize>> {
    if points.len() < dim + 1 {
        return None;
    }
    let mut chosen = vec![0usize];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while chosen.len() < dim + 1 {
        let origin = &points[chosen[0]];
        let mut best_idx = None;
        let mut best_resid = threshold;
        for (i, p) in points.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut v: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
            for e in &basis {
                let proj = dot(&v, e);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= proj * ei;
                }
            }
            let resid = dot(&v, &v).sqrt();
            if resid > best_resid {
                best_resid = resid;
                best_idx = Some(i);
            }
        }
        let idx = best_idx?;
        let origin = points[chosen[0]].clone();
        let mut v: Vec<f64> = points[idx]
            .iter()
            .zip(&origin)
            .map(|(a, b)| a - b)
            .collect();
        for _ in 0..2 {
            for e in &basis {
                let proj = dot(&v, e);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= proj * ei;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        for c in v.iter_mut() {
            *c /= norm;
        }
        basis.push(v);
        chosen.push(idx);
    }
    Some(chosen)
}
