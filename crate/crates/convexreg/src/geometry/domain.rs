//! Bounded polyhedral domains given by their vertex lists.

use super::{dist, GeometryError, Tolerance};
use crate::linalg;
use serde::{Deserialize, Serialize};

/// A compact convex polyhedron `Q`, stored as the convex hull of its vertices.
///
/// Invariants: every vertex is an extreme point (no vertex is a convex
/// combination of the others) and the vertex set affinely spans dimension
/// `dim`, so the domain is full-dimensional, bounded and closed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyhedralDomain {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    #[serde(skip)]
    bounds: Option<(Vec<f64>, Vec<f64>)>,
}

/// Axis-aligned box domain with `2^d` corner vertices.
pub fn make_box_domain(lower: &[f64], upper: &[f64]) -> Result<PolyhedralDomain, GeometryError> {
    PolyhedralDomain::box_domain(lower, upper)
}

impl PolyhedralDomain {
    /// Axis-aligned box `[lower_1, upper_1] x ... x [lower_d, upper_d]`.
    pub fn box_domain(lower: &[f64], upper: &[f64]) -> Result<Self, GeometryError> {
        let dim = lower.len();
        if dim == 0 || dim != upper.len() {
            return Err(GeometryError::InvalidDomain(format!(
                "box bounds must be nonempty and of equal length, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for i in 0..dim {
            if !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(GeometryError::InvalidDomain(
                    "box bounds must be finite".into(),
                ));
            }
            if lower[i] >= upper[i] {
                return Err(GeometryError::InvalidDomain(format!(
                    "degenerate box on axis {i}: lower {} >= upper {}",
                    lower[i], upper[i]
                )));
            }
        }
        let mut vertices = Vec::with_capacity(1 << dim);
        for mask in 0..(1usize << dim) {
            let corner: Vec<f64> = (0..dim)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        upper[i]
                    } else {
                        lower[i]
                    }
                })
                .collect();
            vertices.push(corner);
        }
        Ok(PolyhedralDomain {
            dim,
            vertices,
            bounds: Some((lower.to_vec(), upper.to_vec())),
        })
    }

    /// General polyhedron from an explicit vertex list.
    ///
    /// Rejects vertex sets that do not affinely span `dim` and vertices that
    /// are convex combinations of the others.
    pub fn from_vertices(vertices: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let dim = vertices.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(GeometryError::InvalidDomain("no vertices given".into()));
        }
        if vertices.len() < dim + 1 && !(dim == 1 && vertices.len() == 2) {
            return Err(GeometryError::InvalidDomain(format!(
                "need at least {} vertices in dimension {dim}, got {}",
                dim + 1,
                vertices.len()
            )));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(GeometryError::InvalidDomain(
                    "vertices of mixed dimension".into(),
                ));
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(GeometryError::InvalidDomain(
                    "vertices must be finite".into(),
                ));
            }
        }
        if !affinely_spans(&vertices, dim) {
            return Err(GeometryError::InvalidDomain(format!(
                "vertices do not affinely span dimension {dim}"
            )));
        }
        // Extremality: no vertex may lie in the hull of the others.
        for i in 0..vertices.len() {
            let others: Vec<&[f64]> = vertices
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.as_slice())
                .collect();
            if linalg::convex_combination(&others, &vertices[i], 1e-9).is_some() {
                return Err(GeometryError::InvalidDomain(format!(
                    "vertex {i} is a convex combination of the others"
                )));
            }
        }
        let bounds = detect_box(&vertices, dim);
        Ok(PolyhedralDomain {
            dim,
            vertices,
            bounds,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Box bounds when the domain was built as a box.
    pub fn box_bounds(&self) -> Option<(&[f64], &[f64])> {
        self.bounds
            .as_ref()
            .map(|(l, u)| (l.as_slice(), u.as_slice()))
    }

    /// Longest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(dist(a, b));
            }
        }
        best
    }

    /// Containment in the convex hull of the vertices, within `tol`.
    pub fn contains(&self, x: &[f64], tol: Tolerance) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let eps = tol.at(self.scale());
        if let Some((lower, upper)) = &self.bounds {
            return x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(&c, (&lo, &hi))| c >= lo - eps && c <= hi + eps);
        }
        match self.dim {
            1 => {
                let lo = self
                    .vertices
                    .iter()
                    .map(|v| v[0])
                    .fold(f64::INFINITY, f64::min);
                let hi = self
                    .vertices
                    .iter()
                    .map(|v| v[0])
                    .fold(f64::NEG_INFINITY, f64::max);
                x[0] >= lo - eps && x[0] <= hi + eps
            }
            _ => {
                let pts: Vec<&[f64]> = self.vertices.iter().map(Vec::as_slice).collect();
                linalg::convex_combination(&pts, x, eps.max(1e-12)).is_some()
            }
        }
    }

    pub(crate) fn scale(&self) -> f64 {
        self.vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |acc, &c| acc.max(c.abs()))
    }
}

/// Recognize an axis-aligned box given as its full corner set, so domains
/// read back from disk keep the cheap exact containment test.
fn detect_box(vertices: &[Vec<f64>], dim: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    if dim >= usize::BITS as usize || vertices.len() != 1usize << dim {
        return None;
    }
    let mut lower = vertices[0].clone();
    let mut upper = vertices[0].clone();
    for v in vertices {
        for k in 0..dim {
            lower[k] = lower[k].min(v[k]);
            upper[k] = upper[k].max(v[k]);
        }
    }
    let mut seen = vec![false; vertices.len()];
    for v in vertices {
        let mut mask = 0usize;
        for k in 0..dim {
            if v[k] == upper[k] {
                mask |= 1 << k;
            } else if v[k] != lower[k] {
                return None;
            }
        }
        if seen[mask] {
            return None;
        }
        seen[mask] = true;
    }
    Some((lower, upper))
}

/// Whether the points affinely span R^dim.
pub(crate) fn affinely_spans(points: &[Vec<f64>], dim: usize) -> bool {
    if points.len() < dim + 1 {
        return false;
    }
    // Rank of the matrix of differences against the first point, by
    // Gram-Schmidt with a relative threshold.
    let origin = &points[0];
    let scale = points
        .iter()
        .flat_map(|p| p.iter().zip(origin).map(|(a, b)| (a - b).abs()))
        .fold(f64::MIN_POSITIVE, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &points[1..] {
        let mut v: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
        for e in &basis {
            let proj = super::dot(&v, e);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= proj * ei;
            }
        }
        let norm = super::dot(&v, &v).sqrt();
        if norm > 1e-9 * scale {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            basis.push(v);
            if basis.len() == dim {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_has_two_vertices() {
        let q = make_box_domain(&[0.0], &[1.0]).unwrap();
        assert_eq!(q.dim(), 1);
        let mut xs: Vec<f64> = q.vertices().iter().map(|v| v[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![0.0, 1.0]);
    }

    #[test]
    fn unit_square_has_four_corners() {
        let q = make_box_domain(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(q.vertices().len(), 4);
        for corner in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]] {
            assert!(q.vertices().iter().any(|v| v.as_slice() == corner));
        }
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(matches!(
            make_box_domain(&[0.0], &[0.0]),
            Err(GeometryError::InvalidDomain(_))
        ));
        assert!(make_box_domain(&[0.0, 1.0], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn containment_box() {
        let q = make_box_domain(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let tol = Tolerance::default();
        assert!(q.contains(&[0.5, 0.5], tol));
        assert!(q.contains(&[1.0, 1.0], tol));
        assert!(!q.contains(&[1.1, 0.5], tol));
    }

    #[test]
    fn general_vertices_validated() {
        // Triangle is fine.
        let tri =
            PolyhedralDomain::from_vertices(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])
                .unwrap();
        assert!(tri.contains(&[0.2, 0.2], Tolerance::default()));
        assert!(!tri.contains(&[0.8, 0.8], Tolerance::default()));
        // A vertex inside the hull of the others is rejected.
        assert!(PolyhedralDomain::from_vertices(vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.25, 0.25],
        ])
        .is_err());
        // Collinear points cannot span the plane.
        assert!(PolyhedralDomain::from_vertices(vec![
            vec![0.0, 0.0],
            vec![0.5, 0.5],
            vec![1.0, 1.0],
        ])
        .is_err());
    }
}
