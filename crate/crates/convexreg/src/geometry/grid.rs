//! Finite covering grids `M_n` over a polyhedral domain.

use super::{dist, GeometryError, PolyhedralDomain, Tolerance};
use crate::linalg;

/// A finite point set whose convex hull is the domain, together with its
/// covering radius `mesh`: every domain point is a convex combination of at
/// most `d + 1` grid points, each within `mesh` of it.
#[derive(Debug, Clone)]
pub struct Grid {
    domain: PolyhedralDomain,
    points: Vec<Vec<f64>>,
    mesh: f64,
    lattice: Option<Lattice>,
}

/// Axis-aligned lattice structure, kept when the grid was built uniformly so
/// covering combinations can be located analytically.
#[derive(Debug, Clone)]
struct Lattice {
    per_axis: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Uniform lattice of `per_axis^d` points over a box domain, corners included.
///
/// The mesh is the diagonal of one cell: `max_i spacing_i * sqrt(d)`.
pub fn uniform_grid(domain: &PolyhedralDomain, per_axis: usize) -> Result<Grid, GeometryError> {
    let Some((lower, upper)) = domain.box_bounds() else {
        return Err(GeometryError::InvalidGrid(
            "uniform grids require a box domain".into(),
        ));
    };
    if per_axis < 2 {
        return Err(GeometryError::InvalidGrid(format!(
            "need at least 2 points per axis, got {per_axis}"
        )));
    }
    let dim = domain.dim();
    let spacing: Vec<f64> = (0..dim)
        .map(|i| (upper[i] - lower[i]) / (per_axis - 1) as f64)
        .collect();
    let mut points = Vec::with_capacity(per_axis.pow(dim as u32));
    let mut idx = vec![0usize; dim];
    loop {
        let p: Vec<f64> = (0..dim)
            .map(|i| {
                if idx[i] + 1 == per_axis {
                    upper[i] // exact corner coordinates, no rounding drift
                } else {
                    lower[i] + spacing[i] * idx[i] as f64
                }
            })
            .collect();
        points.push(p);
        // Odometer increment, axis 0 fastest.
        let mut axis = 0;
        loop {
            idx[axis] += 1;
            if idx[axis] < per_axis {
                break;
            }
            idx[axis] = 0;
            axis += 1;
            if axis == dim {
                let max_spacing = spacing.iter().fold(0.0f64, |a, &s| a.max(s));
                let mesh = max_spacing * (dim as f64).sqrt();
                return Ok(Grid {
                    domain: domain.clone(),
                    points,
                    mesh,
                    lattice: Some(Lattice {
                        per_axis,
                        lower: lower.to_vec(),
                        upper: upper.to_vec(),
                    }),
                });
            }
        }
    }
}

/// Covering grid over a general polyhedral domain: the bounding-box lattice
/// intersected with the domain, plus the domain's own vertices. The covering
/// property is not guaranteed by construction here; check it empirically via
/// [`convex_combination_cover`] on sampled points.
pub fn lattice_over(domain: &PolyhedralDomain, per_axis: usize) -> Result<Grid, GeometryError> {
    if domain.box_bounds().is_some() {
        return uniform_grid(domain, per_axis);
    }
    if per_axis < 2 {
        return Err(GeometryError::InvalidGrid(format!(
            "need at least 2 points per axis, got {per_axis}"
        )));
    }
    let dim = domain.dim();
    let mut lower = domain.vertices()[0].clone();
    let mut upper = domain.vertices()[0].clone();
    for v in domain.vertices() {
        for k in 0..dim {
            lower[k] = lower[k].min(v[k]);
            upper[k] = upper[k].max(v[k]);
        }
    }
    let bbox = PolyhedralDomain::box_domain(&lower, &upper)?;
    let lattice = uniform_grid(&bbox, per_axis)?;
    let tol = Tolerance::default();
    let mut points: Vec<Vec<f64>> = lattice
        .points()
        .iter()
        .filter(|p| domain.contains(p, tol))
        .cloned()
        .collect();
    let eps = tol.at(domain.scale()).max(1e-9);
    for v in domain.vertices() {
        if !points.iter().any(|p| dist(p, v) <= eps) {
            points.push(v.clone());
        }
    }
    Grid::from_points(domain.clone(), points, lattice.mesh())
}

impl Grid {
    /// Grid from an explicit point list with a stated mesh.
    ///
    /// All domain vertices must appear among the points (within tolerance),
    /// so that the convex hull of the grid is the whole domain.
    pub fn from_points(
        domain: PolyhedralDomain,
        points: Vec<Vec<f64>>,
        mesh: f64,
    ) -> Result<Self, GeometryError> {
        if mesh.is_nan() || mesh < 0.0 {
            return Err(GeometryError::InvalidGrid("mesh must be >= 0".into()));
        }
        let eps = Tolerance::default().at(domain.scale()).max(1e-9);
        for v in domain.vertices() {
            if !points.iter().any(|p| dist(p, v) <= eps) {
                return Err(GeometryError::InvalidGrid(format!(
                    "domain vertex {v:?} missing from grid points"
                )));
            }
        }
        for p in &points {
            if p.len() != domain.dim() || p.iter().any(|c| !c.is_finite()) {
                return Err(GeometryError::InvalidGrid(
                    "grid points must be finite and of the domain dimension".into(),
                ));
            }
        }
        Ok(Grid {
            domain,
            points,
            mesh,
            lattice: None,
        })
    }

    pub fn domain(&self) -> &PolyhedralDomain {
        &self.domain
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Convex combination of at most `d + 1` grid points reproducing `x`, each
/// within `mesh` of `x`. Returns `(grid index, weight)` pairs with positive
/// weights summing to one.
pub fn convex_combination_cover(
    grid: &Grid,
    x: &[f64],
) -> Result<Vec<(usize, f64)>, GeometryError> {
    if !grid.domain().contains(x, Tolerance::default()) {
        return Err(GeometryError::OutOfDomain { point: x.to_vec() });
    }
    if let Some(lat) = &grid.lattice {
        return Ok(lattice_cover(lat, x));
    }
    // General grids: feasibility over the points within one mesh of x. The
    // simplex returns a basic solution, hence at most d + 1 support points.
    let candidates: Vec<usize> = (0..grid.points.len())
        .filter(|&i| dist(&grid.points[i], x) <= grid.mesh + 1e-12)
        .collect();
    let pts: Vec<&[f64]> = candidates
        .iter()
        .map(|&i| grid.points[i].as_slice())
        .collect();
    match linalg::convex_combination(&pts, x, 1e-10) {
        Some(combo) => Ok(combo.into_iter().map(|(k, w)| (candidates[k], w)).collect()),
        None => Err(GeometryError::InvalidGrid(format!(
            "no covering combination within mesh {} of {:?}",
            grid.mesh, x
        ))),
    }
}

fn lattice_cover(lat: &Lattice, x: &[f64]) -> Vec<(usize, f64)> {
    let dim = x.len();
    let m = lat.per_axis;
    // Cell index and fractional coordinates per axis.
    let mut cell = vec![0usize; dim];
    let mut frac = vec![0.0f64; dim];
    for i in 0..dim {
        let spacing = (lat.upper[i] - lat.lower[i]) / (m - 1) as f64;
        let t = ((x[i] - lat.lower[i]) / spacing).clamp(0.0, (m - 1) as f64);
        let c = (t.floor() as usize).min(m - 2);
        cell[i] = c;
        frac[i] = t - c as f64;
    }
    // Axis 0 varies fastest, matching uniform_grid's point order.
    let flatten = |idx: &[usize]| -> usize {
        let mut acc = 0usize;
        for axis in (0..dim).rev() {
            acc = acc * m + idx[axis];
        }
        acc
    };
    let mut pairs: Vec<(usize, f64)> = Vec::with_capacity(dim + 1);
    match dim {
        1 => {
            let u = frac[0];
            pairs.push((flatten(&cell), 1.0 - u));
            pairs.push((flatten(&[cell[0] + 1]), u));
        }
        2 => {
            // Split the cell along the anti-diagonal; all three corners lie
            // within one cell diagonal of x.
            let (u, v) = (frac[0], frac[1]);
            let ll = flatten(&cell);
            let lr = flatten(&[cell[0] + 1, cell[1]]);
            let ul = flatten(&[cell[0], cell[1] + 1]);
            let ur = flatten(&[cell[0] + 1, cell[1] + 1]);
            if u + v <= 1.0 {
                pairs.push((ll, 1.0 - u - v));
                pairs.push((lr, u));
                pairs.push((ul, v));
            } else {
                pairs.push((ur, u + v - 1.0));
                pairs.push((lr, 1.0 - v));
                pairs.push((ul, 1.0 - u));
            }
        }
        _ => {
            // Kuhn simplex of the cell: walk axes in order of decreasing
            // fractional coordinate.
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&a, &b| frac[b].total_cmp(&frac[a]));
            let mut corner = cell.clone();
            let mut prev = 1.0;
            for (k, &axis) in order.iter().enumerate() {
                let w = prev - frac[axis];
                pairs.push((flatten(&corner), w));
                corner[axis] += 1;
                prev = frac[axis];
                if k + 1 == dim {
                    pairs.push((flatten(&corner), frac[axis]));
                }
            }
        }
    }
    pairs.retain(|&(_, w)| w > 1e-15);
    pairs
}
