//! Small dense linear-algebra helpers: Gaussian elimination, least squares,
//! and a Phase-1 simplex for convex-combination feasibility.
//!
//! Everything here works on systems of at most a dozen unknowns, so plain
//! dense elimination with partial pivoting is both adequate and easy to audit.

/// Solve `A x = b` in place for a square `n x n` system stored row-major.
///
/// Returns `None` when a pivot falls below `tol` times the largest entry,
/// i.e. the system is numerically singular.
pub(crate) fn solve(a: &mut [f64], b: &mut [f64], n: usize, tol: f64) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot_row * n + col].abs() <= tol * scale {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Some(x)
}

/// Weighted least squares via normal equations: minimize `sum_i w_i (phi_i . c - y_i)^2`.
///
/// `rows` holds one basis-function evaluation per observation. Returns `None`
/// when the normal matrix is numerically singular.
pub(crate) fn weighted_lstsq(
    rows: &[Vec<f64>],
    ys: &[f64],
    weights: &[f64],
    tol: f64,
) -> Option<Vec<f64>> {
    let p = rows.first().map_or(0, Vec::len);
    if p == 0 {
        return None;
    }
    let mut ata = vec![0.0; p * p];
    let mut aty = vec![0.0; p];
    for ((row, &y), &w) in rows.iter().zip(ys).zip(weights) {
        if w == 0.0 {
            continue;
        }
        for i in 0..p {
            let wri = w * row[i];
            aty[i] += wri * y;
            for j in i..p {
                ata[i * p + j] += wri * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            ata[i * p + j] = ata[j * p + i];
        }
    }
    solve(&mut ata, &mut aty.clone(), p, tol)
}

/// Express `target` as a convex combination of `points`, if possible.
///
/// Phase-1 simplex with Bland's rule on the system
/// `sum_k lambda_k p_k = target`, `sum_k lambda_k = 1`, `lambda >= 0`.
/// A feasible basic solution has at most `dim + 1` nonzero weights, which is
/// exactly the Caratheodory support wanted by callers. Entries below `tol`
/// are dropped. Returns pairs `(point index, weight)`.
pub(crate) fn convex_combination(
    points: &[&[f64]],
    target: &[f64],
    tol: f64,
) -> Option<Vec<(usize, f64)>> {
    let dim = target.len();
    let rows = dim + 1;
    let cols = points.len();
    if cols == 0 {
        return None;
    }
    // Tableau columns: `cols` lambda variables then `rows` artificials.
    let total = cols + rows;
    let mut tab = vec![0.0; rows * total];
    let mut rhs = vec![0.0; rows];
    for r in 0..rows {
        for (c, p) in points.iter().enumerate() {
            tab[r * total + c] = if r < dim { p[r] } else { 1.0 };
        }
        rhs[r] = if r < dim { target[r] } else { 1.0 };
    }
    // Flip rows with negative rhs so artificials start feasible.
    for r in 0..rows {
        if rhs[r] < 0.0 {
            rhs[r] = -rhs[r];
            for c in 0..cols {
                tab[r * total + c] = -tab[r * total + c];
            }
        }
        tab[r * total + cols + r] = 1.0;
    }
    let mut basis: Vec<usize> = (cols..total).collect();
    // Objective: minimize the sum of artificials.
    let mut obj = vec![0.0; total];
    let mut obj_val = 0.0;
    for r in 0..rows {
        for (o, t) in obj.iter_mut().zip(&tab[r * total..(r + 1) * total]) {
            *o += t;
        }
        obj_val += rhs[r];
    }
    for o in obj[cols..].iter_mut() {
        *o -= 1.0;
    }
    let pivot_tol = 1e-11;
    for _ in 0..10_000 {
        // Bland: first improving column.
        let Some(enter) = (0..total).find(|&c| obj[c] > pivot_tol) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..rows {
            let coef = tab[r * total + enter];
            if coef > pivot_tol {
                let ratio = rhs[r] / coef;
                if ratio < best_ratio - pivot_tol
                    || (ratio < best_ratio + pivot_tol
                        && leave.is_some_and(|l| basis[r] < basis[l]))
                {
                    best_ratio = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(leave) = leave else {
            return None; // unbounded: cannot happen with bounded lambda sum
        };
        let pivot = tab[leave * total + enter];
        for c in 0..total {
            tab[leave * total + c] /= pivot;
        }
        rhs[leave] /= pivot;
        for r in 0..rows {
            if r == leave {
                continue;
            }
            let factor = tab[r * total + enter];
            if factor == 0.0 {
                continue;
            }
            for c in 0..total {
                tab[r * total + c] -= factor * tab[leave * total + c];
            }
            rhs[r] -= factor * rhs[leave];
        }
        let factor = obj[enter];
        for c in 0..total {
            obj[c] -= factor * tab[leave * total + c];
        }
        obj_val -= factor * rhs[leave];
        basis[leave] = enter;
    }
    if obj_val.abs() > tol {
        return None; // infeasible: target outside the convex hull
    }
    let mut combo: Vec<(usize, f64)> = basis
        .iter()
        .zip(&rhs)
        .filter(|&(&var, &w)| var < cols && w > tol)
        .map(|(&var, &w)| (var, w))
        .collect();
    combo.sort_by_key(|&(i, _)| i);
    Some(combo)
}
