//! Small dense vector helpers for dimensions 1 through 4.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn normalize(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn centroid(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points[0].len();
    let mut c = vec![0.0; n];
    for p in points {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi;
        }
    }
    scale(&c, 1.0 / points.len() as f64)
}

/// Determinant of a square matrix given as rows, by Gaussian elimination.
pub fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    match n {
        0 => 1.0,
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => dot(&rows[0], &cross3(&rows[1], &rows[2])),
        _ => {
            let mut m: Vec<Vec<f64>> = rows.to_vec();
            let mut d = 1.0;
            for col in 0..n {
                let piv = (col..n)
                    .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
                    .unwrap();
                if m[piv][col] == 0.0 {
                    return 0.0;
                }
                if piv != col {
                    m.swap(piv, col);
                    d = -d;
                }
                d *= m[col][col];
                for r in col + 1..n {
                    let f = m[r][col] / m[col][col];
                    for c in col..n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
            d
        }
    }
}

/// Solves `A x = b` with partial pivoting; `None` when `A` is (numerically) singular.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    let scale_ref = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale_ref {
            return None;
        }
        m.swap(piv, col);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector `v`.
///
/// Gram–Schmidt over the standard basis in index order, skipping the first
/// basis vector whose residual is the smallest (the pivot of `v`), so the
/// result is deterministic.
pub fn orthonormal_complement(v: &[f64]) -> Vec<Vec<f64>> {
    let n = v.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n.saturating_sub(1));
    // drop the standard vector best aligned with v; smallest index wins ties
    let mut pivot = 0;
    for i in 1..n {
        if v[i].abs() > v[pivot].abs() + 1e-12 {
            pivot = i;
        }
    }
    for i in (0..n).filter(|&i| i != pivot) {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let mut w = axpy(&e, -v[i], v);
        for b in &basis {
            let c = dot(&w, b);
            w = axpy(&w, -c, b);
        }
        basis.push(normalize(&w).expect("standard basis vector parallel to v"));
    }
    basis
}

/// Coordinates of `x` in the given orthonormal basis.
pub fn coords_in(basis: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    basis.iter().map(|b| dot(b, x)).collect()
}

/// Embeds hyperplane coordinates back into the ambient space.
pub fn embed(basis: &[Vec<f64>], coords: &[f64]) -> Vec<f64> {
    let n = basis.first().map_or(coords.len() + 1, |b| b.len());
    let mut x = vec![0.0; n];
    for (b, c) in basis.iter().zip(coords) {
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi += c * bi;
        }
    }
    x
}

pub fn check_finite(points: &[Vec<f64>]) -> Result<()> {
    if points.iter().flatten().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::DegenerateInput("non-finite coordinate".into()))
    }
}

pub fn check_dims(points: &[Vec<f64>], n: usize) -> Result<()> {
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
    }
    Ok(())
}

pub fn max_abs(points: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .flatten()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
}
