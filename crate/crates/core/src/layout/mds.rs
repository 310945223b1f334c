//! Classical multidimensional scaling into two dimensions.

use nalgebra::{DMatrix, SymmetricEigen};

use super::LayoutError;

/// Embeds a distance matrix in the plane.
///
/// The squared distances are double-centered, `B = -1/2 J D² J`, and the
/// two largest eigenpairs of `B` give the axes (eigenvector scaled by the
/// square root of its eigenvalue). Each axis is flipped so its first
/// non-negligible coordinate is positive. Axes without a positive
/// eigenvalue are zero.
pub fn mds2d(distances: &[Vec<f64>]) -> Result<Vec<[f64; 2]>, LayoutError> {
    let n = distances.len();
    if distances.iter().any(|row| row.len() != n) {
        return Err(LayoutError::Distances("matrix is not square".into()));
    }
    let scale = distances
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale.max(1.0);
    for i in 0..n {
        if distances[i][i].abs() > tol {
            return Err(LayoutError::Distances(format!("non-zero diagonal at {i}")));
        }
        for j in 0..n {
            let v = distances[i][j];
            if !v.is_finite() || v < 0.0 {
                return Err(LayoutError::Distances(format!("invalid entry {v} at ({i}, {j})")));
            }
            if (v - distances[j][i]).abs() > tol {
                return Err(LayoutError::Distances(format!("asymmetric at ({i}, {j})")));
            }
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }

    let sq = DMatrix::from_fn(n, n, |i, j| {
        let d = 0.5 * (distances[i][j] + distances[j][i]);
        d * d
    });
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
    let top = eig.eigenvalues[order[0]].abs().max(1.0);

    let mut points = vec![[0.0; 2]; n];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= 1e-12 * top {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let sign = v
            .iter()
            .find(|c| c.abs() > 1e-12)
            .map_or(1.0, |c| c.signum());
        let s = lambda.sqrt() * sign;
        for i in 0..n {
            points[i][axis] = v[i] * s;
        }
    }
    Ok(points)
}
