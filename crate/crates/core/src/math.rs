use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Matrix3, Rotation3, Vector2, Vector3};

pub(crate) fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Right singular vector of the smallest singular value, together with the
/// singular values sorted in ascending order. Wide matrices are padded with
/// zero rows so the full right basis is available.
pub(crate) fn null_vector(a: &DMatrix<f64>) -> (DVector<f64>, Vec<f64>) {
    let cols = a.ncols();
    let padded;
    let m = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, a.nrows()).copy_from(a);
        padded = p;
        &padded
    } else {
        a
    };
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = v_t.row(order[0]).transpose();
    (v, values)
}

/// Similarity that moves the centroid to the origin and scales the mean
/// distance to sqrt(2).
pub(crate) fn normalizing_transform(points: &[Vector2<f64>]) -> Matrix3<f64> {
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector2::zeros(), |acc, p| acc + p) / n;
    let mean_dist = points.iter().map(|p| (p - centroid).norm()).sum::<f64>() / n;
    let s = if mean_dist > 1e-300 {
        core::f64::consts::SQRT_2 / mean_dist
    } else {
        1.0
    };
    Matrix3::new(s, 0.0, -s * centroid.x, 0.0, s, -s * centroid.y, 0.0, 0.0, 1.0)
}

/// Nearest rotation in the Frobenius sense.
pub(crate) fn closest_rotation(m: &Matrix3<f64>) -> Rotation3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    Rotation3::from_matrix_unchecked(u * d * v_t)
}

/// Twice the area of the triangle (a, b, c) relative to the product of the
/// two edge lengths at `a`; zero for collinear points.
pub(crate) fn collinearity(a: &Vector2<f64>, b: &Vector2<f64>, c: &Vector2<f64>) -> f64 {
    let ab = b - a;
    let ac = c - a;
    let denom = ab.norm() * ac.norm();
    if denom <= 0.0 {
        return 0.0;
    }
    (ab.x * ac.y - ab.y * ac.x).abs() / denom
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub(crate) fn rad_to_deg(x: f64) -> f64 {
    x * 180.0 / core::f64::consts::PI
}

pub(crate) fn sq(x: f64) -> f64 {
    x * x
}
