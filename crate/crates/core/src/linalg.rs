//! Small dense linear algebra for 2×2 blocks plus a general eigen-solve.

use nalgebra::{Complex, DMatrix};

/// Row-major 2×2 matrix.
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn det(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn trace(m: &Mat2) -> f64 {
    m[0][0] + m[1][1]
}

pub fn inverse(m: &Mat2) -> Option<Mat2> {
    let d = det(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn apply(m: &Mat2, x: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * x[0] + m[0][1] * x[1],
        m[1][0] * x[0] + m[1][1] * x[1],
    ]
}

pub fn rotation(phi: f64) -> Mat2 {
    let (s, c) = phi.sin_cos();
    [[c, -s], [s, c]]
}

/// Eigenvalues of a 2×2 matrix. For a complex pair the one with positive
/// imaginary part comes first.
pub fn eigenvalues2(m: &Mat2) -> [Complex<f64>; 2] {
    let half_tr = 0.5 * trace(m);
    let disc = half_tr * half_tr - det(m);
    if disc >= 0.0 {
        let s = disc.sqrt();
        [Complex::new(half_tr + s, 0.0), Complex::new(half_tr - s, 0.0)]
    } else {
        let w = (-disc).sqrt();
        [Complex::new(half_tr, w), Complex::new(half_tr, -w)]
    }
}

/// `(Re λ)² - det` style discriminant: negative means a complex pair.
pub fn discriminant2(m: &Mat2) -> f64 {
    let half_tr = 0.5 * trace(m);
    half_tr * half_tr - det(m)
}

/// Eigenvalues of a square matrix given in row-major order.
pub fn eigenvalues(n: usize, row_major: &[f64]) -> Vec<Complex<f64>> {
    assert_eq!(row_major.len(), n * n);
    if n == 2 {
        let m = [[row_major[0], row_major[1]], [row_major[2], row_major[3]]];
        return eigenvalues2(&m).to_vec();
    }
    let m = DMatrix::from_row_slice(n, n, row_major);
    m.complex_eigenvalues().iter().copied().collect()
}

/// Solve `A x = b` for small dense systems by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot vanishes.
pub fn solve(n: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let m = DMatrix::from_row_slice(n, n, a);
    let rhs = nalgebra::DVector::from_column_slice(b);
    m.lu().solve(&rhs).map(|x| x.iter().copied().collect())
}
