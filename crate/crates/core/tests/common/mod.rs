#![allow(dead_code)]

use hopfavg::models::SyntheticHopfFamily;

/// Classical first Lyapunov coefficient of `x' = -ωy + f`, `y' = ωx + g` at
/// the origin, from the partial derivatives of `f` and `g`:
/// `a = (f_xxx + f_xyy + g_xxy + g_yyy)/16
///    + (f_xy (f_xx + f_yy) - g_xy (g_xx + g_yy) - f_xx g_xx + f_yy g_yy)/(16ω)`.
pub fn lyapunov_coefficient(fam: &SyntheticHopfFamily) -> f64 {
    let w = fam.gamma0;
    let [p, q] = fam.quad;
    let [pc, qc] = fam.cubic;
    // second partials of a·u² + b·uv + c·v²
    let (f_xx, f_xy, f_yy) = (2.0 * p[0], p[1], 2.0 * p[2]);
    let (g_xx, g_xy, g_yy) = (2.0 * q[0], q[1], 2.0 * q[2]);
    // third partials of a·u³ + b·u²v + c·uv² + d·v³
    let (f_xxx, f_xyy) = (6.0 * pc[0], 2.0 * pc[2]);
    let (g_xxy, g_yyy) = (2.0 * qc[1], 6.0 * qc[3]);
    (f_xxx + f_xyy + g_xxy + g_yyy) / 16.0
        + (f_xy * (f_xx + f_yy) - g_xy * (g_xx + g_yy) - f_xx * g_xx + f_yy * g_yy) / (16.0 * w)
}

/// Roots of `a ξ² + b ξ + c` with the larger root first.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> (f64, f64) {
    let d = (b * b - 4.0 * a * c).sqrt();
    ((-b + d) / (2.0 * a), (-b - d) / (2.0 * a))
}

/// Eigenvalues of a 2x2 matrix with a complex pair, as `(re, |im|)`.
pub fn focus_pair(m: [[f64; 2]; 2]) -> (f64, f64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    assert!(disc < 0.0, "not a focus");
    (tr / 2.0, (-disc).sqrt())
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
