//! Hopf point location, the canonical (rotation-block) coordinate change,
//! and extraction of the quadratic and cubic Taylor coefficients in those
//! coordinates.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2};
use crate::trig::TrigPoly;
use crate::vectorfield::{d_alpha_eigen_real, derivatives_at, focus_eigenvalue, ParametricPlanarSystem};

/// Transversality below this is treated as a failure.
pub const MIN_BETA_PRIME: f64 = 1e-8;
/// Target for `|Re λ|` at the located bifurcation value.
pub const HOPF_RE_TOL: f64 = 1e-10;

type BranchFn = dyn Fn(f64) -> Result<[f64; 2]> + Send + Sync;

/// `α ↦ x*(α)`, an equilibrium branch through the bifurcation.
#[derive(Clone)]
pub struct EquilibriumBranch(Arc<BranchFn>);

impl fmt::Debug for EquilibriumBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("EquilibriumBranch(..)")
    }
}

impl EquilibriumBranch {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> Result<[f64; 2]> + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    /// The branch attached to `system` if it has one, otherwise Newton's
    /// method started from `guess` at every parameter value.
    pub fn of_system(system: &ParametricPlanarSystem, guess: [f64; 2]) -> Self {
        if system.equilibrium_branch().is_some() {
            let sys = system.clone();
            return Self::new(move |a| Ok(sys.equilibrium_branch().expect("attached branch")(a)));
        }
        let sys = system.clone();
        Self::new(move |a| find_equilibrium(&sys, guess, a))
    }

    pub fn at(&self, alpha: f64) -> Result<[f64; 2]> {
        (self.0)(alpha)
    }
}

/// Newton's method for `f(x, α) = 0`.
pub fn find_equilibrium(system: &ParametricPlanarSystem, guess: [f64; 2], alpha: f64) -> Result<[f64; 2]> {
    let norm = |f: [f64; 2]| f[0].hypot(f[1]);
    let mut x = guess;
    let mut f = system.eval(x, alpha);
    let mut res = norm(f);
    for _ in 0..50 {
        if res < 1e-12 {
            return Ok(x);
        }
        let j = system.jacobian(x, alpha)?;
        let scale = j.iter().flatten().map(|v| v * v).sum::<f64>();
        let det = linalg::det(&j);
        if det.abs() <= 1e-14 * scale || !det.is_finite() {
            return Err(Error::DegenerateEquilibrium { point: x.to_vec() });
        }
        let inv = linalg::inverse(&j).expect("nonzero determinant");
        let dx = linalg::apply(&inv, f);
        // Backtrack if the full step leaves the domain or increases the residual.
        let mut lambda = 1.0;
        loop {
            let cand = [x[0] - lambda * dx[0], x[1] - lambda * dx[1]];
            let fc = system.eval(cand, alpha);
            let rc = norm(fc);
            if system.contains(cand) && rc.is_finite() && (rc < res || lambda < 1e-3) {
                x = cand;
                f = fc;
                res = rc;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return Err(Error::NoEquilibrium { residual: res });
            }
        }
    }
    if res < 1e-12 {
        Ok(x)
    } else {
        Err(Error::NoEquilibrium { residual: res })
    }
}

/// Data at a Hopf point: bifurcation value, equilibrium, frequency,
/// transversality and the coordinate change `x - x* = T w` that brings the
/// Jacobian to `[[0, -γ0], [γ0, 0]]`.
#[derive(Debug, Clone)]
pub struct HopfData {
    pub alpha0: f64,
    pub equilibrium: [f64; 2],
    pub gamma0: f64,
    pub beta_prime: f64,
    pub transform: Mat2,
    pub transform_inv: Mat2,
    pub bracket: (f64, f64),
    system: ParametricPlanarSystem,
    branch: EquilibriumBranch,
}

#[derive(Debug, Clone, Serialize)]
pub struct HopfSummary {
    pub alpha0: f64,
    pub equilibrium: [f64; 2],
    pub gamma0: f64,
    pub beta_prime: f64,
    pub transform: Mat2,
}

impl HopfData {
    pub fn system(&self) -> &ParametricPlanarSystem {
        &self.system
    }

    pub fn branch(&self) -> &EquilibriumBranch {
        &self.branch
    }

    pub fn equilibrium_at(&self, alpha: f64) -> Result<[f64; 2]> {
        self.branch.at(alpha)
    }

    /// `(β, γ)` of the Jacobian eigenvalue pair at parameter `alpha`.
    pub fn eigen_at(&self, alpha: f64) -> Result<(f64, f64)> {
        focus_eigenvalue(&self.system, self.branch.at(alpha)?, alpha)
    }

    /// Canonical coordinates of `x` relative to `center`.
    pub fn to_canonical(&self, x: [f64; 2], center: [f64; 2]) -> [f64; 2] {
        linalg::apply(&self.transform_inv, [x[0] - center[0], x[1] - center[1]])
    }

    pub fn from_canonical(&self, w: [f64; 2], center: [f64; 2]) -> [f64; 2] {
        let d = linalg::apply(&self.transform, w);
        [center[0] + d[0], center[1] + d[1]]
    }

    pub fn summary(&self) -> HopfSummary {
        HopfSummary {
            alpha0: self.alpha0,
            equilibrium: self.equilibrium,
            gamma0: self.gamma0,
            beta_prime: self.beta_prime,
            transform: self.transform,
        }
    }
}

/// Transform built from the Jacobian: `T = [[1, p], [0, q]]` with
/// `p = (a11 - β)/γ`, `q = a21/γ`, so that `T⁻¹ J T = [[β, -γ], [γ, β]]`, `γ > 0`.
pub fn canonical_transform(j: &Mat2) -> Result<(Mat2, Mat2, f64, f64)> {
    let disc = linalg::discriminant2(j);
    if disc >= 0.0 {
        return Err(Error::NotAFocus {
            param: f64::NAN,
            discriminant: disc,
        });
    }
    let beta = 0.5 * linalg::trace(j);
    let gamma = (-disc).sqrt();
    let p = (j[0][0] - beta) / gamma;
    let q = j[1][0] / gamma;
    let t = [[1.0, p], [0.0, q]];
    let t_inv = linalg::inverse(&t).ok_or_else(|| Error::InternalConsistency("singular transform".into()))?;
    Ok((t, t_inv, beta, gamma))
}

/// Bisection on `β(α) = Re λ(α)` over `bracket`, then transversality and the
/// canonical transform at the root.
pub fn locate_hopf(
    system: &ParametricPlanarSystem,
    eq_branch: &EquilibriumBranch,
    bracket: (f64, f64),
) -> Result<HopfData> {
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 {
        bracket
    } else {
        (bracket.1, bracket.0)
    };
    let beta_at = |a: f64| -> Result<f64> {
        let x = eq_branch.at(a)?;
        focus_eigenvalue(system, x, a)
            .map(|(b, _)| b)
            .map_err(|e| match e {
                Error::NotAFocus { discriminant, .. } => Error::NotAFocus {
                    param: a,
                    discriminant,
                },
                other => other,
            })
    };
    let mut b_lo = beta_at(lo)?;
    let b_hi = beta_at(hi)?;
    if b_lo.signum() == b_hi.signum() && b_lo != 0.0 && b_hi != 0.0 {
        return Err(Error::NoHopfInBracket { lo, hi });
    }
    let mut alpha0 = if b_lo == 0.0 {
        lo
    } else if b_hi == 0.0 {
        hi
    } else {
        f64::NAN
    };
    if alpha0.is_nan() {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-14 * mid.abs().max(1.0) {
                break;
            }
            let bm = beta_at(mid)?;
            if bm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if bm.signum() == b_lo.signum() {
                lo = mid;
                b_lo = bm;
            } else {
                hi = mid;
            }
        }
        alpha0 = 0.5 * (lo + hi);
    }

    let equilibrium = eq_branch.at(alpha0)?;
    let j = system.jacobian(equilibrium, alpha0)?;
    let (transform, transform_inv, beta, gamma0) = canonical_transform(&j).map_err(|e| match e {
        Error::NotAFocus { discriminant, .. } => Error::NotAFocus {
            param: alpha0,
            discriminant,
        },
        other => other,
    })?;
    if beta.abs() >= 1e-8 {
        return Err(Error::InternalConsistency(format!(
            "bisection ended with |Re λ| = {:e} at α = {alpha0}",
            beta.abs()
        )));
    }
    let beta_prime = d_alpha_eigen_real(system, &|a| eq_branch.at(a), alpha0)?;
    if beta_prime <= MIN_BETA_PRIME {
        return Err(Error::TransversalityFailure { beta_prime });
    }
    Ok(HopfData {
        alpha0,
        equilibrium,
        gamma0,
        beta_prime,
        transform,
        transform_inv,
        bracket,
        system: system.clone(),
        branch: eq_branch.clone(),
    })
}

/// Quadratic and cubic homogeneous parts of the field in canonical
/// coordinates `(u, v)`, including the `1/j!` Taylor factors:
/// `w' = [[0, -γ0], [γ0, 0]] w + B₂(w) + B₃(w) + O(|w|⁴)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicNormalForm {
    /// `quad[c] = [u², uv, v²]` coefficients of component `c`.
    pub quad: [[f64; 3]; 2],
    /// `cubic[c] = [u³, u²v, uv², v³]` coefficients of component `c`.
    pub cubic: [[f64; 4]; 2],
    pub gamma0: f64,
}

impl CubicNormalForm {
    pub fn new(quad: [[f64; 3]; 2], cubic: [[f64; 4]; 2], gamma0: f64) -> Self {
        Self { quad, cubic, gamma0 }
    }

    pub fn eval_nonlinear(&self, w: [f64; 2]) -> [f64; 2] {
        let (u, v) = (w[0], w[1]);
        let q = [u * u, u * v, v * v];
        let c = [u * u * u, u * u * v, u * v * v, v * v * v];
        let mut out = [0.0; 2];
        for k in 0..2 {
            out[k] = (0..3).map(|i| self.quad[k][i] * q[i]).sum::<f64>()
                + (0..4).map(|i| self.cubic[k][i] * c[i]).sum::<f64>();
        }
        out
    }

    /// Truncated field with linear part `[[α, -γ0], [γ0, α]]`.
    pub fn eval_truncated(&self, w: [f64; 2], alpha: f64) -> [f64; 2] {
        let n = self.eval_nonlinear(w);
        [
            alpha * w[0] - self.gamma0 * w[1] + n[0],
            self.gamma0 * w[0] + alpha * w[1] + n[1],
        ]
    }

    pub fn quad_poly(&self, component: usize) -> TrigPoly {
        TrigPoly::new(self.quad[component].to_vec())
    }

    pub fn cubic_poly(&self, component: usize) -> TrigPoly {
        TrigPoly::new(self.cubic[component].to_vec())
    }

    /// Coefficients in the frame rotated by `phi`: `w = R(φ) w'`,
    /// `g'(w') = R(-φ) g(R(φ) w')`. The linear rotation block is unchanged.
    pub fn rotated(&self, phi: f64) -> CubicNormalForm {
        let r = linalg::rotation(phi);
        // u = r00 u' + r01 v', v = r10 u' + r11 v'
        let lu = [r[0][0], r[0][1]];
        let lv = [r[1][0], r[1][1]];
        let sub = |coeffs: &[f64]| substitute(coeffs, lu, lv);
        let q: Vec<Vec<f64>> = (0..2).map(|c| sub(&self.quad[c])).collect();
        let cu: Vec<Vec<f64>> = (0..2).map(|c| sub(&self.cubic[c])).collect();
        let rt = [[r[0][0], r[1][0]], [r[0][1], r[1][1]]];
        let mut quad = [[0.0; 3]; 2];
        let mut cubic = [[0.0; 4]; 2];
        for k in 0..2 {
            for i in 0..3 {
                quad[k][i] = rt[k][0] * q[0][i] + rt[k][1] * q[1][i];
            }
            for i in 0..4 {
                cubic[k][i] = rt[k][0] * cu[0][i] + rt[k][1] * cu[1][i];
            }
        }
        CubicNormalForm {
            quad,
            cubic,
            gamma0: self.gamma0,
        }
    }
}

// Σ_j c_j L1^{d-j} L2^j for linear forms L1, L2 in (u, v); coefficient
// vectors are indexed by the power of v.
fn substitute(coeffs: &[f64], l1: [f64; 2], l2: [f64; 2]) -> Vec<f64> {
    let d = coeffs.len() - 1;
    let pow = |l: [f64; 2], n: usize| {
        let mut p = vec![1.0];
        for _ in 0..n {
            let mut next = vec![0.0; p.len() + 1];
            for (i, &a) in p.iter().enumerate() {
                next[i] += a * l[0];
                next[i + 1] += a * l[1];
            }
            p = next;
        }
        p
    };
    let mut out = vec![0.0; d + 1];
    for (j, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let a = pow(l1, d - j);
        let b = pow(l2, j);
        for (i, &x) in a.iter().enumerate() {
            for (k, &y) in b.iter().enumerate() {
                out[i + k] += c * x * y;
            }
        }
    }
    out
}

/// The field in canonical coordinates around the Hopf equilibrium:
/// `g(w, α) = T⁻¹ f(x*(α0) + T w, α)`.
pub fn canonical_system(system: &ParametricPlanarSystem, hopf: &HopfData) -> ParametricPlanarSystem {
    let sys = system.clone();
    let (t, t_inv, eq) = (hopf.transform, hopf.transform_inv, hopf.equilibrium);
    ParametricPlanarSystem::new(format!("{}-canonical", system.label()), system.param_range(), move |w, a| {
        let d = linalg::apply(&t, w);
        let f = sys.eval([eq[0] + d[0], eq[1] + d[1]], a);
        linalg::apply(&t_inv, f)
    })
}

/// Quadratic and cubic coefficients of the canonical-coordinate field at the
/// Hopf point.
pub fn cubic_normal_form(system: &ParametricPlanarSystem, hopf: &HopfData) -> Result<CubicNormalForm> {
    let g = canonical_system(system, hopf);
    let t2 = derivatives_at(&g, [0.0, 0.0], hopf.alpha0, 2)?;
    let t3 = derivatives_at(&g, [0.0, 0.0], hopf.alpha0, 3)?;
    let mut quad = [[0.0; 3]; 2];
    let mut cubic = [[0.0; 4]; 2];
    // multinomial factors: binomial(n, j) / n!
    let q_fac = [0.5, 1.0, 0.5];
    let c_fac = [1.0 / 6.0, 0.5, 0.5, 1.0 / 6.0];
    for c in 0..2 {
        for j in 0..3 {
            quad[c][j] = q_fac[j] * t2.partials[c][j];
        }
        for j in 0..4 {
            cubic[c][j] = c_fac[j] * t3.partials[c][j];
        }
    }
    Ok(CubicNormalForm {
        quad,
        cubic,
        gamma0: hopf.gamma0,
    })
}
