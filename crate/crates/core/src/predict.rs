//! Stability verdict, amplitude law, period estimate and the trapping annulus
//! derived from `K`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::averaging::{averaging_b_function_fourier, polar_coefficients, PolarCoefficients};
use crate::hopf::{canonical_transform, cubic_normal_form, HopfData};
use crate::trig::Fourier;
use crate::linalg::{self, Mat2};

pub const DEFAULT_DEGENERACY_THRESHOLD: f64 = 1e-6;
pub const ANNULUS_CURVE_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SupercriticalStable,
    SubcriticalUnstable,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
}

/// Sign of the unfolding parameter on which the orbit exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchSide {
    Positive,
    Negative,
}

impl BranchSide {
    pub fn sign(self) -> f64 {
        match self {
            BranchSide::Positive => 1.0,
            BranchSide::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitPrediction {
    pub k: f64,
    pub verdict: Verdict,
    /// `|K|^{-1/2}`; absent when degenerate.
    pub rho0: Option<f64>,
    pub branch_side: Option<BranchSide>,
    pub degeneracy_threshold: f64,
    /// Bifurcation value of the raw parameter.
    pub alpha0: f64,
}

pub fn predict(k: f64, hopf: &HopfData) -> OrbitPrediction {
    predict_with_threshold(k, hopf, DEFAULT_DEGENERACY_THRESHOLD)
}

pub fn predict_with_threshold(k: f64, hopf: &HopfData, threshold: f64) -> OrbitPrediction {
    OrbitPrediction {
        alpha0: hopf.alpha0,
        ..classify(k, threshold)
    }
}

/// Verdict and `ρ0` from `K` alone, with the bifurcation value left at 0.
pub fn classify(k: f64, threshold: f64) -> OrbitPrediction {
    let (verdict, side) = if !(k.abs() >= threshold) {
        (Verdict::Degenerate, None)
    } else if k < 0.0 {
        (Verdict::SupercriticalStable, Some(BranchSide::Positive))
    } else {
        (Verdict::SubcriticalUnstable, Some(BranchSide::Negative))
    };
    OrbitPrediction {
        k,
        verdict,
        rho0: side.map(|_| k.abs().powf(-0.5)),
        branch_side: side,
        degeneracy_threshold: threshold,
        alpha0: 0.0,
    }
}

impl OrbitPrediction {
    pub fn is_degenerate(&self) -> bool {
        self.verdict == Verdict::Degenerate
    }

    pub fn expected_stability(&self) -> Option<Stability> {
        match self.verdict {
            Verdict::SupercriticalStable => Some(Stability::Stable),
            Verdict::SubcriticalUnstable => Some(Stability::Unstable),
            Verdict::Degenerate => None,
        }
    }

    /// Original-coordinate amplitude `r = √|α| ρ0` for an unfolding value
    /// `alpha` (the real part of the critical eigenvalue) on the branch side.
    pub fn amplitude(&self, alpha: f64) -> Option<f64> {
        let side = self.branch_side?;
        if alpha * side.sign() < 0.0 {
            return None;
        }
        Some(alpha.abs().sqrt() * self.rho0?)
    }

    /// Amplitude at a raw parameter value, through `α = Re λ(param)`.
    pub fn amplitude_at(&self, hopf: &HopfData, param: f64) -> Result<Option<f64>> {
        Ok(self.amplitude(hopf.eigen_at(param)?.0))
    }

    /// `2π / γ(param)`.
    pub fn period_estimate(&self, hopf: &HopfData, param: f64) -> Result<f64> {
        Ok(2.0 * PI / hopf.eigen_at(param)?.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsilonChoice {
    Auto,
    Fixed(f64),
}

/// `ε(μ) = 0.5 √μ` clamped to `[0.05, 0.5]`.
pub fn auto_epsilon(mu: f64) -> f64 {
    (0.5 * mu.sqrt()).clamp(0.05, 0.5)
}

/// Near-identity radial change `ρ̃ = ρ + μ ρ² b1(θ) + μ² ρ³ b2(θ)` that removes
/// the oscillating first- and second-order terms from `dρ/dθ`, so that the
/// averaged radius obeys `ρ̃' = α ρ̃ + μ² K ρ̃³` up to `O(μ³)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialCorrection {
    pub b1: Fourier,
    pub b2: Fourier,
}

impl RadialCorrection {
    pub fn from_polar(pc: &PolarCoefficients) -> Result<Self> {
        let g = pc.gamma0;
        let c3 = pc.c3.to_fourier().scale(1.0 / g);
        let c4 = pc.c4.to_fourier().add(&pc.c3.mul(&pc.d3).to_fourier().scale(-1.0 / g)).scale(1.0 / g);
        let b1 = averaging_b_function_fourier(&c3, 1.0)?.b;
        let a2 = c4.add(&b1.mul(&c3).scale(2.0));
        let b2 = averaging_b_function_fourier(&a2, 1.0)?.b;
        Ok(Self { b1, b2 })
    }

    pub fn identity() -> Self {
        let zero = Fourier { a0: 0.0, a: vec![], b: vec![] };
        Self { b1: zero.clone(), b2: zero }
    }

    pub fn averaged(&self, mu: f64, rho: f64, theta: f64) -> f64 {
        rho + mu * rho * rho * self.b1.eval(theta) + (mu * rho).powi(2) * rho * self.b2.eval(theta)
    }

    /// Whether `ρ ↦ ρ̃` increases from 0 until it reaches `target` at every
    /// sampled angle, so that [`RadialCorrection::raw`] is well defined below it.
    pub fn invertible_below(&self, mu: f64, target: f64) -> bool {
        let h = target / 256.0;
        (0..ANNULUS_CURVE_POINTS).all(|i| {
            let th = 2.0 * PI * i as f64 / ANNULUS_CURVE_POINTS as f64;
            let (b1, b2) = (self.b1.eval(th), self.b2.eval(th));
            let mut rho: f64 = 0.0;
            while rho < 10.0 * target {
                if 1.0 + 2.0 * mu * rho * b1 + 3.0 * (mu * rho).powi(2) * b2 <= 0.0 {
                    return false;
                }
                if self.averaged(mu, rho, th) >= target {
                    return true;
                }
                rho += h;
            }
            false
        })
    }

    /// Inverse of [`RadialCorrection::averaged`] at fixed `θ`, by Newton.
    pub fn raw(&self, mu: f64, rho_avg: f64, theta: f64) -> f64 {
        let (b1, b2) = (self.b1.eval(theta), self.b2.eval(theta));
        let mut rho = rho_avg;
        for _ in 0..50 {
            let g = rho + mu * rho * rho * b1 + (mu * rho).powi(2) * rho * b2 - rho_avg;
            let dg = 1.0 + 2.0 * mu * rho * b1 + 3.0 * (mu * rho).powi(2) * b2;
            let step = g / dg;
            rho -= step;
            if step.abs() <= 1e-15 * rho.abs().max(1.0) {
                break;
            }
        }
        rho
    }
}

/// Ring `(1-ε)ρ0 < ρ̃ < (1+ε)ρ0` in the averaged radius. The raw rescaled
/// radius is `ρ = |T⁻¹(x - center)| / μ` with `T` the canonical transform of
/// the linearization at `param`; `ρ̃` follows from [`RadialCorrection`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Annulus {
    pub center: [f64; 2],
    pub inner_r: f64,
    pub outer_r: f64,
    pub rho0: f64,
    pub epsilon: f64,
    pub epsilon_auto: bool,
    /// Raw parameter value.
    pub param: f64,
    /// Unfolding value `Re λ(param)`.
    pub alpha: f64,
    pub mu: f64,
    pub transform: Mat2,
    #[serde(skip)]
    pub transform_inv: Mat2,
    pub radial: RadialCorrection,
}

impl Annulus {
    /// Point with averaged radius `rho` at angle `theta`.
    pub fn map_to_original(&self, rho: f64, theta: f64) -> [f64; 2] {
        self.raw_to_original(self.radial.raw(self.mu, rho, theta), theta)
    }

    pub fn raw_to_original(&self, rho: f64, theta: f64) -> [f64; 2] {
        let (s, c) = theta.sin_cos();
        let d = linalg::apply(&self.transform, [self.mu * rho * c, self.mu * rho * s]);
        [self.center[0] + d[0], self.center[1] + d[1]]
    }

    /// Raw rescaled polar coordinates `(ρ, θ)`, `θ ∈ (-π, π]`.
    pub fn to_raw_rescaled(&self, x: [f64; 2]) -> (f64, f64) {
        let w = linalg::apply(&self.transform_inv, [x[0] - self.center[0], x[1] - self.center[1]]);
        (w[0].hypot(w[1]) / self.mu, w[1].atan2(w[0]))
    }

    /// Inverse of [`Annulus::map_to_original`]: averaged `(ρ̃, θ)`.
    pub fn to_rescaled(&self, x: [f64; 2]) -> (f64, f64) {
        let (rho, theta) = self.to_raw_rescaled(x);
        (self.radial.averaged(self.mu, rho, theta), theta)
    }

    pub fn contains_rescaled(&self, rho: f64) -> bool {
        rho > self.inner_r && rho < self.outer_r
    }

    /// Bounds of the ring with `ε` scaled by `factor`.
    pub fn inflated(&self, factor: f64) -> (f64, f64) {
        ((1.0 - factor * self.epsilon) * self.rho0, (1.0 + factor * self.epsilon) * self.rho0)
    }

    /// Inner and outer boundary curves in original coordinates.
    pub fn boundary_curves(&self, n: usize) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
        let curve = |rho: f64| {
            (0..n)
                .map(|i| self.map_to_original(rho, 2.0 * PI * i as f64 / n as f64))
                .collect::<Vec<_>>()
        };
        (curve(self.inner_r), curve(self.outer_r))
    }
}

/// Winding number of a closed polygon about `p`.
pub fn winding_number(curve: &[[f64; 2]], p: [f64; 2]) -> i64 {
    let n = curve.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = curve[i];
        let b = curve[(i + 1) % n];
        let ta = (a[1] - p[1]).atan2(a[0] - p[0]);
        let tb = (b[1] - p[1]).atan2(b[0] - p[0]);
        let mut d = tb - ta;
        if d > PI {
            d -= 2.0 * PI;
        } else if d < -PI {
            d += 2.0 * PI;
        }
        total += d;
    }
    (total / (2.0 * PI)).round() as i64
}

pub fn build_annulus(pred: &OrbitPrediction, hopf: &HopfData, param: f64, epsilon: EpsilonChoice) -> Result<Annulus> {
    let (side, rho0) = match (pred.branch_side, pred.rho0) {
        (Some(s), Some(r)) => (s, r),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "K = {:e} is degenerate; no annulus is defined",
                pred.k
            )))
        }
    };
    let alpha = hopf.eigen_at(param)?.0;
    if alpha * side.sign() <= 0.0 {
        return Err(Error::BranchMismatch {
            alpha,
            branch_side: side.sign(),
        });
    }
    let mu = alpha.abs().sqrt();
    let (eps, auto) = match epsilon {
        EpsilonChoice::Auto => (auto_epsilon(mu), true),
        EpsilonChoice::Fixed(e) if e > 0.0 && e < 1.0 => (e, false),
        EpsilonChoice::Fixed(e) => {
            return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {e}")));
        }
    };
    let center = hopf.equilibrium_at(param)?;
    let (transform, transform_inv, _, _) = canonical_transform(&hopf.system().jacobian(center, param)?)?;
    let radial = RadialCorrection::from_polar(&polar_coefficients(&cubic_normal_form(hopf.system(), hopf)?))?;
    let annulus = Annulus {
        center,
        inner_r: (1.0 - eps) * rho0,
        outer_r: (1.0 + eps) * rho0,
        rho0,
        epsilon: eps,
        epsilon_auto: auto,
        param,
        alpha,
        mu,
        transform,
        transform_inv,
        radial,
    };
    if !annulus.radial.invertible_below(mu, annulus.inflated(1.5).1) {
        return Err(Error::OutsideAsymptoticRegime { radius: mu * rho0 });
    }
    let (inner, outer) = annulus.boundary_curves(ANNULUS_CURVE_POINTS);
    for curve in [&inner, &outer] {
        if winding_number(curve, annulus.center).abs() != 1 {
            return Err(Error::InternalConsistency("annulus boundary is not a simple closed curve".into()));
        }
    }
    Ok(annulus)
}

/// Signs of the truncated averaged rescaled radial rate
/// `ρ̃' = μ α̃ ρ̃ + μ² K ρ̃³`, `α̃ = α / μ`, sampled on both boundary circles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySignCheck {
    pub samples: usize,
    /// Rate on the inner and outer circles.
    pub inner_rate: f64,
    pub outer_rate: f64,
    pub inner_ok: bool,
    pub outer_ok: bool,
}

impl BoundarySignCheck {
    pub fn holds(&self) -> bool {
        self.inner_ok && self.outer_ok
    }
}

pub fn boundary_sign_check(pred: &OrbitPrediction, annulus: &Annulus, samples: usize) -> BoundarySignCheck {
    let mu = annulus.mu;
    let alpha_tilde = annulus.alpha / mu;
    let rate = |rho: f64, _theta: f64| mu * alpha_tilde * rho + mu * mu * pred.k * rho.powi(3);
    // positively invariant for K < 0: outward on the inner circle, inward on
    // the outer; reversed for K > 0
    let s = if pred.k < 0.0 { 1.0 } else { -1.0 };
    let mut inner_ok = true;
    let mut outer_ok = true;
    let mut inner_rate = f64::INFINITY;
    let mut outer_rate = f64::NEG_INFINITY;
    for i in 0..samples {
        let theta = 2.0 * PI * i as f64 / samples as f64;
        let ri = s * rate(annulus.inner_r, theta);
        let ro = s * rate(annulus.outer_r, theta);
        inner_ok &= ri > 0.0;
        outer_ok &= ro < 0.0;
        inner_rate = inner_rate.min(ri);
        outer_rate = outer_rate.max(ro);
    }
    BoundarySignCheck {
        samples,
        inner_rate: s * inner_rate,
        outer_rate: s * outer_rate,
        inner_ok,
        outer_ok,
    }
}
