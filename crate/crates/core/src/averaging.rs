//! Polar coefficients of the normal form, the averaged cubic coefficient `K`,
//! the `b` function of the near-identity averaging change, and first-order averaging of
//! `T`-periodic systems `x' = α f(t, x, α)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hopf::CubicNormalForm;
use crate::integrate::{integrate, monodromy, OdeSystem, Tolerances, Trajectory};
use crate::linalg;
use crate::predict::Stability;
use crate::trig::{simpson_mean, Fourier, TrigPoly};
use crate::vectorfield::PeriodicSystem;

/// Simpson panel count for the quadrature cross-check of `K`.
pub const K_SIMPSON_PANELS: usize = 1024;

/// Coefficients of the truncated polar system
/// `r' = α r + r² C3(θ) + r³ C4(θ)`, `θ' = γ0 + r D3(θ) + O(r²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarCoefficients {
    pub c3: TrigPoly,
    pub c4: TrigPoly,
    pub d3: TrigPoly,
    pub gamma0: f64,
}

impl PolarCoefficients {
    pub fn radial_rate(&self, r: f64, theta: f64, alpha: f64) -> f64 {
        alpha * r + r * r * self.c3.eval(theta) + r * r * r * self.c4.eval(theta)
    }

    pub fn angular_rate(&self, r: f64, theta: f64) -> f64 {
        self.gamma0 + r * self.d3.eval(theta)
    }
}

pub fn polar_coefficients(nf: &CubicNormalForm) -> PolarCoefficients {
    let (c, s) = (TrigPoly::cos(), TrigPoly::sin());
    let (b12, b22) = (nf.quad_poly(0), nf.quad_poly(1));
    let (b13, b23) = (nf.cubic_poly(0), nf.cubic_poly(1));
    PolarCoefficients {
        c3: c.mul(&b12).add(&s.mul(&b22)),
        c4: c.mul(&b13).add(&s.mul(&b23)),
        d3: c.mul(&b22).sub(&s.mul(&b12)),
        gamma0: nf.gamma0,
    }
}

/// Both evaluations of `K = ⟨C4⟩ - ⟨C3 D3⟩ / γ0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KEvaluation {
    pub moments: f64,
    pub simpson: f64,
}

impl KEvaluation {
    pub fn discrepancy(&self) -> f64 {
        (self.moments - self.simpson).abs()
    }
}

pub fn average_k_detailed(pc: &PolarCoefficients) -> Result<KEvaluation> {
    if !(pc.gamma0 > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma0 must be positive, got {}", pc.gamma0)));
    }
    let cross = pc.c3.mul(&pc.d3);
    let moments = pc.c4.mean() - cross.mean() / pc.gamma0;
    let simpson = simpson_mean(
        |t| pc.c4.eval(t) - pc.c3.eval(t) * pc.d3.eval(t) / pc.gamma0,
        K_SIMPSON_PANELS,
    );
    Ok(KEvaluation { moments, simpson })
}

/// `K` from exact trig moments, cross-checked against Simpson quadrature.
pub fn average_k(pc: &PolarCoefficients) -> Result<f64> {
    let k = average_k_detailed(pc)?;
    if k.discrepancy() > 1e-10 * k.moments.abs().max(1.0) {
        return Err(Error::InternalConsistency(format!(
            "K evaluators disagree: moments {} vs quadrature {}",
            k.moments, k.simpson
        )));
    }
    Ok(k.moments)
}

/// Solution of the homological equation: `b` is `2π`-periodic with `b(0) = 0` and
/// `A + w b' = A_bar`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BFunction {
    pub b: Fourier,
    pub a_bar: f64,
}

pub fn averaging_b_function(a: &TrigPoly, w: f64) -> Result<BFunction> {
    averaging_b_function_fourier(&a.to_fourier(), w)
}

pub fn averaging_b_function_fourier(a: &Fourier, w: f64) -> Result<BFunction> {
    if w == 0.0 || !w.is_finite() {
        return Err(Error::InvalidArgument(format!("w must be nonzero and finite, got {w}")));
    }
    let prim = a.antiderivative();
    let mut b = prim.scale(-1.0 / w);
    b.a0 = prim.eval(0.0) / w;
    Ok(BFunction { b, a_bar: a.a0 })
}

/// `u1(θ) = exp(θ β / γ)`, the first-order radial solution of the linear part.
pub fn u1_hopf(theta: f64, beta: f64, gamma: f64) -> f64 {
    (theta * beta / gamma).exp()
}

/// `x' = α f(t, x, α)` as an integrable system.
pub struct ScaledPeriodic<'a> {
    pub system: &'a PeriodicSystem,
    pub alpha: f64,
}

impl OdeSystem for ScaledPeriodic<'_> {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        let f = self.system.eval(t, x, self.alpha);
        for (d, v) in dx.iter_mut().zip(f) {
            *d = self.alpha * v;
        }
    }
}

/// `f0(x) = (1/T) ∫₀ᵀ f(t, x, 0) dt`, evaluated on demand.
#[derive(Debug, Clone)]
pub struct AveragedSystem {
    source: PeriodicSystem,
    pub tolerance: f64,
}

impl AveragedSystem {
    pub fn period(&self) -> f64 {
        self.source.period()
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    /// Periodic trapezoid rule with doubling until successive values agree
    /// to the absolute tolerance.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let t_period = self.source.period();
        let n_dim = self.source.dim();
        let rule = |n: usize| -> Vec<f64> {
            let h = t_period / n as f64;
            let mut acc = vec![0.0; n_dim];
            for i in 0..n {
                for (a, v) in acc.iter_mut().zip(self.source.eval(i as f64 * h, x, 0.0)) {
                    *a += v;
                }
            }
            acc.iter().map(|a| a / n as f64).collect()
        };
        let mut n = 16;
        let mut prev = rule(n);
        let mut change = f64::INFINITY;
        while n < 1 << 18 {
            n *= 2;
            let next = rule(n);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::Quadrature { change: f64::INFINITY });
            }
            change = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if !change.is_finite() {
                break;
            }
            if change < self.tolerance {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Quadrature { change })
    }

    /// Row-major `D f0(x)` by central differences.
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        let mut xp = x.to_vec();
        for j in 0..n {
            let h = 1e-4 * x[j].abs().max(1.0);
            xp[j] = x[j] + h;
            let fp = self.eval(&xp)?;
            xp[j] = x[j] - h;
            let fm = self.eval(&xp)?;
            xp[j] = x[j];
            for i in 0..n {
                out[i * n + j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        Ok(out)
    }
}

pub fn average_system(ps: &PeriodicSystem) -> Result<AveragedSystem> {
    let avg = AveragedSystem {
        source: ps.clone(),
        tolerance: 1e-9,
    };
    avg.eval(&vec![0.0; ps.dim()])?;
    Ok(avg)
}

#[derive(Debug, Clone, Serialize)]
pub struct AveragedPrediction {
    pub y_star: Vec<f64>,
    /// Eigenvalues of `D f0(y*)` as `[re, im]`.
    pub eigenvalues: Vec<[f64; 2]>,
    pub stability: Stability,
}

/// Hyperbolic zero of `f0` near `guess` and the stability it predicts for the
/// `T`-periodic solution of `x' = α f(t, x, α)`, `α > 0`.
pub fn averaged_periodic_predict(
    ps: &PeriodicSystem,
    avg: &AveragedSystem,
    alpha: f64,
    guess: &[f64],
) -> Result<AveragedPrediction> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if guess.len() != ps.dim() {
        return Err(Error::InvalidArgument("guess dimension mismatch".into()));
    }
    let n = ps.dim();
    let mut y = guess.to_vec();
    let mut res = f64::INFINITY;
    for _ in 0..50 {
        let f = avg.eval(&y)?;
        res = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        if res < 1e-12 {
            break;
        }
        let j = avg.jacobian(&y)?;
        let dy = linalg::solve(n, &j, &f).ok_or(Error::DegenerateEquilibrium { point: y.clone() })?;
        for (yi, d) in y.iter_mut().zip(dy) {
            *yi -= d;
        }
    }
    if res >= 1e-9 {
        return Err(Error::NoEquilibrium { residual: res });
    }
    let j = avg.jacobian(&y)?;
    let eig = linalg::eigenvalues(n, &j);
    let closest = eig.iter().map(|z| z.re).fold(f64::INFINITY, |m, re| if re.abs() < m.abs() { re } else { m });
    if closest.abs() < 1e-8 {
        return Err(Error::HyperbolicityFailure { real_part: closest });
    }
    let stability = if eig.iter().all(|z| z.re < 0.0) {
        Stability::Stable
    } else {
        Stability::Unstable
    };
    Ok(AveragedPrediction {
        y_star: y,
        eigenvalues: eig.iter().map(|z| [z.re, z.im]).collect(),
        stability,
    })
}

/// A `T`-periodic solution found by Newton on the period map.
#[derive(Debug, Clone)]
pub struct PeriodicSolution {
    pub start: Vec<f64>,
    /// `‖x(T) - x(0)‖`.
    pub residual: f64,
    pub trajectory: Trajectory,
}

impl PeriodicSolution {
    /// `max_t ‖x(t) - y‖∞` over 1024 uniformly spaced times in one period.
    pub fn sup_distance(&self, y: &[f64]) -> f64 {
        let (t0, t1) = (self.trajectory.t_start(), self.trajectory.t_end());
        (0..=1024)
            .map(|i| {
                let x = self.trajectory.state_at(t0 + (t1 - t0) * i as f64 / 1024.0);
                x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

pub fn periodic_shooting(ps: &PeriodicSystem, alpha: f64, guess: &[f64]) -> Result<PeriodicSolution> {
    let sys = ScaledPeriodic { system: ps, alpha };
    let n = ps.dim();
    let period = ps.period();
    let tol = Tolerances::tight();
    let mut x = guess.to_vec();
    for _ in 0..30 {
        let traj = integrate(&sys, &x, (0.0, period), tol)?;
        let g: Vec<f64> = traj.last_state().iter().zip(&x).map(|(a, b)| a - b).collect();
        let residual = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual < 1e-10 {
            return Ok(PeriodicSolution {
                start: x,
                residual,
                trajectory: traj,
            });
        }
        let m = monodromy(&sys, &x, period, tol)?;
        let mut a = m.matrix.clone();
        for i in 0..n {
            a[i * n + i] -= 1.0;
        }
        let dx = linalg::solve(n, &a, &g).ok_or_else(|| {
            Error::OrbitNotFound("period map has a unit multiplier; shooting is singular".into())
        })?;
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi -= d;
        }
    }
    Err(Error::OrbitNotFound("periodic shooting did not converge in 30 Newton steps".into()))
}
