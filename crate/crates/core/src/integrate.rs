//! Adaptive Dormand–Prince 5(4) integration with continuous output,
//! section-crossing location, and monodromy matrices.

use nalgebra::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::vectorfield::ParametricPlanarSystem;

/// Autonomous or non-autonomous first-order system `x' = f(t, x)`.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]);

    /// Row-major Jacobian `∂f/∂x` by Richardson-extrapolated central differences.
    fn jacobian(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let mut xp = x.to_vec();
        let mut fp = vec![0.0; n];
        let mut fm = vec![0.0; n];
        let mut central = |xp: &mut Vec<f64>, j: usize, h: f64, col: &mut [f64]| {
            xp[j] = x[j] + h;
            self.rhs(t, xp, &mut fp);
            xp[j] = x[j] - h;
            self.rhs(t, xp, &mut fm);
            xp[j] = x[j];
            for i in 0..n {
                col[i] = (fp[i] - fm[i]) / (2.0 * h);
            }
        };
        let mut coarse = vec![0.0; n];
        let mut fine = vec![0.0; n];
        for j in 0..n {
            let h = 1e-3 * x[j].abs().max(1.0);
            central(&mut xp, j, h, &mut coarse);
            central(&mut xp, j, 0.5 * h, &mut fine);
            for i in 0..n {
                out[i * n + j] = (4.0 * fine[i] - coarse[i]) / 3.0;
            }
        }
    }
}

/// Wraps a closure `f(t, x, dx)` of fixed dimension.
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]) {
        (self.f)(t, x, dx)
    }
}

/// A planar system frozen at one parameter value, optionally time-reversed.
pub struct PlanarFlow<'a> {
    pub system: &'a ParametricPlanarSystem,
    pub alpha: f64,
    pub reversed: bool,
}

impl<'a> PlanarFlow<'a> {
    pub fn new(system: &'a ParametricPlanarSystem, alpha: f64) -> Self {
        Self {
            system,
            alpha,
            reversed: false,
        }
    }

    pub fn reversed(system: &'a ParametricPlanarSystem, alpha: f64) -> Self {
        Self {
            system,
            alpha,
            reversed: true,
        }
    }
}

impl OdeSystem for PlanarFlow<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        let f = self.system.eval([x[0], x[1]], self.alpha);
        let s = if self.reversed { -1.0 } else { 1.0 };
        dx[0] = s * f[0];
        dx[1] = s * f[1];
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-8,
        }
    }
}

impl Tolerances {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    /// Tight setting used for shooting and monodromy.
    pub const fn tight() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-11,
        }
    }

    pub fn halved(self) -> Self {
        Self {
            abs: 0.5 * self.abs,
            rel: 0.5 * self.rel,
        }
    }
}

#[derive(Debug, Clone)]
struct DenseStep {
    t0: f64,
    h: f64,
    // five blocks of `dim` coefficients
    coeffs: Vec<f64>,
}

/// Accepted steps of an integration plus 4th-order continuous output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    steps: Vec<DenseStep>,
    pub tolerances: Tolerances,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times
            .iter()
            .copied()
            .zip(self.states.chunks_exact(self.dim))
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// State at time `t` (clamped to the integrated span). Sample times
    /// return the stored state exactly.
    pub fn state_at(&self, t: f64) -> Vec<f64> {
        let t = t.clamp(self.t_start(), self.t_end());
        match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(i) => self.state(i).to_vec(),
            Err(i) => {
                let step = &self.steps[i - 1];
                let n = self.dim;
                let th = (t - step.t0) / step.h;
                let th1 = 1.0 - th;
                let c = &step.coeffs;
                (0..n)
                    .map(|k| {
                        c[k] + th
                            * (c[n + k]
                                + th1 * (c[2 * n + k] + th * (c[3 * n + k] + th1 * c[4 * n + k])))
                    })
                    .collect()
            }
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 5_000_000;

/// Integrate over `t_span = (t0, t1)` with `t1 > t0`.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    t_span: (f64, f64),
    tol: Tolerances,
) -> Result<Trajectory> {
    integrate_until(sys, x0, t_span, tol, |_, _| false)
}

/// Like [`integrate`], but stops after the first accepted step whose end
/// state satisfies `stop(t, x)`.
pub fn integrate_until<S, P>(
    sys: &S,
    x0: &[f64],
    t_span: (f64, f64),
    tol: Tolerances,
    mut stop: P,
) -> Result<Trajectory>
where
    S: OdeSystem + ?Sized,
    P: FnMut(f64, &[f64]) -> bool,
{
    let n = sys.dim();
    let (t0, t_end) = t_span;
    if x0.len() != n {
        return Err(Error::InvalidArgument(format!(
            "initial state has length {}, system dimension is {n}",
            x0.len()
        )));
    }
    if !(tol.abs > 0.0 && tol.rel > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if !(t_end > t0) || !t0.is_finite() || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "empty or non-finite time span ({t0}, {t_end})"
        )));
    }

    let mut traj = Trajectory {
        dim: n,
        times: vec![t0],
        states: x0.to_vec(),
        steps: Vec::new(),
        tolerances: tol,
    };

    let mut y = x0.to_vec();
    let mut k1 = vec![0.0; n];
    sys.rhs(t0, &y, &mut k1);
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(Error::IntegrationFailure {
            t: t0,
            last_state: y,
            reason: "non-finite derivative at the initial state".into(),
        });
    }
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];

    let span = t_end - t0;
    let mut h = initial_step(sys, t0, &y, &k1, tol, span);
    let mut t = t0;
    let mut fac_old: f64 = 1e-4;
    let mut rejected_last = false;

    for _ in 0..MAX_STEPS {
        if t >= t_end {
            return Ok(traj);
        }
        let last = t + h >= t_end || t_end - (t + h) < 1e-12 * span;
        if last {
            h = t_end - t;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                t,
                last_state: y,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, &ytmp, &mut k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, &ytmp, &mut k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, &ytmp, &mut k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, &ytmp, &mut k5);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t_end } else { t + h };
        sys.rhs(t_new, &ytmp, &mut k6);
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(t_new, &ynew, &mut k7);

        let mut err = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = tol.abs + tol.rel * y[i].abs().max(ynew[i].abs());
            err += (e / sk).powi(2);
        }
        let err = (err / n as f64).sqrt();

        if !err.is_finite() {
            h *= 0.2;
            rejected_last = true;
            continue;
        }

        // PI step-size control (Gustafsson), constants as in DOPRI5.
        let beta = 0.04;
        let expo1 = 0.2 - beta * 0.75;
        let fac11 = err.powf(expo1);
        if err <= 1.0 {
            let mut fac = fac11 / fac_old.powf(beta);
            fac = (fac / 0.9).clamp(0.2, 10.0);
            fac_old = err.max(1e-4);

            let mut coeffs = vec![0.0; 5 * n];
            for i in 0..n {
                let dy = ynew[i] - y[i];
                let bspl = h * k1[i] - dy;
                coeffs[i] = y[i];
                coeffs[n + i] = dy;
                coeffs[2 * n + i] = bspl;
                coeffs[3 * n + i] = dy - h * k7[i] - bspl;
                coeffs[4 * n + i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            traj.steps.push(DenseStep { t0: t, h, coeffs });
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            traj.times.push(t);
            traj.states.extend_from_slice(&y);

            if stop(t, &y) {
                return Ok(traj);
            }
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            rejected_last = false;
            h = h_new;
        } else {
            h /= (fac11 / 0.9).min(5.0);
            rejected_last = true;
        }
    }
    Err(Error::IntegrationFailure {
        t,
        last_state: y,
        reason: format!("exceeded {MAX_STEPS} steps"),
    })
}

fn initial_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    tol: Tolerances,
    span: f64,
) -> f64 {
    let n = y0.len();
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..n {
        let sk = tol.abs + tol.rel * y0[i].abs();
        dnf += (f0[i] / sk).powi(2);
        dny += (y0[i] / sk).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(span);
    let y1: Vec<f64> = (0..n).map(|i| y0[i] + h * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(t0 + h, &y1, &mut f1);
    let mut der2 = 0.0;
    for i in 0..n {
        let sk = tol.abs + tol.rel * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sk).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if !der12.is_finite() {
        h * 1e-3
    } else if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(span)
}

/// A refined intersection of a trajectory with a section `g(x) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionCrossing {
    pub t_cross: f64,
    pub state_cross: Vec<f64>,
    pub direction: i8,
}

/// All crossings of `g = 0` in the requested direction (`+1`: `g` increasing,
/// `-1`: decreasing), refined by bisection on the continuous output. A start
/// exactly on the section is not a crossing.
pub fn find_crossings(
    traj: &Trajectory,
    section: &dyn Fn(&[f64]) -> f64,
    direction: i8,
) -> Vec<SectionCrossing> {
    let d = if direction >= 0 { 1.0 } else { -1.0 };
    let mut out = Vec::new();
    let mut g_prev = d * section(traj.state(0));
    for i in 1..traj.len() {
        let g = d * section(traj.state(i));
        if g_prev < 0.0 && g >= 0.0 {
            let t_c = refine_crossing(traj, section, traj.times[i - 1], traj.times[i]);
            out.push(SectionCrossing {
                t_cross: t_c,
                state_cross: traj.state_at(t_c),
                direction: d as i8,
            });
        }
        g_prev = g;
    }
    out
}

/// Bisection for a root of `g(x(t))` on `[t_lo, t_hi]`, where `g` has opposite
/// signs (or a zero) at the ends.
pub fn refine_crossing(traj: &Trajectory, section: &dyn Fn(&[f64]) -> f64, t_lo: f64, t_hi: f64) -> f64 {
    let (mut a, mut b) = (t_lo, t_hi);
    let mut ga = section(&traj.state_at(a));
    let gb = section(&traj.state_at(b));
    if ga == 0.0 {
        return a;
    }
    if gb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = section(&traj.state_at(m));
        if gm == 0.0 || gm.abs() < 1e-15 {
            return m;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Fundamental matrix over one period and its eigenvalues (characteristic
/// multipliers).
#[derive(Debug, Clone, Serialize)]
pub struct MonodromyResult {
    pub dim: usize,
    /// Row-major `dim × dim` matrix.
    pub matrix: Vec<f64>,
    #[serde(serialize_with = "serialize_complex")]
    pub multipliers: Vec<Complex<f64>>,
    /// `exp(∫ tr Df dt)` along the orbit.
    pub liouville_det: f64,
    pub det: f64,
}

fn serialize_complex<S: serde::Serializer>(v: &[Complex<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl MonodromyResult {
    /// Distance from the multiplier closest to 1 to exactly 1.
    pub fn trivial_multiplier_error(&self) -> f64 {
        self.multipliers
            .iter()
            .map(|z| (z - Complex::new(1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Multiplier farthest from 1 (the nontrivial one for a planar orbit).
    pub fn nontrivial_multiplier(&self) -> Complex<f64> {
        let one = Complex::new(1.0, 0.0);
        *self
            .multipliers
            .iter()
            .max_by(|a, b| (*a - one).norm().partial_cmp(&(*b - one).norm()).unwrap())
            .expect("at least one multiplier")
    }

    pub fn liouville_relative_error(&self) -> f64 {
        (self.det - self.liouville_det).abs() / self.liouville_det.abs()
    }
}

/// Integrate state, variational equations and `∫ tr Df` jointly over one period.
pub fn monodromy<S: OdeSystem + ?Sized>(
    sys: &S,
    orbit_start: &[f64],
    period: f64,
    tol: Tolerances,
) -> Result<MonodromyResult> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "monodromy period must be positive, got {period}"
        )));
    }
    let n = sys.dim();
    let m = n + n * n + 1;
    let aug = FnSystem::new(m, |t, z: &[f64], dz: &mut [f64]| {
        let x = &z[..n];
        sys.rhs(t, x, &mut dz[..n]);
        let mut jac = vec![0.0; n * n];
        sys.jacobian(t, x, &mut jac);
        let phi = &z[n..n + n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += jac[i * n + k] * phi[k * n + j];
                }
                dz[n + i * n + j] = s;
            }
        }
        dz[m - 1] = (0..n).map(|i| jac[i * n + i]).sum();
    });
    let mut z0 = vec![0.0; m];
    z0[..n].copy_from_slice(orbit_start);
    for i in 0..n {
        z0[n + i * n + i] = 1.0;
    }
    let traj = integrate(&aug, &z0, (0.0, period), tol)?;
    let zf = traj.last_state();
    let matrix = zf[n..n + n * n].to_vec();
    let multipliers = linalg::eigenvalues(n, &matrix);
    let det = multipliers
        .iter()
        .fold(Complex::new(1.0, 0.0), |acc, z| acc * z)
        .re;
    Ok(MonodromyResult {
        dim: n,
        matrix,
        multipliers,
        liouville_det: zf[m - 1].exp(),
        det,
    })
}

/// [`monodromy`] for a planar system frozen at `alpha`.
pub fn monodromy_planar(
    sys: &ParametricPlanarSystem,
    orbit_start: [f64; 2],
    alpha: f64,
    period: f64,
    tol: Tolerances,
) -> Result<MonodromyResult> {
    monodromy(&PlanarFlow::new(sys, alpha), &orbit_start, period, tol)
}
