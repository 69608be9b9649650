//! Periodic-orbit detection by return-map shooting and the comparison of the
//! detected orbit against the prediction.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hopf::HopfData;
use crate::integrate::{find_crossings, integrate, integrate_until, monodromy_planar, PlanarFlow, Tolerances, Trajectory};
use crate::par::Exec;
use crate::predict::{boundary_sign_check, Annulus, BoundarySignCheck, OrbitPrediction, Stability, ANNULUS_CURVE_POINTS};
use crate::vectorfield::ParametricPlanarSystem;

pub const ORBIT_SAMPLES: usize = 1024;
pub const CLOSURE_TOL: f64 = 1e-8;
pub const MAX_SHOOTING_ITERATIONS: usize = 30;
pub const STABILITY_MARGIN: f64 = 1e-4;
pub const TRAPPING_PER_BOUNDARY: usize = 16;
pub const TRAPPING_PERIODS: f64 = 20.0;
pub const TRAPPING_INFLATION: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectedOrbit {
    pub point_on_orbit: [f64; 2],
    pub period: f64,
    /// `+1` if found in forward time, `-1` if in reversed time.
    pub time_direction: i8,
    /// Uniform-in-time samples over one period, first point repeated at the end.
    #[serde(skip)]
    pub samples: Vec<[f64; 2]>,
    /// Largest rescaled radius `ρ̃` over the samples.
    pub amplitude_measured: f64,
    /// Largest and mean canonical radius `|T⁻¹(x - x*)|`.
    pub radius_max: f64,
    pub radius_mean: f64,
    /// Canonical radius where the orbit meets the section.
    pub section_radius: f64,
    pub closure_residual: f64,
    pub iterations: usize,
}

struct Section<'a> {
    hopf: &'a HopfData,
    center: [f64; 2],
}

impl Section<'_> {
    fn canonical(&self, x: &[f64]) -> [f64; 2] {
        self.hopf.to_canonical([x[0], x[1]], self.center)
    }

    fn point(&self, c: f64) -> [f64; 2] {
        self.hopf.from_canonical([c, 0.0], self.center)
    }
}

struct Return {
    radius: f64,
    time: f64,
    state: [f64; 2],
}

fn return_map(flow: &PlanarFlow, section: &Section, c: f64, t_max: f64, tol: Tolerances) -> Result<Return> {
    let x0 = section.point(c);
    let s = flow_sign(flow);
    let mut prev_v = 0.0;
    let mut armed = false;
    let traj = integrate_until(flow, &x0, (0.0, t_max), tol, |_, x| {
        let w = section.canonical(x);
        let v = s * w[1];
        let hit = armed && prev_v < 0.0 && v >= 0.0 && w[0] > 0.0;
        if v < 0.0 {
            armed = true;
        }
        prev_v = v;
        hit
    })?;
    let g = |x: &[f64]| s * section.canonical(x)[1];
    let hit = find_crossings(&traj, &g, 1)
        .into_iter()
        .find(|c| section.canonical(&c.state_cross)[0] > 0.0)
        .ok_or_else(|| Error::OrbitNotFound(format!("no return to the section from radius {c:e}")))?;
    let w = section.canonical(&hit.state_cross);
    Ok(Return {
        radius: w[0],
        time: hit.t_cross,
        state: [hit.state_cross[0], hit.state_cross[1]],
    })
}

// In reversed time the rotation is clockwise; the section function is
// flipped so the crossing of interest is always "upward".
fn flow_sign(flow: &PlanarFlow) -> f64 {
    if flow.reversed {
        -1.0
    } else {
        1.0
    }
}

/// Shooting for the periodic orbit at raw parameter `param`, seeded at the
/// predicted amplitude.
pub fn detect_orbit(
    system: &ParametricPlanarSystem,
    hopf: &HopfData,
    param: f64,
    pred: &OrbitPrediction,
) -> Result<DetectedOrbit> {
    detect_orbit_seeded(system, hopf, param, pred, None)
}

/// [`detect_orbit`] with an explicit seed radius (canonical coordinates).
pub fn detect_orbit_seeded(
    system: &ParametricPlanarSystem,
    hopf: &HopfData,
    param: f64,
    pred: &OrbitPrediction,
    seed: Option<f64>,
) -> Result<DetectedOrbit> {
    let (alpha, gamma) = hopf.eigen_at(param)?;
    let r_pred = pred
        .amplitude(alpha)
        .filter(|r| *r > 0.0)
        .ok_or_else(|| match pred.branch_side {
            Some(side) => Error::BranchMismatch {
                alpha,
                branch_side: side.sign(),
            },
            None => Error::InvalidArgument("degenerate K: no predicted amplitude".into()),
        })?;
    let reversed = pred.k > 0.0;
    let flow = if reversed {
        PlanarFlow::reversed(system, param)
    } else {
        PlanarFlow::new(system, param)
    };
    let section = Section {
        hopf,
        center: hopf.equilibrium_at(param)?,
    };
    let t_max = 4.0 * 2.0 * PI / gamma;
    let tol = Tolerances::tight();
    let disp = |c: f64| -> Result<(f64, Return)> {
        let r = return_map(&flow, &section, c, t_max, tol)?;
        Ok((r.radius - c, r))
    };
    let converged = |d: f64| d.abs() < 1e-11;

    let c0 = seed.unwrap_or(r_pred);
    let (d0, ret0) = disp(c0)?;
    let mut iterations = 1;
    let (c_star, ret) = if converged(d0) {
        (c0, ret0)
    } else {
        let (lo_lim, hi_lim) = (0.2 * r_pred, 3.0 * r_pred);
        let mut bracket = None;
        let (mut up, mut down) = (c0, c0);
        let mut d_up_prev = d0;
        let mut d_down_prev = d0;
        for _ in 0..12 {
            if up < hi_lim {
                let c = (up * 1.25).min(hi_lim);
                iterations += 1;
                match disp(c) {
                    Ok((d, _)) if d.signum() != d_up_prev.signum() => {
                        bracket = Some(((up, d_up_prev), (c, d)));
                        break;
                    }
                    Ok((d, _)) => {
                        up = c;
                        d_up_prev = d;
                    }
                    // Escaped orbit: stop growing outward.
                    Err(_) => up = hi_lim,
                }
            }
            if down > lo_lim {
                let c = (down / 1.25).max(lo_lim);
                let (d, _) = disp(c)?;
                iterations += 1;
                if d.signum() != d_down_prev.signum() {
                    bracket = Some(((c, d), (down, d_down_prev)));
                    break;
                }
                down = c;
                d_down_prev = d;
            }
            if up >= hi_lim && down <= lo_lim {
                break;
            }
        }
        let ((mut a, mut fa), (mut b, mut fb)) = bracket.ok_or_else(|| {
            Error::OrbitNotFound(format!(
                "displacement keeps one sign on [{lo_lim:e}, {hi_lim:e}]"
            ))
        })?;
        let mut best: Option<(f64, f64, Return)> = None;
        let mut side = 0i8;
        for _ in 0..MAX_SHOOTING_ITERATIONS {
            let c = (a * fb - b * fa) / (fb - fa);
            let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
            let (d, r) = disp(c)?;
            iterations += 1;
            let done = converged(d) || (b - a).abs() < 1e-13 * c;
            if best.as_ref().is_none_or(|(_, bd, _)| d.abs() < bd.abs()) {
                best = Some((c, d, r));
            }
            if done {
                break;
            }
            if d.signum() == fb.signum() {
                b = c;
                fb = d;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            } else {
                a = c;
                fa = d;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            }
        }
        let (c, _, r) = best.expect("at least one secant step");
        (c, r)
    };

    let x0 = section.point(c_star);
    let closure_residual = (ret.state[0] - x0[0]).hypot(ret.state[1] - x0[1]);
    if !(closure_residual < CLOSURE_TOL) {
        return Err(Error::OrbitNotFound(format!(
            "shooting stalled with closure residual {closure_residual:e}"
        )));
    }
    let period = ret.time;
    let traj = integrate(&flow, &x0, (0.0, period), tol)?;
    let samples = sample_closed(&traj, ORBIT_SAMPLES);
    let mu = alpha.abs().sqrt();
    let radii: Vec<f64> = samples
        .iter()
        .map(|x| {
            let w = section.canonical(x);
            w[0].hypot(w[1])
        })
        .collect();
    let radius_max = radii.iter().cloned().fold(0.0, f64::max);
    let radius_mean = radii[..ORBIT_SAMPLES].iter().sum::<f64>() / ORBIT_SAMPLES as f64;
    Ok(DetectedOrbit {
        point_on_orbit: x0,
        period,
        time_direction: if reversed { -1 } else { 1 },
        samples,
        amplitude_measured: radius_max / mu,
        radius_max,
        radius_mean,
        section_radius: c_star,
        closure_residual,
        iterations,
    })
}

fn sample_closed(traj: &Trajectory, n: usize) -> Vec<[f64; 2]> {
    let (t0, t1) = (traj.t_start(), traj.t_end());
    let mut out: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let x = traj.state_at(t0 + (t1 - t0) * i as f64 / n as f64);
            [x[0], x[1]]
        })
        .collect();
    out.push(out[0]);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrappingResult {
    pub trajectories: usize,
    /// Trajectories that left the inflated ring in the averaged radius.
    pub escaped: usize,
    /// Same count using the raw rescaled radius.
    pub escaped_raw: usize,
    pub periods: f64,
    pub inflation: f64,
    pub time_direction: i8,
    /// Extremes of the averaged radius over all trajectories.
    pub min_rho: f64,
    pub max_rho: f64,
    pub raw_min_rho: f64,
    pub raw_max_rho: f64,
    pub passed: bool,
}

#[derive(Clone, Copy)]
struct TrapRun {
    escaped: bool,
    escaped_raw: bool,
    range: [f64; 2],
    raw_range: [f64; 2],
}

/// Boundary-seeded trajectories must stay inside the inflated ring for
/// [`TRAPPING_PERIODS`] predicted periods (in reversed time when `K > 0`).
/// A trajectory whose integration breaks down counts as escaped.
pub fn trapping_test(
    system: &ParametricPlanarSystem,
    pred: &OrbitPrediction,
    annulus: &Annulus,
    period: f64,
    exec: Exec,
) -> Result<TrappingResult> {
    let reversed = pred.k > 0.0;
    let (lo, hi) = annulus.inflated(TRAPPING_INFLATION);
    let inside = |rho: f64| rho > lo && rho < hi;
    let starts: Vec<[f64; 2]> = [annulus.inner_r, annulus.outer_r]
        .iter()
        .flat_map(|&rho| {
            (0..TRAPPING_PER_BOUNDARY)
                .map(move |i| (rho, 2.0 * PI * (i as f64 + 0.5) / TRAPPING_PER_BOUNDARY as f64))
        })
        .map(|(rho, th)| annulus.map_to_original(rho, th))
        .collect();
    let t_end = TRAPPING_PERIODS * period;
    let runs = exec.map(&starts, |x0| -> Result<TrapRun> {
        let flow = if reversed {
            PlanarFlow::reversed(system, annulus.param)
        } else {
            PlanarFlow::new(system, annulus.param)
        };
        let mut run = TrapRun {
            escaped: false,
            escaped_raw: false,
            range: [f64::INFINITY, 0.0],
            raw_range: [f64::INFINITY, 0.0],
        };
        let outcome = integrate_until(&flow, x0, (0.0, t_end), Tolerances::default(), |_, x| {
            let (raw, theta) = annulus.to_raw_rescaled([x[0], x[1]]);
            let avg = annulus.radial.averaged(annulus.mu, raw, theta);
            run.range = [run.range[0].min(avg), run.range[1].max(avg)];
            run.raw_range = [run.raw_range[0].min(raw), run.raw_range[1].max(raw)];
            run.escaped |= !inside(avg);
            run.escaped_raw |= !inside(raw);
            run.escaped && run.escaped_raw
        });
        match outcome {
            Ok(_) => Ok(run),
            Err(Error::IntegrationFailure { .. }) => {
                run.escaped = true;
                run.escaped_raw = true;
                Ok(run)
            }
            Err(e) => Err(e),
        }
    });
    let mut out = TrappingResult {
        trajectories: starts.len(),
        escaped: 0,
        escaped_raw: 0,
        periods: TRAPPING_PERIODS,
        inflation: TRAPPING_INFLATION,
        time_direction: if reversed { -1 } else { 1 },
        min_rho: f64::INFINITY,
        max_rho: 0.0,
        raw_min_rho: f64::INFINITY,
        raw_max_rho: 0.0,
        passed: false,
    };
    for r in runs {
        let r = r?;
        out.escaped += r.escaped as usize;
        out.escaped_raw += r.escaped_raw as usize;
        out.min_rho = out.min_rho.min(r.range[0]);
        out.max_rho = out.max_rho.max(r.range[1]);
        out.raw_min_rho = out.raw_min_rho.min(r.raw_range[0]);
        out.raw_max_rho = out.raw_max_rho.max(r.raw_range[1]);
    }
    out.passed = out.escaped == 0;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        Self {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloquetSummary {
    /// Both multipliers as `[re, im]`, trivial first.
    pub multipliers: [[f64; 2]; 2],
    pub nontrivial_modulus: f64,
    pub trivial_multiplier_error: f64,
    pub liouville_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub param: f64,
    pub alpha: f64,
    pub mu: f64,
    pub orbit: Option<DetectedOrbit>,
    pub orbit_error: Option<ErrorInfo>,
    pub floquet: Option<FloquetSummary>,
    pub stability_observed: Option<Stability>,
    pub stability_consistent: Option<bool>,
    /// Fraction of orbit samples whose raw rescaled radius lies strictly
    /// inside the annulus.
    pub containment: Option<f64>,
    /// Same fraction using the averaged radius.
    pub containment_averaged: Option<f64>,
    /// Range of the averaged radius over the orbit.
    pub averaged_rho_range: Option<[f64; 2]>,
    pub trapping: TrappingResult,
    pub boundary_check: BoundarySignCheck,
    /// `|amplitude_measured - ρ0| / ρ0`.
    pub prediction_error: Option<f64>,
    /// `|mean averaged radius - ρ0| / ρ0`.
    pub averaged_prediction_error: Option<f64>,
    /// Canonical-radius error against the amplitude law, `|r_max - √|α| ρ0| / (√|α| ρ0)`.
    pub radius_error: Option<f64>,
    pub predicted_period: f64,
}

impl VerificationReport {
    pub fn orbit_found(&self) -> bool {
        self.orbit.is_some()
    }
}

pub fn verify(
    system: &ParametricPlanarSystem,
    hopf: &HopfData,
    param: f64,
    pred: &OrbitPrediction,
    annulus: &Annulus,
) -> Result<VerificationReport> {
    verify_with(system, hopf, param, pred, annulus, Exec::default())
}

pub fn verify_with(
    system: &ParametricPlanarSystem,
    hopf: &HopfData,
    param: f64,
    pred: &OrbitPrediction,
    annulus: &Annulus,
    exec: Exec,
) -> Result<VerificationReport> {
    if param != annulus.param {
        return Err(Error::InvalidArgument(format!(
            "annulus was built at {} but verification requested at {param}",
            annulus.param
        )));
    }
    let predicted_period = pred.period_estimate(hopf, param)?;
    let (orbit, orbit_error) = match detect_orbit(system, hopf, param, pred) {
        Ok(o) => (Some(o), None),
        Err(e @ Error::OrbitNotFound(_)) | Err(e @ Error::IntegrationFailure { .. }) => (None, Some(ErrorInfo::from(&e))),
        Err(e) => return Err(e),
    };
    let trapping = trapping_test(system, pred, annulus, predicted_period, exec)?;
    let boundary_check = boundary_sign_check(pred, annulus, ANNULUS_CURVE_POINTS);

    let mut report = VerificationReport {
        param,
        alpha: annulus.alpha,
        mu: annulus.mu,
        orbit: None,
        orbit_error,
        floquet: None,
        stability_observed: None,
        stability_consistent: None,
        containment: None,
        containment_averaged: None,
        averaged_rho_range: None,
        trapping,
        boundary_check,
        prediction_error: None,
        averaged_prediction_error: None,
        radius_error: None,
        predicted_period,
    };
    let Some(orbit) = orbit else {
        return Ok(report);
    };

    let m = monodromy_planar(system, orbit.point_on_orbit, param, orbit.period, Tolerances::tight())?;
    let nontrivial = m.nontrivial_multiplier();
    let one = nalgebra::Complex::new(1.0, 0.0);
    let mut mults = m.multipliers.clone();
    mults.sort_by(|a, b| (a - one).norm().partial_cmp(&(b - one).norm()).unwrap());
    report.floquet = Some(FloquetSummary {
        multipliers: [[mults[0].re, mults[0].im], [mults[1].re, mults[1].im]],
        nontrivial_modulus: nontrivial.norm(),
        trivial_multiplier_error: m.trivial_multiplier_error(),
        liouville_relative_error: m.liouville_relative_error(),
    });
    let observed = if nontrivial.norm() < 1.0 - STABILITY_MARGIN {
        Stability::Stable
    } else {
        Stability::Unstable
    };
    report.stability_observed = Some(observed);
    report.stability_consistent = pred.expected_stability().map(|s| s == observed);

    let polar: Vec<(f64, f64)> = orbit.samples[..ORBIT_SAMPLES]
        .iter()
        .map(|x| annulus.to_raw_rescaled(*x))
        .collect();
    let averaged: Vec<f64> = polar
        .iter()
        .map(|&(rho, theta)| annulus.radial.averaged(annulus.mu, rho, theta))
        .collect();
    let fraction = |rhos: &mut dyn Iterator<Item = f64>| {
        rhos.filter(|&r| annulus.contains_rescaled(r)).count() as f64 / ORBIT_SAMPLES as f64
    };
    report.containment = Some(fraction(&mut polar.iter().map(|p| p.0)));
    report.containment_averaged = Some(fraction(&mut averaged.iter().copied()));
    let lo = averaged.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = averaged.iter().copied().fold(0.0, f64::max);
    report.averaged_rho_range = Some([lo, hi]);
    let mean = averaged.iter().sum::<f64>() / ORBIT_SAMPLES as f64;
    report.averaged_prediction_error = Some((mean - annulus.rho0).abs() / annulus.rho0);
    report.prediction_error = Some((orbit.amplitude_measured - annulus.rho0).abs() / annulus.rho0);
    let r_pred = annulus.mu * annulus.rho0;
    report.radius_error = Some((orbit.radius_max - r_pred).abs() / r_pred);
    report.orbit = Some(orbit);
    Ok(report)
}

/// Tolerance on prediction-vs-measurement agreement at scale `μ`.
pub fn asymptotic_tolerance(mu: f64) -> f64 {
    (3.0 * mu).max(0.02)
}
