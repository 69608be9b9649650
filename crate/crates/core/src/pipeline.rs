//! End-to-end analysis shared by the command-line tool and the tests.

use serde::Serialize;

use crate::averaging::{average_k_detailed, polar_coefficients, KEvaluation, PolarCoefficients};
use crate::error::{Error, Result};
use crate::hopf::{cubic_normal_form, locate_hopf, CubicNormalForm, HopfData, HopfSummary};
use crate::integrate::{integrate, Tolerances};
use crate::models::{full_3d_system, reduced_predator_prey, predator_prey_branch, BuiltModel, PredatorPreyParams};
use crate::par::Exec;
use crate::predict::{build_annulus, predict_with_threshold, Annulus, EpsilonChoice, OrbitPrediction, DEFAULT_DEGENERACY_THRESHOLD};
use crate::verify::{detect_orbit, verify_with, ErrorInfo, VerificationReport};

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub bracket: Option<(f64, f64)>,
    /// Offsets of the bifurcation parameter from its critical value.
    pub offsets: Vec<f64>,
    pub epsilon: EpsilonChoice,
    pub degeneracy_threshold: f64,
    pub exec: Exec,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            bracket: None,
            offsets: Vec::new(),
            epsilon: EpsilonChoice::Auto,
            degeneracy_threshold: DEFAULT_DEGENERACY_THRESHOLD,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OffsetResult {
    pub offset: f64,
    pub param: f64,
    pub annulus: Option<Annulus>,
    pub verification: Option<VerificationReport>,
    pub error: Option<ErrorInfo>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub hopf: HopfSummary,
    pub normal_form: CubicNormalForm,
    pub polar: PolarCoefficients,
    pub k: KEvaluation,
    pub prediction: OrbitPrediction,
    pub offsets: Vec<OffsetResult>,
    #[serde(skip)]
    pub hopf_data: HopfData,
}

impl Analysis {
    pub fn any_orbit_missing(&self) -> bool {
        self.offsets
            .iter()
            .any(|o| o.verification.as_ref().is_none_or(|v| !v.orbit_found()))
    }
}

/// Hopf point, normal form, `K` and prediction, without any verification.
pub fn characterize(model: &BuiltModel, opts: &AnalysisOptions) -> Result<Analysis> {
    let bracket = opts.bracket.unwrap_or(model.info.default_bracket);
    let hopf = locate_hopf(&model.system, &model.branch, bracket)?;
    let nf = cubic_normal_form(&model.system, &hopf)?;
    let polar = polar_coefficients(&nf);
    let k = average_k_detailed(&polar)?;
    if k.discrepancy() > 1e-10 * k.moments.abs().max(1.0) {
        return Err(Error::InternalConsistency(format!(
            "K evaluators disagree: moments {} vs quadrature {}",
            k.moments, k.simpson
        )));
    }
    let prediction = predict_with_threshold(k.moments, &hopf, opts.degeneracy_threshold);
    Ok(Analysis {
        hopf: hopf.summary(),
        normal_form: nf,
        polar,
        k,
        prediction,
        offsets: Vec::new(),
        hopf_data: hopf,
    })
}

/// Annulus and verification at one raw parameter value.
pub fn verify_at(model: &BuiltModel, analysis: &Analysis, param: f64, opts: &AnalysisOptions) -> OffsetResult {
    let hopf = &analysis.hopf_data;
    let mut out = OffsetResult {
        offset: param - hopf.alpha0,
        param,
        annulus: None,
        verification: None,
        error: None,
    };
    let annulus = match build_annulus(&analysis.prediction, hopf, param, opts.epsilon) {
        Ok(a) => a,
        Err(e) => {
            out.error = Some(ErrorInfo::from(&e));
            return out;
        }
    };
    match verify_with(&model.system, hopf, param, &analysis.prediction, &annulus, opts.exec) {
        Ok(v) => {
            out.error = v.orbit_error.clone();
            out.verification = Some(v);
        }
        Err(e) => out.error = Some(ErrorInfo::from(&e)),
    }
    out.annulus = Some(annulus);
    out
}

/// [`characterize`] followed by verification at every offset. A degenerate
/// `K` skips verification.
pub fn analyze(model: &BuiltModel, opts: &AnalysisOptions) -> Result<Analysis> {
    let mut analysis = characterize(model, opts)?;
    if analysis.prediction.is_degenerate() {
        return Ok(analysis);
    }
    let alpha0 = analysis.hopf_data.alpha0;
    let params: Vec<f64> = opts.offsets.iter().map(|o| alpha0 + o).collect();
    let results = opts.exec.map(&params, |&p| verify_at(model, &analysis, p, opts));
    analysis.offsets = results;
    Ok(analysis)
}

/// One invariant surface `x2 = c x1^ρ` of the three-dimensional model.
#[derive(Debug, Clone, Serialize)]
pub struct SliceResult {
    pub c: f64,
    pub k_star: f64,
    pub gamma0: f64,
    pub k_value: f64,
    pub orbit_found: bool,
    pub period: Option<f64>,
    pub amplitude: Option<f64>,
    /// Largest distance between the lifted 3D trajectory, projected to
    /// `(S, x1)`, and the planar orbit.
    pub projection_error: Option<f64>,
    /// Relative drift of `x2 / x1^ρ` over one period.
    pub invariant_drift: Option<f64>,
    pub error: Option<ErrorInfo>,
    /// Samples `(t, S, x1, x2)` of the 3D trajectory over one period.
    #[serde(skip)]
    pub orbit_3d: Vec<[f64; 4]>,
}

/// Orbits of the three-dimensional model at `k = k_star + offset`, one per
/// surface constant; together they sweep out the bifurcating cylinder.
pub fn cylinder_slices(
    base: &PredatorPreyParams,
    bracket: (f64, f64),
    offset: f64,
    cs: &[f64],
    exec: Exec,
) -> Vec<SliceResult> {
    exec.map(cs, |&c| {
        let p = base.with_c(c);
        let mut row = SliceResult {
            c,
            k_star: f64::NAN,
            gamma0: f64::NAN,
            k_value: f64::NAN,
            orbit_found: false,
            period: None,
            amplitude: None,
            projection_error: None,
            invariant_drift: None,
            error: None,
            orbit_3d: Vec::new(),
        };
        if let Err(e) = slice(&p, bracket, offset, &mut row) {
            row.error = Some(ErrorInfo::from(&e));
        }
        row
    })
}

fn slice(p: &PredatorPreyParams, bracket: (f64, f64), offset: f64, row: &mut SliceResult) -> Result<()> {
    let sys = reduced_predator_prey(p)?;
    let hopf = locate_hopf(&sys, &predator_prey_branch(p), bracket)?;
    row.k_star = hopf.alpha0;
    row.gamma0 = hopf.gamma0;
    let k_value = hopf.alpha0 + offset;
    row.k_value = k_value;
    let polar = polar_coefficients(&cubic_normal_form(&sys, &hopf)?);
    let pred = predict_with_threshold(crate::averaging::average_k(&polar)?, &hopf, DEFAULT_DEGENERACY_THRESHOLD);
    let orbit = detect_orbit(&sys, &hopf, k_value, &pred)?;
    row.orbit_found = true;
    row.period = Some(orbit.period);
    row.amplitude = Some(orbit.radius_max);

    let full = full_3d_system(&p.with_k(k_value))?;
    let x0 = full.lift(orbit.point_on_orbit[0], orbit.point_on_orbit[1], p.c);
    let c0 = full.conserved(&x0);
    let tr3 = integrate(&full, &x0, (0.0, orbit.period), Tolerances::tight())?;
    let n = orbit.samples.len() - 1;
    let mut err = 0.0f64;
    let mut drift = 0.0f64;
    for (i, x2d) in orbit.samples[..n].iter().enumerate() {
        let t = orbit.period * i as f64 / n as f64;
        let x3 = tr3.state_at(t);
        row.orbit_3d.push([t, x3[0], x3[1], x3[2]]);
        drift = drift.max((full.conserved(&x3) - c0).abs() / c0.abs().max(f64::MIN_POSITIVE));
        if orbit.time_direction > 0 {
            err = err.max((x3[0] - x2d[0]).hypot(x3[1] - x2d[1]));
        }
    }
    // orbits found in reversed time are traversed backwards by the forward
    // flow, so only the return to the start is compared
    if orbit.time_direction < 0 {
        let last = tr3.last_state();
        err = (last[0] - orbit.point_on_orbit[0]).hypot(last[1] - orbit.point_on_orbit[1]);
    }
    row.projection_error = Some(err);
    row.invariant_drift = Some(drift);
    Ok(())
}
