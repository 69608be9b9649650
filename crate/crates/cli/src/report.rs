use std::collections::BTreeMap;

use hopfavg::averaging::KEvaluation;
use hopfavg::hopf::HopfSummary;
use hopfavg::pipeline::{Analysis, OffsetResult, SliceResult};
use hopfavg::{CubicNormalForm, EpsilonChoice, OrbitPrediction, PolarCoefficients};
use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1.0.0";

/// Process exit status and its report label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Ok,
    OrbitNotFound,
    Degenerate,
    ConfigError,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::OrbitNotFound => 2,
            Outcome::Degenerate => 3,
            Outcome::ConfigError => 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportError {
    /// `run`, or `offset[i]` / `slice[i]` for per-item failures.
    pub scope: String,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Status {
    pub outcome: Outcome,
    pub exit_code: u8,
    pub errors: Vec<ReportError>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Software {
    pub name: &'static str,
    pub version: &'static str,
    pub parallel: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSection {
    pub id: String,
    pub bifurcation_param: String,
    pub values: BTreeMap<String, f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub param_bracket: [f64; 2],
    pub alpha_offsets: Vec<f64>,
    pub epsilon: EpsilonChoice,
    pub degeneracy_threshold: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub characterize_seconds: f64,
    pub verify_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub software: Software,
    pub status: Status,
    pub model: Option<ModelSection>,
    pub settings: Option<Settings>,
    pub hopf: Option<HopfSummary>,
    pub normal_form: Option<CubicNormalForm>,
    pub polar: Option<PolarCoefficients>,
    pub k: Option<KEvaluation>,
    pub prediction: Option<OrbitPrediction>,
    pub offsets: Vec<OffsetResult>,
    pub cylinder: Option<Vec<SliceResult>>,
    pub artifacts: Vec<String>,
    pub units: BTreeMap<&'static str, String>,
    pub provenance: BTreeMap<&'static str, &'static str>,
    /// Wall-clock measurements; the only part of a report that varies
    /// between identical runs.
    pub timings: Timings,
}

impl RunReport {
    pub fn new() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            software: Software {
                name: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                parallel: hopfavg::Exec::parallel_available(),
            },
            status: Status {
                outcome: Outcome::Ok,
                exit_code: 0,
                errors: Vec::new(),
            },
            model: None,
            settings: None,
            hopf: None,
            normal_form: None,
            polar: None,
            k: None,
            prediction: None,
            offsets: Vec::new(),
            cylinder: None,
            artifacts: Vec::new(),
            units: BTreeMap::new(),
            provenance: provenance(),
            timings: Timings::default(),
        }
    }

    pub fn fail(&mut self, outcome: Outcome, scope: &str, code: &str, message: String) {
        self.set_outcome(outcome);
        self.status.errors.push(ReportError {
            scope: scope.into(),
            code: code.into(),
            message,
        });
    }

    /// Keeps the most severe outcome: config error, then degenerate, then
    /// missing orbit.
    pub fn set_outcome(&mut self, outcome: Outcome) {
        let rank = |o: Outcome| match o {
            Outcome::Ok => 0,
            Outcome::OrbitNotFound => 1,
            Outcome::Degenerate => 2,
            Outcome::ConfigError => 3,
        };
        if rank(outcome) > rank(self.status.outcome) {
            self.status.outcome = outcome;
            self.status.exit_code = outcome.exit_code();
        }
    }

    pub fn absorb(&mut self, analysis: Analysis) {
        self.hopf = Some(analysis.hopf);
        self.normal_form = Some(analysis.normal_form);
        self.polar = Some(analysis.polar);
        self.k = Some(analysis.k);
        self.prediction = Some(analysis.prediction);
        self.offsets = analysis.offsets;
    }
}

pub fn units(param_unit: &str, state_unit: &str) -> BTreeMap<&'static str, String> {
    let s = state_unit;
    [
        ("hopf.alpha0", param_unit.to_string()),
        ("hopf.equilibrium", s.to_string()),
        ("hopf.gamma0", "rad/time".into()),
        ("hopf.beta_prime", format!("1/(time {param_unit})")),
        ("hopf.transform", "dimensionless".into()),
        ("normal_form.quad", format!("1/({s} time)")),
        ("normal_form.cubic", format!("1/({s}^2 time)")),
        ("polar.c3", format!("1/({s} time)")),
        ("polar.c4", format!("1/({s}^2 time)")),
        ("polar.d3", format!("rad/({s} time)")),
        ("k", format!("1/({s}^2 time)")),
        ("prediction.rho0", "rescaled radius (dimensionless)".into()),
        ("prediction.alpha0", param_unit.to_string()),
        ("offsets.param", param_unit.to_string()),
        ("offsets.annulus.center", s.to_string()),
        ("offsets.annulus.inner_r", "rescaled radius (dimensionless)".into()),
        ("offsets.annulus.outer_r", "rescaled radius (dimensionless)".into()),
        ("offsets.annulus.alpha", "1/time".into()),
        ("offsets.annulus.mu", "1/time^(1/2)".into()),
        ("offsets.verification.orbit.period", "time".into()),
        ("offsets.verification.orbit.radius_max", s.to_string()),
        ("offsets.verification.orbit.closure_residual", s.to_string()),
        ("offsets.verification.orbit.amplitude_measured", "rescaled radius (dimensionless)".into()),
        ("offsets.verification.floquet.multipliers", "dimensionless".into()),
        ("offsets.verification.containment", "fraction of orbit samples".into()),
        ("offsets.verification.trapping.periods", "predicted periods".into()),
        ("offsets.verification.prediction_error", "relative".into()),
        ("cylinder.period", "time".into()),
        ("cylinder.amplitude", s.to_string()),
        ("timings", "seconds".into()),
    ]
    .into_iter()
    .collect()
}

fn provenance() -> BTreeMap<&'static str, &'static str> {
    [
        ("hopf", "Hopf point: complex pair crossing the imaginary axis with nonzero speed"),
        ("normal_form", "canonical coordinates of the linear part, Taylor terms to third order"),
        ("polar", "polar form r' = a r + r^2 C3(th) + r^3 C4(th), th' = gamma0 + r D3(th)"),
        ("k", "averaged cubic coefficient K = <C4> - <C3 D3>/gamma0 (moments and quadrature)"),
        ("prediction", "amplitude law rho0 = |K|^(-1/2), orbit side and stability from sign(K)"),
        ("offsets.annulus", "trapping ring (1 -/+ eps) rho0 for the averaged radial rate mu a rho + mu^2 K rho^3"),
        ("offsets.verification.orbit", "periodic orbit by return-map shooting with closure check"),
        ("offsets.verification.floquet", "Floquet multipliers of the monodromy matrix"),
        ("offsets.verification.stability_observed", "orbital stability from the nontrivial multiplier"),
        ("offsets.verification.trapping", "boundary-seeded trajectories kept inside the inflated ring"),
        ("cylinder", "periodic orbits on the invariant surfaces x2 = c x1^rho, one per c"),
    ]
    .into_iter()
    .collect()
}
