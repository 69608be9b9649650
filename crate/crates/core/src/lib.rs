//! Averaging-based analysis of planar Hopf bifurcations.
//!
//! Given a parameter-dependent planar field, the crate locates the Hopf point,
//! brings the field to canonical coordinates, computes the averaged cubic
//! coefficient `K`, predicts the amplitude and a trapping annulus of the
//! bifurcating orbit, and checks all of it against direct integration.
//!
//! ```
//! use hopfavg::{models, pipeline};
//!
//! let model = models::build_model("normal-form", &Default::default(), models::DEFAULT_SEED).unwrap();
//! let a = pipeline::characterize(&model, &Default::default()).unwrap();
//! assert!((a.prediction.k + 1.0).abs() < 1e-8);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod error;
pub mod hopf;
pub mod integrate;
pub mod linalg;
pub mod models;
pub mod par;
pub mod pipeline;
pub mod predict;
pub mod trig;
pub mod vectorfield;
pub mod verify;

pub use averaging::{average_k, polar_coefficients, AveragedSystem, PolarCoefficients};
pub use error::{Error, Result};
pub use hopf::{cubic_normal_form, find_equilibrium, locate_hopf, CubicNormalForm, EquilibriumBranch, HopfData};
pub use integrate::{integrate, monodromy, MonodromyResult, Tolerances, Trajectory};
pub use par::Exec;
pub use predict::{build_annulus, predict, Annulus, EpsilonChoice, OrbitPrediction, Stability, Verdict};
pub use trig::TrigPoly;
pub use vectorfield::{derivatives_at, DerivativeTensor, ParametricPlanarSystem, PeriodicSystem};
pub use verify::{detect_orbit, verify, DetectedOrbit, VerificationReport};
