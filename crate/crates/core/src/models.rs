//! Model registry: synthetic Hopf families with known `K`, the reduced
//! two-predator/one-prey system and its three-dimensional parent.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopf::EquilibriumBranch;
use crate::integrate::{integrate, integrate_until, OdeSystem, Tolerances, Trajectory};
use crate::vectorfield::ParametricPlanarSystem;

pub const DEFAULT_SEED: u64 = 42;

/// Coordinates `(u, v)` with linear part `[[α, -γ0], [γ0, α]]` plus fixed
/// quadratic and cubic homogeneous terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticHopfFamily {
    /// `quad[c] = [u², uv, v²]`.
    pub quad: [[f64; 3]; 2],
    /// `cubic[c] = [u³, u²v, uv², v³]`.
    pub cubic: [[f64; 4]; 2],
    pub gamma0: f64,
    pub known_k: Option<f64>,
}

impl SyntheticHopfFamily {
    pub fn system(&self, label: &str) -> ParametricPlanarSystem {
        let (q, c, g0) = (self.quad, self.cubic, self.gamma0);
        ParametricPlanarSystem::new(label, (-1.0, 1.0), move |x, a| {
            let (u, v) = (x[0], x[1]);
            let qm = [u * u, u * v, v * v];
            let cm = [u * u * u, u * u * v, u * v * v, v * v * v];
            let nl = |k: usize| {
                q[k][0] * qm[0] + q[k][1] * qm[1] + q[k][2] * qm[2]
                    + c[k][0] * cm[0] + c[k][1] * cm[1] + c[k][2] * cm[2] + c[k][3] * cm[3]
            };
            [a * u - g0 * v + nl(0), g0 * u + a * v + nl(1)]
        })
        .with_equilibrium_branch(|_| [0.0, 0.0])
    }
}

/// `x' = αx - γ0 y + σ x r²`, `y' = γ0 x + α y + σ y r²`.
pub fn normal_form_family(sigma: f64, gamma0: f64) -> Result<SyntheticHopfFamily> {
    if !(gamma0 > 0.0) {
        return Err(Error::InvalidParameters(format!("gamma0 must be positive, got {gamma0}")));
    }
    Ok(SyntheticHopfFamily {
        quad: [[0.0; 3]; 2],
        cubic: [[sigma, 0.0, sigma, 0.0], [0.0, sigma, 0.0, sigma]],
        gamma0,
        known_k: Some(sigma),
    })
}

pub fn make_normal_form_family(sigma: f64, gamma0: f64) -> Result<ParametricPlanarSystem> {
    Ok(normal_form_family(sigma, gamma0)?.system("normal-form"))
}

/// Rotation plus a single `-u³` term in the first component; `K = -3/8`.
pub fn cubic_test_family(gamma0: f64) -> Result<SyntheticHopfFamily> {
    if !(gamma0 > 0.0) {
        return Err(Error::InvalidParameters(format!("gamma0 must be positive, got {gamma0}")));
    }
    Ok(SyntheticHopfFamily {
        quad: [[0.0; 3]; 2],
        cubic: [[-1.0, 0.0, 0.0, 0.0], [0.0; 4]],
        gamma0,
        known_k: Some(-0.375),
    })
}

/// Quadratic and cubic coefficients uniform on `[-1, 1]`, `γ0` uniform on `[0.5, 2]`.
pub fn random_family(rng: &mut impl Rng) -> SyntheticHopfFamily {
    let gamma0 = rng.gen_range(0.5..=2.0);
    let mut quad = [[0.0; 3]; 2];
    let mut cubic = [[0.0; 4]; 2];
    for c in 0..2 {
        for v in quad[c].iter_mut() {
            *v = rng.gen_range(-1.0..=1.0);
        }
        for v in cubic[c].iter_mut() {
            *v = rng.gen_range(-1.0..=1.0);
        }
    }
    SyntheticHopfFamily {
        quad,
        cubic,
        gamma0,
        known_k: None,
    }
}

/// The first `n` members of the seeded random suite.
pub fn random_suite(seed: u64, n: usize) -> Vec<SyntheticHopfFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_family(&mut rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredatorPreyParams {
    pub gamma: f64,
    pub k: f64,
    pub a: f64,
    pub m1: f64,
    pub d1: f64,
    pub rho: f64,
    pub c: f64,
}

impl Default for PredatorPreyParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            k: 3.0,
            a: 1.0,
            m1: 2.0,
            d1: 1.0,
            rho: 1.0,
            c: 1.0,
        }
    }
}

impl PredatorPreyParams {
    pub fn b(&self) -> f64 {
        self.m1 / self.d1
    }

    pub fn beta1(&self) -> f64 {
        self.m1 - self.d1
    }

    pub fn lambda(&self) -> f64 {
        self.a / (self.b() - 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("k", self.k),
            ("a", self.a),
            ("m1", self.m1),
            ("d1", self.d1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameters(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.b() > 1.0) {
            return Err(Error::InvalidParameters(format!("b = m1/d1 must exceed 1, got {}", self.b())));
        }
        let lambda = self.lambda();
        if !(lambda > 0.0 && lambda < self.k) {
            return Err(Error::InvalidParameters(format!(
                "need 0 < lambda < k, got lambda = {lambda}, k = {}",
                self.k
            )));
        }
        if !(self.rho >= 1.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameters(format!("rho must be at least 1, got {}", self.rho)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameters(format!("c must be nonnegative, got {}", self.c)));
        }
        Ok(())
    }

    /// `γ (a + λ)(k - λ) / (m1 k)`, the value of `x1 + ρ x2` on the equilibrium segment.
    pub fn segment_level(&self, k: f64) -> f64 {
        let l = self.lambda();
        self.gamma * (self.a + l) * (k - l) / (self.m1 * k)
    }

    pub fn with_k(&self, k: f64) -> Self {
        Self { k, ..*self }
    }

    pub fn with_c(&self, c: f64) -> Self {
        Self { c, ..*self }
    }
}

/// Positive root of `ξ + ρ c ξ^ρ = γ(a+λ)(k-λ)/(m1 k)`.
pub fn solve_xi1(p: &PredatorPreyParams) -> Result<f64> {
    let rhs = p.segment_level(p.k);
    if !(rhs > 0.0) {
        return Err(Error::NoCoexistence { rhs });
    }
    if p.c == 0.0 {
        return Ok(rhs);
    }
    let g = |x: f64| x + p.rho * p.c * x.powf(p.rho) - rhs;
    let dg = |x: f64| 1.0 + p.rho * p.rho * p.c * x.powf(p.rho - 1.0);
    // g is increasing and convex on x > 0, so Newton from x = rhs (where g >= 0)
    // decreases monotonically to the root.
    let mut x = rhs;
    for _ in 0..100 {
        let gx = g(x);
        if gx.abs() < 1e-14 * rhs.max(1.0) {
            return Ok(x);
        }
        let next = x - gx / dg(x);
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    if g(x).abs() < 1e-12 * rhs.max(1.0) {
        Ok(x)
    } else {
        Err(Error::InternalConsistency(format!("xi1 Newton stalled at {x}")))
    }
}

/// `S' = γS(1 - S/k) - (x1 + ρ c x1^ρ) m1 S/(a+S)`, `x1' = β1 x1 (S-λ)/(a+S)`,
/// with `k` as the parameter.
pub fn reduced_predator_prey(p: &PredatorPreyParams) -> Result<ParametricPlanarSystem> {
    p.validate()?;
    let q = *p;
    let lambda = q.lambda();
    let beta1 = q.beta1();
    let sys = ParametricPlanarSystem::new("predator-prey-2d", (lambda, f64::INFINITY), move |x, k| {
        let (s, x1) = (x[0], x[1]);
        let resp = q.m1 * s / (q.a + s);
        [
            q.gamma * s * (1.0 - s / k) - (x1 + q.rho * q.c * x1.powf(q.rho)) * resp,
            beta1 * x1 * (s - lambda) / (q.a + s),
        ]
    })
    .with_domain([(0.0, f64::INFINITY), (0.0, f64::INFINITY)])
    .with_equilibrium_branch(move |k| match solve_xi1(&q.with_k(k)) {
        Ok(xi) => [lambda, xi],
        Err(_) => [f64::NAN, f64::NAN],
    });
    Ok(sys)
}

/// The branch `k ↦ (λ, ξ1(c, k))` with errors preserved.
pub fn predator_prey_branch(p: &PredatorPreyParams) -> EquilibriumBranch {
    let q = *p;
    EquilibriumBranch::new(move |k| Ok([q.lambda(), solve_xi1(&q.with_k(k))?]))
}

/// The full model at fixed `k`: states `(S, x1, x2)` with `m2 = ρ m1`, `d2 = ρ d1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredatorPrey3d {
    pub params: PredatorPreyParams,
}

impl OdeSystem for PredatorPrey3d {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        let p = &self.params;
        let (s, x1, x2) = (x[0], x[1], x[2]);
        let resp = p.m1 * s / (p.a + s);
        let growth = p.beta1() * (s - p.lambda()) / (p.a + s);
        dx[0] = p.gamma * s * (1.0 - s / p.k) - (x1 + p.rho * x2) * resp;
        dx[1] = growth * x1;
        dx[2] = p.rho * growth * x2;
    }
}

impl PredatorPrey3d {
    /// `x2 / x1^ρ`, constant along trajectories.
    pub fn conserved(&self, x: &[f64]) -> f64 {
        x[2] / x[1].powf(self.params.rho)
    }

    /// Point of the equilibrium segment with first predator density `x1`.
    pub fn segment_point(&self, x1: f64) -> [f64; 3] {
        let p = &self.params;
        [p.lambda(), x1, (p.segment_level(p.k) - x1) / p.rho]
    }

    /// Lift a point of the `c`-slice to three dimensions.
    pub fn lift(&self, s: f64, x1: f64, c: f64) -> [f64; 3] {
        [s, x1, c * x1.powf(self.params.rho)]
    }
}

pub fn full_3d_system(p: &PredatorPreyParams) -> Result<PredatorPrey3d> {
    p.validate()?;
    Ok(PredatorPrey3d { params: *p })
}

/// Coordinates below this switch integration to logarithmic variables.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

struct LogCoordinates<'a, S: ?Sized> {
    inner: &'a S,
}

impl<S: OdeSystem + ?Sized> OdeSystem for LogCoordinates<'_, S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        self.inner.rhs(t, &x, dy);
        for (d, xi) in dy.iter_mut().zip(&x) {
            *d /= xi;
        }
    }
}

/// A trajectory that may continue in logarithmic coordinates.
#[derive(Debug, Clone)]
pub struct PositiveTrajectory {
    pub linear: Option<Trajectory>,
    pub log: Option<Trajectory>,
}

impl PositiveTrajectory {
    pub fn switched_at(&self) -> Option<f64> {
        self.log.as_ref().map(|l| l.t_start())
    }

    pub fn t_end(&self) -> f64 {
        match (&self.log, &self.linear) {
            (Some(l), _) => l.t_end(),
            (None, Some(l)) => l.t_end(),
            (None, None) => unreachable!("at least one segment"),
        }
    }

    pub fn state_at(&self, t: f64) -> Vec<f64> {
        match (&self.linear, &self.log) {
            (Some(lin), Some(log)) if t < log.t_start() => lin.state_at(t),
            (Some(lin), None) => lin.state_at(t),
            (_, Some(log)) => log.state_at(t).iter().map(|v| v.exp()).collect(),
            (None, None) => unreachable!("at least one segment"),
        }
    }

    pub fn last_state(&self) -> Vec<f64> {
        self.state_at(self.t_end())
    }
}

/// Integrate a system with positive state, moving to `ln x` coordinates once
/// any coordinate falls below [`POSITIVITY_FLOOR`].
pub fn integrate_positive<S: OdeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    t_span: (f64, f64),
    tol: Tolerances,
) -> Result<PositiveTrajectory> {
    if x0.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument(format!("initial state {x0:?} is not positive")));
    }
    let low = |x: &[f64]| x.iter().any(|v| *v < POSITIVITY_FLOOR);
    let (linear, t_switch, x_switch) = if low(x0) {
        (None, t_span.0, x0.to_vec())
    } else {
        let tr = integrate_until(sys, x0, t_span, tol, |_, x| low(x))?;
        if tr.t_end() >= t_span.1 {
            return Ok(PositiveTrajectory {
                linear: Some(tr),
                log: None,
            });
        }
        // the step that crossed the floor may have left the positive cone;
        // restart from the last sample that is still inside it
        let i = (0..tr.len())
            .rev()
            .find(|&i| tr.state(i).iter().all(|v| *v > 0.0))
            .unwrap_or(0);
        let (t, x) = (tr.times()[i], tr.state(i).to_vec());
        (Some(tr), t, x)
    };
    let y0: Vec<f64> = x_switch.iter().map(|v| v.ln()).collect();
    let log = integrate(&LogCoordinates { inner: sys }, &y0, (t_switch, t_span.1), tol)?;
    Ok(PositiveTrajectory { linear, log: Some(log) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub unit: String,
    pub default: f64,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub id: String,
    pub description: String,
    pub bifurcation_param: String,
    pub bifurcation_unit: String,
    pub params: Vec<ParamSpec>,
    pub default_bracket: (f64, f64),
    /// Offsets of the bifurcation parameter from its critical value.
    pub default_offsets: Vec<f64>,
    pub uses_seed: bool,
}

fn spec(name: &str, unit: &str, default: f64, description: &str) -> ParamSpec {
    ParamSpec {
        name: name.into(),
        unit: unit.into(),
        default,
        description: description.into(),
    }
}

fn predator_prey_specs() -> Vec<ParamSpec> {
    let d = PredatorPreyParams::default();
    vec![
        spec("gamma", "1/time", d.gamma, "intrinsic growth rate of the prey"),
        spec("k", "biomass", d.k, "carrying capacity (base value; the bifurcation parameter)"),
        spec("a", "biomass", d.a, "semi-saturation constant shared by both predators"),
        spec("m1", "1/time", d.m1, "maximal birth rate of predator 1"),
        spec("d1", "1/time", d.d1, "death rate of predator 1"),
        spec("rho", "dimensionless", d.rho, "ratio m2/m1 = d2/d1"),
        spec("c", "biomass^(1-rho)", d.c, "invariant-surface constant x2 = c x1^rho"),
    ]
}

/// All registered models, in listing order.
pub fn registry() -> Vec<ModelInfo> {
    let nf = vec![
        spec("sigma", "1/(state^2 time)", -1.0, "cubic coefficient: -1 supercritical, +1 subcritical, 0 degenerate"),
        spec("gamma0", "rad/time", 1.0, "rotation frequency"),
    ];
    vec![
        ModelInfo {
            id: "normal-form".into(),
            description: "radially symmetric Hopf normal form, K = sigma".into(),
            bifurcation_param: "alpha".into(),
            bifurcation_unit: "1/time".into(),
            params: nf,
            default_bracket: (-0.5, 0.5),
            default_offsets: vec![0.01, 0.04, 0.09],
            uses_seed: false,
        },
        ModelInfo {
            id: "cubic-test".into(),
            description: "rotation plus a single -u^3 term, K = -3/8".into(),
            bifurcation_param: "alpha".into(),
            bifurcation_unit: "1/time".into(),
            params: vec![spec("gamma0", "rad/time", 1.0, "rotation frequency")],
            default_bracket: (-0.5, 0.5),
            default_offsets: vec![0.03],
            uses_seed: false,
        },
        ModelInfo {
            id: "quad-cubic-random".into(),
            description: "seeded random quadratic+cubic terms on a rotation, gamma0 in [0.5, 2]".into(),
            bifurcation_param: "alpha".into(),
            bifurcation_unit: "1/time".into(),
            params: vec![spec("index", "count", 1.0, "member of the seeded suite")],
            default_bracket: (-0.5, 0.5),
            default_offsets: vec![0.005],
            uses_seed: true,
        },
        ModelInfo {
            id: "predator-prey-2d".into(),
            description: "two-predator/one-prey model reduced to the surface x2 = c x1^rho".into(),
            bifurcation_param: "k".into(),
            bifurcation_unit: "biomass".into(),
            params: predator_prey_specs(),
            default_bracket: (2.5, 3.5),
            default_offsets: vec![0.05],
            uses_seed: false,
        },
        ModelInfo {
            id: "predator-prey-3d".into(),
            description: "full two-predator/one-prey model; analysed slice by slice over c".into(),
            bifurcation_param: "k".into(),
            bifurcation_unit: "biomass".into(),
            params: predator_prey_specs(),
            default_bracket: (2.5, 3.5),
            default_offsets: vec![0.05],
            uses_seed: false,
        },
    ]
}

pub fn model_info(id: &str) -> Result<ModelInfo> {
    registry()
        .into_iter()
        .find(|m| m.id == id)
        .ok_or_else(|| Error::UnknownModel(id.into()))
}

/// A registered model instantiated with concrete parameters.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub info: ModelInfo,
    pub values: BTreeMap<String, f64>,
    pub system: ParametricPlanarSystem,
    pub branch: EquilibriumBranch,
    pub known_k: Option<f64>,
    pub predator_prey: Option<PredatorPreyParams>,
    pub synthetic: Option<SyntheticHopfFamily>,
    pub seed: Option<u64>,
}

pub fn build_model(id: &str, overrides: &BTreeMap<String, f64>, seed: u64) -> Result<BuiltModel> {
    let info = model_info(id)?;
    let mut values: BTreeMap<String, f64> = info.params.iter().map(|p| (p.name.clone(), p.default)).collect();
    for (name, v) in overrides {
        if !values.contains_key(name) {
            return Err(Error::InvalidArgument(format!("model `{id}` has no parameter `{name}`")));
        }
        if !v.is_finite() {
            return Err(Error::InvalidParameters(format!("{name} must be finite")));
        }
        values.insert(name.clone(), *v);
    }
    let synthetic = |fam: SyntheticHopfFamily, seed: Option<u64>| {
        let system = fam.system(id);
        BuiltModel {
            branch: EquilibriumBranch::of_system(&system, [0.0, 0.0]),
            info: info.clone(),
            values: values.clone(),
            system,
            known_k: fam.known_k,
            predator_prey: None,
            synthetic: Some(fam),
            seed,
        }
    };
    match id {
        "normal-form" => {
            let sigma = values["sigma"];
            if !(-1.0..=1.0).contains(&sigma) {
                return Err(Error::InvalidParameters(format!("sigma must lie in [-1, 1], got {sigma}")));
            }
            Ok(synthetic(normal_form_family(sigma, values["gamma0"])?, None))
        }
        "cubic-test" => Ok(synthetic(cubic_test_family(values["gamma0"])?, None)),
        "quad-cubic-random" => {
            let index = values["index"];
            if !(index >= 0.0 && index.fract() == 0.0 && index < 1e6) {
                return Err(Error::InvalidParameters(format!("index must be a small nonnegative integer, got {index}")));
            }
            let fam = random_suite(seed, index as usize + 1).pop().expect("nonempty suite");
            Ok(synthetic(fam, Some(seed)))
        }
        _ => {
            let p = PredatorPreyParams {
                gamma: values["gamma"],
                k: values["k"],
                a: values["a"],
                m1: values["m1"],
                d1: values["d1"],
                rho: values["rho"],
                c: values["c"],
            };
            let system = reduced_predator_prey(&p)?;
            Ok(BuiltModel {
                info: info.clone(),
                values: values.clone(),
                branch: predator_prey_branch(&p),
                system,
                known_k: None,
                predator_prey: Some(p),
                synthetic: None,
                seed: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypothesis_enforced() {
        let ok = PredatorPreyParams::default();
        assert!(ok.validate().is_ok());
        assert_eq!(ok.lambda(), 1.0);
        for bad in [
            PredatorPreyParams { m1: 0.5, ..ok },
            PredatorPreyParams { k: 0.9, ..ok },
            PredatorPreyParams { rho: 0.5, ..ok },
            PredatorPreyParams { c: -1.0, ..ok },
            PredatorPreyParams { gamma: 0.0, ..ok },
        ] {
            assert_eq!(bad.validate().unwrap_err().code(), "invalid-parameters");
            assert!(reduced_predator_prey(&bad).is_err());
            assert!(full_3d_system(&bad).is_err());
        }
    }

    #[test]
    fn xi1_closed_forms() {
        let p = PredatorPreyParams { c: 0.0, ..Default::default() };
        assert_eq!(solve_xi1(&p).unwrap(), 2.0 / 3.0);
        let p = PredatorPreyParams::default();
        assert!((solve_xi1(&p).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn xi1_quadratic() {
        let p = PredatorPreyParams { rho: 2.0, ..Default::default() };
        let xi = solve_xi1(&p).unwrap();
        let root = (-1.0 + (1.0f64 + 16.0 / 3.0).sqrt()) / 4.0;
        assert!((xi - root).abs() < 1e-13, "{xi} vs {root}");
    }

    #[test]
    fn xi1_requires_coexistence() {
        let p = PredatorPreyParams { k: 0.5, ..Default::default() };
        assert_eq!(solve_xi1(&p).unwrap_err().code(), "no-coexistence");
    }

    #[test]
    fn xi1_increases_with_k() {
        let p = PredatorPreyParams { rho: 1.5, c: 0.7, ..Default::default() };
        let mut prev = 0.0;
        for i in 1..40 {
            let xi = solve_xi1(&p.with_k(1.0 + 0.25 * i as f64)).unwrap();
            assert!(xi > prev);
            prev = xi;
        }
    }

    #[test]
    fn reduced_equilibria() {
        for (c, xi) in [(0.0, 2.0 / 3.0), (1.0, 1.0 / 3.0)] {
            let p = PredatorPreyParams { c, ..Default::default() };
            let s = reduced_predator_prey(&p).unwrap();
            let x = crate::hopf::find_equilibrium(&s, [0.9, 0.5], 3.0).unwrap();
            assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - xi).abs() < 1e-12);
            let f = s.eval(s.equilibrium_branch().unwrap()(3.0), 3.0);
            assert!(f[0].abs() < 1e-14 && f[1].abs() < 1e-14);
        }
    }

    #[test]
    fn segment_is_stationary() {
        let m = full_3d_system(&PredatorPreyParams::default()).unwrap();
        let x = m.segment_point(0.2);
        let mut dx = [0.0; 3];
        m.rhs(0.0, &x, &mut dx);
        assert!(dx.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn registry_lists_five_models() {
        let ids: Vec<String> = registry().into_iter().map(|m| m.id).collect();
        assert_eq!(ids, ["normal-form", "cubic-test", "quad-cubic-random", "predator-prey-2d", "predator-prey-3d"]);
        assert!(model_info("predator-prey-2d").unwrap().params.iter().all(|p| !p.unit.is_empty()));
        assert_eq!(model_info("nope").unwrap_err().code(), "unknown-model");
    }

    #[test]
    fn build_rejects_unknown_parameter() {
        let mut o = BTreeMap::new();
        o.insert("bogus".to_string(), 1.0);
        assert_eq!(build_model("normal-form", &o, DEFAULT_SEED).unwrap_err().code(), "invalid-argument");
    }

    #[test]
    fn random_suite_is_reproducible() {
        assert_eq!(random_suite(7, 5), random_suite(7, 5));
        assert_ne!(random_suite(7, 1), random_suite(8, 1));
        for f in random_suite(DEFAULT_SEED, 50) {
            assert!((0.5..=2.0).contains(&f.gamma0));
        }
    }

    #[test]
    fn positivity_switch() {
        // x' = -50 x reaches the floor well before t = 1
        let sys = crate::integrate::FnSystem::new(1, |_, x: &[f64], dx: &mut [f64]| dx[0] = -50.0 * x[0]);
        let tr = integrate_positive(&sys, &[1.0], (0.0, 1.0), Tolerances::new(1e-20, 1e-9)).unwrap();
        assert!(tr.switched_at().is_some());
        let x = tr.last_state()[0];
        assert!(x > 0.0);
        assert!(((x.ln() + 50.0) / 50.0).abs() < 1e-6);
    }
}
