//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{lyapunov_coefficient, rel_err};
use hopfavg::averaging::{average_k_detailed, averaged_periodic_predict, average_system, periodic_shooting};
use hopfavg::integrate::{integrate, monodromy, FnSystem};
use hopfavg::models::{
    cubic_test_family, full_3d_system, make_normal_form_family, normal_form_family, predator_prey_branch,
    random_family, random_suite, reduced_predator_prey, PredatorPreyParams, SyntheticHopfFamily, DEFAULT_SEED,
};
use hopfavg::pipeline::cylinder_slices;
use hopfavg::predict::boundary_sign_check;
use hopfavg::verify::{detect_orbit_seeded, trapping_test};
use hopfavg::{
    average_k, build_annulus, cubic_normal_form, derivatives_at, detect_orbit, locate_hopf, polar_coefficients,
    predict, verify, EpsilonChoice, EquilibriumBranch, Exec, HopfData, OrbitPrediction, ParametricPlanarSystem,
    PeriodicSystem, Stability, Tolerances, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K_TOL: f64 = 1e-8;
const K_EVALUATOR_TOL: f64 = 1e-10;
const AMPLITUDE_REL_TOL: f64 = 0.02;
const MULTIPLIER_TOL: f64 = 1e-3;
const ORACLE_REL_TOL: f64 = 1e-6;
const FIT_REL_TOL: f64 = 5e-3;
const HOPF_TOL: f64 = 1e-6;
const CLOSURE_TOL: f64 = 1e-8;
const RATIO_RANGE: (f64, f64) = (1.6, 2.4);
const CONSERVATION_TOL: f64 = 1e-6;
const SLICE_TOL: f64 = 1e-6;
const FRAME_TOL: f64 = 1e-9;
const LIOUVILLE_TOL: f64 = 1e-6;
const SCHWARZ_TOL: f64 = 1e-5;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Debug>(r: std::result::Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

fn synthetic(sys: &ParametricPlanarSystem) -> Result<(HopfData, OrbitPrediction), String> {
    let hopf = ok(locate_hopf(sys, &EquilibriumBranch::of_system(sys, [0.0, 0.0]), (-0.5, 0.5)))?;
    let k = ok(average_k(&polar_coefficients(&ok(cubic_normal_form(sys, &hopf))?)))?;
    let pred = predict(k, &hopf);
    Ok((hopf, pred))
}

fn normal_form_oracle() -> Outcome {
    let sys = ok(make_normal_form_family(-1.0, 1.0))?;
    let hopf = ok(locate_hopf(&sys, &EquilibriumBranch::of_system(&sys, [0.0, 0.0]), (-0.5, 0.5)))?;
    let k = ok(average_k_detailed(&polar_coefficients(&ok(cubic_normal_form(&sys, &hopf))?)))?;
    ensure((k.moments + 1.0).abs() < K_TOL, || format!("K = {}", k.moments))?;
    ensure(k.discrepancy() < K_EVALUATOR_TOL, || format!("evaluators differ by {:e}", k.discrepancy()))?;
    let pred = predict(k.moments, &hopf);
    let mut worst_amp = 0.0f64;
    let mut worst_mult = 0.0f64;
    for alpha in [0.01, 0.04, 0.09] {
        let annulus = ok(build_annulus(&pred, &hopf, alpha, EpsilonChoice::Auto))?;
        let r = ok(verify(&sys, &hopf, alpha, &pred, &annulus))?;
        let o = r.orbit.as_ref().ok_or("orbit not found")?;
        let f = r.floquet.as_ref().ok_or("no multipliers")?;
        worst_amp = worst_amp.max(rel_err(o.radius_max, alpha.sqrt()));
        worst_mult = worst_mult.max((f.nontrivial_modulus - (-4.0 * PI * alpha).exp()).abs());
    }
    ensure(worst_amp < AMPLITUDE_REL_TOL, || format!("amplitude error {worst_amp:e}"))?;
    ensure(worst_mult < MULTIPLIER_TOL, || format!("multiplier error {worst_mult:e}"))?;
    Ok(format!(
        "K = {:.12}, evaluator gap {:.1e}, amplitude err {:.1e}, multiplier err {:.1e}",
        k.moments,
        k.discrepancy(),
        worst_amp,
        worst_mult
    ))
}

fn subcritical_mirror() -> Outcome {
    let sys = ok(make_normal_form_family(1.0, 1.0))?;
    let (hopf, pred) = synthetic(&sys)?;
    ensure((pred.k - 1.0).abs() < K_TOL, || format!("K = {}", pred.k))?;
    ensure(pred.verdict == Verdict::SubcriticalUnstable, || format!("verdict {:?}", pred.verdict))?;
    let alpha = -0.04;
    let annulus = ok(build_annulus(&pred, &hopf, alpha, EpsilonChoice::Auto))?;
    let r = ok(verify(&sys, &hopf, alpha, &pred, &annulus))?;
    let o = r.orbit.as_ref().ok_or("orbit not found")?;
    ensure(o.time_direction == -1, || "orbit not found in reversed time".into())?;
    ensure(r.stability_observed == Some(Stability::Unstable), || {
        format!("observed {:?}", r.stability_observed)
    })?;
    Ok(format!(
        "K = {:.12}, orbit at alpha = {alpha} radius {:.6}, multiplier modulus {:.4}",
        pred.k,
        o.radius_max,
        r.floquet.as_ref().map_or(f64::NAN, |f| f.nontrivial_modulus)
    ))
}

fn lyapunov_equivalence() -> Outcome {
    let suite = random_suite(DEFAULT_SEED, 50);
    let mut worst = 0.0f64;
    let mut solved = Vec::new();
    for (i, fam) in suite.iter().enumerate() {
        ensure((0.5..=2.0).contains(&fam.gamma0), || format!("system {i}: gamma0 {}", fam.gamma0))?;
        let sys = fam.system("random");
        let (hopf, pred) = synthetic(&sys)?;
        let a = lyapunov_coefficient(fam);
        worst = worst.max(rel_err(pred.k, a));
        solved.push((fam, sys, hopf, pred, a));
    }
    ensure(worst < ORACLE_REL_TOL, || format!("worst relative error {worst:e}"))?;
    // amplitude extrapolated to μ → 0 must equal |a|^{-1/2}
    let mut fit_worst = 0.0f64;
    for (_, sys, hopf, pred, a) in solved.iter().filter(|s| s.4.abs() > 0.2).take(3) {
        let side = -a.signum();
        let scaled = |mu: f64| -> Result<f64, String> {
            Ok(ok(detect_orbit(sys, hopf, side * mu * mu, pred))?.section_radius / mu)
        };
        let (g1, g2) = (scaled(0.04)?, scaled(0.02)?);
        fit_worst = fit_worst.max(rel_err(2.0 * g2 - g1, a.abs().powf(-0.5)));
    }
    ensure(fit_worst < FIT_REL_TOL, || format!("oracle amplitude fit error {fit_worst:e}"))?;
    Ok(format!("50 systems, worst rel err {worst:.1e}; 3 amplitude fits, worst {fit_worst:.1e}"))
}

fn predator_prey_case() -> Outcome {
    let p = PredatorPreyParams::default();
    let sys = ok(reduced_predator_prey(&p))?;
    let hopf = ok(locate_hopf(&sys, &predator_prey_branch(&p), (2.5, 3.5)))?;
    let k_star = p.a + 2.0 * p.lambda();
    ensure((hopf.alpha0 - k_star).abs() < HOPF_TOL, || format!("k* = {}", hopf.alpha0))?;
    let gamma_expected = 1.0 / 3.0f64.sqrt();
    ensure((hopf.gamma0 - gamma_expected).abs() < HOPF_TOL, || format!("gamma0 = {}", hopf.gamma0))?;
    let k = ok(average_k(&polar_coefficients(&ok(cubic_normal_form(&sys, &hopf))?)))?;
    let pred = predict(k, &hopf);
    let annulus = ok(build_annulus(&pred, &hopf, 3.05, EpsilonChoice::Fixed(0.3)))?;
    let r = ok(verify(&sys, &hopf, 3.05, &pred, &annulus))?;
    let o = r.orbit.as_ref().ok_or("orbit not found")?;
    ensure(o.closure_residual < CLOSURE_TOL, || format!("closure {:e}", o.closure_residual))?;
    ensure(r.containment == Some(1.0), || format!("containment {:?}", r.containment))?;
    ensure(r.stability_consistent == Some(true), || {
        format!("K = {k}, observed {:?}", r.stability_observed)
    })?;
    Ok(format!(
        "k* = {:.9}, gamma0 = {:.9}, K = {k:.6}, closure {:.1e}, containment 1.0, {:?}",
        hopf.alpha0,
        hopf.gamma0,
        o.closure_residual,
        r.stability_observed.unwrap()
    ))
}

fn averaging_theorem() -> Outcome {
    let ps = ok(PeriodicSystem::new(1, 2.0 * PI, |t, x, _| vec![-x[0] + t.cos()]))?;
    let avg = ok(average_system(&ps))?;
    let pred = ok(averaged_periodic_predict(&ps, &avg, 0.1, &[0.3]))?;
    ensure(pred.y_star[0].abs() < 1e-10, || format!("y* = {}", pred.y_star[0]))?;
    ensure(pred.stability == Stability::Stable, || format!("{:?}", pred.stability))?;
    let mut dist = Vec::new();
    let mut worst_res = 0.0f64;
    for alpha in [0.1, 0.05, 0.025] {
        let sol = ok(periodic_shooting(&ps, alpha, &[0.5]))?;
        worst_res = worst_res.max(sol.residual);
        dist.push(sol.sup_distance(&[0.0]));
    }
    ensure(worst_res < CLOSURE_TOL, || format!("residual {worst_res:e}"))?;
    let ratios: Vec<f64> = dist.windows(2).map(|w| w[0] / w[1]).collect();
    ensure(ratios.iter().all(|r| (RATIO_RANGE.0..=RATIO_RANGE.1).contains(r)), || {
        format!("ratios {ratios:?}")
    })?;
    Ok(format!("residual {worst_res:.1e}, ratios {:.4} {:.4}", ratios[0], ratios[1]))
}

fn annulus_trapping() -> Outcome {
    let mut lines = Vec::new();
    for (name, fam) in [
        ("normal-form", ok(normal_form_family(-1.0, 1.0))?),
        ("cubic-test", ok(cubic_test_family(1.0))?),
    ] {
        let sys = fam.system(name);
        let (hopf, pred) = synthetic(&sys)?;
        ensure(pred.k < 0.0, || format!("{name}: K = {}", pred.k))?;
        for mu in [0.1f64, 0.2] {
            let alpha = mu * mu;
            let annulus = ok(build_annulus(&pred, &hopf, alpha, EpsilonChoice::Auto))?;
            let period = ok(pred.period_estimate(&hopf, alpha))?;
            let t = ok(trapping_test(&sys, &pred, &annulus, period, Exec::default()))?;
            let b = boundary_sign_check(&pred, &annulus, 256);
            ensure(t.trajectories == 32 && t.passed, || format!("{name} mu {mu}: {t:?}"))?;
            ensure(b.samples == 256 && b.holds(), || format!("{name} mu {mu}: {b:?}"))?;
            lines.push(format!("{name}@{mu}: 0/32 escaped (raw {})", t.escaped_raw));
        }
    }
    Ok(lines.join(", "))
}

fn cylinder_corollary() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let full = ok(full_3d_system(&PredatorPreyParams { k: 3.05, ..Default::default() }))?;
    let mut drift = 0.0f64;
    for _ in 0..5 {
        let x0 = [rng.gen_range(0.2..3.0), rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0)];
        let c0 = full.conserved(&x0);
        let tr = ok(integrate(&full, &x0, (0.0, 100.0), Tolerances::tight()))?;
        for (_, x) in tr.samples() {
            drift = drift.max(((full.conserved(x) - c0) / c0).abs());
        }
    }
    ensure(drift < CONSERVATION_TOL, || format!("conservation drift {drift:e}"))?;
    let cs = [0.0, 0.5, 1.0, 2.0];
    let rows = cylinder_slices(&PredatorPreyParams::default(), (2.5, 3.5), 0.05, &cs, Exec::default());
    let mut proj = 0.0f64;
    for row in &rows {
        ensure(row.error.is_none() && row.orbit_found, || format!("c = {}: {:?}", row.c, row.error))?;
        proj = proj.max(row.projection_error.unwrap()).max(row.invariant_drift.unwrap());
    }
    ensure(proj < SLICE_TOL, || format!("slice mismatch {proj:e}"))?;
    Ok(format!("drift {drift:.1e} over 100 time units, {} slices, worst mismatch {proj:.1e}", rows.len()))
}

fn schwarz_field(c: [f64; 6]) -> ParametricPlanarSystem {
    ParametricPlanarSystem::new("p", (-1.0, 1.0), move |x, a| {
        let (u, v) = (x[0], x[1]);
        [
            c[0] * u * u * v + c[1] * (u * v).sin() + a * u - v + c[2] * v * v * v,
            c[3] * (u + 0.5 * v).exp() + c[4] * u * v * v + c[5] * u.powi(3) * v,
        ]
    })
}

fn frame_invariance_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let fams: Vec<SyntheticHopfFamily> = (0..16).map(|_| random_family(&mut rng)).collect();

    let mut frame = 0.0f64;
    for fam in &fams {
        let sys = fam.system("f");
        let (hopf, _) = synthetic(&sys)?;
        let nf = ok(cubic_normal_form(&sys, &hopf))?;
        let k = ok(average_k(&polar_coefficients(&nf)))?;
        for _ in 0..8 {
            let phi = rng.gen_range(0.0..2.0 * PI);
            frame = frame.max((ok(average_k(&polar_coefficients(&nf.rotated(phi))))? - k).abs());
        }
    }
    ensure(frame < FRAME_TOL, || format!("rotation changed K by {frame:e}"))?;

    let mut schwarz = 0.0f64;
    for _ in 0..16 {
        let c: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let (x, y) = (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let sys = schwarz_field(c);
        let h = 1e-4;
        let d1 = |p: [f64; 2]| ok(derivatives_at(&sys, p, 0.2, 1));
        let d2 = ok(derivatives_at(&sys, [x, y], 0.2, 2))?;
        let d3 = ok(derivatives_at(&sys, [x, y], 0.2, 3))?;
        for comp in 0..2 {
            let xy = (d1([x, y + h])?.get(comp, &[0]) - d1([x, y - h])?.get(comp, &[0])) / (2.0 * h);
            let yx = (d1([x + h, y])?.get(comp, &[1]) - d1([x - h, y])?.get(comp, &[1])) / (2.0 * h);
            schwarz = schwarz.max((xy - yx).abs()).max((d2.get(comp, &[0, 1]) - xy).abs());
            let dense = d3.dense(comp);
            ensure(dense[0b001] == dense[0b010] && dense[0b010] == dense[0b100], || "xxy not symmetric".into())?;
            ensure(dense[0b011] == dense[0b101] && dense[0b101] == dense[0b110], || "xyy not symmetric".into())?;
        }
    }

    ensure(schwarz < SCHWARZ_TOL, || format!("mixed partials differ by {schwarz:e}"))?;

    let mut liouville = 0.0f64;
    for _ in 0..16 {
        let (a, b, eps) = (rng.gen_range(-0.5..0.5), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..0.8));
        let sys = FnSystem::new(2, move |t: f64, x: &[f64], dx: &mut [f64]| {
            dx[0] = a * x[0] - x[1] + eps * (t.cos() * x[0] * x[0] - x[0].powi(3));
            dx[1] = x[0] + b * x[1] * (1.0 + eps * t.sin()) - x[1].powi(3);
        });
        let period = rng.gen_range(0.5..8.0);
        let m = ok(monodromy(&sys, &[rng.gen_range(-1.0..1.0), 0.3], period, Tolerances::default()))?;
        liouville = liouville.max(m.liouville_relative_error());
    }
    ensure(liouville < LIOUVILLE_TOL, || format!("Liouville error {liouville:e}"))?;

    let mut shots = 0;
    for fam in &fams {
        let sys = fam.system("f");
        let (hopf, pred) = synthetic(&sys)?;
        if pred.k.abs() <= 0.1 {
            continue;
        }
        let alpha = -pred.k.signum() * 0.005;
        let Ok(first) = detect_orbit(&sys, &hopf, alpha, &pred) else {
            continue;
        };
        let again = ok(detect_orbit_seeded(&sys, &hopf, alpha, &pred, Some(first.section_radius)))?;
        ensure(again.iterations <= 1 && (again.section_radius - first.section_radius).abs() < 1e-10, || {
            format!("reseeded shooting moved: {} vs {}", again.section_radius, first.section_radius)
        })?;
        shots += 1;
    }
    ensure(shots >= 3, || format!("only {shots} orbits for the idempotence check"))?;
    Ok(format!("frame gap {frame:.1e}, Schwarz {schwarz:.1e}, Liouville {liouville:.1e}, {shots} idempotent orbits"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 normal-form oracle", Some(10), normal_form_oracle),
        ("2 subcritical mirror", Some(10), subcritical_mirror),
        ("3 Lyapunov-coefficient equivalence", Some(60), lyapunov_equivalence),
        ("4 predator-prey case study", Some(30), predator_prey_case),
        ("5 averaging theorem", Some(5), averaging_theorem),
        ("6 annulus trapping", Some(30), annulus_trapping),
        ("7 cylinder corollary", Some(60), cylinder_corollary),
        ("8 frame-invariance suite", None, frame_invariance_suite),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget.map(Duration::from_secs)) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("runtime {elapsed:.2?} over budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
