use std::f64::consts::PI;

use hopfavg::integrate::{find_crossings, integrate, PlanarFlow};
use hopfavg::models::{cubic_test_family, make_normal_form_family, normal_form_family};
use hopfavg::predict::boundary_sign_check;
use hopfavg::{
    average_k, build_annulus, cubic_normal_form, detect_orbit, locate_hopf, polar_coefficients, predict, verify,
    EpsilonChoice, EquilibriumBranch, HopfData, ParametricPlanarSystem, Stability, Tolerances, Verdict,
};

fn setup(sys: &ParametricPlanarSystem) -> (HopfData, f64) {
    let hopf = locate_hopf(sys, &EquilibriumBranch::of_system(sys, [0.0, 0.0]), (-0.5, 0.5)).unwrap();
    let k = average_k(&polar_coefficients(&cubic_normal_form(sys, &hopf).unwrap())).unwrap();
    (hopf, k)
}

#[test]
fn supercritical_k_and_hopf_data() {
    let sys = make_normal_form_family(-1.0, 1.0).unwrap();
    let (hopf, k) = setup(&sys);
    assert!(hopf.alpha0.abs() < 1e-12);
    assert!((hopf.gamma0 - 1.0).abs() < 1e-9 && (hopf.beta_prime - 1.0).abs() < 1e-6);
    assert!((k + 1.0).abs() < 1e-8);
}

#[test]
fn k_does_not_depend_on_rotation_speed() {
    let sys = make_normal_form_family(-1.0, 2.5).unwrap();
    let (hopf, k) = setup(&sys);
    assert!((hopf.gamma0 - 2.5).abs() < 1e-9);
    assert!((k + 1.0).abs() < 1e-8);
}

#[test]
fn orbit_radius_and_period_follow_square_root_law() {
    let sys = make_normal_form_family(-1.0, 1.0).unwrap();
    let (hopf, k) = setup(&sys);
    let pred = predict(k, &hopf);
    for alpha in [0.01, 0.04, 0.09] {
        let o = detect_orbit(&sys, &hopf, alpha, &pred).unwrap();
        assert!((o.radius_max - alpha.sqrt()).abs() < 1e-6);
        assert!((o.period - 2.0 * PI).abs() < 1e-6);
        assert!(o.closure_residual < 1e-8);
        assert_eq!(o.time_direction, 1);
    }
}

#[test]
fn verification_at_alpha_004() {
    let sys = make_normal_form_family(-1.0, 1.0).unwrap();
    let (hopf, k) = setup(&sys);
    let pred = predict(k, &hopf);
    let a = build_annulus(&pred, &hopf, 0.04, EpsilonChoice::Auto).unwrap();
    let r = verify(&sys, &hopf, 0.04, &pred, &a).unwrap();
    let f = r.floquet.unwrap();
    assert!((f.nontrivial_modulus - (-4.0 * PI * 0.04).exp()).abs() < 1e-3);
    assert!(f.trivial_multiplier_error < 5e-3);
    assert_eq!(r.containment, Some(1.0));
    assert!(r.trapping.passed);
    assert_eq!(r.stability_observed, Some(Stability::Stable));
    assert_eq!(r.stability_consistent, Some(true));
}

#[test]
fn subcritical_mirror_runs_backwards() {
    let sys = make_normal_form_family(1.0, 1.0).unwrap();
    let (hopf, k) = setup(&sys);
    assert!((k - 1.0).abs() < 1e-8);
    let pred = predict(k, &hopf);
    assert_eq!(pred.verdict, Verdict::SubcriticalUnstable);
    let a = build_annulus(&pred, &hopf, -0.04, EpsilonChoice::Auto).unwrap();
    let r = verify(&sys, &hopf, -0.04, &pred, &a).unwrap();
    let o = r.orbit.as_ref().unwrap();
    assert_eq!(o.time_direction, -1);
    assert!((o.radius_max - 0.2).abs() < 1e-6);
    assert_eq!(r.stability_observed, Some(Stability::Unstable));
    assert!(r.trapping.passed && r.trapping.time_direction == -1);
}

#[test]
fn consecutive_upward_crossings_are_one_period_apart() {
    let sys = make_normal_form_family(-1.0, 1.0).unwrap();
    let traj = integrate(&PlanarFlow::new(&sys, 0.04), &[0.2, 0.0], (0.0, 20.0), Tolerances::default()).unwrap();
    let c = find_crossings(&traj, &|x: &[f64]| x[1], 1);
    assert!(c.len() >= 2);
    for w in c.windows(2) {
        assert!((w[1].t_cross - w[0].t_cross - 2.0 * PI).abs() < 1e-3);
    }
}

#[test]
fn pure_cubic_field_amplitude() {
    let fam = cubic_test_family(1.0).unwrap();
    let sys = fam.system("cubic-test");
    let (hopf, k) = setup(&sys);
    assert!((k + 0.375).abs() < 1e-8);
    let pred = predict(k, &hopf);
    let expected = (8.0f64 * 0.03 / 3.0).sqrt();
    assert!((pred.amplitude(0.03).unwrap() - expected).abs() < 1e-12);
    // reference orbit by settling a long forward run onto the cycle
    let traj = integrate(&PlanarFlow::new(&sys, 0.03), &[0.1, 0.0], (0.0, 600.0), Tolerances::tight()).unwrap();
    let tail: Vec<f64> = traj
        .samples()
        .filter(|(t, _)| *t > 600.0 - 2.0 * PI)
        .map(|(_, x)| x[0].hypot(x[1]))
        .collect();
    let settled_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let o = detect_orbit(&sys, &hopf, 0.03, &pred).unwrap();
    assert!((o.radius_mean - expected).abs() / expected < 0.02);
    assert!((o.radius_mean - settled_mean).abs() / expected < 5e-3);
    let settled_max = tail.iter().cloned().fold(0.0, f64::max);
    assert!((o.radius_max - settled_max).abs() < 1e-4);
}

#[test]
fn boundary_rate_signs_for_supercritical_families() {
    for fam in [normal_form_family(-1.0, 1.0).unwrap(), cubic_test_family(1.0).unwrap()] {
        let sys = fam.system("f");
        let (hopf, k) = setup(&sys);
        let pred = predict(k, &hopf);
        for mu in [0.1f64, 0.2] {
            let a = build_annulus(&pred, &hopf, mu * mu, EpsilonChoice::Auto).unwrap();
            let b = boundary_sign_check(&pred, &a, 256);
            assert!(b.holds(), "{b:?}");
            assert!(b.inner_rate > 0.0 && b.outer_rate < 0.0);
        }
    }
}
