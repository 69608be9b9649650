use hopfavg::models::{cubic_test_family, normal_form_family, random_suite, SyntheticHopfFamily, DEFAULT_SEED};
use hopfavg::predict::{boundary_sign_check, winding_number};
use hopfavg::verify::{trapping_test, TRAPPING_PERIODS};
use hopfavg::{
    average_k, build_annulus, cubic_normal_form, detect_orbit, locate_hopf, polar_coefficients, predict,
    Annulus,
    EpsilonChoice, EquilibriumBranch, Exec, HopfData, OrbitPrediction, ParametricPlanarSystem,
};

fn setup(fam: &SyntheticHopfFamily) -> (ParametricPlanarSystem, HopfData, OrbitPrediction) {
    let sys = fam.system("f");
    let hopf = locate_hopf(&sys, &EquilibriumBranch::of_system(&sys, [0.0, 0.0]), (-0.5, 0.5)).unwrap();
    let k = average_k(&polar_coefficients(&cubic_normal_form(&sys, &hopf).unwrap())).unwrap();
    let pred = predict(k, &hopf);
    (sys, hopf, pred)
}

// relative spread of the raw and averaged rescaled radius along the orbit
fn spreads(sys: &ParametricPlanarSystem, hopf: &HopfData, pred: &OrbitPrediction, alpha: f64) -> (f64, f64) {
    let a = build_annulus(pred, hopf, alpha, EpsilonChoice::Auto).unwrap();
    let o = detect_orbit(sys, hopf, alpha, pred).unwrap();
    let spread = |v: Vec<f64>| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(0.0, f64::max);
        (hi - lo) / a.rho0
    };
    let raw: Vec<f64> = o.samples.iter().map(|x| a.to_raw_rescaled(*x).0).collect();
    let avg: Vec<f64> = o.samples.iter().map(|x| a.to_rescaled(*x).0).collect();
    (spread(raw), spread(avg))
}

fn supercritical_random() -> SyntheticHopfFamily {
    random_suite(DEFAULT_SEED, 50)
        .into_iter()
        .find(|f| setup(f).2.k < -0.2)
        .unwrap()
}

#[test]
fn trapping_for_supercritical_families() {
    for fam in [normal_form_family(-1.0, 1.0).unwrap(), cubic_test_family(1.0).unwrap()] {
        let (sys, hopf, pred) = setup(&fam);
        for mu in [0.1f64, 0.2] {
            let a = build_annulus(&pred, &hopf, mu * mu, EpsilonChoice::Auto).unwrap();
            let period = pred.period_estimate(&hopf, mu * mu).unwrap();
            let t = trapping_test(&sys, &pred, &a, period, Exec::default()).unwrap();
            assert_eq!(t.trajectories, 32);
            assert_eq!(t.periods, TRAPPING_PERIODS);
            assert!(t.passed, "mu {mu}: {t:?}");
            assert!(boundary_sign_check(&pred, &a, 256).holds());
        }
    }
}

#[test]
fn correction_flattens_the_orbit() {
    let fam = supercritical_random();
    let (sys, hopf, pred) = setup(&fam);
    let (raw1, avg1) = spreads(&sys, &hopf, &pred, 0.04f64.powi(2));
    let (raw2, avg2) = spreads(&sys, &hopf, &pred, 0.02f64.powi(2));
    // raw radius oscillates at first order in μ, the averaged one at third
    let raw_ratio = raw1 / raw2;
    assert!((1.8..2.2).contains(&raw_ratio), "{raw_ratio}");
    assert!(avg1 / avg2 > 6.0, "{}", avg1 / avg2);
    assert!(avg1 < raw1 / 20.0);
}

fn check_round_trip(a: &Annulus) {
    for i in 0..64 {
        let rho = a.rho0 * (0.5 + i as f64 / 64.0);
        let theta = -3.1 + 0.097 * i as f64;
        let (r2, t2) = a.to_rescaled(a.map_to_original(rho, theta));
        assert!((rho - r2).abs() < 1e-10 * rho && (theta - t2).abs() < 1e-10);
    }
}

#[test]
fn averaged_coordinates_invert() {
    let fam = supercritical_random();
    let (_, hopf, pred) = setup(&fam);
    let a = build_annulus(&pred, &hopf, 0.01, EpsilonChoice::Auto).unwrap();
    check_round_trip(&a);
    let (inner, outer) = a.boundary_curves(256);
    assert_eq!(winding_number(&inner, a.center), 1);
    assert_eq!(winding_number(&outer, a.center), 1);
    // inner curve lies inside the outer one
    for x in &inner {
        assert!(a.to_rescaled(*x).0 < a.outer_r);
    }
}

#[test]
fn pure_rotation_families_need_no_correction() {
    let (_, hopf, pred) = setup(&normal_form_family(-1.0, 1.0).unwrap());
    let a = build_annulus(&pred, &hopf, 0.04, EpsilonChoice::Fixed(0.25)).unwrap();
    let x = a.map_to_original(a.outer_r, 1.3);
    assert!((x[0].hypot(x[1]) - 0.25).abs() < 1e-12);
    let (raw, _) = a.to_raw_rescaled(x);
    assert!((raw - a.to_rescaled(x).0).abs() < 1e-9);
}

#[test]
fn amplitude_scaling_consistency() {
    for fam in [normal_form_family(-1.0, 1.0).unwrap(), normal_form_family(1.0, 1.0).unwrap(), cubic_test_family(0.8).unwrap()] {
        let (_, hopf, pred) = setup(&fam);
        let side = pred.branch_side.unwrap().sign();
        for m in [0.01, 0.03, 0.05] {
            let alpha = side * m;
            assert!((pred.amplitude(alpha).unwrap() - m.sqrt() * pred.rho0.unwrap()).abs() < 1e-15);
            let a = build_annulus(&pred, &hopf, alpha, EpsilonChoice::Auto).unwrap();
            assert!((a.mu - m.sqrt()).abs() < 1e-12);
        }
    }
}

#[test]
fn large_offsets_leave_the_asymptotic_regime() {
    let (_, hopf, pred) = setup(&cubic_test_family(0.8).unwrap());
    let err = build_annulus(&pred, &hopf, 0.2, EpsilonChoice::Auto).unwrap_err();
    assert_eq!(err.code(), "outside-asymptotic-regime");
}
