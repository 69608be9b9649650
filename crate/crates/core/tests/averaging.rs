use std::f64::consts::PI;

use hopfavg::averaging::{average_system, averaged_periodic_predict, averaging_b_function, periodic_shooting, u1_hopf};
use hopfavg::{PeriodicSystem, Stability, TrigPoly};

fn forced(sign: f64, shift: f64) -> PeriodicSystem {
    PeriodicSystem::new(1, 2.0 * PI, move |t, x, _| vec![sign * x[0] + shift + t.cos()]).unwrap()
}

// x' = α(-x + cos t) has the periodic solution α(α cos t + sin t)/(1 + α²).
fn exact_periodic(alpha: f64, t: f64) -> f64 {
    alpha * (alpha * t.cos() + t.sin()) / (1.0 + alpha * alpha)
}

#[test]
fn linear_forced_prediction_and_solution() {
    let ps = forced(-1.0, 0.0);
    let avg = average_system(&ps).unwrap();
    for x in [-1.0, 0.0, 2.0] {
        assert!((avg.eval(&[x]).unwrap()[0] + x).abs() < 1e-9);
    }
    let pred = averaged_periodic_predict(&ps, &avg, 0.1, &[0.3]).unwrap();
    assert!(pred.y_star[0].abs() < 1e-10);
    assert_eq!(pred.stability, Stability::Stable);
    let sol = periodic_shooting(&ps, 0.1, &[0.5]).unwrap();
    assert!(sol.residual < 1e-8);
    assert!((sol.start[0] - exact_periodic(0.1, 0.0)).abs() < 1e-9);
    let amp = 0.1 / (1.0f64 + 0.01).sqrt();
    assert!((sol.sup_distance(&[0.0]) - amp).abs() < 1e-6);
    for i in 0..16 {
        let t = 2.0 * PI * i as f64 / 16.0;
        assert!((sol.trajectory.state_at(t)[0] - exact_periodic(0.1, t)).abs() < 1e-8);
    }
}

#[test]
fn distance_to_averaged_equilibrium_is_first_order() {
    let ps = forced(-1.0, 0.0);
    let d: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&a| periodic_shooting(&ps, a, &[0.0]).unwrap().sup_distance(&[0.0]))
        .collect();
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn nonlinear_forced_equation_is_first_order() {
    // x' = α(1 - x² + cos t): f0 = 1 - x², stable zero at 1
    let ps = PeriodicSystem::new(1, 2.0 * PI, |t, x, _| vec![1.0 - x[0] * x[0] + t.cos()]).unwrap();
    let avg = average_system(&ps).unwrap();
    let pred = averaged_periodic_predict(&ps, &avg, 0.05, &[0.8]).unwrap();
    assert!((pred.y_star[0] - 1.0).abs() < 1e-10);
    assert_eq!(pred.stability, Stability::Stable);
    let d: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&a| periodic_shooting(&ps, a, &[1.0]).unwrap().sup_distance(&[1.0]))
        .collect();
    for w in d.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn unstable_and_shifted_predictions() {
    let ps = forced(1.0, 0.0);
    let avg = average_system(&ps).unwrap();
    let p = averaged_periodic_predict(&ps, &avg, 0.1, &[0.2]).unwrap();
    assert_eq!(p.stability, Stability::Unstable);
    let ps = forced(-1.0, 1.0);
    let avg = average_system(&ps).unwrap();
    let p = averaged_periodic_predict(&ps, &avg, 0.1, &[0.0]).unwrap();
    assert!((p.y_star[0] - 1.0).abs() < 1e-10);
    assert_eq!(p.stability, Stability::Stable);
}

#[test]
fn two_dimensional_average() {
    // x' = α(-x + y cos² t), y' = α(-2y + sin t): f0 = (-x + y/2, -2y)
    let ps = PeriodicSystem::new(2, 2.0 * PI, |t, x, _| {
        vec![-x[0] + x[1] * t.cos().powi(2), -2.0 * x[1] + t.sin()]
    })
    .unwrap();
    let avg = average_system(&ps).unwrap();
    let f = avg.eval(&[0.4, 1.2]).unwrap();
    assert!((f[0] - (-0.4 + 0.6)).abs() < 1e-9 && (f[1] + 2.4).abs() < 1e-9);
    let p = averaged_periodic_predict(&ps, &avg, 0.05, &[1.0, 1.0]).unwrap();
    assert!(p.y_star.iter().all(|v| v.abs() < 1e-9));
    assert_eq!(p.stability, Stability::Stable);
}

#[test]
fn b_function_identity_on_samples() {
    let a = TrigPoly::cos().mul(&TrigPoly::sin()).add(&TrigPoly::cos().mul(&TrigPoly::cos()));
    for w in [1.0, -0.7, 2.5] {
        let bf = averaging_b_function(&a, w).unwrap();
        let db = bf.b.derivative();
        for i in 0..16 {
            let th = 2.0 * PI * i as f64 / 16.0;
            assert!((bf.b.eval(th) - bf.b.eval(th + 2.0 * PI)).abs() < 1e-10);
            assert!((a.eval(th) + w * db.eval(th) - bf.a_bar).abs() < 1e-12);
        }
        assert!(bf.b.eval(0.0).abs() < 1e-15);
        assert!((bf.a_bar - 0.5).abs() < 1e-15);
    }
}

#[test]
fn first_radial_solution() {
    assert_eq!(u1_hopf(2.0 * PI, 0.0, 1.0), 1.0);
    assert!((u1_hopf(2.0 * PI, 0.7, 0.7) - (2.0 * PI).exp()).abs() < 1e-10);
    assert_eq!(u1_hopf(0.0, 3.0, 0.2), 1.0);
}
