mod common;

use crimedde::integrator::{integrate, IntegratorConfig};
use crimedde::model::{exposed_population, HistoryFunction};

#[test]
fn exposed_derivative_is_contact_minus_recruitment() {
    let p = common::autonomous(0.1, 2.0);
    let traj = integrate(&p, &HistoryFunction::constant(1.5, 1.5), &IntegratorConfig::new(0.01, 12.0)).unwrap();
    let h = |t: f64| {
        let x = traj.evaluate(t).unwrap();
        x.n * x.c / (p.nu + x.n)
    };
    let mut previous = f64::INFINITY;
    for dt in [0.1, 0.05, 0.025] {
        let mut worst: f64 = 0.0;
        for &t in &[3.3, 5.1, 7.7, 10.2] {
            let fd = (exposed_population(&traj, &p, t + dt).unwrap() - exposed_population(&traj, &p, t - dt).unwrap())
                / (2.0 * dt);
            let rate = p.phi * h(t) - p.gamma * h(t - p.tau);
            worst = worst.max((fd - rate).abs());
        }
        // central differences are second order
        assert!(worst < previous / 3.0 || worst < 1e-9, "dt = {dt}: {worst} vs {previous}");
        previous = worst;
    }
    assert!(previous < 1e-3);
}

#[test]
fn no_exposure_without_delay() {
    let p = common::autonomous(0.1, 0.0);
    let traj = integrate(&p, &HistoryFunction::constant(1.5, 1.5), &IntegratorConfig::new(0.01, 5.0)).unwrap();
    assert_eq!(exposed_population(&traj, &p, 3.0).unwrap(), 0.0);
}
