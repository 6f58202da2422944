use crimedde::integrator::{convergence_order, integrate_system, DelaySystem, IntegratorConfig};
use crimedde::model::{HistoryFunction, StateVec};
use crimedde::Result;

/// `x'(t) = -x(t - 1)` in the first component, `x = 1` on `[-1, 0]`.
struct UnitDelayDecay;

impl DelaySystem for UnitDelayDecay {
    fn delay(&self) -> f64 {
        1.0
    }
    fn derivative(&self, _t: f64, _x: StateVec, d: StateVec) -> Result<StateVec> {
        Ok(StateVec::new(-d.n, 0.0))
    }
}

/// Method-of-steps solution `sum_{j=0}^{floor(t)+1} (-1)^j (t - j + 1)^j / j!`.
fn unit_delay_exact(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut fact = 1.0;
    for j in 0..=(t.floor() as i32 + 1) {
        if j > 0 {
            fact *= j as f64;
        }
        let base = t - j as f64 + 1.0;
        if base > 0.0 {
            sum += (-1.0f64).powi(j) * base.powi(j) / fact;
        }
    }
    sum
}

#[test]
fn closed_form_matches_piecewise_polynomials() {
    for &t in &[0.25, 0.5, 1.0, 1.5, 2.0] {
        let by_hand = if t <= 1.0 {
            1.0 - t
        } else {
            1.0 - t + (t - 1.0) * (t - 1.0) / 2.0
        };
        assert!((unit_delay_exact(t) - by_hand).abs() < 1e-15);
    }
}

#[test]
fn fourth_order_on_unit_delay() {
    let exact = |t: f64| StateVec::new(unit_delay_exact(t), 0.0);
    let report = convergence_order(
        &UnitDelayDecay,
        &HistoryFunction::constant(1.0, 0.0),
        8.0,
        &[1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
        Some(&exact),
    )
    .unwrap();
    if report.exact {
        // piecewise polynomial of degree <= 4 on each unit interval
        assert!(report.errors.iter().all(|&e| e < 1e-12));
    } else {
        let order = report.observed.unwrap();
        assert!((order - 4.0).abs() <= 0.3, "{report:?}");
        assert!(report.monotone);
    }
}

#[test]
fn first_two_intervals_to_round_off() {
    let traj = integrate_system(
        &UnitDelayDecay,
        &HistoryFunction::constant(1.0, 0.0),
        &IntegratorConfig::new(0.125, 2.0),
    )
    .unwrap();
    for i in 0..=64 {
        let t = 2.0 * i as f64 / 64.0;
        let x = traj.evaluate(t).unwrap();
        assert!((x.n - unit_delay_exact(t)).abs() < 1e-10, "t = {t}");
    }
}

/// `N' = N (1 - N)` with no delay.
struct Logistic;

impl DelaySystem for Logistic {
    fn delay(&self) -> f64 {
        0.0
    }
    fn derivative(&self, _t: f64, x: StateVec, _d: StateVec) -> Result<StateVec> {
        Ok(StateVec::new(x.n * (1.0 - x.n), 0.0))
    }
}

#[test]
fn fourth_order_on_logistic() {
    let n0 = 0.1;
    let exact = move |t: f64| StateVec::new(n0 / (n0 + (1.0 - n0) * (-t).exp()), 0.0);
    let report = convergence_order(
        &Logistic,
        &HistoryFunction::constant(n0, 0.0),
        10.0,
        &[0.2, 0.1, 0.05, 0.025],
        Some(&exact),
    )
    .unwrap();
    for o in &report.orders {
        assert!((o - 4.0).abs() < 0.3, "{report:?}");
    }
}

#[test]
fn richardson_without_exact_solution() {
    let report = convergence_order(
        &UnitDelayDecay,
        &HistoryFunction::constant(1.0, 0.0),
        8.5,
        &[0.5, 0.25, 0.125, 0.0625],
        None,
    )
    .unwrap();
    let order = report.observed.unwrap();
    assert!(order > 3.8, "{report:?}");
}
