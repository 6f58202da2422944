use crimedde::integrator::{integrate, IntegratorConfig, PositivityMode};
use crimedde::model::{GrowthFunction, HistoryFunction, LawEnforcement, ModelParams, StateVec};
use proptest::prelude::*;

fn enforcement() -> impl Strategy<Value = LawEnforcement> {
    prop_oneof![
        (0.0..1.0f64).prop_map(|v| LawEnforcement::constant(v).unwrap()),
        (0.0..1.0f64, 0.5..6.0f64, 0.0..1.0f64).prop_map(|(frac, scale, offset)| {
            LawEnforcement::sinusoid(frac * offset, scale, offset).unwrap()
        }),
    ]
}

fn history(tau: f64) -> impl Strategy<Value = HistoryFunction> {
    prop_oneof![
        (0.01..2.0f64, 0.01..2.0f64).prop_map(|(n, c)| HistoryFunction::constant(n, c)),
        prop::collection::vec((0.0..2.0f64, 0.0..2.0f64), 3..8).prop_map(move |v| {
            let k = v.len() - 1;
            let times = (0..=k).map(|i| -tau + tau * i as f64 / k as f64).collect();
            let mut states: Vec<StateVec> = v.into_iter().map(|(n, c)| StateVec::new(n, c)).collect();
            let last = states[k];
            states[k] = StateVec::new(last.n.max(0.05), last.c.max(0.05));
            HistoryFunction::Sampled { times, states }
        }),
    ]
}

fn scenario() -> impl Strategy<Value = (ModelParams, HistoryFunction)> {
    (
        0.1..2.0f64,
        0.2..2.0f64,
        0.0..1.0f64,
        0.01..1.0f64,
        0.1..2.0f64,
        0.05..3.0f64,
        0.2..2.0f64,
        0.5..2.0f64,
        enforcement(),
    )
        .prop_flat_map(|(phi, nu, sigma_frac, eta, gamma, tau, mu, m, le)| {
            // histories and m stay below 2, so N never exceeds 2 and the
            // net enforcement term stays negative: no finite-time blow-up
            let sigma = sigma_frac * phi / (nu + 2.0);
            let p = ModelParams::new(
                phi,
                nu,
                sigma,
                eta,
                gamma,
                tau,
                GrowthFunction::logistic(mu, m).unwrap(),
                le,
            )
            .unwrap();
            (Just(p), history(tau))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn trajectories_stay_nonnegative((p, h) in scenario()) {
        let mut cfg = IntegratorConfig::new(0.01, 20.0);
        cfg.max_norm = 1e30;
        let traj = integrate(&p, &h, &cfg).unwrap();
        prop_assert!(traj.min_raw() >= -1e-10, "min {}", traj.min_raw());
        for (_, x) in traj.solution_nodes() {
            prop_assert!(x.n >= 0.0 && x.c >= 0.0);
        }
    }

    #[test]
    fn positive_start_stays_positive(n in 0.01..2.0f64, c in 0.01..2.0f64, tau in 0.0..3.0f64) {
        let mut p = ModelParams::new(
            1.0, 0.9, 0.4, 0.1, 1.4, tau,
            GrowthFunction::logistic(1.0, 1.0).unwrap(),
            LawEnforcement::constant(0.51).unwrap(),
        ).unwrap();
        p.tau = tau;
        let mut cfg = IntegratorConfig::new(0.05, 40.0);
        cfg.positivity = PositivityMode::Reject;
        let traj = integrate(&p, &HistoryFunction::constant(n, c), &cfg).unwrap();
        for (_, x) in traj.solution_nodes() {
            prop_assert!(x.n > 0.0 && x.c > 0.0);
        }
    }
}

#[test]
fn zero_criminals_stay_zero() {
    let p = ModelParams::new(
        1.0,
        0.9,
        0.4,
        0.1,
        1.4,
        2.0,
        GrowthFunction::logistic(1.0, 1.0).unwrap(),
        LawEnforcement::constant(0.51).unwrap(),
    )
    .unwrap();
    let history = HistoryFunction::Sampled {
        times: vec![-2.0, -1.0, 0.0],
        states: vec![StateVec::new(0.5, 0.0), StateVec::new(0.5, 0.0), StateVec::new(0.5, 0.0)],
    };
    match integrate(&p, &history, &IntegratorConfig::new(0.05, 30.0)) {
        Ok(traj) => {
            for (_, x) in traj.solution_nodes() {
                assert_eq!(x.c, 0.0);
            }
            assert!((traj.final_state().n - 1.0).abs() < 1e-6);
        }
        Err(e) => assert!(matches!(e, crimedde::Error::InvalidHistory(_)), "{e}"),
    }
}
