mod common;

use crimedde::stability::{
    self, crossings, root_scan, unstable_root_count, CharacteristicCoefficients, EquilibriumId, Regime,
    RootLabel, ScanBox,
};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn criminal_free_crossing_at_the_figure_parameters() {
    let a = stability::analyze(EquilibriumId::CriminalFree, &common::autonomous(0.1, 2.0)).unwrap();
    assert_eq!(a.class.label, RootLabel::OneTransversalRoot);
    let x = a.crossings.get(2).unwrap();
    assert!((x.lambda2k - 0.41333).abs() < 1e-4);
    assert!(x.residual <= 1e-9);

    let w = x.lambda2k;
    let bx = ScanBox::new(-0.05, 0.05, w - 0.05, w + 0.05);
    let roots = root_scan(&a.coefficients, x.tauk, &bx).unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0] - Complex64::new(0.0, w)).norm() < 1e-8, "{roots:?}");
}

#[test]
fn root_scan_finds_the_real_saddle_root() {
    // the criminal-free state is a saddle: one real positive root for every delay
    let a = stability::analyze(EquilibriumId::CriminalFree, &common::autonomous(0.1, 2.0)).unwrap();
    for tau in [0.0, 1.0, 2.0, 5.0] {
        assert_eq!(unstable_root_count(&a.coefficients, tau).unwrap(), 1, "tau = {tau}");
    }
}

/// Coefficients stable at zero delay with `F(0) < 0`: the first crossing is a
/// destabilizing pair.
fn stable_then_unstable() -> impl Strategy<Value = CharacteristicCoefficients> {
    (0.2..3.0f64, 0.1..3.0f64, 0.0..1.5f64, 0.05..1.0f64).prop_filter_map(
        "needs stability at tau = 0 and F(0) < 0",
        |(damping, stiffness, sig2, push)| {
            // p(l) = l^2 + damping l + stiffness, |q(0)| exceeds p(0)
            let sig1 = stiffness + push;
            let c = CharacteristicCoefficients::new(-damping, stiffness, sig1, sig2);
            let stable0 = c.nu2 + c.sig1 > 0.0 && c.nu1 + c.sig2 < 0.0;
            (stable0 && c.f0 < -1e-6).then_some(c)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn crossing_delay_separates_root_counts(c in stable_then_unstable()) {
        let list = crossings(&c).unwrap();
        let x = *list.get(2).unwrap();
        prop_assert!(x.residual <= 1e-9);
        let v = stability::verdict(EquilibriumId::Coexistence, &c, &list);
        prop_assert_eq!(&v.regime, &Regime::StableUntil(x.tauk));
        let d = 1e-3 * x.tauk.max(1.0);
        if x.tauk > d {
            prop_assert_eq!(unstable_root_count(&c, x.tauk - d).unwrap(), 0);
        }
        prop_assert_eq!(unstable_root_count(&c, x.tauk + d).unwrap(), 2);
        let bx = ScanBox::new(-0.01, 0.01, x.lambda2k - 0.01, x.lambda2k + 0.01);
        let roots = root_scan(&c, x.tauk, &bx).unwrap();
        prop_assert_eq!(roots.len(), 1);
        prop_assert!((roots[0].im - x.lambda2k).abs() < 1e-8);
    }

    #[test]
    fn later_crossings_also_sit_on_the_axis(c in stable_then_unstable()) {
        let x = *crossings(&c).unwrap().get(2).unwrap();
        for tau in x.delays(3) {
            let r = c.p_eval(Complex64::new(0.0, x.lambda2k), tau).norm();
            prop_assert!(r <= 1e-9, "{}", r);
        }
    }
}
