//! Delay-dependent linear stability of the equilibria.
//!
//! Linearizing at an equilibrium gives `z' = A z + B z(t - tau)` with a
//! singular `B`, whose characteristic function is
//!
//! ```text
//! P(lambda, tau) = lambda^2 - nu1 lambda + nu2 + (sig1 - sig2 lambda) e^{-lambda tau}.
//! ```
//!
//! Purely imaginary roots `i s` exist exactly when `s` is a positive root of
//! `F(s) = s^4 + h s^2 + F(0)`; [`classify_F`] sorts `(h, F(0))` into the
//! possible root configurations, [`crossings`] computes the first delay at which
//! each root sits on the axis and [`verdict`] combines both with stability at
//! `tau = 0`. [`root_scan`] is an independent argument-principle root finder
//! used to cross-check all of the above.

mod classify;
mod crossing;
mod linear;
mod scan;
mod verdict;

use serde::Serialize;

pub use classify::{classify_F, classify_hf, RootClass, RootLabel, EPS_CLS};
pub use crossing::{crossings, Crossing, CrossingList};
pub use linear::{characteristic_coeffs, linearize, CharacteristicCoefficients, Matrix2};
pub use scan::{count_roots, rhp_bound, root_scan, unstable_root_count, ScanBox};
pub use verdict::{tau_zero_stable, verdict, EquilibriumId, Regime, StabilityVerdict};

use crate::equilibria::{self, Admissibility};
use crate::error::{Error, Result};
use crate::model::{ModelParams, StateVec};

/// Everything known about one equilibrium's linear stability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicAnalysis {
    pub equilibrium: EquilibriumId,
    pub point: StateVec,
    pub a: Matrix2,
    pub b: Matrix2,
    pub coefficients: CharacteristicCoefficients,
    pub class: RootClass,
    pub crossings: CrossingList,
    pub verdict: StabilityVerdict,
}

/// Linearizes at the requested equilibrium and runs the full pipeline.
pub fn analyze(id: EquilibriumId, p: &ModelParams) -> Result<CharacteristicAnalysis> {
    let set = equilibria::equilibria(p)?;
    let point = match id {
        EquilibriumId::Trivial => set.trivial,
        EquilibriumId::CriminalFree => set.criminal_free,
        EquilibriumId::Coexistence => set.coexistence.point.ok_or_else(|| {
            Error::NotApplicable(format!("no coexistence equilibrium: {:?}", set.coexistence.class))
        })?,
    };
    let (a, b) = linearize(point, p)?;
    let coefficients = characteristic_coeffs(&a, &b)?;
    let class = classify_F(&coefficients);
    let crossings = crossings(&coefficients)?;
    let mut verdict = verdict(id, &coefficients, &crossings);
    match id {
        EquilibriumId::CriminalFree => criminal_free_notes(p, point, &mut verdict)?,
        EquilibriumId::Coexistence => {
            if let Admissibility::Inadmissible(reason) = &set.coexistence.class {
                verdict.notes.push(format!("coexistence point is inadmissible: {reason}"));
            }
            coexistence_notes(p, point, &coefficients, &set.coexistence.class, &mut verdict)?;
        }
        EquilibriumId::Trivial => {}
    }
    Ok(CharacteristicAnalysis {
        equilibrium: id,
        point,
        a,
        b,
        coefficients,
        class,
        crossings,
        verdict,
    })
}

/// Analyses of the three equilibria; a missing coexistence point is skipped.
pub fn analyze_all(p: &ModelParams) -> Result<Vec<CharacteristicAnalysis>> {
    let mut out = Vec::with_capacity(3);
    for id in [EquilibriumId::Trivial, EquilibriumId::CriminalFree, EquilibriumId::Coexistence] {
        match analyze(id, p) {
            Ok(a) => out.push(a),
            Err(Error::NotApplicable(_)) if id == EquilibriumId::Coexistence => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `N_dag (gamma - e) - nu e`: positive means the criminal-free state is
/// unstable for every delay, negative means stable for every delay.
pub fn criminal_free_threshold(p: &ModelParams) -> Result<f64> {
    let e = p.eta + p.frozen_enforcement()?;
    let n_dag = equilibria::criminal_free_level(&p.growth)?;
    Ok(n_dag * (p.gamma - e) - p.nu * e)
}

fn criminal_free_notes(p: &ModelParams, point: StateVec, v: &mut StabilityVerdict) -> Result<()> {
    let t = criminal_free_threshold(p)?;
    let expected = if t.abs() <= 1e-12 {
        v.notes.push("inconclusive near threshold: N_dag (gamma - e) = nu e".into());
        None
    } else if t > 0.0 {
        Some(Regime::UnstableAllTau)
    } else {
        Some(Regime::StableAllTau)
    };
    v.notes.push(format!(
        "threshold N_dag (gamma - e) - nu e = {t:.6e} at N_dag = {}",
        point.n
    ));
    if let Some(r) = expected {
        if r != v.regime {
            v.notes.push(format!(
                "threshold predicts {} but the root analysis gives {}",
                r.label(),
                v.regime.label()
            ));
        }
    }
    Ok(())
}

fn coexistence_notes(
    p: &ModelParams,
    x: StateVec,
    c: &CharacteristicCoefficients,
    class: &Admissibility,
    v: &mut StabilityVerdict,
) -> Result<()> {
    let e = p.eta + p.frozen_enforcement()?;
    let s = p.nu + x.n;
    let df = p.growth.derivative(x.n);
    let g = p.phi / s;
    let dg = -p.phi / (s * s);
    let triangle = 2.0 * x.n * df + x.c / s * (p.phi / p.gamma * (p.gamma + e) - p.sigma * p.nu);
    let primed = df < x.c * dg;
    let unprimed = df < x.c * g;
    v.notes.push(format!(
        "f'(N) < C g_phi'(N): {primed}; f'(N) < C g_phi(N): {unprimed}; triangle condition: {triangle:.6e} > 0 is {}",
        triangle > 0.0
    ));
    v.notes.push(format!(
        "b - c = {:.6e} (negative exactly when the triangle condition holds)",
        c.nu2 - c.sig1
    ));
    let case = match class {
        Admissibility::CaseI if primed && triangle <= 0.0 => Some("a: asymptotically stable for small delays"),
        Admissibility::CaseI if triangle > 0.0 && unprimed => {
            Some("c: stable below the critical delay, unstable above it")
        }
        Admissibility::CaseI if triangle > 0.0 && primed => {
            Some("c with the derivative form of the hypothesis: stable below the critical delay")
        }
        Admissibility::CaseII if triangle > 0.0 => Some("b: unstable for every delay"),
        Admissibility::CaseII => Some("b: unstable for small delays"),
        _ => None,
    };
    match case {
        Some(text) => v.notes.push(format!("proposition case {text}")),
        None => v.notes.push("no proposition case applies".into()),
    }
    if matches!(class, Admissibility::CaseI) && triangle > 0.0 && primed != unprimed {
        v.notes.push("case c hypothesis differs between the g_phi and g_phi' readings".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GrowthFunction, LawEnforcement};

    fn fig(eta: f64) -> ModelParams {
        ModelParams::new(
            1.0,
            0.9,
            0.4,
            eta,
            1.4,
            2.0,
            GrowthFunction::logistic(1.0, 1.0).unwrap(),
            LawEnforcement::constant(0.51).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn trivial_is_always_unstable() {
        let a = analyze(EquilibriumId::Trivial, &fig(0.1)).unwrap();
        assert_eq!(a.verdict.regime, Regime::UnstableAllTau);
        assert!(a.crossings.is_empty());
    }

    #[test]
    fn criminal_free_flip() {
        let stable = analyze(EquilibriumId::CriminalFree, &fig(0.4)).unwrap();
        assert_eq!(stable.verdict.regime, Regime::StableAllTau);
        assert!((criminal_free_threshold(&fig(0.4)).unwrap() + 0.329).abs() < 1e-12);
        let unstable = analyze(EquilibriumId::CriminalFree, &fig(0.1)).unwrap();
        assert_eq!(unstable.verdict.regime, Regime::UnstableAllTau);
        assert_eq!(unstable.class.label, RootLabel::OneTransversalRoot);
        assert!(!unstable.verdict.notes.iter().any(|n| n.contains("predicts")));
    }

    #[test]
    fn fig3_coexistence_is_stable() {
        let a = analyze(EquilibriumId::Coexistence, &fig(0.1)).unwrap();
        assert_eq!(a.class.label, RootLabel::NoPositiveRoots);
        assert_eq!(a.verdict.regime, Regime::StableAllTau);
        assert!(a.verdict.notes.iter().any(|n| n.contains("proposition case a")));
    }

    #[test]
    fn regime_agrees_with_root_counts() {
        for eta in [0.1, 0.4] {
            let a = analyze(EquilibriumId::CriminalFree, &fig(eta)).unwrap();
            for tau in [0.0, 2.0] {
                let n = unstable_root_count(&a.coefficients, tau).unwrap();
                assert_eq!(n == 0, a.verdict.regime.stable_at(tau).unwrap(), "eta={eta} tau={tau}");
            }
        }
    }
}
