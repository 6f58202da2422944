use serde::{Deserialize, Serialize};

use super::classify::{classify_F, RootLabel};
use super::crossing::CrossingList;
use super::linear::CharacteristicCoefficients;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumId {
    Trivial,
    CriminalFree,
    Coexistence,
}

impl EquilibriumId {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumId::Trivial => "trivial",
            EquilibriumId::CriminalFree => "criminal_free",
            EquilibriumId::Coexistence => "coexistence",
        }
    }
}

/// Stability as a function of the delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "tau")]
pub enum Regime {
    StableAllTau,
    UnstableAllTau,
    /// First crossing delays at which stability may switch, ascending.
    SwitchesAt(Vec<f64>),
    /// Stable on `[0, tau_hat)`, unstable beyond.
    StableUntil(f64),
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::StableAllTau => "StableAllTau",
            Regime::UnstableAllTau => "UnstableAllTau",
            Regime::SwitchesAt(_) => "SwitchesAt",
            Regime::StableUntil(_) => "StableUntil",
        }
    }

    /// Linear stability at a given delay, when the regime determines it.
    pub fn stable_at(&self, tau: f64) -> Option<bool> {
        match self {
            Regime::StableAllTau => Some(true),
            Regime::UnstableAllTau => Some(false),
            Regime::StableUntil(t) if tau < *t => Some(true),
            Regime::StableUntil(t) if tau > *t => Some(false),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub equilibrium: EquilibriumId,
    pub tau_zero_stable: bool,
    pub regime: Regime,
    pub notes: Vec<String>,
}

/// Stability at `tau = 0` from `lambda^2 - (nu1 + sig2) lambda + (nu2 + sig1)`.
pub fn tau_zero_stable(c: &CharacteristicCoefficients) -> bool {
    c.nu2 + c.sig1 > 0.0 && c.nu1 + c.sig2 < 0.0
}

/// Combines the delay-free stability with the root class of `F`.
pub fn verdict(eq: EquilibriumId, coeffs: &CharacteristicCoefficients, crossings: &CrossingList) -> StabilityVerdict {
    let class = classify_F(coeffs);
    let stable0 = tau_zero_stable(coeffs);
    let mut notes = Vec::new();
    if class.boundary {
        notes.push(format!(
            "inconclusive near threshold: (h, F(0)) = ({:e}, {:e}) is within the classification band",
            coeffs.h, coeffs.f0
        ));
    }
    let trace0 = coeffs.nu1 + coeffs.sig2;
    let det0 = coeffs.nu2 + coeffs.sig1;
    if det0.abs() <= 1e-10 || (det0 > 0.0 && trace0.abs() <= 1e-10) {
        notes.push("inconclusive near threshold: delay-free roots lie close to the imaginary axis".into());
    }
    let first = |k: u8| crossings.get(k).map(|c| c.tauk);
    let regime = match class.label {
        RootLabel::NoPositiveRoots => {
            if stable0 {
                Regime::StableAllTau
            } else {
                Regime::UnstableAllTau
            }
        }
        RootLabel::OneTransversalRoot | RootLabel::OneRootF0Zero => match (stable0, first(2)) {
            (true, Some(t)) => Regime::StableUntil(t),
            (true, None) => {
                notes.push("crossing delay unavailable".into());
                Regime::StableAllTau
            }
            (false, _) => Regime::UnstableAllTau,
        },
        RootLabel::TwoRoots => {
            let mut taus: Vec<f64> = crossings.entries.iter().map(|c| c.tauk).collect();
            taus.sort_by(f64::total_cmp);
            notes.push(
                "two crossing frequencies: stability may switch finitely many times; \
                 only first crossings are listed"
                    .into(),
            );
            Regime::SwitchesAt(taus)
        }
        RootLabel::OneTangentRoot => {
            notes.push("tangential imaginary root: roots touch the axis without crossing".into());
            if stable0 {
                Regime::StableAllTau
            } else {
                Regime::UnstableAllTau
            }
        }
    };
    if eq == EquilibriumId::Trivial && regime != Regime::UnstableAllTau {
        notes.push("trivial equilibrium expected to be a saddle for every delay".into());
    }
    StabilityVerdict {
        equilibrium: eq,
        tau_zero_stable: stable0,
        regime,
        notes,
    }
}
