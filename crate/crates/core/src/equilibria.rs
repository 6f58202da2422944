//! Equilibria of the autonomous system (constant law enforcement).
//!
//! * trivial `(0, 0)`;
//! * criminal-free `(N_dag, 0)` with `f(N_dag) = 0`;
//! * coexistence `(N_hat, C_hat)` with
//!   `N_hat = nu e / (gamma - e)` and `C_hat = nu gamma f(N_hat) / (phi (gamma - e) - sigma gamma nu)`,
//!   where `e = eta + l_e`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GrowthFunction, ModelParams, StateVec};

const ROOT_TOL: f64 = 1e-12;
const RESONANCE_TOL: f64 = 1e-14;
const BOUNDARY_TOL: f64 = 1e-12;

/// Admissibility of the coexistence equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "case", content = "reason")]
pub enum Admissibility {
    /// `N_hat < N_dag` and `phi / gamma > sigma nu / (gamma - e)`.
    CaseI,
    /// `N_hat > N_dag` and `phi / gamma < sigma nu / (gamma - e)`.
    CaseII,
    Inadmissible(String),
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        !matches!(self, Admissibility::Inadmissible(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoexistenceOutcome {
    /// Present whenever the formulas are defined, even if inadmissible.
    pub point: Option<StateVec>,
    pub class: Admissibility,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSet {
    pub trivial: StateVec,
    pub criminal_free: StateVec,
    pub coexistence: CoexistenceOutcome,
}

/// The unique positive zero of the growth function.
///
/// Exact for logistic growth; otherwise bracketed by doubling, bisected and
/// polished with Newton steps until `|f| <= 1e-12`.
pub fn criminal_free_level(growth: &GrowthFunction) -> Result<f64> {
    if let GrowthFunction::Logistic { m, .. } = growth {
        return Ok(*m);
    }
    let f = |n: f64| growth.value(n);
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 1100 || !hi.is_finite() {
            return Err(Error::InvalidGrowth("no sign change found for f".into()));
        }
    }
    if !(f(lo) > 0.0) {
        return Err(Error::InvalidGrowth("f(0) must be positive".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let fx = f(x);
        if fx.abs() <= ROOT_TOL {
            break;
        }
        let d = growth.derivative(x);
        let next = x - fx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            break;
        }
        x = next;
    }
    let fx = f(x);
    if fx.abs() > ROOT_TOL {
        return Err(Error::InvalidGrowth(format!(
            "zero of f not resolved: |f({x})| = {:e}",
            fx.abs()
        )));
    }
    Ok(x)
}

/// Coexistence equilibrium and its case label. Requires constant enforcement.
pub fn coexistence(p: &ModelParams) -> Result<CoexistenceOutcome> {
    let le = p.frozen_enforcement()?;
    let e = p.eta + le;
    let gap = p.gamma - e;
    if gap <= 0.0 {
        return Ok(CoexistenceOutcome {
            point: None,
            class: Admissibility::Inadmissible("gamma <= eta + l_e".into()),
        });
    }
    let n_dag = criminal_free_level(&p.growth)?;
    let n_hat = p.nu * e / gap;
    let den = p.phi * gap - p.sigma * p.gamma * p.nu;
    if den.abs() <= RESONANCE_TOL {
        return Ok(CoexistenceOutcome {
            point: None,
            class: Admissibility::Inadmissible("sigma-resonance".into()),
        });
    }
    let c_hat = p.nu * p.gamma * p.growth.value(n_hat) / den;
    let point = Some(StateVec::new(n_hat, c_hat));

    let level = n_dag * gap - p.nu * e;
    let ratio = p.phi / p.gamma - p.sigma * p.nu / gap;
    let class = if level.abs() <= BOUNDARY_TOL {
        Admissibility::Inadmissible("boundary: N_hat = N_dag".into())
    } else if ratio.abs() <= BOUNDARY_TOL {
        Admissibility::Inadmissible("boundary: phi/gamma = sigma nu/(gamma - e)".into())
    } else if !(c_hat > 0.0) {
        Admissibility::Inadmissible(format!("C_hat = {c_hat:e} is not positive"))
    } else if level > 0.0 && ratio > 0.0 {
        Admissibility::CaseI
    } else if level < 0.0 && ratio < 0.0 {
        Admissibility::CaseII
    } else {
        Admissibility::Inadmissible("mixed inequalities".into())
    };
    Ok(CoexistenceOutcome { point, class })
}

pub fn equilibria(p: &ModelParams) -> Result<EquilibriumSet> {
    let n_dag = criminal_free_level(&p.growth)?;
    Ok(EquilibriumSet {
        trivial: StateVec::ZERO,
        criminal_free: StateVec::new(n_dag, 0.0),
        coexistence: coexistence(p)?,
    })
}

/// Closed form of `C_hat` for logistic growth `f = mu (m - N)`.
pub fn logistic_coexistence_level(p: &ModelParams) -> Result<Option<f64>> {
    let GrowthFunction::Logistic { mu, m } = p.growth else {
        return Ok(None);
    };
    let e = p.eta + p.frozen_enforcement()?;
    let gap = p.gamma - e;
    let den = (p.phi * gap - p.sigma * p.gamma * p.nu) * gap;
    if gap <= 0.0 || den == 0.0 {
        return Ok(None);
    }
    Ok(Some(mu * p.gamma * p.nu * (m * p.gamma - e * (m + p.nu)) / den))
}
