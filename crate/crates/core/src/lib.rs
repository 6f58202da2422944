//! Simulation and analysis of a delayed criminal/non-criminal interaction
//! model with saturating (Holling type II) recruitment and law enforcement.
//!
//! * [`model`]: parameters, the delayed right-hand side, exposed population.
//! * [`integrator`]: fixed-step method-of-steps integration with dense output.
//! * [`equilibria`]: trivial, criminal-free and coexistence equilibria.
//! * [`stability`]: linearization, characteristic quasi-polynomial, crossing
//!   delays and stability verdicts.
//! * [`periodic`]: hypotheses for periodic solutions under periodic forcing and
//!   a numerical periodic-orbit finder.
//!
//! ```
//! use crimedde::prelude::*;
//!
//! let p = ModelParams::new(
//!     1.0, 0.9, 0.4, 0.1, 1.4, 2.0,
//!     GrowthFunction::logistic(1.0, 1.0)?,
//!     LawEnforcement::constant(0.51)?,
//! )?;
//! let eq = equilibria::equilibria(&p)?;
//! let point = eq.coexistence.point.unwrap();
//! assert!((point.n - 0.6949).abs() < 1e-3 && (point.c - 1.344).abs() < 1e-3);
//! # Ok::<(), crimedde::Error>(())
//! ```

pub mod equilibria;
mod error;
pub mod integrator;
pub mod model;
pub mod periodic;
mod quadrature;
pub mod stability;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::equilibria::{self, Admissibility, EquilibriumSet};
    pub use crate::integrator::{integrate, IntegratorConfig, Trajectory};
    pub use crate::model::{GrowthFunction, HistoryFunction, LawEnforcement, ModelParams, StateVec};
    pub use crate::periodic::{self, ConditionLedger, PeriodicOptions};
    pub use crate::stability::{self, EquilibriumId, RootClass, Regime};
    pub use crate::{Error, Result};
}

// The guide's code listings are compiled and run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../book/src/equilibria.md")]
    mod equilibria {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/periodic.md")]
    mod periodic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
