#![allow(dead_code)]

use crimedde::model::{GrowthFunction, LawEnforcement, ModelParams};

/// Base parameters of the autonomous figures with a chosen mortality.
pub fn autonomous(eta: f64, tau: f64) -> ModelParams {
    ModelParams::new(
        1.0,
        0.9,
        0.4,
        eta,
        1.4,
        tau,
        GrowthFunction::logistic(1.0, 1.0).unwrap(),
        LawEnforcement::constant(0.51).unwrap(),
    )
    .unwrap()
}

/// Seasonal enforcement `0.2 sin(t / 4) + 0.5`.
pub fn seasonal(tau: f64) -> ModelParams {
    ModelParams::new(
        1.0,
        0.9,
        0.4,
        0.1,
        1.4,
        tau,
        GrowthFunction::logistic(1.0, 1.0).unwrap(),
        LawEnforcement::sinusoid(0.2, 4.0, 0.5).unwrap(),
    )
    .unwrap()
}
