use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, ModelParams, StateVec};

/// Row-major 2x2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Matrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Matrix2 {
    pub const ZERO: Matrix2 = Matrix2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Matrix2 { a11, a12, a21, a22 }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn max_abs_diff(&self, other: &Matrix2) -> f64 {
        [
            self.a11 - other.a11,
            self.a12 - other.a12,
            self.a21 - other.a21,
            self.a22 - other.a22,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// Jacobians `A = D_x H` and `B = D_{x_tau} H` of the autonomous right-hand
/// side at an equilibrium. The first row of `B` is zero.
pub fn linearize(eq: StateVec, p: &ModelParams) -> Result<(Matrix2, Matrix2)> {
    let le = p.frozen_enforcement()?;
    let residual = model::rhs(0.0, eq, eq, p)?.norm_inf();
    if residual > 1e-8 * (1.0 + eq.norm_inf()) {
        return Err(Error::NotAnEquilibrium { residual });
    }
    let StateVec { n, c } = eq;
    let f = p.growth.value(n);
    let df = p.growth.derivative(n);
    let g_phi = model::holling(p.phi, p.nu, n)?;
    let dg_phi = model::holling_derivative(p.phi, p.nu, n)?;
    let s = p.nu + n;
    let a = Matrix2::new(
        f + c * (p.sigma - g_phi) + n * (df - c * dg_phi),
        n * (p.sigma - g_phi),
        0.0,
        -(p.eta + le),
    );
    let b = Matrix2::new(0.0, 0.0, p.gamma * p.nu * c / (s * s), p.gamma * n / s);
    Ok((a, b))
}

/// Coefficients of `P(lambda, tau) = lambda^2 - nu1 lambda + nu2 + (sig1 - sig2 lambda) e^{-lambda tau}`
/// and of `F(s) = |p(is)|^2 - |q(is)|^2 = s^4 + h s^2 + f0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicCoefficients {
    pub nu1: f64,
    pub nu2: f64,
    pub sig1: f64,
    pub sig2: f64,
    pub h: f64,
    pub f0: f64,
}

impl CharacteristicCoefficients {
    pub fn new(nu1: f64, nu2: f64, sig1: f64, sig2: f64) -> Self {
        CharacteristicCoefficients {
            nu1,
            nu2,
            sig1,
            sig2,
            h: nu1 * nu1 - 2.0 * nu2 - sig2 * sig2,
            f0: nu2 * nu2 - sig1 * sig1,
        }
    }

    /// `p(lambda) = lambda^2 - nu1 lambda + nu2`.
    pub fn p(&self, l: Complex64) -> Complex64 {
        l * l - self.nu1 * l + self.nu2
    }

    /// `q(lambda) = sig1 - sig2 lambda`.
    pub fn q(&self, l: Complex64) -> Complex64 {
        Complex64::new(self.sig1, 0.0) - self.sig2 * l
    }

    pub fn p_eval(&self, l: Complex64, tau: f64) -> Complex64 {
        self.p(l) + self.q(l) * (-l * tau).exp()
    }

    /// `dP/dlambda`.
    pub fn p_derivative(&self, l: Complex64, tau: f64) -> Complex64 {
        let e = (-l * tau).exp();
        2.0 * l - self.nu1 + (-self.sig2 - tau * self.q(l)) * e
    }

    /// `dP/dtau`.
    pub fn p_tau_derivative(&self, l: Complex64, tau: f64) -> Complex64 {
        -l * self.q(l) * (-l * tau).exp()
    }

    pub fn f_poly(&self, s: f64) -> f64 {
        let s2 = s * s;
        s2 * s2 + self.h * s2 + self.f0
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        2.0 * s * (2.0 * s * s + self.h)
    }

    /// Roots of `lambda^2 - (nu1 + sig2) lambda + (nu2 + sig1)`, the delay-free
    /// characteristic polynomial.
    pub fn tau_zero_roots(&self) -> [Complex64; 2] {
        let b = self.nu1 + self.sig2;
        let c = self.nu2 + self.sig1;
        let disc = Complex64::new(b * b - 4.0 * c, 0.0).sqrt();
        [(b + disc) * 0.5, (b - disc) * 0.5]
    }
}

/// Coefficients from the linearization; rejects a non-singular `B`.
pub fn characteristic_coeffs(a: &Matrix2, b: &Matrix2) -> Result<CharacteristicCoefficients> {
    let det = b.det();
    if det.abs() > 1e-12 {
        return Err(Error::NonSingularDelayMatrix { det });
    }
    let sig1 = (a.a11 * b.a22 - a.a21 * b.a12) + (b.a11 * a.a22 - b.a21 * a.a12);
    Ok(CharacteristicCoefficients::new(a.trace(), a.det(), sig1, b.trace()))
}
