use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::classify::{classify_F, RootLabel};
use super::linear::CharacteristicCoefficients;
use crate::error::{Error, Result};

const ACCEPT: f64 = 1e-9;
const FAULT: f64 = 1e-6;

/// A purely imaginary root `i lambda2k` of `P(., tauk)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    /// 1 for the smaller positive root of `F`, 2 for the larger one.
    pub k: u8,
    pub lambda2k: f64,
    /// Smallest nonnegative delay at which the root sits on the axis.
    pub tauk: f64,
    /// `sgn F'(lambda2k)`: +1 roots cross into the right half-plane as `tau`
    /// increases, -1 cross back, 0 touch.
    pub direction: i8,
    /// `|P(i lambda2k, tauk)|`.
    pub residual: f64,
}

impl Crossing {
    /// The first `count` delays `tauk + 2 pi j / lambda2k` of this branch.
    pub fn delays(&self, count: usize) -> Vec<f64> {
        (0..count)
            .map(|j| self.tauk + 2.0 * PI * j as f64 / self.lambda2k)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CrossingList {
    pub entries: Vec<Crossing>,
}

impl CrossingList {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: u8) -> Option<&Crossing> {
        self.entries.iter().find(|c| c.k == k)
    }
}

/// `sin` and `cos` of `omega tau` on the imaginary axis.
fn phase(c: &CharacteristicCoefficients, w: f64) -> Option<(f64, f64)> {
    let den = (c.sig2 * w).powi(2) + c.sig1 * c.sig1;
    if den == 0.0 {
        return None;
    }
    let sin = -w * (c.sig2 * w * w + c.nu1 * c.sig1 - c.nu2 * c.sig2) / den;
    let cos = ((c.sig1 - c.nu1 * c.sig2) * w * w - c.sig1 * c.nu2) / den;
    Some((sin, cos))
}

/// Newton on `P(i w, tau) = 0` in the two real unknowns `(w, tau)`.
fn polish(c: &CharacteristicCoefficients, mut w: f64, mut tau: f64) -> (f64, f64, f64) {
    let res = |w: f64, tau: f64| c.p_eval(Complex64::new(0.0, w), tau).norm();
    let mut r = res(w, tau);
    for _ in 0..50 {
        if r <= 1e-15 {
            break;
        }
        let l = Complex64::new(0.0, w);
        let g = c.p_eval(l, tau);
        let gw = Complex64::i() * c.p_derivative(l, tau);
        let gt = c.p_tau_derivative(l, tau);
        let det = gw.re * gt.im - gt.re * gw.im;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dw = (g.re * gt.im - gt.re * g.im) / det;
        let dt = (gw.re * g.im - g.re * gw.im) / det;
        let (nw, nt) = (w - dw, tau - dt);
        let nr = res(nw, nt);
        if !(nr < r) {
            break;
        }
        w = nw;
        tau = nt;
        r = nr;
    }
    (w, tau, r)
}

/// First crossing delays for every positive root of `F`.
pub fn crossings(coeffs: &CharacteristicCoefficients) -> Result<CrossingList> {
    let class = classify_F(coeffs);
    if class.label == RootLabel::NoPositiveRoots {
        return Ok(CrossingList::default());
    }
    let ks: Vec<u8> = match class.label {
        RootLabel::TwoRoots => vec![1, 2],
        RootLabel::OneTangentRoot => vec![1],
        _ => vec![2],
    };
    let mut entries = Vec::new();
    for ((&w, &sign), k) in class.roots.iter().zip(&class.f_prime_signs).zip(ks) {
        let Some((sin, cos)) = phase(coeffs, w) else {
            return Err(Error::NotApplicable(
                "q vanishes identically; imaginary roots do not depend on the delay".into(),
            ));
        };
        let theta = sin.atan2(cos).rem_euclid(2.0 * PI);
        let mut tau = theta / w;
        let mut lambda = w;
        let mut residual = coeffs.p_eval(Complex64::new(0.0, w), tau).norm();
        if residual > ACCEPT {
            let (pw, pt, pr) = polish(coeffs, w, tau);
            if pr < residual {
                lambda = pw;
                tau = pt;
                residual = pr;
            }
        }
        if residual > FAULT || tau < -1e-12 {
            return Err(Error::CrossingInconsistency { residual });
        }
        entries.push(Crossing {
            k,
            lambda2k: lambda,
            tauk: tau.max(0.0),
            direction: sign,
            residual,
        });
    }
    Ok(CrossingList { entries })
}
