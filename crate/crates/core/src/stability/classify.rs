use serde::Serialize;

use super::linear::CharacteristicCoefficients;

/// Width of the band around `F(0) = 0` and `F(0) = h^2 / 4` inside
/// which a classification is flagged as a boundary case.
pub const EPS_CLS: f64 = 1e-10;

/// Positive real roots of `F(s) = s^4 + h s^2 + F(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootLabel {
    NoPositiveRoots,
    /// `F(0) = h^2 / 4`, `h < 0`: a double root at `sqrt(-h / 2)`.
    OneTangentRoot,
    /// `0 < F(0) < h^2 / 4`, `h < 0`: `s1 < s2` with `F'(s1) < 0 < F'(s2)`.
    TwoRoots,
    /// `F(0) < 0`: a single root `s2` with `F'(s2) > 0`.
    OneTransversalRoot,
    /// `F(0) = 0`, `h < 0`: `s* = sqrt(-h)`.
    OneRootF0Zero,
}

impl RootLabel {
    pub fn positive_root_count(self) -> usize {
        match self {
            RootLabel::NoPositiveRoots => 0,
            RootLabel::TwoRoots => 2,
            _ => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RootLabel::NoPositiveRoots => "NoPositiveRoots",
            RootLabel::OneTangentRoot => "OneTangentRoot",
            RootLabel::TwoRoots => "TwoRoots",
            RootLabel::OneTransversalRoot => "OneTransversalRoot",
            RootLabel::OneRootF0Zero => "OneRootF0Zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootClass {
    pub label: RootLabel,
    /// Positive roots in increasing order.
    pub roots: Vec<f64>,
    /// `sgn F'` at each root: -1, 0 or +1.
    pub f_prime_signs: Vec<i8>,
    /// Whether `(h, F(0))` lies within [`EPS_CLS`] of a region boundary.
    pub boundary: bool,
}

#[allow(non_snake_case)]
pub fn classify_F(coeffs: &CharacteristicCoefficients) -> RootClass {
    classify_hf(coeffs.h, coeffs.f0)
}

/// The decision diagram in the `(h, F(0))` plane.
pub fn classify_hf(h: f64, f0: f64) -> RootClass {
    let disc = h * h - 4.0 * f0;
    let boundary = f0.abs() <= EPS_CLS || (h < EPS_CLS && (0.25 * h * h - f0).abs() <= EPS_CLS);
    let (label, roots, signs) = if f0 < 0.0 {
        // larger root of x^2 + h x + f0, written without cancellation
        let sq = disc.sqrt();
        let x2 = if h <= 0.0 { 0.5 * (-h + sq) } else { -2.0 * f0 / (h + sq) };
        (RootLabel::OneTransversalRoot, vec![x2.sqrt()], vec![1])
    } else if f0 == 0.0 {
        if h < 0.0 {
            (RootLabel::OneRootF0Zero, vec![(-h).sqrt()], vec![1])
        } else {
            (RootLabel::NoPositiveRoots, vec![], vec![])
        }
    } else if h >= 0.0 || disc < 0.0 {
        (RootLabel::NoPositiveRoots, vec![], vec![])
    } else if disc == 0.0 {
        (RootLabel::OneTangentRoot, vec![(-0.5 * h).sqrt()], vec![0])
    } else {
        let x2 = 0.5 * (-h + disc.sqrt());
        let x1 = f0 / x2;
        (RootLabel::TwoRoots, vec![x1.sqrt(), x2.sqrt()], vec![-1, 1])
    };
    RootClass {
        label,
        roots,
        f_prime_signs: signs,
        boundary,
    }
}
