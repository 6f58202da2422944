//! Small fixed-rule quadratures shared by the diagnostics.

const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

/// Four-point Gauss-Legendre on `[a, b]`; exact for polynomials of degree 7.
pub(crate) fn gauss4<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Composite Gauss-Legendre over consecutive breakpoints (assumed sorted).
pub(crate) fn composite<F: FnMut(f64) -> f64>(mut f: F, breakpoints: &[f64]) -> f64 {
    breakpoints
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gauss4(&mut f, w[0], w[1]))
        .sum()
}

/// Mean of a `period`-periodic function by the trapezoid rule, which converges
/// geometrically for smooth periodic integrands.
pub(crate) fn periodic_mean<F: Fn(f64) -> f64>(f: F, period: f64, samples: usize) -> f64 {
    let h = period / samples as f64;
    (0..samples).map(|k| f(k as f64 * h)).sum::<f64>() / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_is_exact_for_degree_seven() {
        let f = |x: f64| x.powi(7) - 3.0 * x.powi(4) + 2.0;
        let exact = |x: f64| x.powi(8) / 8.0 - 3.0 * x.powi(5) / 5.0 + 2.0 * x;
        let got = gauss4(f, -0.3, 1.7);
        assert!((got - (exact(1.7) - exact(-0.3))).abs() < 1e-13);
    }

    #[test]
    fn periodic_mean_of_shifted_sine() {
        let m = periodic_mean(|t| 0.2 * (t / 4.0).sin() + 0.5, 8.0 * std::f64::consts::PI, 256);
        assert!((m - 0.5).abs() < 1e-15);
    }
}
