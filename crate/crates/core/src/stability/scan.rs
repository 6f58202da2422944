//! Brute-force location of characteristic roots by the argument principle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::linear::CharacteristicCoefficients;
use crate::error::{Error, Result};

const MAX_RETRIES: usize = 5;
const CELL_DIAMETER: f64 = 1e-3;
const SPLIT_SHIFTS: [f64; 6] = [0.0, 0.0173, -0.0291, 0.0419, -0.0537, 0.0613];

/// Closed rectangle `[re_min, re_max] x [im_min, im_max]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl ScanBox {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        ScanBox {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn grow(&self, d: f64) -> ScanBox {
        ScanBox::new(self.re_min - d, self.re_max + d, self.im_min - d, self.im_max + d)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

struct Scanner<'a> {
    c: &'a CharacteristicCoefficients,
    tau: f64,
}

impl Scanner<'_> {
    fn eval(&self, z: Complex64) -> Option<Complex64> {
        let v = self.c.p_eval(z, self.tau);
        let tiny = 1e-13 * (1.0 + z.norm_sqr());
        (v.is_finite() && v.norm() > tiny).then_some(v)
    }

    /// Phase change of `P` along the segment, refined until each increment is
    /// below `pi / 4`.
    fn segment(&self, a: Complex64, b: Complex64, pa: Complex64, pb: Complex64, depth: u32) -> Option<f64> {
        let d = (pb / pa).arg();
        if d.abs() < PI / 4.0 {
            return Some(d);
        }
        if depth > 48 {
            return None;
        }
        let m = (a + b) * 0.5;
        let pm = self.eval(m)?;
        Some(self.segment(a, m, pa, pm, depth + 1)? + self.segment(m, b, pm, pb, depth + 1)?)
    }

    /// Number of zeros inside the box, or `None` if the contour meets a root.
    fn winding(&self, bx: &ScanBox) -> Option<i64> {
        let corners = bx.corners();
        let mut total = 0.0;
        for i in 0..4 {
            let (a, b) = (corners[i], corners[(i + 1) % 4]);
            // e^{-lambda tau} turns by tau per unit of Im(lambda)
            let n = 16.max(((b - a).norm() * (1.0 + self.tau) * 8.0 / PI).ceil() as usize);
            let mut za = a;
            let mut pa = self.eval(za)?;
            for j in 1..=n {
                let zb = a + (b - a) * (j as f64 / n as f64);
                let pb = self.eval(zb)?;
                total += self.segment(za, zb, pa, pb, 0)?;
                za = zb;
                pa = pb;
            }
        }
        let w = total / (2.0 * PI);
        let r = w.round();
        ((w - r).abs() < 0.1).then_some(r as i64)
    }

    fn newton(&self, mut z: Complex64) -> Option<Complex64> {
        for _ in 0..100 {
            let v = self.c.p_eval(z, self.tau);
            let d = self.c.p_derivative(z, self.tau);
            if d.norm() == 0.0 {
                return None;
            }
            let step = v / d;
            z -= step;
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        z.is_finite().then_some(z)
    }

    fn search(&self, bx: ScanBox, count: i64, out: &mut Vec<Complex64>) -> Result<()> {
        if count <= 0 {
            return Ok(());
        }
        if bx.diameter() <= CELL_DIAMETER {
            if let Some(z) = self.newton(bx.center()) {
                if bx.grow(CELL_DIAMETER).contains(z) {
                    out.push(z);
                }
            }
            return Ok(());
        }
        for shift in SPLIT_SHIFTS {
            let t = 0.5 + shift;
            let (lo, hi) = if bx.width() >= bx.height() {
                let x = bx.re_min + t * bx.width();
                (
                    ScanBox::new(bx.re_min, x, bx.im_min, bx.im_max),
                    ScanBox::new(x, bx.re_max, bx.im_min, bx.im_max),
                )
            } else {
                let y = bx.im_min + t * bx.height();
                (
                    ScanBox::new(bx.re_min, bx.re_max, bx.im_min, y),
                    ScanBox::new(bx.re_min, bx.re_max, y, bx.im_max),
                )
            };
            if let (Some(a), Some(b)) = (self.winding(&lo), self.winding(&hi)) {
                if a + b == count {
                    self.search(lo, a, out)?;
                    return self.search(hi, b, out);
                }
            }
        }
        Err(Error::ContourHitsRoot { retries: MAX_RETRIES })
    }
}

/// Perturbs the box outwards until its contour avoids every root.
fn settle(s: &Scanner<'_>, bx: &ScanBox) -> Result<(ScanBox, i64)> {
    let scale = 1e-6 * bx.diameter().max(1e-3);
    for attempt in 0..=MAX_RETRIES {
        let b = bx.grow(scale * attempt as f64 * 1.37);
        if let Some(w) = s.winding(&b) {
            return Ok((b, w));
        }
    }
    Err(Error::ContourHitsRoot { retries: MAX_RETRIES })
}

/// Number of zeros of `P(., tau)` inside the box, counted with multiplicity.
pub fn count_roots(coeffs: &CharacteristicCoefficients, tau: f64, bx: &ScanBox) -> Result<usize> {
    let s = Scanner { c: coeffs, tau };
    let (_, w) = settle(&s, bx)?;
    Ok(w.max(0) as usize)
}

/// Distinct zeros of `P(., tau)` in the box, sorted by real then imaginary part.
pub fn root_scan(coeffs: &CharacteristicCoefficients, tau: f64, bx: &ScanBox) -> Result<Vec<Complex64>> {
    let s = Scanner { c: coeffs, tau };
    let (b, w) = settle(&s, bx)?;
    let mut found = Vec::new();
    s.search(b, w, &mut found)?;
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut roots: Vec<Complex64> = Vec::with_capacity(found.len());
    for z in found {
        if !roots.iter().any(|r| (r - z).norm() <= 1e-8 * (1.0 + z.norm())) {
            roots.push(z);
        }
    }
    Ok(roots)
}

/// Radius containing every root with `Re lambda >= 0`: from
/// `|lambda|^2 <= (|nu1| + |sig2|) |lambda| + |nu2| + |sig1|`.
pub fn rhp_bound(c: &CharacteristicCoefficients) -> f64 {
    let a = c.nu1.abs() + c.sig2.abs();
    let b = c.nu2.abs() + c.sig1.abs();
    0.5 * (a + (a * a + 4.0 * b).sqrt())
}

/// Number of roots with `Re lambda > 1e-7`, counted with multiplicity.
pub fn unstable_root_count(coeffs: &CharacteristicCoefficients, tau: f64) -> Result<usize> {
    let r = rhp_bound(coeffs) + 1.0;
    count_roots(coeffs, tau, &ScanBox::new(1e-7, r, -r, r))
}
